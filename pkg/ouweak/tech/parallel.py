from concurrent.futures import ThreadPoolExecutor


def map_tasks(func, tasks, threads=1):
    '''
        [func(task) for task in tasks], optionally on a thread pool.

        Results are returned in task order, whatever the thread count.
    '''
    tasks = list(tasks)
    if threads is None or threads <= 1 or len(tasks) <= 1:
        return [func(task) for task in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, tasks))
