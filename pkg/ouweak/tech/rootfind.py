'''
Roots of monotone scalar equations.
'''

import math

import numpy as np

from scipy import optimize

from ..exceptions import NoRoot


XTOL = 1e-12
MAX_EXPANSIONS = 200


def solve_increasing(func, target, start=0.0, step=1.0, xtol=XTOL):
    '''
        Solve func(x) = target for a nondecreasing func on [start, inf).

        The bracket is grown geometrically from `start`, then bisected.
    '''
    def shifted(x):
        return func(x) - target

    low = start
    low_value = shifted(low)
    if low_value == 0:
        return low
    if low_value > 0:
        raise NoRoot(f'no root above {start}: value at start exceeds target {target}')
    high = start + step
    for _ in range(MAX_EXPANSIONS):
        high_value = shifted(high)
        if math.isnan(high_value):
            break
        if high_value >= 0:
            return optimize.bisect(shifted, low, high, xtol=xtol, maxiter=200)
        low, step = high, step * 2
        high = low + step
    raise NoRoot(f'no root found for target {target}')


def solve_decreasing(func, target, start=0.0, step=1.0, xtol=XTOL):
    '''
        Solve func(x) = target for a nonincreasing func on [start, inf).
    '''
    return solve_increasing(lambda x: -func(x), -target, start, step, xtol)


def bisect_decreasing(func, target, low, high, xtol=XTOL, max_iter=MAX_EXPANSIONS):
    '''
        Elementwise root of func(x) = target for nonincreasing func,
        given brackets low <= root <= high (arrays of equal shape).

        func maps an array of x to an array of values, one per element.
    '''
    low = np.array(low, dtype=float)
    high = np.array(high, dtype=float)
    for _ in range(max_iter):
        width = high - low
        if np.all(width <= xtol * (1 + np.abs(low))):
            break
        middle = low + width / 2
        above = func(middle) > target
        low = np.where(above, middle, low)
        high = np.where(above, high, middle)
    return low + (high - low) / 2
