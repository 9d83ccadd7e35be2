'''
Plain text model files.

One key per line, the key followed by whitespace separated numbers,
matrices in row-major order:

    # comments and blank lines are ignored
    n 2
    Q 1 0 0 1
    B -1 2 -2 -1

The diagonal case can be written as `lambdas 1 2` instead of Q and B.
'''

from ..exceptions import ModelFileError


KEYS = ('n', 'Q', 'B', 'lambdas')


def parse(text):
    '''
        Parse model file content into a dict of key -> list of floats.
    '''
    content = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        key, *values = line.split()
        if key not in KEYS:
            raise ModelFileError(f'line {lineno}: unknown key {key!r}')
        if key in content:
            raise ModelFileError(f'line {lineno}: duplicate key {key!r}')
        if not values:
            raise ModelFileError(f'line {lineno}: no value for {key!r}')
        try:
            content[key] = [float(value) for value in values]
        except ValueError as e:
            raise ModelFileError(f'line {lineno}: {e}')
        content[key + ':line'] = lineno
    _check(content)
    return content


def _check(content):
    if 'lambdas' in content:
        if 'Q' in content or 'B' in content:
            raise ModelFileError(
                f"line {content['lambdas:line']}: 'lambdas' excludes 'Q' and 'B'")
        if 'n' in content and content['n'] != [len(content['lambdas'])]:
            raise ModelFileError(f"line {content['n:line']}: n does not match lambdas")
        return
    for key in ('n', 'Q', 'B'):
        if key not in content:
            raise ModelFileError(f'missing key {key!r}')
    n_values = content['n']
    n = n_values[0]
    if len(n_values) != 1 or n != int(n) or n < 1:
        raise ModelFileError(f"line {content['n:line']}: n must be a positive integer")
    for key in ('Q', 'B'):
        if len(content[key]) != int(n) ** 2:
            raise ModelFileError(
                f"line {content[key + ':line']}: {key} needs {int(n) ** 2} entries")


def _format_row(key, values):
    return ' '.join([key] + [repr(float(v)) for v in values])


def format_matrices(Q, B):
    n = len(Q)
    return '\n'.join([
        f'n {n}',
        _format_row('Q', [v for row in Q for v in row]),
        _format_row('B', [v for row in B for v in row]),
    ]) + '\n'


def format_lambdas(lambdas):
    return _format_row('lambdas', lambdas) + '\n'
