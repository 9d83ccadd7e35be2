'''
Counter based random streams.

Every stream is addressed by a root seed and a key path (e.g. chunk index),
so results do not depend on the order or the number of workers used to
consume the streams.
'''

import numpy as np


SEED_MODULUS = 2 ** 64


def stream(seed, *key):
    '''
        Independent generator for (seed, key...).

        Same (seed, key) always gives the same sequence. Seeds and keys are
        taken modulo 2**64, so negative seeds address streams too.
    '''
    return np.random.default_rng([int(seed) % SEED_MODULUS, *(int(k) % SEED_MODULUS for k in key)])


def chunk_sizes(total, chunk):
    '''
        Split `total` samples into chunks of at most `chunk` samples.
    '''
    if total <= 0:
        return []
    full, rest = divmod(int(total), int(chunk))
    return [chunk] * full + ([rest] if rest else [])
