'''
JSON documents holding numpy values: arrays are stored as nested lists,
numpy scalars as plain numbers.
'''

import json

import numpy as np


ReadError = json.JSONDecodeError

JSON_SAVE_OPTIONS = dict(indent=4, sort_keys=True, ensure_ascii=True)


def _plain(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f'Object of type {type(obj).__name__} is not JSON serializable')


def dumps(content, **options):
    '''
    JSON text of `content`; `options` override the file layout (e.g. indent=None).
    '''
    return json.dumps(content, default=_plain, **{**JSON_SAVE_OPTIONS, **options})


def loads(text):
    return json.loads(text)


def file_load(path):
    with open(path) as f:
        return json.load(f)


def file_dump(content, path):
    with open(path, 'w') as f:
        f.write(dumps(content))
        f.write('\n')
