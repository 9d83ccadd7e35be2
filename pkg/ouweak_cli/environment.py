'''
User specific defaults
'''

import os

from ouweak.exceptions import ConfigFileError
from ouweak.tech import persistence


ENV_OUTPUT_DIR = 'OUWEAK_OUTPUT_DIR'


def _optional_int(value):
    return None if value in (None, '', 'none') else int(value)


def _optional_str(value):
    return None if value in (None, '', 'none') else str(value)


# key -> (converter, default)
KEYS = {
    'output_dir': (_optional_str, None),
    # None: all available cores
    'threads': (_optional_int, None),
    'quadrature_order': (int, 64),
    't_grid_size': (int, 200),
    'zone_M': (float, 2.0),
    'smm_c_factor': (float, 0.125),
}


class Environment:
    """
    I am responsible for storing/retrieving user specific defaults.

    Unknown keys are refused, missing keys read as their built-in default.
    """

    def __init__(self, filename):
        self.filename = filename
        self._content = {}
        if os.path.exists(self.filename):
            self.load()

    @classmethod
    def from_dir(cls, directory):
        return cls(os.path.join(directory, 'env.json'))

    def load(self):
        try:
            content = persistence.file_load(self.filename)
        except persistence.ReadError as e:
            raise ConfigFileError(f'{self.filename} is not valid JSON: {e}')
        if not isinstance(content, dict):
            raise ConfigFileError(f'{self.filename} does not hold a JSON object')
        self._content = content

    def save(self):
        persistence.file_dump(self._content, self.filename)

    def get(self, key):
        convert, default = KEYS[key]
        if key not in self._content:
            return default
        return convert(self._content[key])

    def set(self, key, text):
        '''
        Set `key` from its text form, raises ValueError on bad keys or values.
        '''
        if key not in KEYS:
            raise ValueError(f'unknown key {key!r}, known keys: {", ".join(KEYS)}')
        convert, _ = KEYS[key]
        self._content[key] = convert(text)

    def items(self):
        return [(key, self.get(key)) for key in KEYS]

    @property
    def output_dir(self):
        '''
        Directory for CSV outputs, None for stdout.
        '''
        return os.environ.get(ENV_OUTPUT_DIR) or self.get('output_dir')

    @property
    def threads(self):
        return self.get('threads') or os.cpu_count() or 1
