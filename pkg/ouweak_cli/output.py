'''
Result emitters: CSV tables with a provenance line and structured text reports.
'''

import csv
import os
import sys

import numpy as np

from ouweak.tech import persistence
from . import git_info


VERSION = f"{git_info.TAG_VERSION}{'-dirty' if git_info.DIRTY else ''}"

STDOUT = '-'
CSV = 'csv'
STRUCTURED_TEXT = 'structured-text'
FORMATS = (CSV, STRUCTURED_TEXT)
EXTENSIONS = {CSV: 'csv', STRUCTURED_TEXT: 'txt'}
PROVENANCE = '# provenance: '
# parsed arguments that are plumbing, not configuration
UNECHOED_ARGS = {'get_env', '_cmdparse__run', 'output'}


def _plain_arg(value):
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    if isinstance(value, (list, tuple)):
        return [_plain_arg(item) for item in value]
    return repr(value)


def provenance(command, args):
    '''
    Everything needed to repeat the run: command, arguments, seed and version.

    No clock or host data, so repeated runs produce identical lines.
    '''
    arguments = {
        name: _plain_arg(value)
        for name, value in vars(args).items()
        if name not in UNECHOED_ARGS}
    return dict(
        command=command,
        arguments=arguments,
        seed=getattr(args, 'seed', None),
        version=VERSION)


def provenance_line(command, args):
    return PROVENANCE + persistence.dumps(
        provenance(command, args), indent=None, separators=(',', ':'))


def cell(value):
    '''
    CSV text of a value, floats in round-trip (repr) form.
    '''
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    if value is None:
        return ''
    return str(value)


def write_csv(stream, command, args, header, rows):
    stream.write(provenance_line(command, args) + '\n')
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(header)
    for row in rows:
        writer.writerow([cell(value) for value in row])


def write_structured_text(stream, command, args, header, rows):
    '''
    The table as one `row <i>:` section per row, under the provenance line.
    '''
    stream.write(provenance_line(command, args) + '\n')
    sections = [(f'row {i}', list(zip(header, row))) for i, row in enumerate(rows)]
    if sections:
        stream.write(structured_text(sections=sections))


WRITERS = {CSV: write_csv, STRUCTURED_TEXT: write_structured_text}


class Output:
    '''
    Destination of one command's table and its human readable summary.

    The table, CSV or structured text by `--format`, goes to `--output`
    (`-` is stdout), else to `<output_dir>/<command>.csv` (`.txt`) when an
    output directory is configured, else to stdout. The summary goes to
    stdout, or to stderr when stdout carries the table.
    '''

    def __init__(self, command, args):
        self.command = command
        self.args = args
        self.format = getattr(args, 'format', CSV)

    @property
    def path(self):
        if self.args.output:
            return None if self.args.output == STDOUT else self.args.output
        output_dir = self.args.get_env().output_dir
        if output_dir:
            return os.path.join(output_dir, f'{self.command}.{EXTENSIONS[self.format]}')
        return None

    def table(self, header, rows):
        write = WRITERS[self.format]
        path = self.path
        if path is None:
            write(sys.stdout, self.command, self.args, header, rows)
            return
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, 'w', newline='') as f:
            write(f, self.command, self.args, header, rows)

    def summary(self, text):
        stream = sys.stderr if self.path is None else sys.stdout
        stream.write(text)


def _scalar(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def _item(item):
    if isinstance(item, (list, tuple, np.ndarray)):
        return ' '.join(_scalar(value) for value in item)
    return _scalar(item)


def _lines(fields, indent):
    for key, value in fields:
        if isinstance(value, (list, tuple, np.ndarray)):
            yield f'{indent}{key}:'
            for item in value:
                yield f'{indent}    {_item(item)}'
        else:
            yield f'{indent}{key}: {_scalar(value)}'


def structured_text(fields=(), sections=()):
    '''
    Render `key: value` lines; each (name, fields) section follows a blank
    line and a `name:` heading. List values are listed one item per line.
    '''
    lines = list(_lines(fields, ''))
    for name, section in sections:
        lines.extend(['', f'{name}:'])
        lines.extend(_lines(section, '    '))
    return '\n'.join(lines).lstrip('\n') + '\n'
