'''
Subcommand dispatch over argparse: `ouweak <command>` and the `config`
group (`ouweak config show`).
'''

import argparse


# argparse exits with 2 on unparseable command lines
USAGE_ERROR = 2
INCOMPLETE = -1


class Command:
    '''
    A subcommand: its arguments and what runs with them.

    The class docstring is the command description.
    '''

    def declare(self, arg):
        '''
        Declare arguments with `arg`, see `Parser.arg`.
        '''

    def run(self, args):
        '''
        Exit code for the parsed arguments, None for success.
        '''
        raise NotImplementedError


class Parser:

    def __init__(self, argparser, defaults):
        # defaults are shared with the subparsers, e.g. the config directory
        self.argparser = argparser
        self.defaults = defaults
        self._subparsers = None

    @classmethod
    def new(cls, defaults, **kwargs):
        return cls(argparse.ArgumentParser(**kwargs), defaults)

    def _add_parser(self, name, **kwargs):
        if self._subparsers is None:
            self._subparsers = self.argparser.add_subparsers()
        return self._subparsers.add_parser(name, **kwargs)

    def arg(self, *args, **kwargs):
        '''
        `add_argument`, with the default appended to the help text.

        A single callable is an argument set: it is called with the parser.
        '''
        if not kwargs and len(args) == 1 and callable(args[0]):
            args[0](self)
            return
        if 'default' in kwargs:
            kwargs['help'] = f"{kwargs.get('help', '')} (default: {kwargs['default']!r})"
        self.argparser.add_argument(*args, **kwargs)

    def commands(self, *triples):
        '''
        Declare commands from alternating name, Command class and title.
        '''
        assert len(triples) % 3 == 0, triples
        for name, command_class, title in zip(*[iter(triples)] * 3):
            command = command_class()
            parser = self._add_parser(name, help=title, description=command.__doc__)
            command.declare(self.__class__(parser, self.defaults).arg)
            parser.set_defaults(_cmdparse__run=command.run)
        return self

    def group(self, name, title):
        return self.__class__(self._add_parser(name, help=title + '...'), self.defaults)

    def dispatch(self, argv):
        '''
        Exit code of the selected command; INCOMPLETE for --help or a
        command group without its subcommand.
        '''
        try:
            args = self.argparser.parse_args(argv)
        except SystemExit as e:
            # argparse exits both on --help and on errors
            return USAGE_ERROR if e.code else INCOMPLETE
        run = getattr(args, '_cmdparse__run', None)
        if run is None:
            print(f"ERROR: not a full command <{' '.join(argv)}>\n")
            self.argparser.print_help()
            return INCOMPLETE
        return run(args) or 0
