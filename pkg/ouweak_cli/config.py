from . import arg_metavar
from .cmdparse import Command
from .common import OPTIONAL_ENV, die


class CmdShow(Command):
    '''
    Show the user defaults.
    '''

    def declare(self, arg):
        arg(OPTIONAL_ENV)

    def run(self, args):
        env = args.get_env()
        for key, value in env.items():
            print(f'{key}: {value}')


class CmdSet(Command):
    '''
    Set a user default.
    '''

    def declare(self, arg):
        arg('key', metavar=arg_metavar.KEY)
        arg('value', metavar=arg_metavar.VALUE)
        arg(OPTIONAL_ENV)

    def run(self, args):
        env = args.get_env()
        try:
            env.set(args.key, args.value)
        except ValueError as e:
            die(str(e))
        env.save()
        print(f'{args.key}: {env.get(args.key)}')
