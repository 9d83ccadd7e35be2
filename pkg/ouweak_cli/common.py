import argparse
import os
import sys

import numpy as np

from ouweak.exceptions import ModelError, ModelFileError
from ouweak.functions import Kind, TestFunction
from ouweak.model import SpectralParams, diagonal_model, model_from_file
from . import arg_help
from . import arg_metavar
from .environment import Environment
from .output import CSV, FORMATS


# exit codes
OK = 0
VERDICT_FAILED = 1
CONFIG_PARSE = 2
MODEL_INVALID = 3
SUBCOMMAND_FAILURE = 4


def die(msg, exit_code=CONFIG_PARSE):
    sys.stderr.write('ERROR: ')
    sys.stderr.write(msg)
    sys.stderr.write('\n')
    sys.exit(exit_code)


def warning(msg):
    sys.stderr.write('WARNING: ')
    sys.stderr.write(msg)
    sys.stderr.write('\n')


class get_env:
    '''
    Make an Environment when called.

    It will also create a missing config directory and provides a meaningful
    text when used as default for an argparse argument.
    '''

    def __init__(self, config_dir):
        self.config_dir = config_dir

    def __call__(self):
        os.makedirs(self.config_dir, exist_ok=True)
        return Environment.from_dir(self.config_dir)

    def __repr__(self):
        return f'Environment at {self.config_dir}'


def OPTIONAL_ENV(parser):
    '''
    Define `env` as option, defaulting to environment config in user's home directory
    '''
    config_dir = parser.defaults['config_dir']
    parser.arg(
        '--env', '--environment', metavar=arg_metavar.ENV,
        dest='get_env',
        type=get_env, default=get_env(config_dir),
        help=arg_help.ENV)


class DefaultArgSentinel:
    '''
    I am a sentinel for default values.

    I.e. If you see me, it means that you got the default value.

    I also provide human sensible description for the default value.
    '''

    def __init__(self, description):
        self.description = description

    def __repr__(self):
        return self.description


FROM_ENV = DefaultArgSentinel('from the user config')


def from_env(args, name, key=None):
    '''
    Argument value, or the user default when it was not given.
    '''
    value = getattr(args, name)
    if value is FROM_ENV:
        return args.get_env().get(key or name)
    return value


def positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f'{text} is not a positive integer')
    return value


def positive_float(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f'{text} is not positive')
    return value


def MODEL(parser):
    '''
    Model source: a model file or inline diagonal rates.
    '''
    group = parser.argparser.add_mutually_exclusive_group(required=True)
    group.add_argument('--model', metavar=arg_metavar.MODEL, help=arg_help.MODEL)
    group.add_argument(
        '--lambdas', metavar=arg_metavar.LAMBDAS, nargs='+', type=positive_float,
        help=arg_help.LAMBDAS)


def load_model(args):
    if args.lambdas is not None:
        return diagonal_model(args.lambdas)
    try:
        return model_from_file(args.model)
    except OSError as e:
        raise ModelFileError(f'cannot read model file {args.model}: {e.strerror}')


def spectral_params(model):
    if not model.is_diagonal:
        raise ModelError('this needs a diagonal model: Q = I, B = -diag(lambdas)')
    return SpectralParams.from_model(model)


def SEED(parser):
    parser.arg('--seed', metavar=arg_metavar.SEED, type=int, required=True, help=arg_help.SEED)


def OPTIONAL_SEED(parser):
    parser.arg('--seed', metavar=arg_metavar.SEED, type=int, default=0, help=arg_help.SEED)


def THREADS(parser):
    parser.arg(
        '--threads', metavar=arg_metavar.THREADS, type=positive_int, default=FROM_ENV,
        help=arg_help.THREADS)


def threads(args):
    value = args.threads
    if value is FROM_ENV:
        return args.get_env().threads
    return value


def OUTPUT(parser):
    parser.arg('--output', '-o', metavar=arg_metavar.OUTPUT, help=arg_help.OUTPUT)
    parser.arg('--format', choices=FORMATS, default=CSV, help=arg_help.FORMAT)


def POINT(parser):
    parser.arg('--x', metavar=arg_metavar.POINT, nargs='+', type=float, required=True,
               help=arg_help.POINT)


def TEST_FUNCTION(parser):
    parser.arg(
        '--function', choices=[kind.value for kind in Kind], default=Kind.GAUSSIAN_BUMP.value,
        help=arg_help.FUNCTION)
    parser.arg(
        '--center', metavar=arg_metavar.CENTER, nargs='+', type=float, action='append',
        required=True, help=arg_help.CENTER)
    parser.arg('--width', type=positive_float, default=0.5, help=arg_help.WIDTH)
    parser.arg('--k', type=int, default=None, help=arg_help.GLOBAL_K)


def function_rates(model):
    '''
    Rates of the product measure the test function is normalized against.
    '''
    if model.is_diagonal:
        return model.lambdas
    return 1 / (2 * np.diag(model.stationary_covariance))


def make_test_function(args, model):
    return TestFunction.create(
        args.function, args.center, args.width, function_rates(model), args.k)

