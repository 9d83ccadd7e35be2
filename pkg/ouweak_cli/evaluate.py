'''
Point evaluations: kernels, semigroup values, maximal function, exact samples.
'''

import itertools

import numpy as np

from ouweak import mehler
from ouweak.mehler import KernelSpec
from ouweak.normal_form import decompose
from ouweak.semigroup import ROUTES, TGrid, apply_kappa, maximal, sde_path
from . import arg_help
from . import arg_metavar
from .cmdparse import Command
from .common import (
    FROM_ENV, MODEL, OPTIONAL_ENV, OPTIONAL_SEED, OUTPUT, POINT, SEED, SUBCOMMAND_FAILURE,
    TEST_FUNCTION, die, from_env, load_model, make_test_function, positive_float,
    positive_int, spectral_params)
from .output import Output


KAPPA = 'kappa'
APPLY_ROUTES = (*ROUTES, KAPPA)


def TIMES(parser):
    parser.arg('--t', metavar=arg_metavar.TIMES, nargs='+', type=positive_float,
               required=True, help=arg_help.TIMES)


def KAPPA_FACTOR(parser):
    parser.arg('--kappa', type=positive_float, default=1.0,
               help='factor of the quadratic kernel exponent')


def ORDER(parser):
    parser.arg('--order', type=positive_int, default=FROM_ENV, help=arg_help.ORDER)


def _coordinates(point, n, what):
    if len(point) != n:
        die(f'{what} has {len(point)} coordinates, the model has {n}')
    return point


# kernel variant -> (model -> log kernel (t, x, u))
def _diag_kernel(model, args):
    params = spectral_params(model)
    return lambda t, x, u: mehler.log_kernel_diag(params, t, x, u)


def _kappa_kernel(model, args):
    spec = KernelSpec(spectral_params(model), args.kappa)
    return lambda t, x, u: mehler.log_kernel_kappa(spec, t, x, u)


def _block_kernel(model, args):
    form = decompose(model)
    if form.n != 2 or len(form.blocks) != 1:
        die('the block kernel needs a model made of one rotating 2x2 block',
            SUBCOMMAND_FAILURE)
    (lam, q), = form.blocks
    return lambda t, x, u: mehler.log_kernel_block2d(lam, q, t, x, u)


def _general_kernel(model, args):
    form = decompose(model)
    return lambda t, x, u: mehler.log_kernel_general(form, t, x, u)


def _transition_kernel(model, args):
    return lambda t, x, u: mehler.log_transition_kernel(model, t, x, u)


KERNELS = {
    'diag': _diag_kernel,
    'kappa': _kappa_kernel,
    'block': _block_kernel,
    'general': _general_kernel,
    'transition': _transition_kernel,
}


class CmdKernel(Command):
    '''
    Evaluate a Mehler kernel on the product of the given times and points.

    Block and general kernels take canonical coordinates (see decompose),
    the transition kernel takes original coordinates.
    '''

    def declare(self, arg):
        arg(MODEL)
        arg('--variant', choices=list(KERNELS), default='diag', help='kernel to evaluate')
        arg(KAPPA_FACTOR)
        arg(TIMES)
        arg('--x', metavar=arg_metavar.POINT, nargs='+', type=float, action='append',
            required=True, help='first point, repeat for a grid')
        arg('--u', metavar=arg_metavar.POINT, nargs='+', type=float, action='append',
            required=True, help='second point, repeat for a grid')
        arg(OUTPUT)
        arg(OPTIONAL_ENV)

    def run(self, args):
        model = load_model(args)
        log_kernel = KERNELS[args.variant](model, args)
        xs = [_coordinates(x, model.n, '--x') for x in args.x]
        us = [_coordinates(u, model.n, '--u') for u in args.u]

        rows = []
        for t, x, u in itertools.product(args.t, xs, us):
            log_value = float(log_kernel(t, np.array(x), np.array(u)))
            rows.append([t, *x, *u, np.exp(log_value), log_value])

        n = model.n
        header = (
            ['t'] + [f'x{i + 1}' for i in range(n)] + [f'u{i + 1}' for i in range(n)]
            + ['value', 'log_value'])
        Output('kernel', args).table(header, rows)


def _apply(args, model, f, x, t, order):
    if args.route == KAPPA:
        return apply_kappa(KernelSpec(spectral_params(model), args.kappa), f, x, t)
    return ROUTES[args.route](model, f, x, t, order, args.seed)


class CmdApply(Command):
    '''
    Evaluate H_t f(x) for a test function f at the given times.
    '''

    def declare(self, arg):
        arg(MODEL)
        arg(TEST_FUNCTION)
        arg(POINT)
        arg(TIMES)
        arg('--route', choices=APPLY_ROUTES, default='kolmogorov', help=arg_help.ROUTE)
        arg(KAPPA_FACTOR)
        arg(ORDER)
        arg(OPTIONAL_SEED)
        arg(OUTPUT)
        arg(OPTIONAL_ENV)

    def run(self, args):
        model = load_model(args)
        f = make_test_function(args, model)
        x = np.array(_coordinates(args.x, model.n, '--x'))
        order = from_env(args, 'order', 'quadrature_order')
        rows = [[t, float(_apply(args, model, f, x, t, order))] for t in args.t]
        Output('apply', args).table(['t', 'value'], rows)


class CmdMaximal(Command):
    '''
    Evaluate the maximal function max_t |H_t f(x)| over a log-spaced time grid.
    '''

    def declare(self, arg):
        arg(MODEL)
        arg(TEST_FUNCTION)
        arg(POINT)
        arg('--route', choices=list(ROUTES), default='kolmogorov', help=arg_help.ROUTE)
        arg('--grid-size', type=positive_int, default=FROM_ENV, help=arg_help.GRID_SIZE)
        arg(ORDER)
        arg(OPTIONAL_SEED)
        arg(OUTPUT)
        arg(OPTIONAL_ENV)

    def run(self, args):
        model = load_model(args)
        f = make_test_function(args, model)
        x = np.array(_coordinates(args.x, model.n, '--x'))
        grid = TGrid.default(from_env(args, 'grid_size', 't_grid_size'))
        order = from_env(args, 'order', 'quadrature_order')
        result = maximal(model, f, x, grid, args.route, order)
        Output('maximal', args).table(
            ['value', 'argmax_t', 'small_t_value', 'large_t_value'],
            [[result.value, result.argmax_t, result.small_t_value, result.large_t_value]])


class CmdSample(Command):
    '''
    Draw exact samples of the process started at x, at the given times.
    '''

    def declare(self, arg):
        arg(MODEL)
        arg(POINT)
        arg(TIMES)
        arg('--count', type=positive_int, default=1, help='number of independent paths')
        arg(SEED)
        arg(OUTPUT)
        arg(OPTIONAL_ENV)

    def run(self, args):
        model = load_model(args)
        x = _coordinates(args.x, model.n, '--x')
        paths = sde_path(model, x, args.t, args.seed, args.count)
        rows = [
            [path_index, t, *paths[path_index, time_index]]
            for path_index in range(args.count)
            for time_index, t in enumerate(args.t)]
        Output('sample', args).table(
            ['path', 't'] + [f'x{i + 1}' for i in range(model.n)], rows)
