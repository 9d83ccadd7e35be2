'''
Weak type (1,1) quotients: level set scans, the forbidden zone covering and
the large time level sets.
'''

from ouweak.acceptance import LARGE_T_SPREAD, SLOPE_LIMIT, ZONE_RATIO_SPREAD, spread
from ouweak.mehler import KernelSpec
from ouweak.semigroup import TGrid
from ouweak.weaktype import kappa_weak_type_scan, large_t_levelset, weak_type_scan
from ouweak.zones import GLOBAL_RESOLUTION, LOCAL_RESOLUTION, forbidden_zone_recursion, smm_c
from . import arg_help
from .cmdparse import Command
from .common import (
    FROM_ENV, MODEL, OPTIONAL_ENV, OUTPUT, SEED, TEST_FUNCTION, THREADS, VERDICT_FAILED,
    from_env, load_model, make_test_function, positive_float, positive_int, spectral_params,
    threads)
from .output import Output, structured_text


DEFAULT_ALPHAS = [10.0, 100.0, 1000.0]
DEFAULT_BUDGET = 100_000

SCAN_HEADER = ['alpha', 'measure', 'stderr', 'quotient']
RECURSION_HEADER = [
    'alpha', 'step', 'beta', 't', 'value', 'mass', 'zone_measure', 'ratio', 'ratio_limit']
LARGE_T_HEADER = ['alpha', 'measure', 'stderr', 'quotient', 'bound_ratio']


def MODE(parser):
    group = parser.argparser.add_mutually_exclusive_group()
    group.add_argument('--recursion', action='store_true', help='run the forbidden zone covering')
    group.add_argument(
        '--large-time', action='store_true', help='measure the large time level sets')


def RECURSION(parser):
    parser.arg('--m1', type=int, default=0, help='dyadic index of the global distance')
    parser.arg('--m2', type=int, default=0, help='dyadic index of the local distance')
    parser.arg('--nu', type=int, nargs='*', default=[], help='local cell index')
    parser.arg('--A', type=positive_float, default=None, help='global ball factor')
    parser.arg('--B', type=positive_float, default=None, help='local ball factor')
    parser.arg('--M', type=positive_float, default=FROM_ENV, help='ball separation constant')
    parser.arg('--resolution', type=positive_int, default=GLOBAL_RESOLUTION,
               help='grid points per global axis')
    parser.arg('--local-resolution', type=positive_int, default=LOCAL_RESOLUTION,
               help='grid points per local axis')


def scan(args, model, f):
    grid = TGrid.default(from_env(args, 'grid_size', 't_grid_size'))
    if args.kappa is None:
        report = weak_type_scan(
            model, f, args.alpha_grid, args.budget, args.seed, grid, threads(args))
    else:
        spec = KernelSpec(spectral_params(model), args.kappa)
        report = kappa_weak_type_scan(
            spec, f, args.alpha_grid, args.budget, args.seed, grid, threads(args))
    rows = zip(report.alphas, report.measures, report.stderrs, report.quotients)
    holds = not report.slope > SLOPE_LIMIT
    summary = structured_text([
        ('samples', report.samples),
        ('tail', report.tail),
        ('slope', report.slope),
        ('slope limit', SLOPE_LIMIT),
        ('holds', holds),
    ])
    return SCAN_HEADER, list(rows), summary, holds


def _step_row(alpha, index, step, ratio_limit):
    return [
        alpha, index, step.beta, step.t, step.value, step.mass, step.zone_measure,
        step.ratio, ratio_limit]


def recursion(args, model, f):
    params = spectral_params(model)
    c = smm_c(params, args.get_env().get('smm_c_factor'))
    M = from_env(args, 'M', 'zone_M')
    rows, sections, runs = [], [], []
    for alpha in args.alpha_grid:
        zone_run = forbidden_zone_recursion(
            params, f, alpha, f.k, args.nu, args.m1, args.m2, args.A, args.B, M,
            resolution=args.resolution, local_resolution=args.local_resolution, c=c)
        rows.extend(
            _step_row(alpha, i, step, zone_run.ratio_limit)
            for i, step in enumerate(zone_run.steps))
        sections.append((f'alpha {alpha!r}', [
            ('grid points', zone_run.grid_size),
            ('level set points', zone_run.level_set_size),
            ('selections', zone_run.selections),
            ('epsilon', zone_run.epsilon),
            ('ratio limit', zone_run.ratio_limit),
            *sorted(zone_run.verdicts.items()),
            ('holds', zone_run.holds),
        ]))
        runs.append(zone_run)
    ratio_spread = spread(ratio for run in runs for ratio in run.ratios)
    holds = all(run.holds for run in runs) and ratio_spread <= ZONE_RATIO_SPREAD
    sections.append(('zones', [
        ('ratio spread', ratio_spread),
        ('spread limit', ZONE_RATIO_SPREAD),
        ('holds', holds),
    ]))
    return RECURSION_HEADER, rows, structured_text(sections=sections), holds


def large_time(args, model, f):
    params = spectral_params(model)
    c = smm_c(params.head(f.k), args.get_env().get('smm_c_factor'))
    nu = args.nu if f.k < f.n else None
    reports = [
        large_t_levelset(params, f, alpha, args.budget, args.seed, nu, c, threads(args))
        for alpha in args.alpha_grid]
    rows = [
        [r.alpha, r.measure, r.stderr, r.quotient, r.bound_ratio] for r in reports]
    quotient_spread = spread(r.quotient for r in reports)
    holds = quotient_spread <= LARGE_T_SPREAD
    summary = structured_text([
        ('samples', args.budget),
        ('quotient spread', quotient_spread),
        ('spread limit', LARGE_T_SPREAD),
        ('holds', holds),
    ])
    return LARGE_T_HEADER, rows, summary, holds


class CmdWeaktype(Command):
    '''
    Estimate alpha * gamma{H_* f > alpha} over a list of levels and judge
    whether it stays bounded.

    --recursion covers the small time level set by forbidden zones instead,
    --large-time measures the large time level sets in polar coordinates.
    '''

    def declare(self, arg):
        arg(MODEL)
        arg(TEST_FUNCTION)
        arg('--alpha-grid', type=positive_float, nargs='+', default=DEFAULT_ALPHAS,
            help='levels alpha, increasing')
        arg('--budget', type=positive_int, default=DEFAULT_BUDGET, help=arg_help.BUDGET)
        arg(SEED)
        arg('--kappa', type=positive_float, default=None,
            help='scan the kappa-modified semigroup of a diagonal model')
        arg('--grid-size', type=positive_int, default=FROM_ENV, help=arg_help.GRID_SIZE)
        arg(MODE)
        arg(RECURSION)
        arg(THREADS)
        arg(OUTPUT)
        arg(OPTIONAL_ENV)

    def run(self, args):
        model = load_model(args)
        f = make_test_function(args, model)
        if args.recursion:
            mode = recursion
        elif args.large_time:
            mode = large_time
        else:
            mode = scan
        header, rows, summary, holds = mode(args, model, f)

        output = Output('weaktype', args)
        output.table(header, rows)
        output.summary(summary)
        if not holds:
            return VERDICT_FAILED
