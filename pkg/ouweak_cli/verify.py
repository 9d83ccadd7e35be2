from ouweak.acceptance import CRITERIA, FULL, QUICK, passed, run_suite
from .cmdparse import Command
from .common import OPTIONAL_ENV, OUTPUT, SEED, THREADS, VERDICT_FAILED, threads
from .output import Output, structured_text


HEADER = ['criterion', 'check', 'value', 'limit', 'holds', 'required']


def _row(check):
    return [check.criterion, check.name, check.value, check.limit, check.holds, check.required]


def summary(checks):
    failed = [check for check in checks if check.required and not check.holds]
    informational = [check for check in checks if not check.required and not check.holds]
    return structured_text(
        [
            ('checks', len(checks)),
            ('failed', len(failed)),
            ('verdict', 'PASS' if passed(checks) else 'FAIL'),
        ],
        [
            ('failed checks', [(f'{c.criterion}', f'{c.name} = {c.value!r}') for c in failed]),
            ('informational, out of range',
             [(f'{c.criterion}', f'{c.name} = {c.value!r}') for c in informational]),
        ])


class CmdVerifyAll(Command):
    '''
    Run the acceptance suite and exit with 1 when any required check fails.
    '''

    def declare(self, arg):
        arg(SEED)
        arg('--quick', action='store_true',
            help='reduced budgets: same checks, weaker statistics')
        arg('--criterion', type=int, choices=sorted(CRITERIA), action='append',
            help='run only this criterion, repeat for several')
        arg(THREADS)
        arg(OUTPUT)
        arg(OPTIONAL_ENV)

    def run(self, args):
        budgets = QUICK if args.quick else FULL
        checks = run_suite(budgets, args.seed, threads(args), args.criterion)

        output = Output('verify-all', args)
        output.table(HEADER, [_row(check) for check in checks])
        output.summary(summary(checks))
        if not passed(checks):
            return VERDICT_FAILED
