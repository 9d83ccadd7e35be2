import os
import sys
import traceback

import appdirs
import numpy as np
import scipy

from ouweak.exceptions import ConfigFileError, ModelError, ModelFileError, OUWeakError
from ouweak.tech.timestamp import timestamp
from .cmdparse import Parser, Command
from .common import CONFIG_PARSE, MODEL_INVALID, SUBCOMMAND_FAILURE, warning
from . import config
from . import evaluate
from . import geometry
from . import model
from . import verify
from . import weaktype
from . import git_info


VERSION_INFO = f'''
ouweak {git_info.TAG_VERSION}{'-dirty' if git_info.DIRTY else ''}
  commit {git_info.GIT_HASH} ({git_info.GIT_BRANCH}, {git_info.GIT_DATE})
  from   {git_info.GIT_REPO}

Python: {sys.version}
numpy {np.__version__}, scipy {scipy.__version__}
'''


class CmdVersion(Command):
    '''
    Show program version info
    '''

    def run(self, args):
        print(VERSION_INFO)


def make_argument_parser(defaults):
    parser = Parser.new(defaults)
    (parser
        .commands(
            'validate',
            model.CmdValidate,
            'Check a model and show its stationary covariance.',

            'decompose',
            model.CmdDecompose,
            'Split a normal model into building blocks.',

            'kernel',
            evaluate.CmdKernel,
            'Evaluate a Mehler kernel on a grid.',

            'apply',
            evaluate.CmdApply,
            'Evaluate H_t f(x).',

            'maximal',
            evaluate.CmdMaximal,
            'Evaluate the maximal function at a point.',

            'sample',
            evaluate.CmdSample,
            'Draw exact samples of the process.',

            'geometry',
            geometry.CmdGeometry,
            'Check geometric and kernel inequalities by sampling.',

            'weaktype',
            weaktype.CmdWeaktype,
            'Estimate weak type (1,1) quotients.',

            'verify-all',
            verify.CmdVerifyAll,
            'Run the acceptance suite.',

            'version',
            CmdVersion,
            'Show program version.'))

    (parser
        .group('config', 'Manage user defaults')
        .commands(
            'show',
            config.CmdShow,
            'Show user defaults.',

            'set',
            config.CmdSet,
            'Set a user default.'))

    return parser


# most specific first
EXIT_CODES = (
    (ModelFileError, CONFIG_PARSE),
    (ConfigFileError, CONFIG_PARSE),
    (ModelError, MODEL_INVALID),
    (OUWeakError, SUBCOMMAND_FAILURE),
)


def run(config_dir, argv):
    parser_defaults = dict(config_dir=config_dir)
    parser = make_argument_parser(parser_defaults)
    try:
        return parser.dispatch(argv)
    except OUWeakError as e:
        print(f'ERROR: {e}', file=sys.stderr)
        for exception_class, exit_code in EXIT_CODES:
            if isinstance(e, exception_class):
                return exit_code


REPO = 'https://github.com/ouweak/ouweak'

FAILURE_TEMPLATE = """\
{exception}
ouweak crashed. The full details are in
    {error_report}

Please attach that file, not the shortened text above, to a new issue at
    {repo}/issues/new
unless the problem is already reported or fixed in the latest version.
"""


def write_error_report(path):
    '''
    Save argv, the full traceback of the exception being handled and the versions.
    '''
    with open(path, 'w') as f:
        f.write(f'argv = {sys.argv!r}\n\n')
        f.write(traceback.format_exc())
        f.write(VERSION_INFO)
        if git_info.DIRTY:
            f.write('\nbuilt from uncommitted sources\n')


def main(run=run):
    if git_info.DIRTY:
        warning('built from uncommitted sources')
    config_dir = appdirs.user_config_dir('ouweak')
    try:
        retval = run(config_dir, sys.argv[1:])
    except KeyboardInterrupt:
        print('Interrupted :(', file=sys.stderr)
        retval = -1
    except SystemExit:
        raise
    except BaseException:
        error_report = os.path.abspath(f'error_{timestamp()}.txt')
        write_error_report(error_report)
        print(
            FAILURE_TEMPLATE.format(
                exception=traceback.format_exc(limit=1),
                error_report=error_report,
                repo=git_info.GIT_REPO or REPO),
            file=sys.stderr)
        retval = -1
    sys.exit(retval)


if __name__ == '__main__':
    main()
