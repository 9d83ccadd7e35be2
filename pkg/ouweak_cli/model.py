import warnings

import numpy as np

from ouweak.exceptions import DegenerateBlockWarning
from ouweak.model import covariance_matrix, lyapunov_residual, model_to_file, validate_model
from ouweak.normal_form import check_normal, decompose
from .cmdparse import Command
from .common import MODEL, load_model, warning
from .output import structured_text


def _eigenvalues(model):
    return [(z.real, z.imag) for z in model.eigenvalues]


class CmdValidate(Command):
    '''
    Check a model (Q symmetric positive definite, B Hurwitz) and show its
    stationary covariance.
    '''

    def declare(self, arg):
        arg(MODEL)

    def run(self, args):
        model = load_model(args)
        sigma = model.stationary_covariance
        print(structured_text([
            ('n', model.n),
            ('diagonal', model.is_diagonal),
            ('eigenvalues (re im)', _eigenvalues(model)),
            ('stationary covariance', sigma),
            ('lyapunov residual', lyapunov_residual(model, sigma)),
            ('Q_1', covariance_matrix(model, 1.0)),
        ]), end='')


class CmdDecompose(Command):
    '''
    Split a normal model into 2x2 building blocks and scalar factors.
    '''

    def declare(self, arg):
        arg(MODEL)
        arg('--emit-model', metavar='FILE',
            help='also write the canonical model (Q = I) in model file format')

    def run(self, args):
        model = load_model(args)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter('always', DegenerateBlockWarning)
            form = decompose(model)
        for w in caught:
            warning(str(w.message))

        check = check_normal(model)
        print(structured_text(
            [('n', form.n), ('commutator norm', check.commutator_norm)],
            [
                ('blocks (lambda q)', [('rates', form.blocks)]),
                ('scalars', [('rates', form.scalars)]),
                ('basis', [('rows', form.basis)]),
                ('whitening', [('rows', form.whitening)]),
            ]), end='')

        if args.emit_model:
            model_to_file(validate_model(np.eye(form.n), form.drift), args.emit_model)
            print(f'Canonical model written to {args.emit_model}')
