from ouweak.lemmas import LEMMA_IDS, verify_inequality
from ouweak.normal_form import decompose
from ouweak.model import SpectralParams
from . import arg_help
from . import arg_metavar
from .cmdparse import Command
from .common import MODEL, OPTIONAL_ENV, OUTPUT, SEED, VERDICT_FAILED, load_model, positive_int
from .output import Output, structured_text


DEFAULT_BUDGET = 100_000

HEADER = ['lemma', 'kind', 'samples', 'margin', 'drift', 'floor', 'holds']


def rates(model):
    '''
    Rates of the model's canonical coordinates.
    '''
    if model.is_diagonal:
        return SpectralParams.from_model(model)
    return decompose(model).spectral_params


def report_section(report):
    fields = [
        ('kind', report.kind),
        ('samples', report.samples),
        ('margin', report.margin),
        ('drift', report.drift),
        ('floor', report.floor),
        ('holds', report.holds),
    ]
    fields.extend((f'witness {name}', value) for name, value in sorted(report.witness.items()))
    return report.lemma, fields


def report_row(report):
    return [
        report.lemma, report.kind, report.samples, report.margin, report.drift,
        report.floor, report.holds]


class CmdGeometry(Command):
    '''
    Sample the hypotheses of geometric and kernel inequalities and report
    the smallest margin found, with the sample attaining it.
    '''

    def declare(self, arg):
        arg(MODEL)
        arg('--lemma', metavar=arg_metavar.LEMMA, choices=LEMMA_IDS, action='append',
            help=f'inequality to check, repeat for several; all by default: {LEMMA_IDS}')
        arg('--budget', type=positive_int, default=DEFAULT_BUDGET, help=arg_help.BUDGET)
        arg(SEED)
        arg(OUTPUT)
        arg(OPTIONAL_ENV)

    def run(self, args):
        params = rates(load_model(args))
        reports = [
            verify_inequality(lemma, args.budget, params, args.seed)
            for lemma in (args.lemma or LEMMA_IDS)]

        output = Output('geometry', args)
        output.table(HEADER, [report_row(report) for report in reports])
        output.summary(structured_text(sections=[report_section(r) for r in reports]))
        if not all(report.holds for report in reports):
            return VERDICT_FAILED
