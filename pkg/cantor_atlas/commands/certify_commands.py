import logging

import click

from cantor_atlas.certify_engine import Certify
from cantor_atlas.guards import map_options, output_option, run_options, validated, verdict_command
from cantor_atlas.services.preset_service import parse_complex
from cantor_atlas.services.report_service import ReportService

logger = logging.getLogger(__name__)

certify_cmds = click.Group('certify')


def parse_disc(text: str) -> dict:
    """'kind:center:radius', e.g. 'round:0:3' or 'tube:0+0i:1.5'"""
    parts = text.split(':')
    if len(parts) != 3:
        raise click.BadParameter(f"expected kind:center:radius, got '{text}'", param_hint='--disc')
    kind, center, radius = parts
    try:
        z = parse_complex(center)
        r = float(radius)
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint='--disc')
    return {'kind': kind, 'center': [z.real, z.imag], 'radius': r}


@certify_cmds.command('figure1')
@click.option('--a', 'a', default='0+1.665i', help='Quartic parameter')
@validated
@run_options
@verdict_command('figure1')
def figure1(run, a='0+1.665i'):
    """Two levels of preimage curves of |z| <= 3/2 with their annuli and winding census"""
    return Certify.figure1_report(parse_complex(a), run)


@certify_cmds.command('certify-scantor')
@click.option('--n', 'n', type=int, default=1, help='Iterate of the map')
@click.option('--disc', multiple=True, help='Candidate kind:center:radius (repeatable)')
@validated
@map_options
@run_options
@verdict_command('certify-scantor')
def certify_scantor(spec, run, n=1, disc=()):
    """Search candidate discs D' with f^-n(D') compactly inside D'"""
    candidates = [parse_disc(d) for d in disc] or None
    return Certify.s_cantor_witness(spec.build(), n, candidates, run)


@certify_cmds.command('replay')
@click.argument('certificate', type=click.Path(exists=True, dir_okay=False))
@validated
@output_option
@verdict_command('replay')
def replay(certificate, run):
    """Re-run a stored certificate and demand an identical document"""
    document = ReportService.load(certificate)
    logger.info("replaying %s", certificate)
    return Certify.replay(document)
