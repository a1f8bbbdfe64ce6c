import logging

import click
import numpy as np

from cantor_atlas.certify_engine import Certify
from cantor_atlas.config import Config, RunConfig
from cantor_atlas.dynamics_engine import MapAnalysis
from cantor_atlas.errors import BudgetExhausted, CantorAtlasError, Undecided
from cantor_atlas.guards import map_options, output_path, run_options, validated, verdict_command
from cantor_atlas.models import Verdict
from cantor_atlas.services.preset_service import QUARTIC, MapSpec, format_complex
from cantor_atlas.services.report_service import ReportService

logger = logging.getLogger(__name__)

analysis_cmds = click.Group('analysis')


def parse_grid(text: str):
    """'re0:re1:n,im0:im1:n' -> list of complex nodes, row by row"""
    try:
        re_part, im_part = text.split(',')
        r0, r1, rn = re_part.split(':')
        i0, i1, inn = im_part.split(':')
        rn, inn = int(rn), int(inn)
        if rn < 1 or inn < 1:
            raise ValueError("node counts must be positive")
        xs = np.linspace(float(r0), float(r1), rn)
        ys = np.linspace(float(i0), float(i1), inn)
    except ValueError as e:
        raise click.BadParameter(f"expected re0:re1:n,im0:im1:n ({str(e)})", param_hint='--grid')
    return [complex(x, y) for y in ys for x in xs]


def parse_viewport(text: str):
    try:
        re_part, im_part = text.split(',')
        x0, x1 = (float(v) for v in re_part.split(':'))
        y0, y1 = (float(v) for v in im_part.split(':'))
    except ValueError:
        raise click.BadParameter("expected x0:x1,y0:y1", param_hint='--viewport')
    if x1 <= x0 or y1 <= y0:
        raise click.BadParameter("empty viewport", param_hint='--viewport')
    return x0, x1, y0, y1


def _classify_grid(spec: MapSpec, nodes, run: RunConfig) -> dict:
    if spec.preset is None:
        raise ValueError("--grid needs --preset")
    name = 'a' if spec.preset == QUARTIC else 'c'
    results = []
    for z in nodes:
        node = {'parameter': format_complex(z)}
        try:
            f = MapSpec(**{**spec.to_dict(), name: format_complex(z)}).build()
            cert = Certify.classify(f, run)
            node['verdict'] = cert.verdict
            node['attractor'] = cert.evidence.get('attractor')
        except BudgetExhausted as e:
            node['verdict'] = Verdict.UNDECIDED.value
            node['reason'] = str(e)
        except (CantorAtlasError, ValueError) as e:
            node['verdict'] = 'error'
            node['reason'] = f"{type(e).__name__}: {str(e)}"
        logger.info("grid node %s: %s", node['parameter'], node['verdict'])
        results.append(node)

    report = {
        'kind': 'classify-grid',
        'verdict': Verdict.PASS.value,
        'parameters': {'run': run.to_dict(), 'preset': spec.preset, 'parameter': name},
        'evidence': {'nodes': results},
    }
    if any(n['verdict'] == Verdict.UNDECIDED.value for n in results):
        raise Undecided("some grid nodes stayed undecided", evidence=report['evidence'])
    return report


@analysis_cmds.command('classify')
@click.option('--grid', default=None, help='Parameter grid re0:re1:n,im0:im1:n for the preset parameter')
@validated
@map_options
@run_options
@verdict_command('classify')
def classify(spec, run, grid=None):
    """Decide cond C and report critical data and the simple domain"""
    if grid:
        return _classify_grid(spec, parse_grid(grid), run)
    return Certify.classify(spec.build(), run)


@analysis_cmds.command('render')
@click.option('--width', type=int, default=None, help='Image width in pixels')
@click.option('--height', type=int, default=None, help='Image height in pixels')
@click.option('--viewport', default=None, help='x0:x1,y0:y1')
@click.option('--cap', type=int, default=None, help='Iteration cap')
@click.option('--image', default=None, help='PPM path')
@validated
@map_options
@run_options
@verdict_command('render')
def render(spec, run, width=None, height=None, viewport=None, cap=None, image=None):
    """Escape-time picture of the Julia set as a P6 PPM"""
    f = spec.build()
    width = width or Config.RENDER_WIDTH
    height = height or Config.RENDER_HEIGHT
    if width < 1 or height < 1:
        raise ValueError("image dimensions must be positive")
    box = parse_viewport(viewport) if viewport else Config.RENDER_VIEWPORT
    grid = MapAnalysis.julia_grid(f, box, width, height, cap)
    image_path = image or output_path(run, 'render.json').with_suffix('.ppm')
    ReportService.write_ppm(grid, image_path)
    return {
        'kind': 'render',
        'verdict': Verdict.PASS.value,
        'parameters': Certify.parameters(f, run, viewport=list(box), width=width, height=height, cap=grid.cap),
        'evidence': {'image': str(image_path), 'capped_fraction': grid.capped_fraction},
    }
