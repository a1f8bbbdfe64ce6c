import logging

import click

from cantor_atlas.certify_engine import Certify
from cantor_atlas.dynamics_engine import MapAnalysis
from cantor_atlas.guards import map_options, run_options, validated, verdict_command
from cantor_atlas.lifting_engine import PathLift
from cantor_atlas.models import Verdict, cjson
from cantor_atlas.services.preset_service import QUARTIC, parse_complex
from cantor_atlas.topology_engine import CurveTopology
from cantor_atlas.wreath_engine import WreathAlgebra

logger = logging.getLogger(__name__)

recursion_cmds = click.Group('recursion')


def _setup(spec, basepoint):
    f = spec.build()
    _, p, _ = MapAnalysis.cond_c_classify(f)
    radial = PathLift.radial_for(f, parse_complex(basepoint))
    labels, points, tracked = CurveTopology.postcritical_punctures(f, p)
    cutsys = CurveTopology.build_cut_system(points, radial.basepoint, labels, tracked)
    return f, p, radial, cutsys


@recursion_cmds.command('monodromy')
@click.option('--basepoint', default='0+1i', help='Basepoint for non-quartic maps')
@click.option('--arcs/--no-arcs', default=False, help='Embed the lifted arcs')
@validated
@map_options
@run_options
@verdict_command('monodromy')
def monodromy(spec, run, basepoint='0+1i', arcs=False):
    """Monodromy permutation of every generator loop of the cut system"""
    f, p, radial, cutsys = _setup(spec, basepoint)
    generators = {}
    for label in cutsys.labels:
        loop = CurveTopology.generator_loop(cutsys, label)
        generators[label] = PathLift.monodromy(f, loop, radial).to_dict(include_arcs=arcs)
    return {
        'kind': 'monodromy',
        'verdict': Verdict.PASS.value,
        'parameters': Certify.parameters(f, run, basepoint=cjson(radial.basepoint)),
        'evidence': {
            'attractor': cjson(p),
            'radial': radial.to_dict(),
            'cut_system': cutsys.to_dict(),
            'generators': generators,
        },
    }


@recursion_cmds.command('recursion')
@click.option('--basepoint', default='0+1i', help='Basepoint for non-quartic maps')
@validated
@map_options
@run_options
@verdict_command('recursion')
def recursion(spec, run, basepoint='0+1i'):
    """Extract the wreath recursion; quartic tables are checked against the symbolic one"""
    f, p, radial, cutsys = _setup(spec, basepoint)
    table = CurveTopology.wreath_recursion_extract(f, radial, cutsys)
    evidence = {
        'attractor': cjson(p),
        'radial': radial.to_dict(),
        'cut_system': cutsys.to_dict(),
        'recursion': table.to_dict(),
    }
    verdict = Verdict.PASS
    if f.preset == QUARTIC:
        K = sum(1 for g in table.generators if g.startswith('C'))
        expected = WreathAlgebra.quartic_recursion_table(K)
        matches = table.generators == expected.generators and table.shape() == expected.shape()
        evidence['symbolic_match'] = matches
        if not matches:
            evidence['expected'] = expected.to_dict()
            verdict = Verdict.FAIL
    return {
        'kind': 'recursion',
        'verdict': verdict.value,
        'parameters': Certify.parameters(f, run, basepoint=cjson(radial.basepoint)),
        'evidence': evidence,
    }
