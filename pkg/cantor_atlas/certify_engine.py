import cmath
import logging
import math
from typing import Dict, List, Optional, Sequence

import numpy as np

from cantor_atlas.config import Config, RunConfig
from cantor_atlas.dynamics_engine import MapAnalysis
from cantor_atlas.errors import (
    ChainAmbiguous, ClaimViolation, NonInteger, PreconditionFailed, ReplayMismatch,
    ShapeMismatch, TopologyMismatch,
)
from cantor_atlas.lifting_engine import PathLift
from cantor_atlas.models import (
    Certificate, CertificateKind, ClosedCurveSet, Polyline, RationalMap, TracedCurve, Verdict, cjson, cparse, is_inf,
)
from cantor_atlas.services.preset_service import QUARTIC, MapSpec, PresetService, format_complex, parse_complex
from cantor_atlas.services.report_service import ReportService
from cantor_atlas.services.sphere_service import SphereService
from cantor_atlas.topology_engine import CurveTopology
from cantor_atlas.wreath_engine import WreathAlgebra

logger = logging.getLogger(__name__)

FIGURE_RADIUS = 1.5
GROWTH_INNER = 5 / 3
GROWTH_OUTER = 10.0
DEFAULT_RADII = (1.5, 2.0, 3.0, 5.0)
KEYHOLE_TURNS = 16


def _cross(u, v):
    return (np.conj(u) * v).imag


def _point_segment(z, a, b):
    ab = b - a
    denom = np.abs(ab) ** 2
    t = np.clip(((z - a) * np.conj(ab)).real / np.where(denom > 0, denom, 1.0), 0.0, 1.0)
    return np.abs(z - (a + t * ab))


def _segment_distances(a: complex, b: complex, line: Polyline) -> np.ndarray:
    """Distance from the segment [a, b] to every edge of a polyline"""
    c, d = line.z[:-1], line.z[1:]
    d1, d2 = _cross(b - a, c - a), _cross(b - a, d - a)
    d3, d4 = _cross(d - c, a - c), _cross(d - c, b - c)
    hit = (d1 * d2 < 0) & (d3 * d4 < 0)
    dist = np.minimum.reduce([
        _point_segment(c, a, b), _point_segment(d, a, b),
        _point_segment(a, c, d), _point_segment(b, c, d),
    ])
    return np.where(hit, 0.0, dist)


def _traced_dump(curves: ClosedCurveSet) -> List[dict]:
    return [TracedCurve(CurveTopology.resample(c), c.level, c.source, c.degree).to_dict() for c in curves]


class Certify:
    """Verdicts with replayable evidence"""

    @staticmethod
    def parameters(f: Optional[RationalMap], run: Optional[RunConfig], **extra) -> dict:
        params = {'run': (run or RunConfig()).to_dict()}
        if f is not None:
            params['map'] = PresetService.spec_for(f).to_dict()
        params.update(extra)
        return params

    @staticmethod
    def _cond_c(f: RationalMap):
        cond, p, evidence = MapAnalysis.cond_c_classify(f)
        if not cond:
            raise PreconditionFailed("the map does not satisfy cond C", evidence=evidence)
        return p, evidence

    # --- classification -------------------------------------------------------

    @staticmethod
    def classify(f: RationalMap, run: RunConfig = None) -> Certificate:
        crit = MapAnalysis.critical_points(f)
        cond, p, evidence = MapAnalysis.cond_c_classify(f)
        evidence['critical_data'] = crit.to_dict()
        evidence['cond_c'] = cond
        if cond:
            evidence['simple_domain'] = MapAnalysis.simple_domain(f, p).to_dict()
        verdict = Verdict.PASS if cond else Verdict.FAIL
        return Certificate(CertificateKind.CLASSIFY, verdict.value, Certify.parameters(f, run), evidence)

    @staticmethod
    def claim1(run: RunConfig = None) -> Certificate:
        report = WreathAlgebra.verify_claim1()
        return Certificate(CertificateKind.CLAIM1, Verdict.PASS.value, Certify.parameters(None, run), report)

    # --- s-Cantor witnesses -----------------------------------------------------

    @staticmethod
    def default_candidates() -> List[dict]:
        out = [{'kind': 'round', 'center': [0.0, 0.0], 'radius': r} for r in DEFAULT_RADII]
        out += [{'kind': 'tube', 'center': [0.0, 0.0], 'radius': r} for r in DEFAULT_RADII]
        return out

    @staticmethod
    def _normalize_candidate(candidate: dict) -> dict:
        kind = candidate.get('kind', 'round')
        if kind not in ('round', 'tube'):
            raise ValueError(f"unknown candidate kind '{kind}'")
        center = candidate.get('center', 0)
        center = cparse(center) if isinstance(center, (list, tuple)) else complex(center)
        radius = float(candidate['radius'])
        if radius <= 0:
            raise ValueError("candidate radius must be positive")
        return {'kind': kind, 'center': cjson(center), 'radius': radius}

    @staticmethod
    def _keyhole(v: complex, center: complex, radius: float, curves: ClosedCurveSet) -> dict:
        """Channel from a critical value to outside the disc along the clearest direction"""
        base = cmath.phase(v - center) if abs(v - center) > 1e-12 else 0.0
        best = None
        for k in range(KEYHOLE_TURNS):
            theta = base + k * math.pi / 8
            u = cmath.exp(1j * theta)
            w = v - center
            proj = (np.conj(u) * w).real
            length = -proj + math.sqrt(max(0.0, proj * proj - abs(w) ** 2 + (radius + 0.1) ** 2))
            end = v + length * u
            clearance = min((float(_segment_distances(v, end, c.curve).min()) for c in curves), default=math.inf)
            if best is None or clearance > best['clearance'] + 1e-12:
                best = {'center': v, 'end': end, 'direction': theta, 'clearance': clearance}
        best['width'] = min(Config.TUBE_MARGIN, 0.5 * best['clearance'])
        return best

    @staticmethod
    def _check_candidate(f: RationalMap, n: int, p: complex, candidate: dict) -> dict:
        center, radius = cparse(candidate['center']), candidate['radius']
        result = {'candidate': candidate, 'passed': False}
        if not is_inf(p) and abs(p - center) <= radius:
            result['reason'] = "the attracting fixed point lies in the disc"
            return result
        values = [v for v in MapAnalysis.critical_values_of_iterate(f, n) if not is_inf(v)]
        inside = [v for v in values if abs(v - center) <= radius]
        if candidate['kind'] == 'round' and inside:
            result['reason'] = "critical values of the iterate lie in the disc"
            result['critical_values_inside'] = [cjson(v) for v in inside]
            return result

        boundary = PathLift.circle(center, radius)
        try:
            levels = CurveTopology.pullback(f, [boundary], n)
        except PreconditionFailed as e:
            result['reason'] = f"boundary could not be pulled back: {str(e)}"
            return result
        curves = levels[-1]

        keyholes = []
        if candidate['kind'] == 'tube':
            for v in inside:
                hole = Certify._keyhole(v, center, radius, curves)
                if hole['width'] < Config.TUBE_MIN_WIDTH:
                    result['reason'] = f"no room for a channel from {format_complex(v)}"
                    return result
                keyholes.append(hole)
            result['keyholes'] = [{'center': cjson(h['center']), 'end': cjson(h['end']),
                                   'direction': h['direction'], 'width': h['width']} for h in keyholes]

        def removed(z: complex) -> bool:
            return any(float(_point_segment(np.array([z]), h['center'], h['end'])[0]) <= h['width'] for h in keyholes)

        # (a) critical values of the iterate
        trapped = [v for v in inside if not removed(v)]
        if trapped:
            result['reason'] = "critical values of the iterate lie in the candidate"
            result['critical_values_inside'] = [cjson(v) for v in trapped]
            return result

        # (b) preimage curves strictly inside the candidate
        clearance = math.inf
        for c in curves:
            gap = radius - float(np.abs(c.curve.z - center).max())
            for h in keyholes:
                gap = min(gap, float(_segment_distances(h['center'], h['end'], c.curve).min()) - h['width'])
            clearance = min(clearance, gap)
        result['min_clearance'] = clearance
        if clearance < Config.NESTING_MARGIN:
            result['reason'] = f"preimage curves come within {clearance:.3e} of the candidate boundary"
            return result
        rim = [center + radius * cmath.exp(2j * math.pi * k / 16) for k in range(16)]
        rim = [z for z in rim if not removed(z)]
        for c in curves:
            if any(CurveTopology.winding_number(c, z) != 0 for z in rim):
                result['reason'] = "a preimage curve winds around the candidate boundary"
                return result

        result['passed'] = True
        result['reason'] = "ok"
        result['curves'] = _traced_dump(curves)
        return result

    @staticmethod
    def s_cantor_witness(f: RationalMap, n: int, candidates: Sequence[dict] = None,
                         run: RunConfig = None) -> Certificate:
        """First candidate disc D' with f^-n(D') inside D' and no critical value of f^n in it"""
        if n < 1:
            raise ValueError("the iterate must be at least 1")
        p, _ = Certify._cond_c(f)
        candidates = [Certify._normalize_candidate(c) for c in (candidates or Certify.default_candidates())]
        tried = []
        witness = None
        for candidate in candidates:
            result = Certify._check_candidate(f, n, p, candidate)
            logger.info("candidate %s r=%.4g: %s", candidate['kind'], candidate['radius'], result['reason'])
            tried.append(result)
            if result['passed']:
                witness = result
                break

        evidence = {'tried': [{k: v for k, v in t.items() if k != 'curves'} for t in tried]}
        if witness is not None:
            census = Certify.basin_census(f, run=run)
            evidence['witness'] = witness
            evidence['census_consistent'] = census.verdict == Verdict.PASS.value
            verdict = Verdict.S_CANTOR
        else:
            verdict = Verdict.ALL_FAILED
        tube = {'margin': Config.TUBE_MARGIN, 'min_width': Config.TUBE_MIN_WIDTH}
        return Certificate(CertificateKind.S_CANTOR, verdict.value,
                           Certify.parameters(f, run, n=n, candidates=candidates, tube=tube), evidence)

    # --- figure reproduction -----------------------------------------------------

    @staticmethod
    def _winding_table(curves: ClosedCurveSet, marks: Sequence) -> Dict[str, List[int]]:
        return {name: [CurveTopology.winding_number(c, z) for c in curves] for name, z in marks}

    @staticmethod
    def _growth_check(f: RationalMap, a: complex) -> dict:
        """Quasi-random samples of 5/3 < |z| <= 10 must satisfy |f(z)| > |a||z|"""
        n = Config.GROWTH_SAMPLES
        offset = np.random.default_rng(Config.SEED).random(2)
        k = np.arange(1, n + 1)
        u = np.mod(offset[0] + k * (math.sqrt(2) - 1), 1.0)
        v = np.mod(offset[1] + k * (math.sqrt(3) - 1), 1.0)
        r = GROWTH_INNER + (GROWTH_OUTER - GROWTH_INNER) * (1 - u)
        z = r * np.exp(2j * math.pi * v)
        w = SphereService.eval_array(f, z)
        bad = ~(np.abs(w) > abs(a) * np.abs(z))
        out = {'samples': n, 'violations': int(bad.sum())}
        if bad.any():
            out['first_violation'] = cjson(complex(z[np.argmax(bad)]))
        return out

    @staticmethod
    def figure1_report(a: complex, run: RunConfig = None) -> Certificate:
        """Two levels of preimages of |z| <= 3/2 under the quartic and their annuli"""
        a = complex(a)
        f = PresetService.quartic(a)
        crit = [c.to_complex() for c, _ in MapAnalysis.critical_points(f).points]
        branch = sorted((c for c in crit if not is_inf(c) and abs(c) > 1e-9), key=lambda z: (z.real, z.imag))
        marks = [("-1", -1 + 0j), ("1", 1 + 0j)] + [(f"c{k + 1}", c) for k, c in enumerate(branch)]

        boundary = PathLift.circle(0j, FIGURE_RADIUS)
        level1, level2 = CurveTopology.pullback(f, [boundary], 2)
        problems = []
        evidence: Dict[str, object] = {}

        for tag, curves, count, degree in (('level1', level1, 4, 1), ('level2', level2, 8, 2)):
            graph = CurveTopology.region_nesting(curves, marks)
            pairs = CurveTopology.annuli(graph)
            holes = [[graph.labels[m] for m in graph.marks_inside(inner)] for _, inner in pairs]
            evidence[tag] = {
                'curves': _traced_dump(curves),
                'nesting': graph.to_dict(),
                'annuli': [{'outer': o, 'inner': i, 'hole': h} for (o, i), h in zip(pairs, holes)],
                'winding': Certify._winding_table(curves, marks),
            }
            if len(curves) != count:
                problems.append(f"{tag}: {len(curves)} curves instead of {count}")
            if any(c.degree != degree for c in curves):
                problems.append(f"{tag}: curve degrees {[c.degree for c in curves]}")
            if len(pairs) != count // 2:
                problems.append(f"{tag}: {len(pairs)} annuli instead of {count // 2}")
            if tag == 'level1':
                if sorted(sorted(h) for h in holes) != [["-1"], ["1"]]:
                    problems.append(f"level1 holes {holes} do not separate -1 and 1")
                level1_pairs = {frozenset(pair) for pair in pairs}
            else:
                if any(len([m for m in h if m.startswith('c')]) != 1 for h in holes):
                    problems.append(f"level2 holes {holes} do not hold one critical point each")
                for name in ("-1", "1"):
                    if graph.enclosing[graph.labels.index(name)]:
                        problems.append(f"level2 curves enclose {name}")
                covers = [frozenset((curves.curves[o].source, curves.curves[i].source)) for o, i in pairs]
                evidence[tag]['covers'] = [sorted(c) for c in covers]
                if any(c not in level1_pairs for c in covers):
                    problems.append("a level2 annulus does not cover a level1 annulus")

        if abs(a) > 2:
            growth = Certify._growth_check(f, a)
            evidence['growth'] = growth
            if growth['violations']:
                problems.append(f"growth bound fails at {growth['violations']} samples")

        if problems:
            raise TopologyMismatch("; ".join(problems), evidence=evidence)
        return Certificate(CertificateKind.FIGURE1, Verdict.PASS.value,
                           Certify.parameters(f, run, a=format_complex(a), disc_radius=FIGURE_RADIUS), evidence)

    # --- basin census ---------------------------------------------------------------

    @staticmethod
    def basin_census(f: RationalMap, p: complex = None, run: RunConfig = None) -> Certificate:
        """Critical values in the growing basin component U_k, counted with multiplicity"""
        cond_p, _ = Certify._cond_c(f)
        p = cond_p if p is None else complex(p)
        target = 2 * f.degree - 4
        domain = MapAnalysis.simple_domain(f, p)
        values = [(v.to_complex(), m) for v, m in MapAnalysis.critical_points(f).distinct_values()]
        values = [(v, m) for v, m in values if SphereService.chordal_dist(v, p) > Config.LANDING_TOL]

        def side(curves: Sequence[Polyline], z: complex, skip: int = None) -> set:
            return {k for k, c in enumerate(curves) if k != skip and CurveTopology.winding_number(c, z) != 0}

        kept: List[Polyline] = [domain.boundary]
        levels, count, inside = [], 0, []
        for level in range(Config.CENSUS_LEVELS + 1):
            if level:
                found = ClosedCurveSet()
                for source, c in enumerate(kept):
                    found.curves.extend(CurveTopology.preimage_curve_trace(f, c, level, source).curves)
                curves = [c.curve for c in found]
                try:
                    p_side = side(curves, p)
                except (NonInteger, PreconditionFailed) as e:
                    raise ChainAmbiguous(f"cannot place the attractor at level {level}: {str(e)}") from e
                enclosing = {k: side(curves, c.start, skip=k) for k, c in enumerate(curves)}
                kept = [c for k, c in enumerate(curves) if enclosing[k] == p_side - {k}]
                total = len(curves)
            else:
                total = 1
            try:
                p_vector = side(kept, p)
            except (NonInteger, PreconditionFailed) as e:
                raise ChainAmbiguous(f"cannot place the attractor at level {level}: {str(e)}") from e

            count, inside = 0, []
            for v, m in values:
                try:
                    same = side(kept, v) == p_vector
                except PreconditionFailed:
                    same = False
                if same:
                    count += m
                    inside.append({'value': cjson(v), 'multiplicity': m})
            levels.append({'level': level, 'curves': total, 'kept': len(kept), 'count': count, 'inside': inside})
            logger.info("census level %d: %d boundary curves, count %d of %d", level, len(kept), count, target)
            if count >= target:
                break

        verdict = Verdict.PASS if count >= target else Verdict.FAIL
        evidence = {'target': target, 'count': count, 'levels': levels, 'simple_domain': domain.to_dict()}
        return Certificate(CertificateKind.BASIN_CENSUS, verdict.value,
                           Certify.parameters(f, run, attractor=cjson(p)), evidence)

    # --- the t-Cantor pipeline --------------------------------------------------------

    @staticmethod
    def t_cantor_test(f: RationalMap, run: RunConfig = None) -> Certificate:
        p, cond_evidence = Certify._cond_c(f)
        quartic = f.preset == QUARTIC
        radial = PathLift.radial_for(f)
        labels, points, tracked = CurveTopology.postcritical_punctures(f, p)
        cutsys = CurveTopology.build_cut_system(points, radial.basepoint, labels, tracked)
        table = CurveTopology.wreath_recursion_extract(f, radial, cutsys)
        evidence = {
            'attractor': cjson(p),
            'radial': {'basepoint': cjson(radial.basepoint), 'endpoints': [cjson(x) for x in radial.endpoints]},
            'cut_system': cutsys.to_dict(),
            'recursion': table.to_dict(),
        }

        if quartic:
            K = sum(1 for g in labels if g.startswith('C'))
            expected = WreathAlgebra.quartic_recursion_table(K)
            if table.generators != expected.generators or table.shape() != expected.shape():
                raise ShapeMismatch("extracted recursion differs from the symbolic quartic recursion",
                                    evidence={'extracted': table.to_dict(), 'expected': expected.to_dict()})

        q = WreathAlgebra.reduce_recursion(table)
        evidence['quotient'] = q.to_dict()
        evidence['nucleus'] = WreathAlgebra.nucleus_test(q)
        evidence['finiteness'] = WreathAlgebra.finiteness_test(table)

        if quartic:
            cases = WreathAlgebra.four_cases(q)
            evidence['cases'] = [c.to_dict() for c in cases]
            evidence['persistence'] = [WreathAlgebra.claim2_search(c) for c in cases]
            claim3 = WreathAlgebra.claim3_check(table)
            evidence['claim3'] = claim3
            if not claim3['holds']:
                raise ClaimViolation("a word with trivial permutation escapes the kernel", evidence=claim3)
            verdict = Verdict.NOT_T_CANTOR
        elif evidence['nucleus']['injective_certificate'] == 'pass' and f.is_polynomial and f.degree == 2:
            verdict = Verdict.INJECTIVE_AT_QUOTIENT
        else:
            verdict = Verdict.UNKNOWN
        logger.info("t-Cantor verdict: %s", verdict.value)
        return Certificate(CertificateKind.T_CANTOR, verdict.value, Certify.parameters(f, run), evidence)

    # --- replay -----------------------------------------------------------------------

    @staticmethod
    def replay(document: dict) -> Certificate:
        """Re-run the certifier behind a stored certificate and demand identical JSON"""
        try:
            kind = CertificateKind(document['kind'])
            params = document['parameters']
        except (KeyError, ValueError) as e:
            raise PreconditionFailed(f"not a certificate document: {str(e)}") from e
        run = RunConfig(**params.get('run', {}))
        with run.applied():
            f = MapSpec(**params['map']).build() if 'map' in params else None
            if kind == CertificateKind.CLASSIFY:
                cert = Certify.classify(f, run)
            elif kind == CertificateKind.CLAIM1:
                cert = Certify.claim1(run)
            elif kind == CertificateKind.S_CANTOR:
                cert = Certify.s_cantor_witness(f, int(params['n']), params['candidates'], run)
            elif kind == CertificateKind.FIGURE1:
                cert = Certify.figure1_report(parse_complex(params['a']), run)
            elif kind == CertificateKind.BASIN_CENSUS:
                cert = Certify.basin_census(f, cparse(params['attractor']), run)
            else:
                cert = Certify.t_cantor_test(f, run)

        fresh, stored = ReportService.to_jsonable(cert), ReportService.to_jsonable(document)
        if fresh != stored:
            keys = sorted(k for k in set(fresh) | set(stored) if fresh.get(k) != stored.get(k))
            raise ReplayMismatch(f"replay differs in {', '.join(keys)}",
                                 evidence={'differing': keys, 'verdict': cert.verdict})
        logger.info("replay of %s reproduced verdict %s", kind.value, cert.verdict)
        return cert
