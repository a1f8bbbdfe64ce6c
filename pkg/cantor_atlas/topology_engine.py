import cmath
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from cantor_atlas.config import Config
from cantor_atlas.dynamics_engine import ORBIT_CAP, MapAnalysis
from cantor_atlas.errors import (
    AmbiguousMatch, Crowded, DegreeMismatch, GrazingCut, NonInteger, PreconditionFailed, TopologyMismatch,
)
from cantor_atlas.lifting_engine import PathLift
from cantor_atlas.models import (
    ClosedCurveSet, CutSystem, FreeWord, Permutation, Polyline, Radial, RationalMap, RecursionTable,
    RegionGraph, TracedCurve, is_inf,
)
from cantor_atlas.services.sphere_service import SphereService

logger = logging.getLogger(__name__)

TRACKED_LETTERS = "ABEFGHIJ"
CHAIN_PREFIXES = "CDKLMN"

CurveLike = Union[Polyline, TracedCurve]


def _polyline(c: CurveLike) -> Polyline:
    return c.curve if isinstance(c, TracedCurve) else c


def _snap_end(line: Polyline, z: complex) -> Polyline:
    pts = line.z.copy()
    pts[-1] = z
    return Polyline(line.t.copy(), pts)


def _dedupe(points: Sequence[complex]) -> List[complex]:
    out = [complex(points[0])]
    for z in points[1:]:
        if abs(z - out[-1]) > 1e-12:
            out.append(complex(z))
    return out


class CurveTopology:
    """Cut systems, loop words, winding numbers and pulled-back curves"""

    @staticmethod
    def postcritical_punctures(f: RationalMap, p: complex = None,
                               bound: float = None) -> Tuple[List[str], List[complex], Tuple[str, ...]]:
        """Truncated postcritical set with generator labels.

        Critical values landing on p in one step get A, B, E, ... and are the
        tracked letters. Every other critical value starts a chain C0, C1, ...
        that stops once the orbit is absorbed by p.
        """
        bound = bound or Config.TRUNCATION_BOUND
        if p is None:
            attracting = sorted(MapAnalysis.fixed_points(f).attracting, key=lambda fp: abs(fp.multiplier))
            if not attracting:
                raise PreconditionFailed("no attracting fixed point to truncate towards")
            p = attracting[0].point.to_complex()
        p = complex(p)

        def absorbed(z: complex) -> bool:
            if is_inf(p):
                return is_inf(z) or abs(z) > bound
            return SphereService.chordal_dist(z, p) < Config.TRAP_RADIUS

        crit = MapAnalysis.critical_points(f)
        values = [v.to_complex() for v, _ in crit.distinct_values()]
        values = sorted((v for v in values if SphereService.chordal_dist(v, p) > Config.LANDING_TOL),
                        key=lambda z: (round(z.real, 9), round(z.imag, 9)))
        landing = [v for v in values if SphereService.chordal_dist(SphereService.eval(f, v), p) <= Config.LANDING_TOL]
        if len(landing) > len(TRACKED_LETTERS):
            raise PreconditionFailed(f"{len(landing)} critical values land on the attractor")

        labels = [TRACKED_LETTERS[k] for k in range(len(landing))]
        points = list(landing)
        chains = 0
        for v in values:
            if v in landing or absorbed(v):
                continue
            if any(SphereService.chordal_dist(v, q) <= Config.LANDING_TOL for q in points):
                continue
            if chains >= len(CHAIN_PREFIXES):
                raise PreconditionFailed("too many postcritical chains")
            prefix, z, k = CHAIN_PREFIXES[chains], v, 0
            while not absorbed(z):
                if any(SphereService.chordal_dist(z, q) <= Config.LANDING_TOL for q in points):
                    break
                if k >= ORBIT_CAP:
                    raise PreconditionFailed(f"chain {prefix} was not absorbed after {ORBIT_CAP} points")
                labels.append(f"{prefix}{k}")
                points.append(z)
                z = SphereService.eval(f, z)
                k += 1
            chains += 1
        logger.info("postcritical punctures: %s", ", ".join(labels))
        return labels, points, tuple(labels[:len(landing)])

    @staticmethod
    def build_cut_system(punctures: Sequence[complex], basepoint: complex,
                         labels: Sequence[str] = None, tracked: Sequence[str] = ()) -> CutSystem:
        """Parallel rays from every puncture in the first feasible direction of a clockwise sweep"""
        pts = [complex(p) for p in punctures]
        basepoint = complex(basepoint)
        labels = list(labels) if labels else [f"g{k + 1}" for k in range(len(pts))]
        if any(is_inf(p) for p in pts) or is_inf(basepoint):
            raise PreconditionFailed("cut systems need finite punctures and basepoint")
        seps = [abs(a - b) for k, a in enumerate(pts) for b in pts[k + 1:]]
        if seps and min(seps) <= Config.CORRIDOR:
            raise PreconditionFailed(f"punctures only {min(seps):.2e} apart")
        to_base = [abs(p - basepoint) for p in pts]
        if to_base and min(to_base) <= Config.CORRIDOR:
            raise PreconditionFailed("basepoint coincides with a puncture")

        for k in range(8):
            direction = cmath.exp(1j * (-math.pi / 2 - k * math.pi / 4))
            rotation = -1j / direction
            rotated = [rotation * p for p in pts]
            b = rotation * basepoint
            xs = sorted(z.real for z in rotated)
            if any(x1 - x0 < Config.CORRIDOR for x0, x1 in zip(xs, xs[1:])):
                continue
            if any(abs(b.real - z.real) < Config.CORRIDOR and b.imag <= z.imag + Config.CORRIDOR for z in rotated):
                continue
            break
        else:
            raise Crowded("no ray direction keeps the cuts a corridor apart")

        gaps = [abs(x1 - x0) for x0, x1 in zip(xs, xs[1:])]
        radius = min([Config.LASSO_RADIUS] + [0.25 * s for s in seps + to_base] + [0.5 * g for g in gaps])
        height = max([z.imag for z in rotated] + [b.imag]) + 1.0
        logger.debug("cut direction %s, lasso radius %.3g", direction, radius)
        return CutSystem(basepoint=basepoint, punctures=pts, labels=labels, direction=direction,
                         corridor=Config.CORRIDOR, height=height, lasso_radius=radius, tracked=tuple(tracked))

    @staticmethod
    def generator_loop(cutsys: CutSystem, label: str) -> Polyline:
        """Lasso for one generator: over the top of every cut, down to the puncture, once around it"""
        rotation = cutsys.rotation
        back = 1 / rotation
        p = cutsys.puncture(label)
        zeta = rotation * p
        b = rotation * cutsys.basepoint
        rho = cutsys.lasso_radius
        corners = [complex(b.real, cutsys.height), complex(zeta.real, cutsys.height)]
        points = _dedupe([cutsys.basepoint] + [back * w for w in corners] + [p + back * 1j * rho])
        access = PathLift.path_through(points)
        circle = PathLift.circle(p, rho, start_angle=cmath.phase(back * 1j))
        return Polyline.concat(access, circle, access.reversed())

    @staticmethod
    def loop_to_word(cutsys: CutSystem, loop: Polyline) -> FreeWord:
        """Signed sequence of cut crossings, freely reduced"""
        if not loop.closed:
            raise PreconditionFailed("loop_to_word needs a closed loop")
        if not np.all(np.isfinite(loop.z)):
            raise PreconditionFailed("loop passes through infinity")
        w = cutsys.rotation * loop.z
        hits: List[Tuple[int, float, str, int]] = []
        for label, p in zip(cutsys.labels, cutsys.punctures):
            zeta = cutsys.rotation * p
            below = w.imag <= zeta.imag
            dist = np.where(below, np.abs(w.real - zeta.real), np.abs(w - zeta))
            if dist.min() < Config.GRAZING_TOL:
                raise GrazingCut(f"loop sample within {dist.min():.2e} of the cut from {label}")
            right = w.real >= zeta.real
            for k in np.nonzero(right[:-1] != right[1:])[0]:
                a, b = w[k], w[k + 1]
                s = (zeta.real - a.real) / (b.real - a.real)
                if a.imag + s * (b.imag - a.imag) < zeta.imag:
                    hits.append((int(k), float(s), label, 1 if b.real > a.real else -1))
        hits.sort(key=lambda h: (h[0], h[1]))
        return FreeWord(tuple((label, sign) for _, _, label, sign in hits))

    @staticmethod
    def winding_number(curve: CurveLike, z: complex, band: float = None) -> int:
        band = band or Config.WINDING_BAND
        z = complex(z)
        line = _polyline(curve)
        if is_inf(z):
            return 0
        if not np.all(np.isfinite(line.z)):
            raise PreconditionFailed("curve passes through infinity")
        d = np.append(line.z, line.z[0]) - z
        if np.abs(d).min() <= Config.GRAZING_TOL:
            raise PreconditionFailed(f"point {z:.6g} lies on the curve")
        total = float(np.angle(d[1:] / d[:-1]).sum()) / (2 * math.pi)
        n = int(round(total))
        if abs(total - n) > band:
            raise NonInteger(f"winding sum {total:.4f} around {z:.6g} is not near an integer")
        return n

    @staticmethod
    def winding_numbers(curve: CurveLike, points: Sequence[complex]) -> List[int]:
        return [CurveTopology.winding_number(curve, z) for z in points]

    @staticmethod
    def preimage_curve_trace(f: RationalMap, curve: CurveLike, level: int = 1, source: int = 0) -> ClosedCurveSet:
        """Components of f^-1(curve), each with the degree it maps with"""
        line = _polyline(curve)
        if not line.closed:
            raise PreconditionFailed("only closed curves can be pulled back")
        seeds = MapAnalysis.preimages(f, line.start)
        if any(is_inf(s) for s in seeds):
            raise PreconditionFailed("curve starts at the image of infinity")
        with ThreadPoolExecutor(max_workers=Config.THREADS) as pool:
            lifts = list(pool.map(lambda s: PathLift.lift_path(f, line, s), seeds))
        images = [PathLift.match_endpoint(arc.end, seeds) for arc in lifts]
        if sorted(images) != list(range(len(seeds))):
            raise AmbiguousMatch(f"lifted laps do not permute the seeds: {images}")

        traced, seen = [], set()
        for start in range(len(seeds)):
            if start in seen:
                continue
            cycle, i = [], start
            while i not in seen:
                seen.add(i)
                cycle.append(i)
                i = images[i]
            laps = [_snap_end(lifts[i], seeds[images[i]]) for i in cycle]
            component = Polyline.concat(*laps)
            gap = SphereService.chordal_dist(component.start, component.end)
            if gap > 1e-6:
                raise TopologyMismatch(f"traced component fails to close (gap {gap:.2e})")
            traced.append(TracedCurve(curve=_snap_end(component, component.start), level=level,
                                      source=source, degree=len(cycle)))
        result = ClosedCurveSet(curves=traced)
        if result.total_degree != f.degree:
            raise DegreeMismatch(f"component degrees sum to {result.total_degree}, expected {f.degree}")
        logger.debug("level %d trace of curve %d: %d components", level, source, len(traced))
        return result

    @staticmethod
    def pullback(f: RationalMap, curves: Sequence[CurveLike], levels: int,
                 keep=None) -> List[ClosedCurveSet]:
        """Level-by-level preimages; keep(level, curve_set) may prune what is pulled back next"""
        out: List[ClosedCurveSet] = []
        current = [_polyline(c) for c in curves]
        for level in range(1, levels + 1):
            found = ClosedCurveSet()
            for source, c in enumerate(current):
                found.curves.extend(CurveTopology.preimage_curve_trace(f, c, level, source).curves)
            out.append(found)
            chosen = keep(level, found) if keep else range(len(found))
            current = [found.curves[k].curve for k in chosen]
        return out

    @staticmethod
    def region_nesting(curves: Sequence[CurveLike], marks: Sequence[Tuple[str, complex]] = (),
                       curve_labels: Sequence[str] = None) -> RegionGraph:
        """Nesting forest of disjoint closed curves with marked points as leaves"""
        lines = [_polyline(c) for c in curves]
        n = len(lines)
        labels = list(curve_labels) if curve_labels else [f"curve{k}" for k in range(n)]
        labels += [name for name, _ in marks]
        samples = [line.start for line in lines] + [complex(z) for _, z in marks]
        enclosing: Dict[int, List[int]] = {}
        for node, z in enumerate(samples):
            enclosing[node] = [c for c in range(n)
                               if c != node and CurveTopology.winding_number(lines[c], z) != 0]
        for c in range(n):
            for e in enclosing[c]:
                if c in enclosing[e]:
                    raise TopologyMismatch(f"curves {labels[c]} and {labels[e]} enclose each other")
        parent = {node: (max(enc, key=lambda c: len(enclosing[c])) if enc else None)
                  for node, enc in enclosing.items()}
        return RegionGraph(labels=labels, n_curves=n, enclosing=enclosing, parent=parent)

    @staticmethod
    def annuli(graph: RegionGraph) -> List[Tuple[int, int]]:
        """(outer, inner) pairs bounding the annular regions of the nesting forest"""
        pairs = []
        for inner in range(graph.n_curves):
            outer = graph.parent[inner]
            if outer is not None and graph.depth(outer) % 2 == 0:
                pairs.append((outer, inner))
        return sorted(pairs)

    @staticmethod
    def resample(curve: CurveLike, n: int = None) -> Polyline:
        n = n or Config.CURVE_SAMPLES
        line = _polyline(curve)
        if len(line) <= n:
            return line
        idx = np.unique(np.round(np.linspace(0, len(line) - 1, n)).astype(int))
        return Polyline.from_points(line.z[idx])

    @staticmethod
    def wreath_recursion_extract(f: RationalMap, radial: Radial, cutsys: CutSystem) -> RecursionTable:
        """Permutation and slot words of every generator, read off lifted lassos"""
        if SphereService.chordal_dist(radial.basepoint, cutsys.basepoint) > 1e-12:
            raise PreconditionFailed("radial and cut system use different basepoints")
        permutations: Dict[str, Permutation] = {}
        slots: Dict[str, Tuple[FreeWord, ...]] = {}
        endpoints = radial.endpoints
        for label in cutsys.labels:
            loop = CurveTopology.generator_loop(cutsys, label)
            mono = PathLift.monodromy(f, loop, radial)
            words = []
            for i, arc in enumerate(mono.arcs):
                j = mono.permutation(i)
                closed = Polyline.concat(radial.legs[i], _snap_end(arc, endpoints[j]), radial.legs[j].reversed())
                words.append(CurveTopology.loop_to_word(cutsys, closed))
            permutations[label] = mono.permutation
            slots[label] = tuple(words)
            logger.info("%s -> %s %s", label, mono.permutation.to_cycles(), [str(w) for w in words])
        return RecursionTable(
            degree=len(radial.legs),
            generators=tuple(cutsys.labels),
            permutations=permutations,
            slots=slots,
            tracked=cutsys.tracked,
            punctures=dict(zip(cutsys.labels, cutsys.punctures)),
        )

    @staticmethod
    def conjugate_recursion(table: RecursionTable, h: Sequence[FreeWord]) -> RecursionTable:
        """Change of radial: slot i of g becomes h_i * slot_i(g) * h_(alpha(g)(i))^-1"""
        if len(h) != table.degree:
            raise ValueError(f"need {table.degree} conjugating words, got {len(h)}")
        slots = {}
        for g in table.generators:
            perm = table.permutations[g]
            slots[g] = tuple(h[i] * table.slots[g][i] * h[perm(i)].inverse() for i in range(table.degree))
        return RecursionTable(
            degree=table.degree,
            generators=table.generators,
            permutations=dict(table.permutations),
            slots=slots,
            tracked=table.tracked,
            punctures=dict(table.punctures),
        )
