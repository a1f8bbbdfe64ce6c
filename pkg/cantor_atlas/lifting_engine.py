import logging
import math
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from cantor_atlas.config import Config
from cantor_atlas.dynamics_engine import MapAnalysis
from cantor_atlas.errors import (
    AmbiguousMatch, NearCriticalPoint, NotContracting, PreconditionFailed, PresetOnly, StepFloor,
)
from cantor_atlas.models import INF, MonodromyResult, Permutation, Polyline, Radial, RationalMap, is_inf
from cantor_atlas.services.preset_service import QUARTIC
from cantor_atlas.services.sphere_service import SphereService, chart_polys

logger = logging.getLogger(__name__)

MAX_CODING_DEPTH = 40


def _chart(z: complex) -> Tuple[str, complex]:
    if is_inf(z):
        return 'I', 0j
    if abs(z) > Config.CHART_SWITCH:
        return 'I', 1 / z
    return 'F', z


def _unchart(chart: str, u: complex) -> complex:
    if chart == 'F':
        return u
    return INF if u == 0 else 1 / u


class _LiftContext:
    """Chart polynomials and critical points of one map, shared by all lifts"""

    def __init__(self, f: RationalMap):
        self.f = f
        self.polys = chart_polys(f)
        crit = MapAnalysis.critical_points(f)
        self.critical = [c.to_complex() for c, _ in crit.points]
        self.critical_values = [v.to_complex() for v in crit.values]
        self.coords = {
            'F': [c for c in self.critical if not is_inf(c)],
            'I': [0j if is_inf(c) else 1 / c for c in self.critical if is_inf(c) or c != 0],
        }

    def critical_distance(self, sc: str, u: complex) -> float:
        return min((abs(u - c) for c in self.coords[sc]), default=math.inf)

    def correct(self, z: complex, target: complex, tol: float) -> Optional[complex]:
        """Newton corrector from z towards a preimage of target; None asks for a smaller step"""
        sc, u = _chart(z)
        tc, T = _chart(target)
        rho = self.critical_distance(sc, u)
        if rho < Config.CRITICAL_PROXIMITY:
            raise NearCriticalPoint(f"lift came within {rho:.2e} of a critical point near {z:.6g}")
        value, slope = self.polys.value_and_derivative(sc, tc, u)
        if is_inf(value) or is_inf(slope) or slope == 0:
            return None
        predicted = u - (value - T) / slope
        first = abs(predicted - u)
        if first > Config.SHEET_GUARD * rho:
            return None
        un, previous = predicted, first
        for _ in range(Config.NEWTON_STEPS - 1):
            value, slope = self.polys.value_and_derivative(sc, tc, un)
            if is_inf(value) or is_inf(slope) or slope == 0:
                return None
            step = (value - T) / slope
            if abs(step) > 0.5 * previous + 1e-15:
                return None
            un, previous = un - step, abs(step)
            if previous <= 1e-15 * max(1.0, abs(un)):
                break
        if abs(un - predicted) > 0.5 * first + 1e-14:
            return None
        z_new = _unchart(sc, un)
        if SphereService.chordal_dist(SphereService.eval(self.f, z_new), target) > tol:
            return None
        return z_new


@lru_cache(maxsize=16)
def _context(f: RationalMap) -> _LiftContext:
    return _LiftContext(f)


def _interpolate(y0: complex, y1: complex, s: float) -> complex:
    if is_inf(y0) or is_inf(y1) or min(abs(y0), abs(y1)) > Config.CHART_SWITCH:
        eta0 = 0j if is_inf(y0) else 1 / y0
        eta1 = 0j if is_inf(y1) else 1 / y1
        eta = (1 - s) * eta0 + s * eta1
        return INF if eta == 0 else 1 / eta
    return y0 + s * (y1 - y0)


class PathLift:
    """Path lifting through f, monodromy of loops and the coding map of a radial"""

    @staticmethod
    def segment(a: complex, b: complex, gap: float = None) -> Polyline:
        """Straight segment sampled evenly in chordal arclength"""
        gap = gap or 0.4 * Config.MAX_GAP
        fine = np.linspace(0.0, 1.0, 2049)
        pts = a + fine * (b - a)
        steps = 2 * np.abs(np.diff(pts)) / np.sqrt((1 + np.abs(pts[:-1]) ** 2) * (1 + np.abs(pts[1:]) ** 2))
        cum = np.concatenate([[0.0], np.cumsum(steps)])
        n = max(2, int(math.ceil(cum[-1] / gap)) + 1)
        s = np.interp(np.linspace(0.0, cum[-1], n), cum, fine)
        z = a + s * (b - a)
        z[0], z[-1] = a, b
        return Polyline.from_points(z)

    @staticmethod
    def path_through(points: Sequence[complex], gap: float = None) -> Polyline:
        return Polyline.concat(*[PathLift.segment(a, b, gap) for a, b in zip(points, points[1:])])

    @staticmethod
    def circle(center: complex, radius: float, start_angle: float = math.pi / 2, n: int = None) -> Polyline:
        """Counterclockwise closed circle starting and ending at the given angle"""
        if n is None:
            length = 2 * math.pi * radius * 2 / (1 + max(0.0, abs(center) - radius) ** 2)
            n = max(64, int(math.ceil(length / (0.4 * Config.MAX_GAP))))
        theta = start_angle + 2 * math.pi * np.arange(n + 1) / n
        z = center + radius * np.exp(1j * theta)
        z[-1] = z[0]
        return Polyline.from_points(z)

    @staticmethod
    def lift_path(f: RationalMap, gamma: Polyline, z0: complex, tol: float = None) -> Polyline:
        """Continuous lift of gamma through f starting at z0 (f(z0) = gamma(0))"""
        tol = tol or Config.LIFT_TOL
        ctx = _context(f)
        if SphereService.chordal_dist(SphereService.eval(f, z0), gamma.start) > 10 * tol:
            raise PreconditionFailed(f"{z0} is not a preimage of the path start {gamma.start}")
        for v in ctx.critical_values:
            near = SphereService.chordal_array(gamma.z, v).min()
            if near <= Config.CRITICAL_VALUE_AVOIDANCE:
                raise PreconditionFailed(f"path passes within {near:.2e} of critical value {v:.6g}")

        ts, zs = [float(gamma.t[0])], [complex(z0)]
        z = complex(z0)
        for k in range(len(gamma) - 1):
            y0, y1 = complex(gamma.z[k]), complex(gamma.z[k + 1])
            t0, t1 = float(gamma.t[k]), float(gamma.t[k + 1])
            s, h = 0.0, 1.0
            while s < 1.0:
                s_new = min(1.0, s + h)
                target = y1 if s_new == 1.0 else _interpolate(y0, y1, s_new)
                z_new = ctx.correct(z, target, tol)
                if z_new is None or SphereService.chordal_dist(z_new, z) > Config.MAX_GAP:
                    h /= 2
                    if h < Config.STEP_FLOOR:
                        raise StepFloor(f"lift step fell below {Config.STEP_FLOOR} on segment {k} near {z:.6g}")
                    continue
                z, s = z_new, s_new
                ts.append(t0 + s * (t1 - t0))
                zs.append(z)
                h = min(1.0, 2 * h)
        return Polyline(np.array(ts), np.array(zs, dtype=complex))

    @staticmethod
    def match_endpoint(z: complex, endpoints: Sequence[complex]) -> int:
        dist = sorted((SphereService.chordal_dist(z, x), j) for j, x in enumerate(endpoints))
        d1, j = dist[0]
        if len(dist) > 1 and dist[1][0] < Config.MATCH_RATIO * d1:
            raise AmbiguousMatch(f"lift terminus {z:.6g} is not clearly nearest to one preimage")
        return j

    @staticmethod
    def monodromy(f: RationalMap, loop: Polyline, radial: Radial) -> MonodromyResult:
        """Permutation of the preimages of the basepoint induced by lifting the loop"""
        if not loop.closed:
            raise PreconditionFailed("monodromy needs a closed loop")
        if SphereService.chordal_dist(loop.start, radial.basepoint) > 1e-9:
            raise PreconditionFailed("loop is not based at the radial basepoint")
        endpoints = radial.endpoints
        with ThreadPoolExecutor(max_workers=Config.THREADS) as pool:
            arcs = list(pool.map(lambda x: PathLift.lift_path(f, loop, x), endpoints))
        images = [PathLift.match_endpoint(arc.end, endpoints) for arc in arcs]
        if sorted(images) != list(range(len(endpoints))):
            raise AmbiguousMatch(f"lift termini do not form a permutation: {images}")
        return MonodromyResult(permutation=Permutation(tuple(images)), arcs=arcs)

    @staticmethod
    def standard_radial(f: RationalMap) -> Radial:
        """Basepoint i with straight legs to its four real preimages, ordered left to right"""
        if f.preset != QUARTIC:
            raise PresetOnly("the standard radial exists only for the quartic family")
        a = complex(f.param('a'))
        if abs(a.real) > 1e-12 or a.imag <= 0:
            raise PresetOnly(f"the standard radial needs a = ic with c > 0, got a = {a}")
        if a.imag < 2:
            logger.warning("standard radial used with c = %.4g < 2", a.imag)
        pre = MapAnalysis.preimages(f, 1j)
        if any(is_inf(x) or abs(x.imag) > 1e-8 for x in pre):
            raise PreconditionFailed(f"preimages of i are not real: {pre}")
        xs = sorted(x.real for x in pre)
        radial = Radial(basepoint=1j, legs=[PathLift.segment(1j, complex(x)) for x in xs])
        PathLift.check_radial(f, radial)
        return radial

    @staticmethod
    def radial_for(f: RationalMap, basepoint: complex = 1j) -> Radial:
        if f.preset == QUARTIC:
            return PathLift.standard_radial(f)
        return PathLift.straight_radial(f, basepoint)

    @staticmethod
    def straight_radial(f: RationalMap, basepoint: complex) -> Radial:
        """Straight legs from the basepoint to each of its preimages, ordered by real then imaginary part"""
        basepoint = complex(basepoint)
        pre = MapAnalysis.preimages(f, basepoint)
        if any(is_inf(x) for x in pre):
            raise PreconditionFailed("basepoint has a preimage at infinity")
        pre = sorted(pre, key=lambda z: (round(z.real, 10), round(z.imag, 10)))
        if min(abs(a - b) for a, b in zip(pre, pre[1:])) <= 1e-6:
            raise PreconditionFailed("basepoint is a critical value")
        radial = Radial(basepoint=basepoint, legs=[PathLift.segment(basepoint, x) for x in pre])
        PathLift.check_radial(f, radial)
        return radial

    @staticmethod
    def check_radial(f: RationalMap, radial: Radial) -> float:
        """Smallest chordal gap between a leg and the finite postcritical set; must exceed the corridor"""
        clearance = math.inf
        postcritical = [q for q in MapAnalysis._postcritical(f, INF) if not is_inf(q)]
        for leg in radial.legs:
            a, ab = leg.z[:-1], np.diff(leg.z)
            denom = np.abs(ab) ** 2
            for q in postcritical:
                # nearest point of every edge, not only the samples
                t = np.clip(((q - a) * np.conj(ab)).real / np.where(denom > 0, denom, 1.0), 0.0, 1.0)
                gap = float(SphereService.chordal_array(a + t * ab, q).min())
                if gap <= Config.CORRIDOR:
                    raise PreconditionFailed(f"leg to {leg.end:.6g} passes the postcritical point {q:.6g}")
                clearance = min(clearance, gap)
        logger.debug("radial clearance %.3g", clearance)
        return clearance

    @staticmethod
    def coding_paths(f: RationalMap, radial: Radial, words: Sequence[Tuple[int, ...]]) -> Dict[Tuple[int, ...], Polyline]:
        """Paths l_w with l_(i w') = l_i followed by the lift of l_w' from x_i (letters 1-based)"""
        cache: Dict[Tuple[int, ...], Polyline] = {}
        endpoints = radial.endpoints

        def path(word: Tuple[int, ...]) -> Polyline:
            if word in cache:
                return cache[word]
            head, tail = word[0], word[1:]
            if not 1 <= head <= len(radial.legs):
                raise ValueError(f"letter {head} outside 1..{len(radial.legs)}")
            leg = radial.legs[head - 1]
            if tail:
                lifted = PathLift.lift_path(f, path(tail), endpoints[head - 1])
                line = Polyline.concat(leg, lifted)
            else:
                line = leg
            cache[word] = line
            return line

        return {tuple(w): path(tuple(w)) for w in words}

    @staticmethod
    def coding_point(f: RationalMap, radial: Radial, word: Sequence[int]) -> complex:
        """Endpoint of l_w, the depth-|w| approximation of the coding map at w"""
        word = tuple(word)
        if len(word) > MAX_CODING_DEPTH:
            raise PreconditionFailed(f"coding words are limited to {MAX_CODING_DEPTH} letters")
        if not word:
            return radial.basepoint
        return PathLift.coding_paths(f, radial, [word])[word].end

    @staticmethod
    def coding_map_approx(f: RationalMap, radial: Radial, prefix: Sequence[int],
                          window: int = 10) -> Dict[str, object]:
        """Coding point of a prefix with a Cauchy estimate from the last five prefix points"""
        prefix = tuple(prefix)
        if not prefix:
            raise ValueError("coding_map_approx needs a non-empty prefix")
        points = [PathLift.coding_point(f, radial, prefix[:k]) for k in range(1, len(prefix) + 1)]
        tail = points[-5:]
        bound = max(SphereService.chordal_dist(a, b) for a in tail for b in tail)
        steps = [SphereService.chordal_dist(a, b) for a, b in zip(points, points[1:])]
        if len(steps) >= window:
            recent = steps[-window:]
            half = window // 2
            if sum(recent[half:]) >= sum(recent[:half]):
                raise NotContracting(f"prefix steps stopped shrinking: {recent}")
        return {'point': points[-1], 'diameter_bound': bound, 'steps': steps}

    @staticmethod
    def cylinder_diameters(f: RationalMap, radial: Radial, n: int) -> Dict[str, object]:
        """Endpoints of all words of length n and cylinder diameters by prefix length"""
        d = len(radial.legs)
        words = list(product(range(1, d + 1), repeat=n))
        paths = PathLift.coding_paths(f, radial, words)
        points = {w: paths[w].end for w in words}
        diameters = []
        for k in range(1, n + 1):
            groups: Dict[Tuple[int, ...], List[complex]] = {}
            for w, z in points.items():
                groups.setdefault(w[:k], []).append(z)
            diameters.append(max(max(abs(a - b) for a in g for b in g) for g in groups.values()))
        for k in range(1, len(diameters)):
            if diameters[k] > diameters[k - 1] + 1e-12:
                raise NotContracting(f"cylinder diameter grew from {diameters[k - 1]:.3e} to {diameters[k]:.3e}")
        return {'points': {''.join(map(str, w)): z for w, z in points.items()}, 'diameters': diameters}
