import logging
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as P

from cantor_atlas.config import Config
from cantor_atlas.errors import (
    NoDomain, ParabolicSuspected, PreconditionFailed, Undecided,
)
from cantor_atlas.models import (
    INF, CriticalData, FixedPoint, FixedPointClass, FixedPointReport, JuliaGrid,
    OrbitResult, Polyline, RationalMap, SimpleDomain, SpherePoint, is_inf,
)
from cantor_atlas.services.root_service import RootService
from cantor_atlas.services.sphere_service import SphereService

logger = logging.getLogger(__name__)

ORBIT_CAP = 64
CYCLE_WINDOW = 32


def _trim_relative(coeffs: np.ndarray, rel: float = 1e-14) -> np.ndarray:
    c = np.asarray(coeffs, dtype=complex)
    scale = float(np.max(np.abs(c))) if c.size else 0.0
    end = c.size
    while end > 1 and abs(c[end - 1]) <= rel * scale:
        end -= 1
    return c[:end]


class MapAnalysis:
    """Critical data, fixed points, attracting basins and escape-time grids"""

    @staticmethod
    @lru_cache(maxsize=32)
    def critical_points(f: RationalMap) -> CriticalData:
        """Critical points with local degree, their values and truncated forward orbits"""
        w = _trim_relative(np.array(SphereService.derivative_coeffs(f)[0]))
        points: List[Tuple[SpherePoint, int]] = []
        if w.size > 1:
            for r, m in RootService.poly_roots(w).roots:
                points.append((SpherePoint.from_complex(r), m + 1))
        at_infinity = 2 * f.degree - 2 - (w.size - 1)
        if at_infinity > 0:
            points.append((SpherePoint.infinity(), at_infinity + 1))

        values, orbits, escaping = [], [], []
        for c, _ in points:
            v = SphereService.eval(f, c.to_complex())
            values.append(SpherePoint.from_complex(v))
            orbit, escaped = MapAnalysis._truncated_orbit(f, v)
            orbits.append(orbit)
            escaping.append(escaped)
        logger.debug("%d critical points for degree %d map", len(points), f.degree)
        return CriticalData(points=points, values=values, orbits=orbits, escaping=escaping)

    @staticmethod
    def _truncated_orbit(f: RationalMap, v: complex) -> Tuple[List[SpherePoint], bool]:
        orbit: List[SpherePoint] = []
        z = complex(v)
        for _ in range(ORBIT_CAP):
            if is_inf(z) or abs(z) > Config.TRUNCATION_BOUND:
                return orbit, True
            if any(abs(z - q.to_complex()) <= 1e-12 * max(1.0, abs(z)) for q in orbit):
                return orbit, False
            orbit.append(SpherePoint.from_complex(z))
            z = SphereService.eval(f, z)
        return orbit, False

    @staticmethod
    def critical_values_of_iterate(f: RationalMap, n: int) -> List[complex]:
        """Critical values of f^n: images f^j(v), 0 <= j < n, of the critical values v of f"""
        crit = MapAnalysis.critical_points(f)
        out: List[complex] = []
        for v, _ in crit.distinct_values():
            z = v.to_complex()
            for _ in range(n):
                if not any(SphereService.chordal_dist(z, q) <= 1e-12 for q in out):
                    out.append(z)
                z = SphereService.eval(f, z)
        return out

    @staticmethod
    def classify_multiplier(lam: complex) -> FixedPointClass:
        size = abs(lam)
        if size <= 1e-10:
            return FixedPointClass.SUPERATTRACTING
        if size < 1 - Config.INDIFFERENT_BAND:
            return FixedPointClass.ATTRACTING
        if size > 1 + Config.INDIFFERENT_BAND:
            return FixedPointClass.REPELLING
        return FixedPointClass.INDIFFERENT

    @staticmethod
    @lru_cache(maxsize=32)
    def fixed_points(f: RationalMap) -> FixedPointReport:
        """All d+1 fixed points with multiplicity, multiplier and class"""
        n, d = np.array(f.num), np.array(f.den)
        g = _trim_relative(P.polysub(n, P.polymul([0, 1], d)))
        points: List[FixedPoint] = []
        if g.size > 1:
            for r, m in RootService.poly_roots(g).roots:
                lam = 1.0 + 0j if m > 1 else SphereService.multiplier(f, r)
                points.append(FixedPoint(SpherePoint.from_complex(r), lam, MapAnalysis.classify_multiplier(lam), m))
        at_infinity = f.degree + 1 - (g.size - 1)
        if at_infinity > 0:
            lam = 1.0 + 0j if at_infinity > 1 else SphereService.multiplier(f, INF)
            points.append(FixedPoint(SpherePoint.infinity(), lam, MapAnalysis.classify_multiplier(lam), at_infinity))
        return FixedPointReport(points=points)

    @staticmethod
    def preimages(f: RationalMap, w: complex) -> List[complex]:
        """The d preimages of w with multiplicity, infinity included"""
        w = complex(w)
        n, d = f.padded()
        if is_inf(w):
            poly = d
        elif abs(w) > Config.CHART_SWITCH:
            poly = n / w - d
        else:
            poly = n - w * d
        poly = _trim_relative(poly)
        out: List[complex] = []
        if poly.size > 1:
            out.extend(RootService.poly_roots(poly).values())
        out.extend([INF] * (f.degree - (poly.size - 1)))
        return out

    @staticmethod
    def _postcritical(f: RationalMap, p: complex) -> List[complex]:
        crit = MapAnalysis.critical_points(f)
        pts = []
        for v, orbit, escaped in zip(crit.values, crit.orbits, crit.escaping):
            for q in orbit:
                pts.append(q.to_complex())
            if escaped:
                pts.append(INF)
        return [q for q in pts if SphereService.chordal_dist(q, p) > 1e-12]

    @staticmethod
    def _chart(p: complex, z):
        if is_inf(p):
            with np.errstate(divide='ignore', invalid='ignore'):
                return 1 / np.asarray(z, dtype=complex)
        return np.asarray(z, dtype=complex) - p

    @staticmethod
    def _unchart(p: complex, u):
        if is_inf(p):
            return 1 / np.asarray(u, dtype=complex)
        return np.asarray(u, dtype=complex) + p

    @staticmethod
    def verify_simple_domain(f: RationalMap, p: complex, radius: float,
                             postcritical: Optional[Sequence[complex]] = None,
                             samples: int = None) -> Tuple[bool, str]:
        """Check that the chart disc of the given radius around p maps strictly into itself"""
        samples = samples or Config.DOMAIN_SAMPLES
        p = complex(p)
        if postcritical is None:
            postcritical = MapAnalysis._postcritical(f, p)
        theta = 2 * np.pi * np.arange(samples) / samples
        u = radius * np.exp(1j * theta)
        z = MapAnalysis._unchart(p, u)
        y = SphereService.eval_array(f, z)
        image = MapAnalysis._chart(p, y)
        if not np.all(np.isfinite(image)):
            return False, "boundary image leaves the chart"
        gap = radius - float(np.max(np.abs(image)))
        if gap <= Config.DOMAIN_MARGIN:
            return False, f"boundary image penetration {gap:.3e}"

        # the chart function must be holomorphic on the disc
        if is_inf(p):
            holes = [r for r in MapAnalysis.preimages(f, 0j) if not is_inf(r)]
            inside = [r for r in holes if r != 0 and abs(1 / r) <= radius]
        else:
            holes = [r for r in MapAnalysis.preimages(f, INF) if not is_inf(r)]
            inside = [r for r in holes if abs(r - p) <= radius]
        if inside:
            return False, f"chart function has a pole inside the disc at {inside[0]:.6g}"

        for q in postcritical:
            uq = MapAnalysis._chart(p, q)
            if not np.isfinite(uq) or abs(uq) == 0:
                continue
            nearest = MapAnalysis._unchart(p, radius * uq / abs(uq))
            if SphereService.chordal_dist(q, complex(nearest)) <= Config.CORRIDOR:
                return False, f"boundary passes within the corridor of postcritical point {q:.6g}"
        return True, "ok"

    @staticmethod
    def simple_domain(f: RationalMap, p: complex,
                      postcritical: Optional[Sequence[complex]] = None) -> SimpleDomain:
        """Largest verified forward-invariant chart disc found from a linearization guess"""
        p = complex(p)
        lam = SphereService.multiplier(f, p)
        if abs(lam) >= 1:
            raise PreconditionFailed(f"{p} is not attracting (|multiplier| = {abs(lam):.6g})")
        if postcritical is None:
            postcritical = MapAnalysis._postcritical(f, p)

        start = 0.5 if abs(lam) <= 1e-10 else 0.5 * (1 - abs(lam))
        good, bad, r = None, None, start
        while r >= Config.DOMAIN_MIN_RADIUS:
            ok, reason = MapAnalysis.verify_simple_domain(f, p, r, postcritical)
            if ok:
                good = r
                break
            logger.debug("domain radius %.4g rejected: %s", r, reason)
            bad, r = r, r / 2
        if good is None:
            raise NoDomain(f"no forward-invariant disc around {p} down to radius {Config.DOMAIN_MIN_RADIUS}")
        if bad is not None:
            for _ in range(Config.DOMAIN_BISECTIONS):
                mid = 0.5 * (good + bad)
                if MapAnalysis.verify_simple_domain(f, p, mid, postcritical)[0]:
                    good = mid
                else:
                    bad = mid
        theta = np.linspace(0, 2 * np.pi, Config.DOMAIN_SAMPLES + 1)
        boundary = MapAnalysis._unchart(p, good * np.exp(1j * theta))
        boundary[-1] = boundary[0]
        return SimpleDomain(center=SpherePoint.from_complex(p), radius=good, boundary=Polyline.from_points(boundary))

    @staticmethod
    @lru_cache(maxsize=32)
    def _cached_domain(f: RationalMap, p: complex) -> SimpleDomain:
        return MapAnalysis.simple_domain(f, p)

    @staticmethod
    def orbit_converges(f: RationalMap, z: complex, p: complex,
                        trap_radius: float = None, max_iter: int = None) -> OrbitResult:
        """Converged once the orbit of z is trapped near p; not converged if it settles on another cycle"""
        trap_radius = trap_radius or Config.TRAP_RADIUS
        max_iter = max_iter or Config.MAX_ITER
        p = complex(p)
        domain = MapAnalysis._cached_domain(f, p)
        trap_ok = trap_radius <= domain.chordal_radius

        history: List[complex] = []
        z = complex(z)
        for step in range(max_iter):
            if domain.contains(z) or (trap_ok and SphereService.chordal_dist(z, p) < trap_radius):
                return OrbitResult(converged=True, steps=step)
            for back in range(1, min(CYCLE_WINDOW, len(history)) + 1):
                if SphereService.chordal_dist(z, history[-back]) <= 1e-12:
                    return OrbitResult(converged=False, steps=step)
            history.append(z)
            z = SphereService.eval(f, z)
        for back in range(1, min(CYCLE_WINDOW, len(history)) + 1):
            if SphereService.chordal_dist(z, history[-back]) <= 1e-9:
                return OrbitResult(converged=False, steps=max_iter)
        raise Undecided(f"orbit neither trapped nor periodic after {max_iter} iterations")

    @staticmethod
    def cond_c_classify(f: RationalMap) -> Tuple[bool, Optional[complex], dict]:
        """Exactly one attracting fixed point and every critical orbit converges to it"""
        report = MapAnalysis.fixed_points(f)
        indifferent = [fp for fp in report.points if fp.kind == FixedPointClass.INDIFFERENT]
        if indifferent:
            raise ParabolicSuspected(
                f"fixed point {indifferent[0].point.to_complex():.6g} has |multiplier| "
                f"{abs(indifferent[0].multiplier):.9f}", evidence=report.to_dict())
        attracting = sorted(report.attracting, key=lambda fp: (abs(fp.multiplier), not fp.point.is_infinity))
        evidence = {'fixed_points': report.to_dict(), 'attracting_count': len(attracting)}
        if not attracting:
            evidence['critical'] = []
            return False, None, evidence

        p = attracting[0].point.to_complex()
        crit = MapAnalysis.critical_points(f)
        verdicts, undecided = [], False
        for c, deg in crit.points:
            z = c.to_complex()
            steps = 0
            if SphereService.chordal_dist(z, p) <= 1e-12:
                verdict = 'converges'
            else:
                try:
                    orbit = MapAnalysis.orbit_converges(f, z, p)
                    verdict, steps = ('converges' if orbit.converged else 'does-not-converge'), orbit.steps
                except Undecided:
                    verdict, undecided = 'undecided', True
            verdicts.append({'point': c.to_dict(), 'local_degree': deg, 'orbit': verdict, 'steps': steps})
        evidence['attractor'] = attracting[0].to_dict()
        evidence['critical'] = verdicts
        converge = all(v['orbit'] == 'converges' for v in verdicts)
        if undecided and not any(v['orbit'] == 'does-not-converge' for v in verdicts):
            raise Undecided("a critical orbit stayed undecided", evidence=evidence)
        cond_c = len(attracting) == 1 and converge
        logger.info("cond C %s (attractor %s)", cond_c, p)
        return cond_c, p, evidence

    @staticmethod
    def julia_grid(f: RationalMap, viewport: Tuple[float, float, float, float],
                   width: int, height: int, cap: int = None) -> JuliaGrid:
        """Escape-time grid: steps until first entry into a simple domain of any attractor"""
        cap = cap or Config.JULIA_CAP
        attractors = [fp.point.to_complex() for fp in MapAnalysis.fixed_points(f).attracting]
        if not attractors:
            raise PreconditionFailed("no attracting fixed point to escape to")
        domains = [MapAnalysis._cached_domain(f, p) for p in attractors]
        x0, x1, y0, y1 = viewport
        xs = x0 + (np.arange(width) + 0.5) * (x1 - x0) / width
        ys = y1 - (np.arange(height) + 0.5) * (y1 - y0) / height
        grid = xs[None, :] + 1j * ys[:, None]

        def inside(z: np.ndarray) -> np.ndarray:
            hit = np.zeros(z.shape, dtype=bool)
            for dom in domains:
                p = dom.center.to_complex()
                if is_inf(p):
                    with np.errstate(invalid='ignore'):
                        hit |= ~np.isfinite(z) | (np.abs(z) >= 1 / dom.radius)
                else:
                    with np.errstate(invalid='ignore'):
                        hit |= np.isfinite(z) & (np.abs(z - p) <= dom.radius)
            return hit

        def run_rows(rows: np.ndarray) -> np.ndarray:
            z = rows.copy()
            steps = np.full(z.shape, cap, dtype=np.int64)
            active = np.ones(z.shape, dtype=bool)
            for k in range(cap):
                hit = active & inside(z)
                steps[hit] = k
                active &= ~hit
                if not active.any():
                    break
                z[active] = SphereService.eval_array(f, z[active])
            return steps

        chunks = np.array_split(grid, max(1, min(Config.THREADS, height)), axis=0)
        with ThreadPoolExecutor(max_workers=Config.THREADS) as pool:
            steps = np.concatenate(list(pool.map(run_rows, chunks)), axis=0)
        return JuliaGrid(viewport=tuple(viewport), width=width, height=height, cap=cap, steps=steps)
