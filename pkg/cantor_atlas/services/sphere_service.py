import math
from functools import lru_cache
from typing import Sequence, Tuple

import numpy as np

from cantor_atlas.config import Config
from cantor_atlas.errors import InvalidMap
from cantor_atlas.models import INF, RationalMap, is_inf
from cantor_atlas.services.root_service import RootService


def horner(coeffs: Sequence[complex], x: complex) -> complex:
    """Evaluate ascending coefficients at x"""
    acc = 0j
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


class ChartPolys:
    """Coefficient vectors of f in the four chart pairs.

    Source chart 'F' uses z, 'I' uses w = 1/z (coefficients reversed, padded to
    degree d). Target chart 'F' gives f, 'I' gives 1/f (numerator and
    denominator swapped).
    """

    def __init__(self, f: RationalMap):
        n, d = f.padded()
        self.degree = f.degree
        self.source = {'F': (n, d), 'I': (n[::-1].copy(), d[::-1].copy())}
        self.pairs = {}
        for sc, (p, q) in self.source.items():
            for tc in ('F', 'I'):
                num, den = (p, q) if tc == 'F' else (q, p)
                self.pairs[(sc, tc)] = (
                    tuple(num), tuple(den),
                    tuple(np.polynomial.polynomial.polyder(num)) if num.size > 1 else (0j,),
                    tuple(np.polynomial.polynomial.polyder(den)) if den.size > 1 else (0j,),
                )

    def value_and_derivative(self, sc: str, tc: str, u: complex) -> Tuple[complex, complex]:
        num, den, dnum, dden = self.pairs[(sc, tc)]
        a, b = horner(num, u), horner(den, u)
        da, db = horner(dnum, u), horner(dden, u)
        if b == 0:
            return INF, INF
        return a / b, (da * b - a * db) / (b * b)


@lru_cache(maxsize=64)
def chart_polys(f: RationalMap) -> ChartPolys:
    return ChartPolys(f)


class SphereService:
    """Arithmetic on the Riemann sphere for a rational map"""

    @staticmethod
    def eval(f: RationalMap, z: complex) -> complex:
        z = complex(z)
        if is_inf(z):
            if len(f.num) > len(f.den):
                return INF
            if len(f.num) < len(f.den):
                return 0j
            return f.num[-1] / f.den[-1]
        polys = chart_polys(f)
        if abs(z) > Config.CHART_SWITCH:
            num, den, _, _ = polys.pairs[('I', 'F')]
            w = 1 / z
        else:
            num, den, _, _ = polys.pairs[('F', 'F')]
            w = z
        a, b = horner(num, w), horner(den, w)
        if b == 0:
            return INF
        return a / b

    @staticmethod
    def eval_array(f: RationalMap, z: np.ndarray) -> np.ndarray:
        """Vectorized finite evaluation; poles come back as complex infinity"""
        num = np.asarray(f.num)[::-1]
        den = np.asarray(f.den)[::-1]
        with np.errstate(divide='ignore', invalid='ignore', over='ignore'):
            a = np.polyval(num, z)
            b = np.polyval(den, z)
            out = a / b
        out[~np.isfinite(out)] = INF
        return out

    @staticmethod
    def derivative_coeffs(f: RationalMap) -> Tuple[Tuple[complex, ...], Tuple[complex, ...]]:
        """(num' den - num den', den^2) as ascending coefficients, not normalized"""
        P = np.polynomial.polynomial
        n, d = np.array(f.num, dtype=complex), np.array(f.den, dtype=complex)
        dn = P.polyder(n) if n.size > 1 else np.zeros(1, dtype=complex)
        dd = P.polyder(d) if d.size > 1 else np.zeros(1, dtype=complex)
        top = P.polysub(P.polymul(dn, d), P.polymul(n, dd))
        return tuple(complex(c) for c in P.polytrim(top)), tuple(complex(c) for c in P.polymul(d, d))

    @staticmethod
    def derivative(f: RationalMap, z: complex) -> complex:
        """f'(z) for finite z; infinity at poles"""
        z = complex(z)
        if is_inf(z):
            raise ValueError("use SphereService.chart_derivative at infinity")
        _, d = chart_polys(f).value_and_derivative('F', 'F', z)
        return d

    @staticmethod
    def chart_derivative(f: RationalMap, z: complex) -> complex:
        """Derivative of f read in the charts of z and f(z).

        At a fixed point this is the multiplier.
        """
        z = complex(z)
        polys = chart_polys(f)
        sc = 'I' if is_inf(z) or abs(z) > Config.CHART_SWITCH else 'F'
        u = 0j if is_inf(z) else (1 / z if sc == 'I' else z)
        y = SphereService.eval(f, z)
        tc = 'I' if is_inf(y) or abs(y) > Config.CHART_SWITCH else 'F'
        _, d = polys.value_and_derivative(sc, tc, u)
        return d

    @staticmethod
    def multiplier(f: RationalMap, p: complex) -> complex:
        """Multiplier of a fixed point p; at infinity read in the 1/z chart"""
        p = complex(p)
        if not is_inf(p):
            return SphereService.derivative(f, p)
        polys = chart_polys(f)
        _, d = polys.value_and_derivative('I', 'I', 0j)
        return 0j if is_inf(d) else d

    @staticmethod
    def chordal_dist(z: complex, w: complex) -> float:
        z, w = complex(z), complex(w)
        if is_inf(z) and is_inf(w):
            return 0.0
        if is_inf(z):
            return 2 / math.sqrt(1 + abs(w) ** 2)
        if is_inf(w):
            return 2 / math.sqrt(1 + abs(z) ** 2)
        return 2 * abs(z - w) / math.sqrt((1 + abs(z) ** 2) * (1 + abs(w) ** 2))

    @staticmethod
    def chordal_array(z: np.ndarray, w: complex) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        w = complex(w)
        finite = np.isfinite(z)
        out = np.empty(z.shape, dtype=float)
        if is_inf(w):
            out[finite] = 2 / np.sqrt(1 + np.abs(z[finite]) ** 2)
            out[~finite] = 0.0
            return out
        out[finite] = 2 * np.abs(z[finite] - w) / np.sqrt((1 + np.abs(z[finite]) ** 2) * (1 + abs(w) ** 2))
        out[~finite] = 2 / math.sqrt(1 + abs(w) ** 2)
        return out

    @staticmethod
    def validate_map(f: RationalMap) -> RationalMap:
        """Reject maps whose numerator and denominator share a root"""
        short, other = (f.den, f.num) if len(f.den) <= len(f.num) else (f.num, f.den)
        if len(short) > 1:
            scale = float(np.sum(np.abs(other)))
            for r in RootService.poly_roots(short).values():
                size = scale * max(1.0, abs(r)) ** (len(other) - 1)
                if abs(horner(other, r)) <= Config.COPRIME_TOL * size:
                    raise InvalidMap(f"numerator and denominator share the root {r:.6g}")
        return f

    @staticmethod
    def iterate(f: RationalMap, z: complex, n: int) -> complex:
        for _ in range(n):
            z = SphereService.eval(f, z)
        return z
