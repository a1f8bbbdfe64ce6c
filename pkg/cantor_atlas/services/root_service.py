import logging
from functools import lru_cache
from typing import List, Sequence, Tuple

import numpy as np

from cantor_atlas.config import Config
from cantor_atlas.errors import NoConvergence
from cantor_atlas.models import RootSet

logger = logging.getLogger(__name__)

ROOT_CACHE_SIZE = 4096


class RootService:
    """Polynomial roots by simultaneous Aberth iteration, cached per coefficient vector"""

    @classmethod
    def poly_roots(cls, coeffs: Sequence[complex], residual_bound: float = None,
                   cluster_radius: float = None) -> RootSet:
        """Roots of sum(coeffs[k] z^k) with multiplicities.

        Trailing zero coefficients are trimmed; the residual is the largest
        backward error |p(r)| / sum |a_k| |r|^k over the returned roots.
        """
        residual_bound = residual_bound or Config.ROOT_RESIDUAL
        cluster_radius = cluster_radius or Config.ROOT_CLUSTER_RADIUS
        c = [complex(x) for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        return _solve(tuple(c), residual_bound, cluster_radius)

    @classmethod
    def _solve(cls, c: Tuple[complex, ...], residual_bound: float, cluster_radius: float) -> RootSet:
        if not c:
            raise ValueError("the zero polynomial has no finite root set")
        if len(c) - 1 > Config.MAX_DEGREE + 1:
            raise ValueError(f"degree {len(c) - 1} exceeds the supported maximum")

        zeros = 0
        while c[zeros] == 0:
            zeros += 1
        work = np.array(c[zeros:], dtype=complex)
        n = work.size - 1

        if n == 0:
            raw = np.zeros(0, dtype=complex)
        elif n == 1:
            raw = np.array([-work[0] / work[1]])
        else:
            raw = cls._aberth(work)

        clusters = cls._cluster(raw, cluster_radius)
        polished = [(cls._polish(work, r, m), m) for r, m in clusters]
        if zeros:
            polished.append((0j, zeros))
        polished.sort(key=lambda rm: (round(rm[0].real, 12), round(rm[0].imag, 12)))

        full = np.array(c, dtype=complex)
        residual = max((cls._backward_error(full, r) for r, _ in polished), default=0.0)
        if residual > residual_bound:
            raise NoConvergence(f"Aberth iteration left residual {residual:.3e} > {residual_bound:.1e}")

        return RootSet(roots=polished, residual=float(residual))

    @staticmethod
    def _aberth(ascending: np.ndarray) -> np.ndarray:
        p = (ascending / ascending[-1])[::-1]
        dp = np.polyder(p)
        n = p.size - 1
        radius = 1.0 + float(np.max(np.abs(p[1:])))
        radius = min(radius, 2.0 * float(np.max(np.abs(p[1:]) ** (1.0 / np.arange(1, n + 1)))) + 1e-3)
        angles = 2 * np.pi * np.arange(n) / n + 0.4
        x = radius * np.exp(1j * angles)

        eps = np.finfo(float).eps
        for it in range(Config.ROOT_MAX_ITER):
            pv = np.polyval(p, x)
            dpv = np.polyval(dp, x)
            dpv = np.where(dpv == 0, eps, dpv)
            ratio = pv / dpv
            diff = x[:, None] - x[None, :]
            np.fill_diagonal(diff, 1.0)
            inv = 1.0 / diff
            np.fill_diagonal(inv, 0.0)
            w = ratio / (1.0 - ratio * inv.sum(axis=1))
            x = x - w
            if np.all(np.abs(w) <= 4 * eps * np.maximum(1.0, np.abs(x))):
                logger.debug("Aberth converged after %d iterations", it + 1)
                break
        return x

    @staticmethod
    def _cluster(raw: np.ndarray, radius: float) -> List[Tuple[complex, int]]:
        groups: List[List[complex]] = []
        for r in sorted(raw, key=lambda z: (z.real, z.imag)):
            for g in groups:
                if any(abs(r - s) <= radius * max(1.0, abs(s)) for s in g):
                    g.append(r)
                    break
            else:
                groups.append([r])
        return [(complex(np.mean(g)), len(g)) for g in groups]

    @staticmethod
    def _polish(ascending: np.ndarray, r: complex, m: int) -> complex:
        # Newton on the (m-1)-th derivative keeps multiple roots quadratic
        p = ascending[::-1]
        for _ in range(m - 1):
            p = np.polyder(p)
        dp = np.polyder(p)
        for _ in range(3):
            d = np.polyval(dp, r)
            if d == 0:
                break
            step = np.polyval(p, r) / d
            if abs(step) > 1e-6 * max(1.0, abs(r)):
                break
            r = r - step
        return complex(r)

    @staticmethod
    def _backward_error(ascending: np.ndarray, r: complex) -> float:
        value = abs(np.polyval(ascending[::-1], r))
        scale = float(np.sum(np.abs(ascending) * np.abs(r) ** np.arange(ascending.size)))
        return value / scale if scale else value


@lru_cache(maxsize=ROOT_CACHE_SIZE)
def _solve(c: Tuple[complex, ...], residual_bound: float, cluster_radius: float) -> RootSet:
    return RootService._solve(c, residual_bound, cluster_radius)
