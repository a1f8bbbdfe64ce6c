import cmath
import enum
import math
import re
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Dict, Hashable, List, Optional, Sequence, Tuple

import numpy as np

from cantor_atlas.config import Config
from cantor_atlas.errors import InvalidMap, NotNormal, NotSubgroup

INF = complex(math.inf, 0.0)


class Chart(enum.Enum):
    FINITE = "finite"
    INFINITY = "infinity"


class FixedPointClass(enum.Enum):
    SUPERATTRACTING = "superattracting"
    ATTRACTING = "attracting"
    INDIFFERENT = "indifferent"
    REPELLING = "repelling"


class CertificateKind(enum.Enum):
    CLASSIFY = "classify"
    CLAIM1 = "claim1"
    S_CANTOR = "s-cantor"
    FIGURE1 = "figure1"
    BASIN_CENSUS = "basin-census"
    T_CANTOR = "t-cantor"


class Verdict(enum.Enum):
    PASS = "pass"
    FAIL = "fail"
    UNDECIDED = "undecided"
    S_CANTOR = "s-Cantor"
    ALL_FAILED = "all-failed"
    NOT_T_CANTOR = "NOT-t-Cantor"
    INJECTIVE_AT_QUOTIENT = "injective-at-quotient"
    UNKNOWN = "unknown"


def is_inf(z) -> bool:
    return cmath.isinf(complex(z))


def cjson(z):
    """Complex number as [re, im]; the point at infinity as the string 'infinity'"""
    z = complex(z)
    if cmath.isinf(z):
        return "infinity"
    return [float(z.real), float(z.imag)]


def cparse(value) -> complex:
    if value == "infinity":
        return INF
    return complex(float(value[0]), float(value[1]))


# ---------------------------------------------------------------------------
# sphere-core
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpherePoint:
    """Point of the Riemann sphere in one of two charts.

    FINITE stores z itself (|z| <= 2); INFINITY stores w = 1/z, so the point at
    infinity is (0, INFINITY).
    """
    value: complex
    chart: Chart = Chart.FINITE

    @classmethod
    def from_complex(cls, z) -> "SpherePoint":
        z = complex(z)
        if cmath.isinf(z):
            return cls(0j, Chart.INFINITY)
        if abs(z) > Config.CHART_SWITCH:
            return cls(1 / z, Chart.INFINITY)
        return cls(z, Chart.FINITE)

    @classmethod
    def infinity(cls) -> "SpherePoint":
        return cls(0j, Chart.INFINITY)

    @property
    def is_infinity(self) -> bool:
        return self.chart == Chart.INFINITY and self.value == 0

    def normalized(self) -> "SpherePoint":
        return SpherePoint.from_complex(self.to_complex())

    def to_complex(self) -> complex:
        if self.chart == Chart.FINITE:
            return complex(self.value)
        if self.value == 0:
            return INF
        return 1 / complex(self.value)

    def to_dict(self):
        return {'value': cjson(self.value), 'chart': self.chart.value, 'z': cjson(self.to_complex())}


def _trim(coeffs) -> Tuple[complex, ...]:
    out = [complex(c) for c in coeffs]
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


@dataclass(frozen=True)
class RationalMap:
    """f = N/D with ascending coefficient tuples.

    `preset` and `params` remember where a map came from; operations that only
    make sense for one family (the standard radial) check them.
    """
    num: Tuple[complex, ...]
    den: Tuple[complex, ...]
    preset: Optional[str] = None
    params: Tuple[Tuple[str, complex], ...] = ()

    def __post_init__(self):
        num, den = _trim(self.num), _trim(self.den)
        if not num or not den:
            raise InvalidMap("numerator and denominator must be nonzero polynomials")
        object.__setattr__(self, 'num', num)
        object.__setattr__(self, 'den', den)
        object.__setattr__(self, 'params', tuple((k, complex(v)) for k, v in self.params))
        if self.degree < 2:
            raise InvalidMap(f"degree must be at least 2, got {self.degree}")
        if self.degree > Config.MAX_DEGREE:
            raise InvalidMap(f"degree {self.degree} exceeds {Config.MAX_DEGREE}")

    @property
    def degree(self) -> int:
        return max(len(self.num), len(self.den)) - 1

    @property
    def is_polynomial(self) -> bool:
        return len(self.den) == 1

    def param(self, name: str, default=None):
        return dict(self.params).get(name, default)

    def padded(self) -> Tuple[np.ndarray, np.ndarray]:
        d = self.degree
        n = np.zeros(d + 1, dtype=complex)
        m = np.zeros(d + 1, dtype=complex)
        n[:len(self.num)] = self.num
        m[:len(self.den)] = self.den
        return n, m

    def to_dict(self):
        return {
            'num': [cjson(c) for c in self.num],
            'den': [cjson(c) for c in self.den],
            'degree': self.degree,
            'preset': self.preset,
            'params': {k: cjson(v) for k, v in self.params},
        }


@dataclass
class RootSet:
    roots: List[Tuple[complex, int]]
    residual: float

    def values(self) -> List[complex]:
        out = []
        for r, m in self.roots:
            out.extend([r] * m)
        return out

    def __len__(self):
        return sum(m for _, m in self.roots)

    def to_dict(self):
        return {
            'roots': [{'root': cjson(r), 'multiplicity': m} for r, m in self.roots],
            'residual': self.residual,
        }


# ---------------------------------------------------------------------------
# map-analysis
# ---------------------------------------------------------------------------

@dataclass
class CriticalData:
    points: List[Tuple[SpherePoint, int]]
    values: List[SpherePoint]
    orbits: List[List[SpherePoint]]
    escaping: List[bool]

    @property
    def truncation_index(self) -> int:
        return max((len(o) for o in self.orbits), default=0)

    def distinct_values(self) -> List[Tuple[SpherePoint, int]]:
        """Critical values with multiplicity sum(local degree - 1)"""
        out: List[Tuple[SpherePoint, int]] = []
        for (c, deg), v in zip(self.points, self.values):
            for k, (w, m) in enumerate(out):
                if _same_point(w, v):
                    out[k] = (w, m + deg - 1)
                    break
            else:
                out.append((v, deg - 1))
        return out

    def to_dict(self):
        return {
            'critical_points': [{'point': c.to_dict(), 'local_degree': d} for c, d in self.points],
            'critical_values': [v.to_dict() for v in self.values],
            'orbits': [[p.to_dict() for p in o] for o in self.orbits],
            'escaping': list(self.escaping),
            'truncation_index': self.truncation_index,
        }


def _same_point(a: SpherePoint, b: SpherePoint, tol: float = 1e-9) -> bool:
    za, zb = a.to_complex(), b.to_complex()
    if is_inf(za) or is_inf(zb):
        return is_inf(za) and is_inf(zb)
    return abs(za - zb) <= tol * max(1.0, abs(za))


@dataclass
class FixedPoint:
    point: SpherePoint
    multiplier: complex
    kind: FixedPointClass
    multiplicity: int = 1

    @property
    def is_attracting(self) -> bool:
        return self.kind in (FixedPointClass.SUPERATTRACTING, FixedPointClass.ATTRACTING)

    def to_dict(self):
        return {
            'point': self.point.to_dict(),
            'multiplier': cjson(self.multiplier),
            'class': self.kind.value,
            'multiplicity': self.multiplicity,
        }


@dataclass
class OrbitResult:
    converged: bool
    steps: int

    def to_dict(self):
        return {'converged': self.converged, 'steps': self.steps}


@dataclass
class FixedPointReport:
    points: List[FixedPoint]

    @property
    def count(self) -> int:
        return sum(p.multiplicity for p in self.points)

    @property
    def attracting(self) -> List[FixedPoint]:
        return [p for p in self.points if p.is_attracting]

    def to_dict(self):
        return {'fixed_points': [p.to_dict() for p in self.points], 'count': self.count}


@dataclass
class SimpleDomain:
    """Closed chart disc {|u| <= radius} around an attracting point.

    u = z - p for finite p, u = 1/z for p at infinity.
    """
    center: SpherePoint
    radius: float
    boundary: "Polyline"

    def chart_coordinate(self, z: complex) -> complex:
        if self.center.is_infinity:
            return 0j if is_inf(z) else (INF if z == 0 else 1 / z)
        return INF if is_inf(z) else z - self.center.to_complex()

    def contains(self, z: complex) -> bool:
        u = self.chart_coordinate(z)
        return not is_inf(u) and abs(u) <= self.radius

    @property
    def chordal_radius(self) -> float:
        r = self.radius
        return 2 * r / math.sqrt(1 + r * r) if self.center.is_infinity else _chordal_finite_radius(self.center.to_complex(), r)

    def to_dict(self):
        return {
            'center': self.center.to_dict(),
            'radius': self.radius,
            'chordal_radius': self.chordal_radius,
        }


def _chordal_finite_radius(p: complex, r: float) -> float:
    # smallest chordal distance from p to its Euclidean circle of radius r
    best = math.inf
    for theta in np.linspace(0, 2 * math.pi, 64, endpoint=False):
        z = p + r * cmath.exp(1j * theta)
        d = 2 * abs(z - p) / math.sqrt((1 + abs(z) ** 2) * (1 + abs(p) ** 2))
        best = min(best, d)
    return best


@dataclass
class JuliaGrid:
    viewport: Tuple[float, float, float, float]
    width: int
    height: int
    cap: int
    steps: np.ndarray

    @property
    def capped(self) -> np.ndarray:
        return self.steps >= self.cap

    @property
    def capped_fraction(self) -> float:
        return float(self.capped.mean())

    def pixel_center(self, row: int, col: int) -> complex:
        x0, x1, y0, y1 = self.viewport
        x = x0 + (col + 0.5) * (x1 - x0) / self.width
        y = y1 - (row + 0.5) * (y1 - y0) / self.height
        return complex(x, y)

    def to_dict(self):
        return {
            'viewport': list(self.viewport),
            'width': self.width,
            'height': self.height,
            'cap': self.cap,
            'capped_fraction': self.capped_fraction,
        }


# ---------------------------------------------------------------------------
# path-lift
# ---------------------------------------------------------------------------

@dataclass
class Polyline:
    t: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.z = np.asarray(self.z, dtype=complex)
        if self.t.shape != self.z.shape or self.z.size < 2:
            raise ValueError("a polyline needs at least two samples with matching parameters")
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("polyline parameters must be strictly increasing")

    @classmethod
    def from_points(cls, points: Sequence[complex]) -> "Polyline":
        pts = np.asarray(points, dtype=complex)
        return cls(np.linspace(0.0, 1.0, pts.size), pts)

    @property
    def start(self) -> complex:
        return complex(self.z[0])

    @property
    def end(self) -> complex:
        return complex(self.z[-1])

    @property
    def closed(self) -> bool:
        if is_inf(self.start) or is_inf(self.end):
            return is_inf(self.start) and is_inf(self.end)
        return abs(self.start - self.end) <= 1e-9 * max(1.0, abs(self.start))

    def __len__(self):
        return int(self.z.size)

    def reversed(self) -> "Polyline":
        return Polyline(1.0 - self.t[::-1], self.z[::-1].copy())

    @staticmethod
    def concat(*lines: "Polyline", join_tol: float = 1e-7) -> "Polyline":
        pieces = []
        for k, line in enumerate(lines):
            pts = line.z
            if k and pieces:
                prev = pieces[-1][-1]
                if not (abs(pts[0] - prev) <= join_tol * max(1.0, abs(prev))):
                    raise ValueError(f"polylines do not join: {prev} != {pts[0]}")
                pts = pts[1:]
            pieces.append(pts)
        return Polyline.from_points(np.concatenate(pieces))

    def to_dict(self):
        return {'t': [float(x) for x in self.t], 'z': [cjson(p) for p in self.z]}


@dataclass
class Radial:
    """Basepoint plus one leg to each preimage of it; legs[i] ends at x_i"""
    basepoint: complex
    legs: List[Polyline]

    @property
    def endpoints(self) -> List[complex]:
        return [leg.end for leg in self.legs]

    def to_dict(self):
        return {
            'basepoint': cjson(self.basepoint),
            'endpoints': [cjson(e) for e in self.endpoints],
            'legs': [leg.to_dict() for leg in self.legs],
        }


@dataclass
class MonodromyResult:
    permutation: "Permutation"
    arcs: List[Polyline]

    def to_dict(self, include_arcs: bool = False):
        out = {'permutation': self.permutation.to_list(), 'cycles': self.permutation.to_cycles()}
        if include_arcs:
            out['arcs'] = [a.to_dict() for a in self.arcs]
        return out


# ---------------------------------------------------------------------------
# curve-topology
# ---------------------------------------------------------------------------

@dataclass
class CutSystem:
    """Parallel rays p_j + s*direction (s >= 0) from every retained puncture"""
    basepoint: complex
    punctures: List[complex]
    labels: List[str]
    direction: complex
    corridor: float
    height: float
    lasso_radius: float
    tracked: Tuple[str, ...] = ()

    @property
    def rotation(self) -> complex:
        # multiplying by this turns every cut into a downward vertical ray
        return -1j / self.direction

    def puncture(self, label: str) -> complex:
        return self.punctures[self.labels.index(label)]

    def to_dict(self):
        return {
            'basepoint': cjson(self.basepoint),
            'punctures': {lab: cjson(p) for lab, p in zip(self.labels, self.punctures)},
            'direction': cjson(self.direction),
            'corridor': self.corridor,
            'height': self.height,
            'lasso_radius': self.lasso_radius,
            'tracked': list(self.tracked),
        }


_TOKEN = re.compile(r"^([A-Za-z][A-Za-z0-9]*)(?:\^(-?\d+))?$")


@dataclass(frozen=True)
class FreeWord:
    """Freely reduced word; letters are (generator, +1 or -1) pairs"""
    letters: Tuple[Tuple[str, int], ...] = ()

    def __post_init__(self):
        stack: List[Tuple[str, int]] = []
        for gen, exp in self.letters:
            if exp not in (1, -1):
                raise ValueError(f"letter exponent must be +1 or -1, got {exp}")
            if stack and stack[-1][0] == gen and stack[-1][1] == -exp:
                stack.pop()
            else:
                stack.append((gen, exp))
        object.__setattr__(self, 'letters', tuple(stack))

    @classmethod
    def identity(cls) -> "FreeWord":
        return cls(())

    @classmethod
    def letter(cls, gen: str, exp: int = 1) -> "FreeWord":
        return cls(((gen, 1 if exp > 0 else -1),) * abs(exp))

    @classmethod
    def parse(cls, text: str) -> "FreeWord":
        """Parse 'A B^-1 C0^2'; 'e' and '' are the identity"""
        letters: List[Tuple[str, int]] = []
        for tok in text.split():
            if tok in ('e', '1'):
                continue
            m = _TOKEN.match(tok)
            if not m:
                raise ValueError(f"Invalid word token: {tok}")
            power = int(m.group(2) or 1)
            letters.extend([(m.group(1), 1 if power > 0 else -1)] * abs(power))
        return cls(tuple(letters))

    @classmethod
    def from_indices(cls, indices: Sequence[int], alphabet: Sequence[str]) -> "FreeWord":
        return cls(tuple((alphabet[abs(i) - 1], 1 if i > 0 else -1) for i in indices))

    def __mul__(self, other: "FreeWord") -> "FreeWord":
        return FreeWord(self.letters + other.letters)

    def inverse(self) -> "FreeWord":
        return FreeWord(tuple((g, -e) for g, e in reversed(self.letters)))

    def __len__(self):
        return len(self.letters)

    @property
    def is_identity(self) -> bool:
        return not self.letters

    def generators(self) -> set:
        return {g for g, _ in self.letters}

    def to_indices(self, alphabet: Sequence[str]) -> List[int]:
        return [(alphabet.index(g) + 1) * e for g, e in self.letters]

    def __str__(self):
        if not self.letters:
            return "e"
        return " ".join(g if e == 1 else f"{g}^-1" for g, e in self.letters)


@dataclass
class TracedCurve:
    curve: Polyline
    level: int
    source: int
    degree: int

    def to_dict(self):
        return {'level': self.level, 'source': self.source, 'degree': self.degree, 'curve': self.curve.to_dict()}


@dataclass
class ClosedCurveSet:
    curves: List[TracedCurve] = field(default_factory=list)

    def __len__(self):
        return len(self.curves)

    def __iter__(self):
        return iter(self.curves)

    @property
    def total_degree(self) -> int:
        return sum(c.degree for c in self.curves)

    def to_dict(self):
        return {'curves': [c.to_dict() for c in self.curves], 'total_degree': self.total_degree}


@dataclass
class RegionGraph:
    """Nesting forest on curves (nodes 0..n_curves-1) and marks (the rest)"""
    labels: List[str]
    n_curves: int
    enclosing: Dict[int, List[int]]
    parent: Dict[int, Optional[int]]

    def depth(self, node: int) -> int:
        return len(self.enclosing[node])

    def children(self, node: int) -> List[int]:
        return [k for k, p in self.parent.items() if p == node]

    def curve_children(self, node: int) -> List[int]:
        return [k for k in self.children(node) if k < self.n_curves]

    def marks_inside(self, curve: int) -> List[int]:
        return [k for k in range(self.n_curves, len(self.labels)) if curve in self.enclosing[k]]

    def to_dict(self):
        return {
            'labels': list(self.labels),
            'parent': {self.labels[k]: (self.labels[p] if p is not None else None) for k, p in self.parent.items()},
            'depth': {self.labels[k]: self.depth(k) for k in range(len(self.labels))},
        }


# ---------------------------------------------------------------------------
# wreath-algebra
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Permutation:
    """Permutation of {0..n-1}; products read left to right: (s*t)(i) = t(s(i))"""
    images: Tuple[int, ...]

    def __post_init__(self):
        images = tuple(int(i) for i in self.images)
        if sorted(images) != list(range(len(images))):
            raise ValueError(f"not a permutation: {images}")
        object.__setattr__(self, 'images', images)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(n)))

    @classmethod
    def from_cycles(cls, text: str, n: int) -> "Permutation":
        """Parse 1-based cycle notation, '(1 2)(3 4)' or '(12)(34)' for n < 10"""
        images = list(range(n))
        for body in re.findall(r"\(([^)]*)\)", text):
            parts = body.split() if (' ' in body.strip() or ',' in body) else list(body.strip())
            cycle = [int(p.strip(',')) - 1 for p in parts if p.strip(',')]
            for a, b in zip(cycle, cycle[1:] + cycle[:1]):
                images[a] = b
        return cls(tuple(images))

    @classmethod
    def from_list(cls, one_based: Sequence[int]) -> "Permutation":
        return cls(tuple(i - 1 for i in one_based))

    @property
    def degree(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i]

    def __mul__(self, other: "Permutation") -> "Permutation":
        return Permutation(tuple(other.images[i] for i in self.images))

    def inverse(self) -> "Permutation":
        inv = [0] * len(self.images)
        for i, j in enumerate(self.images):
            inv[j] = i
        return Permutation(tuple(inv))

    @property
    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.images))

    def to_list(self) -> List[int]:
        return [i + 1 for i in self.images]

    def to_cycles(self) -> str:
        seen, out = set(), []
        for start in range(len(self.images)):
            if start in seen or self.images[start] == start:
                continue
            cycle, i = [], start
            while i not in seen:
                seen.add(i)
                cycle.append(str(i + 1))
                i = self.images[i]
            out.append("(" + " ".join(cycle) + ")")
        return "".join(out) or "()"

    def __str__(self):
        return self.to_cycles()


@dataclass(frozen=True)
class WreathElement:
    """(slots, perm) in G wr S_d; slot values may be words or Z_2 vectors"""
    slots: Tuple[object, ...]
    perm: Permutation

    def to_dict(self):
        return {'slots': [str(s) if isinstance(s, FreeWord) else list(s) for s in self.slots],
                'permutation': self.perm.to_list()}


@dataclass
class RecursionTable:
    degree: int
    generators: Tuple[str, ...]
    permutations: Dict[str, Permutation]
    slots: Dict[str, Tuple[FreeWord, ...]]
    tracked: Tuple[str, ...] = ()
    punctures: Dict[str, complex] = field(default_factory=dict)

    def element(self, gen: str) -> WreathElement:
        return WreathElement(self.slots[gen], self.permutations[gen])

    def shape(self) -> Dict[str, Tuple[Tuple[str, ...], Tuple[int, ...]]]:
        return {g: (tuple(str(w) for w in self.slots[g]), self.permutations[g].images) for g in self.generators}

    def to_dict(self):
        return {
            'degree': self.degree,
            'generators': list(self.generators),
            'tracked': list(self.tracked),
            'punctures': {g: cjson(p) for g, p in self.punctures.items()},
            'recursion': {
                g: {
                    'permutation': self.permutations[g].to_list(),
                    'cycles': self.permutations[g].to_cycles(),
                    'slots': [w.to_indices(self.generators) for w in self.slots[g]],
                    'slot_words': [str(w) for w in self.slots[g]],
                }
                for g in self.generators
            },
        }

    @classmethod
    def from_dict(cls, data) -> "RecursionTable":
        gens = tuple(data['generators'])
        rec = data['recursion']
        return cls(
            degree=int(data['degree']),
            generators=gens,
            permutations={g: Permutation.from_list(rec[g]['permutation']) for g in gens},
            slots={g: tuple(FreeWord.from_indices(s, gens) for s in rec[g]['slots']) for g in gens},
            tracked=tuple(data.get('tracked', ())),
            punctures={g: cparse(p) for g, p in data.get('punctures', {}).items()},
        )


Bits = Tuple[int, ...]


def bits_key(x: Bits) -> int:
    # first tracked letter is the least significant bit
    return sum(b << i for i, b in enumerate(x))


def domain_elements(m: int) -> List[Bits]:
    return sorted(product((0, 1), repeat=m), key=bits_key)


def format_bits(x: Bits) -> str:
    return "(" + ",".join(str(b) for b in x) + ")"


@dataclass
class QuotientRecursion:
    tracked: Tuple[str, ...]
    degree: int
    elements: List[Bits]
    representatives: Dict[Bits, FreeWord]
    permutations: Dict[Bits, Permutation]
    slots: Dict[Bits, Tuple[Bits, ...]]
    labels: Optional[Dict[Bits, Tuple[str, ...]]] = None

    @property
    def zero(self) -> Bits:
        return tuple(0 for _ in self.tracked)

    def to_dict(self):
        out = {
            'tracked': list(self.tracked),
            'elements': {
                format_bits(x): {
                    'representative': str(self.representatives[x]),
                    'permutation': self.permutations[x].to_list(),
                    'slots': [format_bits(s) for s in self.slots[x]],
                }
                for x in self.elements
            },
        }
        if self.labels is not None:
            for x in self.elements:
                out['elements'][format_bits(x)]['labels'] = list(self.labels[x])
        return out


@dataclass
class CaseTable:
    """Quotient labels of the tracked generators after conjugating the recursion"""
    number: int
    labels: Dict[Bits, Tuple[str, ...]]
    conjugators: Tuple[str, ...]

    def to_dict(self):
        return {
            'case': self.number,
            'labels': {format_bits(x): list(v) for x, v in sorted(self.labels.items(), key=lambda kv: bits_key(kv[0]))},
            'conjugators': list(self.conjugators),
        }


class FiniteGroup:
    """Finite group given by hashable elements and a product function.

    Elements are stored by index; the multiplication table is filled on demand.
    """

    def __init__(self, elements: Sequence[Hashable], mul: Callable, name: str = None):
        self.elements = list(elements)
        self.index = {e: k for k, e in enumerate(self.elements)}
        if len(self.index) != len(self.elements):
            raise ValueError("duplicate group elements")
        self._mul = mul
        self._table: Dict[Tuple[int, int], int] = {}
        self._inverse: Dict[int, int] = {}
        self.name = name
        self.identity = self._find_identity()

    def __len__(self):
        return len(self.elements)

    def __repr__(self):
        return f"FiniteGroup({self.name or len(self)})"

    def _find_identity(self) -> int:
        for k, e in enumerate(self.elements):
            if all(self._mul(e, x) == x for x in self.elements):
                return k
        raise NotSubgroup("no identity element")

    def mul(self, i: int, j: int) -> int:
        key = (i, j)
        if key not in self._table:
            prod = self._mul(self.elements[i], self.elements[j])
            if prod not in self.index:
                raise NotSubgroup(f"product {prod} leaves the element set")
            self._table[key] = self.index[prod]
        return self._table[key]

    def inverse(self, i: int) -> int:
        if i in self._inverse:
            return self._inverse[i]
        for j in range(len(self)):
            if self.mul(i, j) == self.identity:
                self._inverse[i] = j
                return j
        raise NotSubgroup(f"element {self.elements[i]} has no inverse")

    def conjugate(self, x: int, g: int) -> int:
        """g x g^-1"""
        return self.mul(self.mul(g, x), self.inverse(g))

    def element_order(self, i: int) -> int:
        k, acc = 1, i
        while acc != self.identity:
            acc = self.mul(acc, i)
            k += 1
        return k

    def is_abelian(self) -> bool:
        n = len(self)
        return all(self.mul(i, j) == self.mul(j, i) for i in range(n) for j in range(i + 1, n))

    def check_subgroup(self, subset: Sequence[int]) -> None:
        sub = set(subset)
        if self.identity not in sub:
            raise NotSubgroup("subset misses the identity")
        for i in sub:
            for j in sub:
                if self.mul(i, self.inverse(j)) not in sub:
                    raise NotSubgroup(f"{self.elements[i]} * {self.elements[j]}^-1 leaves the subset")

    def check_normal(self, subset: Sequence[int]) -> None:
        self.check_subgroup(subset)
        sub = set(subset)
        for g in range(len(self)):
            for h in sub:
                if self.conjugate(h, g) not in sub:
                    raise NotNormal(f"{self.elements[g]} conjugates {self.elements[h]} out of the subgroup")

    def is_normal(self, subset: Sequence[int]) -> bool:
        try:
            self.check_normal(subset)
        except (NotSubgroup, NotNormal):
            return False
        return True

    def cosets(self, normal: Sequence[int]) -> List[frozenset]:
        seen, out = set(), []
        for g in range(len(self)):
            if g in seen:
                continue
            coset = frozenset(self.mul(g, h) for h in normal)
            seen |= coset
            out.append(coset)
        return out

    def quotient(self, normal: Sequence[int], name: str = None) -> Tuple["FiniteGroup", Dict[int, int]]:
        """Quotient group on cosets and the projection from element index to coset index"""
        self.check_normal(normal)
        cosets = self.cosets(normal)
        projection = {g: k for k, c in enumerate(cosets) for g in c}
        reps = [min(c) for c in cosets]

        def mul(a, b):
            return projection[self.mul(reps[a], reps[b])]

        return FiniteGroup(list(range(len(cosets))), mul, name=name), projection

    def conjugacy_witness(self, x: int, y: int) -> Optional[int]:
        for g in range(len(self)):
            if self.conjugate(x, g) == y:
                return g
        return None

    def conjugacy_class(self, x: int) -> List[int]:
        return sorted({self.conjugate(x, g) for g in range(len(self))})


@dataclass
class Certificate:
    kind: CertificateKind
    verdict: str
    parameters: dict
    evidence: dict

    def to_dict(self):
        return {
            'schema': Config.SCHEMA_VERSION,
            'kind': self.kind.value,
            'verdict': self.verdict,
            'parameters': self.parameters,
            'evidence': self.evidence,
        }
