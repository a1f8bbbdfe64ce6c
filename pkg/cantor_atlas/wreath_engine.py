import logging
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

from cantor_atlas.config import Config
from cantor_atlas.errors import (
    AlphabetEscape, CaseCountMismatch, ClaimViolation, InconsistentHomomorphism, NoWitness, PreconditionFailed,
)
from cantor_atlas.models import (
    Bits, CaseTable, FiniteGroup, FreeWord, Permutation, QuotientRecursion, RecursionTable, WreathElement,
    bits_key, domain_elements, format_bits,
)

logger = logging.getLogger(__name__)

# The eight elements of T = <(1 4), (1 2)(3 4)>, in canonical order
T_CYCLES = ("()", "(1 4)", "(2 3)", "(1 2)(3 4)", "(1 3)(2 4)", "(1 4)(2 3)", "(1 2 4 3)", "(1 3 4 2)")
T_ELEMENTS = tuple(Permutation.from_cycles(c, 4) for c in T_CYCLES)
T_INDEX = {p: k for k, p in enumerate(T_ELEMENTS)}
L_INDICES = (0, 1, 2, 5)

ZETA1, ZETA2, ZETA3, IDENTITY = "zeta1", "zeta2", "zeta3", "e"

# Label patterns of (1,0) and (0,1) after conjugation
CASE_PATTERNS = {
    1: {(1, 0): (ZETA1, ZETA3), (0, 1): (ZETA3, ZETA1)},
    2: {(1, 0): (ZETA3, ZETA3), (0, 1): (ZETA1, ZETA1)},
    3: {(1, 0): (ZETA1, ZETA1), (0, 1): (ZETA3, ZETA3)},
    4: {(1, 0): (ZETA3, ZETA1), (0, 1): (ZETA1, ZETA3)},
}

MAX_LEVEL_SIZE = 2 ** 20

Element = Tuple[Tuple[int, ...], int]


def t_action(t: int, q: Sequence[int]) -> Tuple[int, ...]:
    """(tau . q)(i) = q(tau(i))"""
    tau = T_ELEMENTS[t]
    return tuple(q[tau(i)] for i in range(len(q)))


def semidirect_mul(x: Element, y: Element) -> Element:
    (q, t), (q2, t2) = x, y
    moved = t_action(t, q2)
    return tuple((a + b) % 2 for a, b in zip(q, moved)), T_INDEX[T_ELEMENTS[t] * T_ELEMENTS[t2]]


def in_Q(q: Sequence[int]) -> bool:
    return sum(q) % 2 == 0


def in_S(q: Sequence[int]) -> bool:
    return q[0] == q[3] and q[1] == q[2]


def _slot_mul(a, b):
    if isinstance(a, FreeWord):
        return a * b
    return tuple(x ^ y for x, y in zip(a, b))


def _slot_inverse(a):
    return a.inverse() if isinstance(a, FreeWord) else a


class StabilizerChain:
    """Schreier-Sims stabilizer chain of a permutation group on range(n), with full transversals"""

    def __init__(self, n: int):
        self.n = n
        self.base: Optional[int] = None
        self.gens: List[Permutation] = []
        # orbit point -> element taking the base point there
        self.transversal: Dict[int, Permutation] = {}
        self.stab: Optional["StabilizerChain"] = None

    def generators(self) -> List[Permutation]:
        return self.gens + (self.stab.generators() if self.stab else [])

    def order(self) -> int:
        if self.base is None:
            return 1
        return len(self.transversal) * self.stab.order()

    def sift(self, p: Permutation) -> Permutation:
        if self.base is None:
            return p
        u = self.transversal.get(p(self.base))
        if u is None:
            return p
        return self.stab.sift(p * u.inverse())

    def add(self, g: Permutation):
        residue = self.sift(g)
        if not residue.is_identity:
            self._add_nonmember(residue)

    def _add_nonmember(self, g: Permutation):
        if self.base is None:
            self.base = next(i for i in range(self.n) if g(i) != i)
            self.stab = StabilizerChain(self.n)
        if g(self.base) == self.base:
            self.stab._add_nonmember(g)
        else:
            self.gens.append(g)
        self._rebuild_orbit()
        for s in self.generators():
            for a, u in list(self.transversal.items()):
                self.stab.add(u * s * self.transversal[s(a)].inverse())

    def _rebuild_orbit(self):
        self.transversal = {self.base: Permutation.identity(self.n)}
        queue = [self.base]
        gens = self.generators()
        while queue:
            a = queue.pop(0)
            for s in gens:
                b = s(a)
                if b not in self.transversal:
                    self.transversal[b] = self.transversal[a] * s
                    queue.append(b)


@dataclass
class QuartGroups:
    """The 128-element group, its named subgroups and the order-8 quotient by S:L"""
    G: FiniteGroup
    T: FiniteGroup
    subgroups: Dict[str, List[int]]
    quotient: FiniteGroup
    projection: Dict[int, int]
    names: Dict[int, str]

    def label(self, q: Sequence[int], t: int) -> str:
        return self.names[self.projection[self.G.index[(tuple(q), t)]]]

    def coset(self, name: str) -> int:
        return next(k for k, v in self.names.items() if v == name)


class WreathAlgebra:
    """Exact computations with wreath recursions and their finite quotients"""

    # --- wreath products --------------------------------------------------

    @staticmethod
    def wreath_product(x: WreathElement, y: WreathElement) -> WreathElement:
        if x.perm.degree != y.perm.degree:
            raise ValueError("wreath elements act on different index sets")
        slots = tuple(_slot_mul(x.slots[i], y.slots[x.perm(i)]) for i in range(x.perm.degree))
        return WreathElement(slots, x.perm * y.perm)

    @staticmethod
    def wreath_inverse(x: WreathElement) -> WreathElement:
        inv = x.perm.inverse()
        return WreathElement(tuple(_slot_inverse(x.slots[inv(i)]) for i in range(inv.degree)), inv)

    @staticmethod
    def word_recursion(table: RecursionTable, word: FreeWord) -> WreathElement:
        """Depth-1 wreath element of an arbitrary word"""
        acc = WreathElement(tuple(FreeWord() for _ in range(table.degree)), Permutation.identity(table.degree))
        for gen, exp in word.letters:
            if gen not in table.permutations:
                raise AlphabetEscape(f"letter {gen} is not a generator of the table")
            el = table.element(gen)
            if exp < 0:
                el = WreathAlgebra.wreath_inverse(el)
            acc = WreathAlgebra.wreath_product(acc, el)
        return acc

    @staticmethod
    def iterate_recursion(table: RecursionTable, g: FreeWord, depth: int) -> WreathElement:
        """Level-k element: sections over Word(k) in lexicographic order and the action on Word(k).

        beta_(i s)(g) = beta_i(beta_s(g)) and alpha_k(g)(i s) = alpha(beta_s(g))(i) alpha_(k-1)(g)(s).
        """
        d = table.degree
        if depth < 0 or d ** depth > MAX_LEVEL_SIZE:
            raise PreconditionFailed(f"level {depth} of a degree {d} tree is too large")
        cache: Dict[FreeWord, WreathElement] = {}

        def local(w: FreeWord) -> WreathElement:
            if w not in cache:
                cache[w] = WreathAlgebra.word_recursion(table, w)
            return cache[w]

        sections: Dict[Tuple[int, ...], FreeWord] = {(): g}
        action: Dict[Tuple[int, ...], Tuple[int, ...]] = {(): ()}
        for _ in range(depth):
            next_sections, next_action = {}, {}
            for s, word in sections.items():
                el = local(word)
                moved = action[s]
                for i in range(d):
                    next_sections[(i,) + s] = el.slots[i]
                    next_action[(i,) + s] = (el.perm(i),) + moved
            sections, action = next_sections, next_action

        words = list(product(range(d), repeat=depth))
        index = {w: k for k, w in enumerate(words)}
        return WreathElement(tuple(sections[w] for w in words), Permutation(tuple(index[action[w]] for w in words)))

    # --- the finite groups ----------------------------------------------------

    @staticmethod
    def build_T_group() -> FiniteGroup:
        return FiniteGroup(T_ELEMENTS, lambda s, t: s * t, name="T")

    @staticmethod
    def build_Z2_4_semidirect_T() -> FiniteGroup:
        elements = [(q, t) for q in product((0, 1), repeat=4) for t in range(len(T_ELEMENTS))]
        return FiniteGroup(elements, semidirect_mul, name="Z2^4:T")

    @staticmethod
    @lru_cache(maxsize=None)
    def quartic_groups() -> QuartGroups:
        G = WreathAlgebra.build_Z2_4_semidirect_T()
        vectors = list(product((0, 1), repeat=4))

        def sub(qs, ts):
            return sorted(G.index[(q, t)] for q in qs for t in ts)

        Q = [q for q in vectors if in_Q(q)]
        S = [q for q in vectors if in_S(q)]
        T_all = range(len(T_ELEMENTS))
        subgroups = {
            'Q:T': sub(Q, T_all),
            'Q:L': sub(Q, L_INDICES),
            'S:T': sub(S, T_all),
            'S:L': sub(S, L_INDICES),
        }
        quotient, projection = G.quotient(subgroups['S:L'], name="Z2^4:T / S:L")
        names = {}
        for k in range(len(quotient)):
            members = {g for g, c in projection.items() if c == k}
            if k == projection[G.identity]:
                names[k] = IDENTITY
            elif members <= set(subgroups['S:T']):
                names[k] = ZETA1
            elif members <= set(subgroups['Q:L']):
                names[k] = ZETA2
            elif members <= set(subgroups['Q:T']):
                names[k] = ZETA3
            else:
                names[k] = f"coset{k}"
        return QuartGroups(G=G, T=WreathAlgebra.build_T_group(), subgroups=subgroups,
                           quotient=quotient, projection=projection, names=names)

    @staticmethod
    def is_normal(G: FiniteGroup, H: Sequence[int]) -> bool:
        return G.is_normal(H)

    @staticmethod
    def quotient(G: FiniteGroup, N: Sequence[int]):
        return G.quotient(N)

    @staticmethod
    def conjugacy_test(G: FiniteGroup, x: int, y: int):
        """A g with g x g^-1 = y, or False"""
        g = G.conjugacy_witness(x, y)
        return False if g is None else g

    @staticmethod
    def verify_claim1() -> dict:
        """Brute-force check of the structure of Z2^4:T used by the non-injectivity argument"""
        groups = WreathAlgebra.quartic_groups()
        G, subs = groups.G, groups.subgroups

        pairs = 0
        for q in product((0, 1), repeat=4):
            for t in range(len(T_ELEMENTS)):
                moved = t_action(t, q)
                lhs = in_S(tuple((a + b) % 2 for a, b in zip(q, moved)))
                rhs = t in L_INDICES or in_Q(q)
                if lhs != rhs:
                    raise ClaimViolation("q + t.q in S does not match (t in L or q in Q)",
                                         evidence={'q': list(q), 'tau': T_CYCLES[t]})
                pairs += 1

        normality = {name: G.is_normal(members) for name, members in subs.items()}
        expected = {'Q:T': True, 'Q:L': True, 'S:L': True, 'S:T': False}
        if normality != expected:
            raise ClaimViolation("normal subgroup pattern differs", evidence={'normal': normality})

        qt = FiniteGroup([G.elements[k] for k in subs['Q:T']], semidirect_mul, name="Q:T")
        sl_in_qt = [qt.index[G.elements[k]] for k in subs['S:L']]
        R, _ = qt.quotient(sl_in_qt, name="R")
        r_orders = sorted(R.element_order(k) for k in range(len(R)))
        if len(R) != 4 or r_orders != [1, 2, 2, 2]:
            raise ClaimViolation("R is not a Klein four-group", evidence={'orders': r_orders})

        Quot = groups.quotient
        orders = {groups.names[k]: Quot.element_order(k) for k in range(len(Quot))}
        if len(Quot) != 8 or Quot.is_abelian() or max(orders.values()) != 4:
            raise ClaimViolation("quotient by S:L is not dihedral of order 8",
                                 evidence={'order': len(Quot), 'element_orders': orders})

        z1, z2, z3 = (groups.coset(n) for n in (ZETA1, ZETA2, ZETA3))
        witness = Quot.conjugacy_witness(z1, z3)
        z2_class = Quot.conjugacy_class(z2)
        if witness is None or z2_class != [z2]:
            raise ClaimViolation("conjugacy of the zeta classes differs",
                                 evidence={'zeta1_to_zeta3': witness, 'zeta2_class': z2_class})
        witness_rep = G.elements[min(g for g, c in groups.projection.items() if c == witness)]

        logger.info("Claim 1 verified: %d pairs, quotient order %d", pairs, len(Quot))
        return {
            'item1': {'holds': True, 'pairs_checked': pairs},
            'item2': {'normal': normality},
            'item3': {'klein_four': True, 'element_orders': r_orders},
            'item4': {
                'zeta1_conjugate_to_zeta3': True,
                'witness': {'coset': groups.names[witness], 'representative': {
                    'q': list(witness_rep[0]), 'tau': T_CYCLES[witness_rep[1]]}},
                'zeta2_class': [groups.names[k] for k in z2_class],
            },
            'quotient': {
                'order': len(Quot),
                'abelian': False,
                'exponent': max(orders.values()),
                'element_orders': dict(sorted(orders.items())),
            },
            'T': list(T_CYCLES),
        }

    # --- reduction to Z2 + Z2 ---------------------------------------------

    @staticmethod
    def mu_reduce(word: FreeWord, tracked: Sequence[str] = ("A", "B")) -> Bits:
        """Exponent sums of the tracked letters mod 2"""
        return tuple(sum(e for g, e in word.letters if g == t) % 2 for t in tracked)

    @staticmethod
    def quartic_recursion_table(K: int = 2) -> RecursionTable:
        """The symbolic recursion of the imaginary quartic with chain C0..C(K-1)"""
        if K < 1:
            raise ValueError("the chain keeps at least C0")
        e, A, B = FreeWord(), FreeWord.letter("A"), FreeWord.letter("B")
        gens = ("A", "B") + tuple(f"C{k}" for k in range(K))
        swap = Permutation.from_cycles("(1 2)(3 4)", 4)
        permutations = {"A": swap, "B": swap, "C0": Permutation.from_cycles("(1 4)", 4)}
        slots = {"A": (A, A.inverse(), e, e), "B": (e, e, B, B.inverse()), "C0": (B, e, e, B.inverse())}
        for k in range(1, K):
            permutations[f"C{k}"] = Permutation.identity(4)
            slots[f"C{k}"] = (e, e, e, FreeWord.letter(f"C{k - 1}"))
        return RecursionTable(degree=4, generators=gens, permutations=permutations, slots=slots,
                              tracked=("A", "B"))

    @staticmethod
    def _labels_for(el: WreathElement, groups: QuartGroups, m: int) -> Tuple[str, ...]:
        t = T_INDEX[el.perm]
        return tuple(groups.label(tuple(s[j] for s in el.slots), t) for j in range(m))

    @staticmethod
    def reduce_recursion(table: RecursionTable) -> QuotientRecursion:
        tracked = tuple(table.tracked)
        for g in table.generators:
            for w in table.slots[g]:
                stray = w.generators() - set(table.generators)
                if stray:
                    raise AlphabetEscape(f"slot of {g} uses undeclared letters {sorted(stray)}")
        m = len(tracked)
        elements = domain_elements(m)
        representatives, permutations, slots = {}, {}, {}
        for x in elements:
            rep = FreeWord(tuple((tracked[i], 1) for i in range(m) if x[i]))
            el = WreathAlgebra.word_recursion(table, rep)
            representatives[x] = rep
            permutations[x] = el.perm
            slots[x] = tuple(WreathAlgebra.mu_reduce(w, tracked) for w in el.slots)

        for x in elements:
            for y in elements:
                z = tuple(a ^ b for a, b in zip(x, y))
                prod = WreathAlgebra.wreath_product(WreathElement(slots[x], permutations[x]),
                                                    WreathElement(slots[y], permutations[y]))
                if prod.slots != slots[z] or prod.perm != permutations[z]:
                    raise InconsistentHomomorphism(
                        f"{format_bits(x)} * {format_bits(y)} does not reduce to {format_bits(z)}",
                        evidence={'product': prod.to_dict(), 'expected': WreathElement(slots[z], permutations[z]).to_dict()})

        q = QuotientRecursion(tracked=tracked, degree=table.degree, elements=elements,
                              representatives=representatives, permutations=permutations, slots=slots)

        others = [g for g in table.generators if g not in tracked]
        perms = list(permutations.values()) + [table.permutations[g] for g in others]
        if table.degree == 4 and m and all(p in T_INDEX for p in perms):
            groups = WreathAlgebra.quartic_groups()
            q.labels = {x: WreathAlgebra._labels_for(WreathElement(slots[x], permutations[x]), groups, m)
                        for x in elements}
            for g in others:
                el = table.element(g)
                mu = WreathElement(tuple(WreathAlgebra.mu_reduce(w, tracked) for w in el.slots), el.perm)
                labels = WreathAlgebra._labels_for(mu, groups, m)
                if any(lab != IDENTITY for lab in labels):
                    raise InconsistentHomomorphism(f"untracked generator {g} reduces to {labels}")
        logger.info("reduced recursion over %s: %d elements", ",".join(tracked) or "-", len(elements))
        return q

    # --- sections and the nucleus --------------------------------------------

    @staticmethod
    def quotient_section(q: QuotientRecursion, x: Bits, word: Sequence[int]) -> Bits:
        """beta_(i1..ik)(x) = beta_i1(beta_(i2..ik)(x))"""
        for i in reversed(word):
            x = q.slots[x][i]
        return x

    @staticmethod
    def quotient_action(q: QuotientRecursion, x: Bits, word: Sequence[int]) -> Tuple[int, ...]:
        if not word:
            return ()
        head, tail = word[0], tuple(word[1:])
        inner = WreathAlgebra.quotient_section(q, x, tail)
        return (q.permutations[inner](head),) + WreathAlgebra.quotient_action(q, x, tail)

    @staticmethod
    def nucleus_test(q: QuotientRecursion) -> dict:
        """Iterate S -> union of slots from the whole domain down to its limit"""
        current = set(q.elements)
        chain = [sorted(current, key=bits_key)]
        while True:
            nxt = {s for x in current for s in q.slots[x]}
            if not nxt <= current:
                raise InconsistentHomomorphism("section sets grew between iterations")
            if nxt == current:
                break
            current = nxt
            chain.append(sorted(current, key=bits_key))
        limit = sorted(current, key=bits_key)
        passed = limit == [q.zero]

        witness = None
        if not passed:
            for k in range(1, len(q.elements) + 1):
                for x in (y for y in limit if y != q.zero):
                    for w in product(range(q.degree), repeat=k):
                        if WreathAlgebra.quotient_section(q, x, w) == x and WreathAlgebra.quotient_action(q, x, w) != w:
                            moved = WreathAlgebra.quotient_action(q, x, w)
                            witness = {'element': format_bits(x), 'word': "".join(str(i + 1) for i in w),
                                       'moved_to': "".join(str(i + 1) for i in moved)}
                            break
                    if witness:
                        break
                if witness:
                    break

        logger.info("nucleus limit %s: %s", [format_bits(x) for x in limit], 'pass' if passed else 'fail')
        return {
            'limit': [format_bits(x) for x in limit],
            'iterations': [[format_bits(x) for x in s] for s in chain],
            'injective_certificate': 'pass' if passed else 'fail',
            'witness': witness,
        }

    @staticmethod
    def finiteness_test(table: RecursionTable, generators: Sequence[str] = None, max_points: int = None) -> dict:
        """Orders of the level actions of the subgroup on the given generators.

        When the generators' sections stay among them, two consecutive levels with the same
        order mean the whole group acts faithfully on the lower level and is finite.
        """
        gens = tuple(generators if generators is not None else table.generators)
        for g in gens:
            if g not in table.permutations:
                raise AlphabetEscape(f"letter {g} is not a generator of the table")
        max_points = max_points or Config.FINITENESS_MAX_POINTS
        closed = all(letter in gens for g in gens for w in table.slots[g] for letter, _ in w.letters)

        orders, stable, level = [], None, 1
        while table.degree > 1 and table.degree ** level <= max_points:
            chain = StabilizerChain(table.degree ** level)
            for g in gens:
                chain.add(WreathAlgebra.iterate_recursion(table, FreeWord.letter(g), level).perm)
            orders.append({'level': level, 'points': table.degree ** level, 'order': chain.order()})
            if len(orders) > 1 and orders[-1]['order'] == orders[-2]['order']:
                stable = level - 1
                break
            level += 1

        if not closed:
            verdict = 'not-self-similar'
        elif stable is not None:
            verdict = 'finite'
        else:
            verdict = 'undecided'
        logger.info("level orders of %s: %s (%s)", list(gens), [o['order'] for o in orders], verdict)
        return {
            'generators': list(gens),
            'section_closed': closed,
            'orders': orders,
            'stable_level': stable,
            'order': orders[-1]['order'] if verdict == 'finite' else None,
            'verdict': verdict,
        }

    # --- the four cases and the persistence argument -----------------------

    @staticmethod
    def four_cases(q: QuotientRecursion) -> List[CaseTable]:
        """Distinct label tables under componentwise conjugation in the order-8 quotient"""
        if q.labels is None or len(q.tracked) != 2:
            raise PreconditionFailed("four_cases needs the labelled reduction of a two-letter recursion")
        groups = WreathAlgebra.quartic_groups()
        Quot = groups.quotient
        index = {name: k for k, name in groups.names.items()}
        nonzero = [x for x in q.elements if x != q.zero]

        found: Dict[Tuple, Tuple[int, int]] = {}
        for c1, c2 in product(range(len(Quot)), repeat=2):
            table = tuple(
                (groups.names[Quot.conjugate(index[q.labels[x][0]], c1)],
                 groups.names[Quot.conjugate(index[q.labels[x][1]], c2)])
                for x in nonzero
            )
            found.setdefault(table, (c1, c2))

        cases = []
        for table, (c1, c2) in found.items():
            labels = dict(zip(nonzero, table))
            number = next((n for n, pattern in CASE_PATTERNS.items()
                           if all(labels[x] == v for x, v in pattern.items())), None)
            if number is None:
                raise CaseCountMismatch(f"conjugated labels {labels} match no known case")
            cases.append(CaseTable(number=number, labels=labels,
                                   conjugators=(groups.names[c1], groups.names[c2])))
        cases.sort(key=lambda c: c.number)
        if [c.number for c in cases] != [1, 2, 3, 4]:
            raise CaseCountMismatch(f"found cases {[c.number for c in cases]}")
        return cases

    @staticmethod
    def claim2_search(case: CaseTable) -> dict:
        """Elements whose sections are forced to leave the kernel at every depth.

        x survives when some component X carries zeta2 or zeta3 and every nonzero y
        with y[X] = 1 survives too; the survivors are a greatest fixed point.
        """
        nonzero = sorted(case.labels, key=bits_key)
        m = len(nonzero[0]) if nonzero else 0

        def forced(x, alive):
            for X in range(m):
                if case.labels[x][X] in (ZETA2, ZETA3):
                    targets = [y for y in nonzero if y[X] == 1]
                    if all(y in alive for y in targets):
                        return X, targets
            return None

        alive = set(nonzero)
        while True:
            keep = {x for x in alive if forced(x, alive)}
            if keep == alive:
                break
            alive = keep
        if not alive:
            raise NoWitness(f"case {case.number} forces no persistent section")

        witness = min(alive, key=bits_key)
        path, x = [], witness
        while x not in path:
            path.append(x)
            _, targets = forced(x, alive)
            x = min(targets, key=bits_key)
        cycle = path[path.index(x):]
        edges = {format_bits(x): [format_bits(y) for y in forced(x, alive)[1]]
                 for x in sorted(alive, key=bits_key)}
        return {
            'case': case.number,
            'witness': format_bits(witness),
            'persistent': [format_bits(x) for x in sorted(alive, key=bits_key)],
            'cycle': [format_bits(x) for x in cycle],
            'edges': edges,
        }

    @staticmethod
    def claim3_check(table: RecursionTable, max_length: int = None) -> dict:
        """Words up to max_length with trivial permutation must reduce to (0,0) or (1,1)"""
        max_length = max_length or Config.CLAIM3_MAX_LENGTH
        tracked = tuple(table.tracked)
        zero, ones = tuple(0 for _ in tracked), tuple(1 for _ in tracked)
        letters = [(g, s) for g in table.generators for s in (1, -1)]
        moves = {}
        for g, s in letters:
            perm = table.permutations[g] if s > 0 else table.permutations[g].inverse()
            moves[(g, s)] = (perm, tuple(1 if g == t else 0 for t in tracked))

        identity = Permutation.identity(table.degree)
        # state -> (number of reduced words reaching it, first such word)
        states: Dict[Tuple, Tuple[int, FreeWord]] = {(identity, zero, None): (1, FreeWord())}
        checked, violations, example = 0, 0, None
        for length in range(1, max_length + 1):
            grown: Dict[Tuple, Tuple[int, FreeWord]] = {}
            for (perm, mu, last), (count, word) in states.items():
                for letter in letters:
                    if last is not None and letter == (last[0], -last[1]):
                        continue
                    step, bits = moves[letter]
                    key = (perm * step, tuple(a ^ b for a, b in zip(mu, bits)), letter)
                    prev = grown.get(key)
                    grown[key] = ((prev[0] if prev else 0) + count,
                                  prev[1] if prev else FreeWord(word.letters + (letter,)))
            states = grown
            for (perm, mu, _), (count, word) in states.items():
                if perm.is_identity:
                    checked += count
                    if mu not in (zero, ones):
                        violations += count
                        example = example or str(word)
        logger.info("Claim 3 check to length %d: %d words, %d violations", max_length, checked, violations)
        return {
            'max_length': max_length,
            'words_checked': checked,
            'violations': violations,
            'holds': violations == 0,
            'example': example,
        }
