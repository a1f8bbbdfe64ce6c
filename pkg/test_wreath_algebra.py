"""
Wreath recursions, the finite groups behind the quartic and the reduced recursion
"""
import pytest

from cantor_atlas.errors import AlphabetEscape, PreconditionFailed
from cantor_atlas.models import FreeWord, Permutation, RecursionTable, WreathElement
from cantor_atlas.wreath_engine import T_ELEMENTS, StabilizerChain, WreathAlgebra


@pytest.fixture(scope="module")
def table():
    return WreathAlgebra.quartic_recursion_table(2)


@pytest.fixture(scope="module")
def reduced(table):
    return WreathAlgebra.reduce_recursion(table)


def _w(text):
    return FreeWord.parse(text)


def test_permutation_products_read_left_to_right():
    s = Permutation.from_cycles("(1 2)", 3)
    t = Permutation.from_cycles("(2 3)", 3)
    # (s*t)(i) = t(s(i)): 1 -> 2 -> 3
    assert (s * t)(0) == 2
    assert (s * t).to_cycles() == "(1 3 2)"
    assert (s * s.inverse()).is_identity
    assert Permutation.from_cycles("(12)(34)", 4) == Permutation.from_list([2, 1, 4, 3])


def test_free_words_reduce():
    assert _w("A A^-1 B") == _w("B")
    assert (_w("A B") * _w("B^-1 A^-1")).is_identity
    assert str(_w("C0^2 B^-1")) == "C0 C0 B^-1"
    assert _w("e") == FreeWord()
    with pytest.raises(ValueError):
        _w("A^")


def test_quartic_table_shape(table):
    assert table.generators == ("A", "B", "C0", "C1")
    assert table.tracked == ("A", "B")
    assert table.permutations["C0"].to_cycles() == "(1 4)"
    assert [str(w) for w in table.slots["C1"]] == ["e", "e", "e", "C0"]
    with pytest.raises(ValueError):
        WreathAlgebra.quartic_recursion_table(0)


def test_wreath_product_laws(table):
    a, b, c = (table.element(g) for g in ("A", "B", "C0"))
    mul = WreathAlgebra.wreath_product
    assert mul(mul(a, b), c) == mul(a, mul(b, c))
    unit = mul(a, WreathAlgebra.wreath_inverse(a))
    assert unit.perm.is_identity and all(w.is_identity for w in unit.slots)


def test_word_recursion_is_a_homomorphism(table):
    g, h = _w("A C0 B^-1"), _w("C1 A B")
    lhs = WreathAlgebra.word_recursion(table, g * h)
    rhs = WreathAlgebra.wreath_product(WreathAlgebra.word_recursion(table, g),
                                       WreathAlgebra.word_recursion(table, h))
    assert lhs == rhs


def test_iterate_recursion(table):
    a = _w("A")
    level0 = WreathAlgebra.iterate_recursion(table, a, 0)
    assert level0.slots == (a,) and level0.perm.degree == 1
    assert WreathAlgebra.iterate_recursion(table, a, 1) == table.element("A")

    level2 = WreathAlgebra.iterate_recursion(table, a, 2)
    assert level2.perm.degree == 16
    assert not level2.perm.is_identity and (level2.perm * level2.perm).is_identity

    squared = WreathAlgebra.iterate_recursion(table, a * a, 2)
    assert squared.perm.is_identity
    assert all(w.is_identity for w in squared.slots)


def test_iterate_recursion_respects_products(table):
    g, h = _w("A C0"), _w("B C1^-1")
    lhs = WreathAlgebra.iterate_recursion(table, g * h, 2)
    rhs = WreathAlgebra.wreath_product(WreathAlgebra.iterate_recursion(table, g, 2),
                                       WreathAlgebra.iterate_recursion(table, h, 2))
    assert lhs == rhs


def test_iterate_recursion_level_cap(table):
    with pytest.raises(PreconditionFailed):
        WreathAlgebra.iterate_recursion(table, _w("A"), 11)
    with pytest.raises(PreconditionFailed):
        WreathAlgebra.iterate_recursion(table, _w("A"), -1)


def test_alphabet_escape(table):
    with pytest.raises(AlphabetEscape):
        WreathAlgebra.word_recursion(table, _w("A Z"))
    broken = RecursionTable(
        degree=2, generators=("A",),
        permutations={"A": Permutation.from_cycles("(1 2)", 2)},
        slots={"A": (_w("Z"), FreeWord())},
        tracked=("A",),
    )
    with pytest.raises(AlphabetEscape):
        WreathAlgebra.reduce_recursion(broken)


def test_group_orders():
    T = WreathAlgebra.build_T_group()
    G = WreathAlgebra.build_Z2_4_semidirect_T()
    assert len(T) == 8 and not T.is_abelian()
    assert len(G) == 128
    assert sorted(T.element_order(k) for k in range(len(T))) == [1, 2, 2, 2, 2, 2, 4, 4]


def test_conjugacy_in_T():
    T = WreathAlgebra.build_T_group()
    diagonal_a = T.index[Permutation.from_cycles("(1 4)", 4)]
    diagonal_b = T.index[Permutation.from_cycles("(2 3)", 4)]
    edge = T.index[Permutation.from_cycles("(1 2)(3 4)", 4)]
    g = WreathAlgebra.conjugacy_test(T, diagonal_a, diagonal_b)
    assert g is not False and T.conjugate(diagonal_a, g) == diagonal_b
    assert WreathAlgebra.conjugacy_test(T, diagonal_a, edge) is False


def test_normal_subgroups():
    groups = WreathAlgebra.quartic_groups()
    assert WreathAlgebra.is_normal(groups.G, groups.subgroups['Q:T'])
    assert not WreathAlgebra.is_normal(groups.G, groups.subgroups['S:T'])
    assert len(groups.subgroups['S:L']) == 16
    quotient, projection = WreathAlgebra.quotient(groups.G, groups.subgroups['S:L'])
    assert len(quotient) == 8 and len(projection) == 128


def test_verify_claim1():
    report = WreathAlgebra.verify_claim1()
    assert report['item1'] == {'holds': True, 'pairs_checked': 128}
    assert report['item2']['normal'] == {'Q:T': True, 'Q:L': True, 'S:L': True, 'S:T': False}
    assert report['item3']['element_orders'] == [1, 2, 2, 2]
    assert report['item4']['zeta2_class'] == ['zeta2']
    assert report['quotient']['order'] == 8 and report['quotient']['exponent'] == 4
    assert report['T'][0] == "()" and len(report['T']) == len(T_ELEMENTS)


def test_mu_reduce():
    assert WreathAlgebra.mu_reduce(_w("A B^-1 A C0")) == (0, 1)
    assert WreathAlgebra.mu_reduce(_w("A^-1")) == (1, 0)
    assert WreathAlgebra.mu_reduce(_w("C0 C1")) == (0, 0)


def test_reduce_recursion(reduced):
    assert reduced.elements == [(0, 0), (1, 0), (0, 1), (1, 1)]
    assert reduced.slots[(1, 0)] == ((1, 0), (1, 0), (0, 0), (0, 0))
    assert reduced.slots[(0, 1)] == ((0, 0), (0, 0), (0, 1), (0, 1))
    assert reduced.slots[(1, 1)] == ((1, 0), (1, 0), (0, 1), (0, 1))
    assert reduced.permutations[(1, 1)].is_identity
    assert reduced.permutations[(1, 0)].to_cycles() == "(1 2)(3 4)"
    assert set(reduced.labels) == set(reduced.elements)


def test_quotient_section_and_action(reduced):
    assert WreathAlgebra.quotient_section(reduced, (1, 0), (0,)) == (1, 0)
    assert WreathAlgebra.quotient_section(reduced, (1, 0), (2,)) == (0, 0)
    assert WreathAlgebra.quotient_action(reduced, (1, 0), (0,)) == (1,)
    assert WreathAlgebra.quotient_action(reduced, (1, 1), (0, 2)) == (1, 2)
    assert WreathAlgebra.quotient_action(reduced, (0, 0), ()) == ()


def test_nucleus_of_quartic_fails(reduced):
    report = WreathAlgebra.nucleus_test(reduced)
    assert report['limit'] == ["(0,0)", "(1,0)", "(0,1)"]
    assert report['injective_certificate'] == 'fail'
    assert report['witness'] == {'element': "(1,0)", 'word': "1", 'moved_to': "2"}
    assert report['iterations'][0] == ["(0,0)", "(1,0)", "(0,1)", "(1,1)"]


def test_nucleus_of_untracked_table_passes():
    table = RecursionTable(
        degree=2, generators=("C0",),
        permutations={"C0": Permutation.from_cycles("(1 2)", 2)},
        slots={"C0": (FreeWord(), _w("C0"))},
    )
    q = WreathAlgebra.reduce_recursion(table)
    assert q.elements == [()]
    report = WreathAlgebra.nucleus_test(q)
    assert report['injective_certificate'] == 'pass' and report['witness'] is None


def _swap_chain_table():
    # rooted swap, then the same swap pushed one and two levels down
    e = FreeWord()
    return RecursionTable(
        degree=2, generators=("C0", "C1", "C2"),
        permutations={"C0": Permutation.from_cycles("(1 2)", 2), "C1": Permutation.identity(2),
                      "C2": Permutation.identity(2)},
        slots={"C0": (e, e), "C1": (_w("C0"), e), "C2": (_w("C1"), e)},
    )


def test_stabilizer_chain_orders():
    chain = StabilizerChain(4)
    for g in ("(1 2 3 4)", "(1 2)"):
        chain.add(Permutation.from_cycles(g, 4))
    assert chain.order() == 24
    assert chain.sift(Permutation.from_cycles("(1 3)", 4)).is_identity

    klein = StabilizerChain(4)
    for g in ("(1 2)(3 4)", "(1 3)(2 4)", "(1 4)(2 3)"):
        klein.add(Permutation.from_cycles(g, 4))
    assert klein.order() == 4
    assert not klein.sift(Permutation.from_cycles("(1 2)", 4)).is_identity

    t_group = StabilizerChain(4)
    for p in T_ELEMENTS:
        t_group.add(p)
    assert t_group.order() == 8


def test_finite_level_orders_stabilize():
    report = WreathAlgebra.finiteness_test(_swap_chain_table())
    assert [o['order'] for o in report['orders']] == [2, 8, 128, 128]
    assert [o['points'] for o in report['orders']] == [2, 4, 8, 16]
    assert report['section_closed'] is True
    assert report['verdict'] == 'finite'
    assert report['stable_level'] == 3 and report['order'] == 128


def test_adding_machine_is_undecided():
    table = RecursionTable(
        degree=2, generators=("C0",),
        permutations={"C0": Permutation.from_cycles("(1 2)", 2)},
        slots={"C0": (FreeWord(), _w("C0"))},
    )
    report = WreathAlgebra.finiteness_test(table, max_points=32)
    assert [o['order'] for o in report['orders']] == [2, 4, 8, 16, 32]
    assert report['verdict'] == 'undecided' and report['order'] is None


def test_finiteness_needs_closed_sections():
    report = WreathAlgebra.finiteness_test(_swap_chain_table(), generators=("C1",))
    assert report['section_closed'] is False
    assert report['verdict'] == 'not-self-similar'
    with pytest.raises(AlphabetEscape):
        WreathAlgebra.finiteness_test(_swap_chain_table(), generators=("D",))


def test_quartic_level_orders(table):
    report = WreathAlgebra.finiteness_test(table)
    assert report['section_closed'] is True
    assert report['orders'][0] == {'level': 1, 'points': 4, 'order': 8}
    assert len(report['orders']) <= 2


def test_four_cases(reduced):
    cases = WreathAlgebra.four_cases(reduced)
    assert [c.number for c in cases] == [1, 2, 3, 4]
    for case in cases:
        assert set(case.labels) == {(1, 0), (0, 1), (1, 1)}
        assert len(case.conjugators) == 2


def test_four_cases_need_labels():
    table = RecursionTable(
        degree=2, generators=("C0",),
        permutations={"C0": Permutation.from_cycles("(1 2)", 2)},
        slots={"C0": (FreeWord(), _w("C0"))},
    )
    with pytest.raises(PreconditionFailed):
        WreathAlgebra.four_cases(WreathAlgebra.reduce_recursion(table))


def test_claim2_in_every_case(reduced):
    for case in WreathAlgebra.four_cases(reduced):
        report = WreathAlgebra.claim2_search(case)
        assert report['case'] == case.number
        assert report['witness'] in report['persistent']
        assert set(report['cycle']) <= set(report['persistent'])
        for x in report['persistent']:
            assert set(report['edges'][x]) <= set(report['persistent'])


def test_claim3_on_quartic(table):
    report = WreathAlgebra.claim3_check(table, max_length=4)
    assert report['holds'] and report['violations'] == 0
    assert report['words_checked'] > 0
    assert report['example'] is None


def test_claim3_detects_escapes():
    table = RecursionTable(
        degree=2, generators=("A", "B"),
        permutations={"A": Permutation.identity(2), "B": Permutation.from_cycles("(1 2)", 2)},
        slots={"A": (FreeWord(), FreeWord()), "B": (FreeWord(), FreeWord())},
        tracked=("A", "B"),
    )
    report = WreathAlgebra.claim3_check(table, max_length=2)
    assert not report['holds']
    assert report['example'] == "A"
    assert report['violations'] >= 2


def test_wreath_element_dict(table):
    el = WreathElement(table.slots["C0"], table.permutations["C0"])
    assert el.to_dict() == {'slots': ["B", "e", "e", "B^-1"], 'permutation': [4, 2, 3, 1]}
