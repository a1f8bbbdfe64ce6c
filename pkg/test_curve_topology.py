"""
Cut systems, loop words, winding numbers and pulled-back curves
"""
import pytest

from cantor_atlas.errors import Crowded, PreconditionFailed
from cantor_atlas.lifting_engine import PathLift
from cantor_atlas.models import INF, FreeWord, Polyline, Radial
from cantor_atlas.topology_engine import CurveTopology
from cantor_atlas.wreath_engine import WreathAlgebra


@pytest.fixture
def two_punctures():
    return CurveTopology.build_cut_system([0, 1], 0.5 + 1j)


def test_winding_numbers():
    circle = PathLift.circle(0, 1)
    assert CurveTopology.winding_numbers(circle, [0, 0.5j, 2, -3 + 1j]) == [1, 1, 0, 0]
    assert CurveTopology.winding_number(circle.reversed(), 0) == -1
    assert CurveTopology.winding_number(Polyline.concat(circle, circle), 0.1) == 2
    assert CurveTopology.winding_number(circle, INF) == 0
    with pytest.raises(PreconditionFailed):
        CurveTopology.winding_number(circle, 1j)


def test_cut_system_defaults(two_punctures):
    cutsys = two_punctures
    assert cutsys.labels == ['g1', 'g2']
    assert abs(cutsys.direction + 1j) < 1e-12
    assert cutsys.lasso_radius == pytest.approx(0.1)
    assert cutsys.height == pytest.approx(2)


def test_generator_loop_words(two_punctures):
    g1 = CurveTopology.generator_loop(two_punctures, 'g1')
    g2 = CurveTopology.generator_loop(two_punctures, 'g2')
    assert g1.closed and abs(g1.start - (0.5 + 1j)) < 1e-12
    assert CurveTopology.loop_to_word(two_punctures, g1) == FreeWord.letter('g1')
    assert CurveTopology.loop_to_word(two_punctures, g1.reversed()) == FreeWord.letter('g1', -1)
    assert str(CurveTopology.loop_to_word(two_punctures, Polyline.concat(g1, g2))) == "g1 g2"
    assert CurveTopology.loop_to_word(two_punctures, Polyline.concat(g1, g1.reversed())).is_identity


def test_generator_loop_winds_once(two_punctures):
    g1 = CurveTopology.generator_loop(two_punctures, 'g1')
    assert CurveTopology.winding_numbers(g1, [0, 1]) == [1, 0]


def test_crowded_square():
    with pytest.raises(Crowded):
        CurveTopology.build_cut_system([0, 1, 1j, 1 + 1j], 2 + 3j)


def test_cut_system_rejects_bad_input():
    with pytest.raises(PreconditionFailed):
        CurveTopology.build_cut_system([0, 1e-4], 1j)
    with pytest.raises(PreconditionFailed):
        CurveTopology.build_cut_system([0, 1], 0)
    with pytest.raises(PreconditionFailed):
        CurveTopology.loop_to_word(CurveTopology.build_cut_system([0], 1j), PathLift.segment(1j, 2j))


def test_postcritical_labels_for_quartic(quartic_3i):
    labels, points, tracked = CurveTopology.postcritical_punctures(quartic_3i)
    assert labels == ['A', 'B', 'C0', 'C1']
    assert tracked == ('A', 'B')
    assert points[0] == pytest.approx(-1)
    assert points[1] == pytest.approx(1)
    assert points[2] == pytest.approx(-35j / 12)


def test_postcritical_labels_for_quadratic(quadratic_4):
    labels, points, tracked = CurveTopology.postcritical_punctures(quadratic_4, INF)
    assert labels == ['C0', 'C1', 'C2']
    assert tracked == ()
    assert [z.real for z in points] == pytest.approx([4, 20, 404])


def test_preimage_of_big_circle_is_connected(squaring):
    traced = CurveTopology.preimage_curve_trace(squaring, PathLift.circle(0, 4))
    assert len(traced) == 1
    [curve] = traced.curves
    assert curve.degree == 2 and curve.level == 1
    assert curve.curve.closed
    assert CurveTopology.winding_number(curve, 0) == 1


def test_preimage_of_small_circle_splits(squaring):
    traced = CurveTopology.preimage_curve_trace(squaring, PathLift.circle(1, 0.5))
    assert len(traced) == 2
    assert [c.degree for c in traced] == [1, 1]
    assert sorted(CurveTopology.winding_number(c, 1) for c in traced) == [0, 1]
    assert sorted(CurveTopology.winding_number(c, -1) for c in traced) == [0, 1]


def test_pullback_levels(squaring):
    levels = CurveTopology.pullback(squaring, [PathLift.circle(0, 4)], 2)
    assert [len(s) for s in levels] == [1, 1]
    assert levels[1].curves[0].level == 2
    assert all(abs(abs(z) - 2 ** 0.5) < 1e-3 for z in levels[1].curves[0].curve.z)


def test_preimage_trace_needs_closed_curve(squaring):
    with pytest.raises(PreconditionFailed):
        CurveTopology.preimage_curve_trace(squaring, PathLift.segment(1, 2))


def test_nesting_and_annuli():
    circles = [PathLift.circle(0, r) for r in (1, 2, 3, 4)]
    graph = CurveTopology.region_nesting(circles, marks=[('origin', 0), ('outside', 10)])
    assert [graph.depth(k) for k in range(4)] == [3, 2, 1, 0]
    assert graph.parent[0] == 1 and graph.parent[3] is None
    assert graph.parent[4] == 0 and graph.parent[5] is None
    assert graph.marks_inside(3) == [4]
    assert CurveTopology.annuli(graph) == [(1, 0), (3, 2)]


def test_resample_keeps_the_ends():
    circle = PathLift.circle(0, 1, n=1000)
    thin = CurveTopology.resample(circle, 100)
    assert len(thin) <= 100
    assert thin.closed
    assert CurveTopology.resample(thin, 500) is thin


def test_conjugate_recursion_round_trip():
    table = WreathAlgebra.quartic_recursion_table(2)
    h = [FreeWord.parse(w) for w in ("A", "e", "C0^-1", "B A")]
    there = CurveTopology.conjugate_recursion(table, h)
    back = CurveTopology.conjugate_recursion(there, [w.inverse() for w in h])
    assert back.slots == table.slots
    assert there.permutations == table.permutations
    with pytest.raises(ValueError):
        CurveTopology.conjugate_recursion(table, h[:2])


def _bent_radial(radial, bump):
    legs = []
    for leg in radial.legs:
        a, b = leg.start, leg.end
        normal = 1j * (b - a) / abs(b - a)
        legs.append(PathLift.path_through([a, (a + b) / 2 + bump * normal, b]))
    return Radial(basepoint=radial.basepoint, legs=legs)


def _extract(f, radial, p=None):
    labels, points, tracked = CurveTopology.postcritical_punctures(f, p)
    cutsys = CurveTopology.build_cut_system(points, radial.basepoint, labels, tracked)
    return CurveTopology.wreath_recursion_extract(f, radial, cutsys)


@pytest.mark.parametrize("bump", [0.05, -0.05])
def test_recursion_survives_bent_legs(quadratic_4, bump):
    straight = PathLift.straight_radial(quadratic_4, 1j)
    bent = _bent_radial(straight, bump)
    assert bent.endpoints == straight.endpoints
    assert PathLift.check_radial(quadratic_4, bent) > 1e-3
    expected = _extract(quadratic_4, straight, INF)
    table = _extract(quadratic_4, bent, INF)
    assert table.permutations == expected.permutations
    assert table.shape() == expected.shape()


@pytest.mark.slow
def test_extracted_quartic_recursion_matches_symbolic(quartic_3i):
    radial = PathLift.standard_radial(quartic_3i)
    labels, points, tracked = CurveTopology.postcritical_punctures(quartic_3i)
    cutsys = CurveTopology.build_cut_system(points, radial.basepoint, labels, tracked)
    table = CurveTopology.wreath_recursion_extract(quartic_3i, radial, cutsys)
    expected = WreathAlgebra.quartic_recursion_table(2)
    assert table.generators == expected.generators
    assert table.shape() == expected.shape()


@pytest.mark.slow
def test_quartic_recursion_survives_bent_legs(quartic_3i):
    radial = PathLift.standard_radial(quartic_3i)
    expected = _extract(quartic_3i, radial)
    for bump in (0.02, -0.02):
        table = _extract(quartic_3i, _bent_radial(radial, bump))
        assert table.permutations == expected.permutations
        assert table.shape() == expected.shape() == WreathAlgebra.quartic_recursion_table(2).shape()
