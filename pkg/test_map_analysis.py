"""
Critical and fixed points, basins, simple domains and escape-time grids
"""
import cmath

import numpy as np
import pytest

from cantor_atlas.dynamics_engine import MapAnalysis
from cantor_atlas.models import INF, FixedPointClass, RationalMap, is_inf
from cantor_atlas.services.preset_service import PresetService
from cantor_atlas.services.sphere_service import SphereService


def _critical(f):
    return [(c.to_complex(), d) for c, d in MapAnalysis.critical_points(f).points]


def test_critical_count_is_2d_minus_2(quartic_3i, quartic_figure, quadratic_4):
    for f in (quartic_3i, quartic_figure, quadratic_4, RationalMap(num=(1, 0, 1), den=(0, 1))):
        crit = MapAnalysis.critical_points(f)
        assert sum(d - 1 for _, d in crit.points) == 2 * f.degree - 2


def test_quadratic_critical_points(quadratic_4):
    crit = _critical(quadratic_4)
    assert len(crit) == 2
    assert any(abs(z) < 1e-12 and d == 2 for z, d in crit)
    assert any(is_inf(z) and d == 2 for z, d in crit)


def test_quartic_critical_points(quartic_3i):
    a = 3j
    expected = [0, cmath.sqrt(1 + 1 / (2 * a)), -cmath.sqrt(1 + 1 / (2 * a)),
                cmath.sqrt(1 - 1 / (2 * a)), -cmath.sqrt(1 - 1 / (2 * a))]
    crit = _critical(quartic_3i)
    assert all(d == 2 for _, d in crit)
    finite = [z for z, _ in crit if not is_inf(z)]
    assert any(is_inf(z) for z, _ in crit)
    for e in expected:
        assert min(abs(e - z) for z in finite) < 1e-8


def test_z_plus_inverse_critical_points():
    crit = _critical(RationalMap(num=(1, 0, 1), den=(0, 1)))
    assert sorted(round(z.real, 8) for z, _ in crit) == [-1.0, 1.0]


def test_critical_values_land_for_quartic(quartic_3i):
    values = [v.to_complex() for v in MapAnalysis.critical_points(quartic_3i).values]
    finite = sorted((v for v in values if not is_inf(v)), key=lambda z: (z.real, z.imag))
    assert any(abs(v - (-35j / 12)) < 1e-9 for v in finite)
    assert any(abs(v - 1) < 1e-9 for v in finite)
    assert any(abs(v + 1) < 1e-9 for v in finite)


def test_fixed_points_of_squaring(squaring):
    report = MapAnalysis.fixed_points(squaring)
    assert report.count == 3
    by_point = {('inf' if fp.point.is_infinity else round(fp.point.to_complex().real, 8)): fp for fp in report.points}
    assert by_point[0.0].kind == FixedPointClass.SUPERATTRACTING
    assert by_point['inf'].kind == FixedPointClass.SUPERATTRACTING
    assert by_point[1.0].kind == FixedPointClass.REPELLING
    assert abs(by_point[1.0].multiplier - 2) < 1e-9


def test_fixed_points_of_quartic_and_quadratic(quartic_3i, quadratic_4):
    report = MapAnalysis.fixed_points(quartic_3i)
    assert report.count == 5
    [attracting] = report.attracting
    assert attracting.point.is_infinity and attracting.kind == FixedPointClass.SUPERATTRACTING

    report = MapAnalysis.fixed_points(quadratic_4)
    finite = [fp for fp in report.points if not fp.point.is_infinity]
    assert len(finite) == 2 and all(fp.kind == FixedPointClass.REPELLING for fp in finite)
    for fp in finite:
        z = fp.point.to_complex()
        assert abs(z * z - z + 4) < 1e-9


def test_preimages(squaring, quartic_3i):
    assert sorted(z.real for z in MapAnalysis.preimages(squaring, 4)) == pytest.approx([-2, 2])

    pre = MapAnalysis.preimages(quartic_3i, INF)
    assert sum(1 for z in pre if is_inf(z)) == 2
    assert sorted(z.real for z in pre if not is_inf(z)) == pytest.approx([-1, 1])

    pre = MapAnalysis.preimages(quartic_3i, 1j)
    assert len(pre) == 4
    assert all(abs(z.imag) < 1e-8 for z in pre)
    for z in pre:
        assert SphereService.chordal_dist(SphereService.eval(quartic_3i, z), 1j) < 1e-10


def test_preimage_round_trip(quartic_figure):
    rng = np.random.default_rng(2)
    for z in rng.uniform(-2, 2, 20) + 1j * rng.uniform(-2, 2, 20):
        w = SphereService.eval(quartic_figure, z)
        pre = MapAnalysis.preimages(quartic_figure, w)
        assert min(SphereService.chordal_dist(z, x) for x in pre) < 1e-8


def test_orbit_convergence(quadratic_4, squaring, quadratic_small):
    escaping = MapAnalysis.orbit_converges(quadratic_4, 0, INF)
    assert escaping.converged and escaping.steps >= 1
    shrinking = MapAnalysis.orbit_converges(squaring, 0.5, 0, trap_radius=1e-3, max_iter=60)
    assert shrinking.converged and shrinking.steps <= 60
    assert shrinking.to_dict() == {'converged': True, 'steps': shrinking.steps}
    bounded = MapAnalysis.orbit_converges(quadratic_small, 0, INF)
    assert not bounded.converged


def test_cond_c(quartic_3i, quadratic_4, quadratic_small):
    cond, p, evidence = MapAnalysis.cond_c_classify(quartic_3i)
    assert cond and is_inf(p)
    assert all(v['orbit'] == 'converges' for v in evidence['critical'])
    assert all(isinstance(v['steps'], int) for v in evidence['critical'])
    assert len(evidence['critical']) == 6

    assert MapAnalysis.cond_c_classify(quadratic_4)[0]
    assert not MapAnalysis.cond_c_classify(quadratic_small)[0]


def test_simple_domains(squaring, quartic_3i, quadratic_4):
    dom = MapAnalysis.simple_domain(squaring, 0)
    assert dom.radius == pytest.approx(0.5)

    dom = MapAnalysis.simple_domain(quartic_3i, INF)
    assert 1 / dom.radius >= 5 / 3 - 1e-9
    assert MapAnalysis.verify_simple_domain(quartic_3i, INF, 0.6)[0]

    assert MapAnalysis.verify_simple_domain(quadratic_4, INF, 1 / 3)[0]


def test_simple_domain_reverification(squaring, quartic_3i):
    for f, p in ((squaring, 0), (quartic_3i, INF)):
        dom = MapAnalysis.simple_domain(f, p)
        ok, reason = MapAnalysis.verify_simple_domain(f, p, dom.radius, samples=1024)
        assert ok, reason


def test_critical_values_of_iterate(quadratic_4):
    values = MapAnalysis.critical_values_of_iterate(quadratic_4, 2)
    finite = sorted(v.real for v in values if not is_inf(v))
    assert finite == pytest.approx([4, 20])


def test_julia_grid_of_squaring_hugs_the_circle(squaring):
    grid = MapAnalysis.julia_grid(squaring, (-2, 2, -2, 2), 64, 64, cap=50)
    assert grid.steps.shape == (64, 64)
    assert grid.steps.max() <= 50
    slow = np.argwhere(grid.steps >= 4)
    assert len(slow) > 0
    for row, col in slow:
        z = grid.pixel_center(row, col)
        assert abs(abs(z) - 1) <= 0.1


def test_julia_grid_of_chebyshev_sits_on_the_segment():
    f = PresetService.quadratic(-2)
    grid = MapAnalysis.julia_grid(f, (-2.5, 2.5, -1, 1), 64, 65, cap=60)
    assert grid.capped.any()
    for row, col in np.argwhere(grid.steps >= 8):
        z = grid.pixel_center(row, col)
        assert abs(z.imag) <= 0.1 and abs(z.real) <= 2.2


def test_julia_grid_is_deterministic(quartic_figure):
    g1 = MapAnalysis.julia_grid(quartic_figure, (-2, 2, -2, 2), 48, 48, cap=40)
    g2 = MapAnalysis.julia_grid(quartic_figure, (-2, 2, -2, 2), 48, 48, cap=40)
    assert np.array_equal(g1.steps, g2.steps)


@pytest.mark.slow
def test_julia_grid_of_quartic_is_dust(quartic_figure):
    grid = MapAnalysis.julia_grid(quartic_figure, (-2, 2, -2, 2), 200, 200, cap=100)
    assert grid.capped_fraction < 0.05
