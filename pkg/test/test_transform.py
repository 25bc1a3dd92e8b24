import numpy as np
import pytest

from fiohardy.errors import ResolutionError, StructuralError
from fiohardy.field import GridSpec, SampledField
from fiohardy.metric import SigmaGrid, SphereGrid
from fiohardy.packets import build_profiles
from fiohardy.tent import tent_norm
from fiohardy.transform import (TransformPlan, analyze, hardy_norm, hardy_norms, isometry_defect, lowfreq_equivalence,
                                norm_independence, reconstruction_error, square_function, synthesize,
                                test_family)

from conftest import SIGMA_MIN


def test_synthesis_is_the_adjoint(plan, random_field, random_phase_field):
    f = random_field(plan.grid, 1)
    F = random_phase_field(plan.grid, 64, 16, seed=2)
    lhs = analyze(plan, f).inner(F)
    rhs = f.inner(synthesize(plan, F))
    assert abs(lhs - rhs) <= 1e-10 * abs(lhs)


def test_family_is_deterministic_and_normalized(plan):
    first = test_family(plan, 7)
    second = test_family(plan, 7)
    assert len(first) == 30
    for f, g in zip(first, second):
        assert f.norm() == pytest.approx(1.0, abs=1e-12)
        assert np.array_equal(f.values, g.values)


def test_isometry_and_reconstruction(plan):
    for f in test_family(plan, 11, 9):
        assert isometry_defect(plan, f) < 5e-3
        assert reconstruction_error(plan, f) < 5e-3


def test_isometry_and_reconstruction_at_desk_scale(desk_plan):
    for f in test_family(desk_plan, 11, 3):
        assert isometry_defect(desk_plan, f) < 5e-3
        assert reconstruction_error(desk_plan, f) < 5e-3
        assert hardy_norm(desk_plan, f, 2).value == pytest.approx(1.0, abs=5e-3)


def test_hardy_norm_at_p_two_is_the_l2_norm(plan):
    for f in test_family(plan, 3, 3):
        report = hardy_norm(plan, f, 2)
        assert report.value == pytest.approx(f.norm(), rel=5e-3)
        assert report.p == 2
        assert report.grid_tag == plan.grid.tag
        assert report.alt_value > 0


def test_square_function_shapes(tiny_plan):
    f = test_family(tiny_plan, 0, 3)[0]
    assert square_function(tiny_plan, f).shape == (tiny_plan.sphere.size,) + tiny_plan.grid.shape
    family_values = square_function(tiny_plan, f, 'inf')
    assert family_values.shape == (tiny_plan.sphere.size,) + tiny_plan.grid.shape
    assert np.all(family_values >= 0)


def test_norm_independence(tiny_plan, tiny_grid):
    f = test_family(tiny_plan, 5, 3)[0]
    assert norm_independence(f, tiny_plan, tiny_plan, 1) == 1.0
    other = TransformPlan.build(tiny_grid, 'skewed', angles=48, sigma_levels=8, sigma_min=SIGMA_MIN)
    ratio = norm_independence(f, tiny_plan, other, 2)
    assert 0.5 < ratio < 2.0
    coarse = TransformPlan.build(GridSpec(2, 32), 'standard', angles=48, sigma_levels=8, sigma_min=SIGMA_MIN)
    with pytest.raises(StructuralError):
        norm_independence(f, tiny_plan, coarse, 1)


def test_low_frequency_equivalence_of_zero(tiny_plan):
    tent_side, lp_side, ratio = lowfreq_equivalence(tiny_plan, SampledField.zeros(tiny_plan.grid))
    assert tent_side == 0.0 and lp_side == 0.0
    assert np.isnan(ratio)


def test_plan_checks(tiny_plan, tiny_grid, random_field):
    with pytest.raises(StructuralError):
        analyze(tiny_plan, random_field(GridSpec(2, 32)))
    with pytest.raises(StructuralError):
        TransformPlan(tiny_grid, build_profiles('standard', 3), SphereGrid.uniform(2, 8),
                      SigmaGrid.geometric(SIGMA_MIN, 4))
    with pytest.raises(ResolutionError):
        TransformPlan.build(tiny_grid, angles=8, sigma_levels=4, sigma_min=1.0 / 64.0)


def test_uncached_plan_matches_cached(tiny_grid, tiny_plan, random_field):
    lean = TransformPlan.build(tiny_grid, 'standard', angles=48, sigma_levels=8, sigma_min=SIGMA_MIN, cache_limit=0)
    f = random_field(tiny_grid, 9)
    assert np.allclose(analyze(lean, f).values, analyze(tiny_plan, f).values, rtol=0, atol=1e-12)


def test_coarse_sphere_is_rejected(tiny_grid):
    with pytest.raises(ResolutionError, match='directions'):
        TransformPlan.build(tiny_grid, angles=16, sigma_levels=4, sigma_min=SIGMA_MIN)


def test_analysis_is_linear(tiny_plan, random_field):
    f = random_field(tiny_plan.grid, 3)
    g = random_field(tiny_plan.grid, 4)
    combined = analyze(tiny_plan, 2.0 * f + (0.5 - 1.5j) * g).values
    separate = 2.0 * analyze(tiny_plan, f).values + (0.5 - 1.5j) * analyze(tiny_plan, g).values
    assert np.allclose(combined, separate, rtol=0, atol=1e-11)


def test_hardy_norm_triangle_inequality(tiny_plan):
    f, g, h = test_family(tiny_plan, 6, 3)
    for p in (1, 2, 'inf'):
        total = hardy_norm(tiny_plan, f + g, p).value
        assert total <= (1 + 1e-9) * (hardy_norm(tiny_plan, f, p).value + hardy_norm(tiny_plan, g, p).value)
        assert hardy_norm(tiny_plan, f - h, p).value > 0


def test_hardy_norms_share_one_pass(tiny_plan):
    f = test_family(tiny_plan, 2, 3)[1]
    reports = hardy_norms(tiny_plan, f, [1, 2, 3, 'inf'])
    assert [r.p for r in reports] == [1.0, 2.0, 3.0, np.inf]
    for report in reports:
        single = hardy_norm(tiny_plan, f, report.p)
        assert report.value == pytest.approx(single.value, rel=1e-12)
        assert report.alt_value == pytest.approx(single.alt_value, rel=1e-12)
    F = analyze(tiny_plan, f)
    assert reports[0].value == pytest.approx(tent_norm(F, 1), rel=1e-10)
    # ||A F||_2 = ||F|| on the grid
    assert reports[1].value == pytest.approx(tent_norm(F, 2), rel=1e-10)


def test_equivalent_norm_ratio_is_stable(plan):
    for p in (1, 2, 4):
        ratios = [r.value / r.alt_value for r in (hardy_norm(plan, f, p) for f in test_family(plan, 8, 6))]
        assert 0.1 <= min(ratios) and max(ratios) <= 10.0
        assert max(ratios) / min(ratios) < 10.0
    for f in test_family(plan, 8, 3):
        report = hardy_norm(plan, f, 2)
        # ||W f|| <= ||S f||_2 + ||q(D) f||_2 <= 2 ||W f|| up to the quadrature defect
        assert 0.49 <= report.value / report.alt_value <= 1.0 + 5e-3
