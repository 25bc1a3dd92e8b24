import casadi as ca
import numpy as np
import pytest

from fiohardy.errors import ConfigurationError, SingularityError
from fiohardy.field import GridSpec, plane_wave
from fiohardy.fio import (NormalOIO, OffSingSamples, adjoint, apply_oio, empirical_tent_bound, half_wave,
                          identity_contact, identity_operator, induced_contact, kernel_peak, lifted_kernel,
                          offsing_fit, operator_from_config, pseudo_operator, residual_check, smoothing_operator,
                          upsilon)
from fiohardy.metric import BallSpec, CospherePoint, bilipschitz_ratio
from fiohardy.phase import PhaseFunction, SymbolFunction
from fiohardy.tent import make_atom
from fiohardy.transform import TransformPlan, analyze, test_family

from conftest import SIGMA_MIN

E1 = np.array([1.0, 0.0])


def _bent_operator(steps=50):
    phase = PhaseFunction(2, lambda x, eta: ca.dot(x, eta) + 0.5 * ca.sin(x[0]) * ca.norm_2(eta), name='bent')
    return NormalOIO(phase, SymbolFunction(lambda x, eta: 1.0), 'bent', newton_max_steps=steps)


def test_identity_paths_agree(tiny_grid, random_field):
    f = random_field(tiny_grid, 2)
    T = identity_operator()
    assert np.allclose(apply_oio(T, f, 'fast').values, f.values, atol=1e-12)
    assert np.allclose(apply_oio(T, f, 'dense').values, f.values, atol=1e-10)
    with pytest.raises(ConfigurationError):
        apply_oio(T, f, 'sideways')


def test_pseudo_operator_on_a_plane_wave(tiny_grid):
    f = plane_wave(tiny_grid, [3.0, 0.0])
    g = apply_oio(pseudo_operator(), f)
    x1 = tiny_grid.coordinates()[..., 0]
    assert np.allclose(g.values, (1.0 + 0.5 * np.sin(x1)) * f.values, atol=1e-10)


def test_half_wave_on_a_plane_wave(tiny_grid):
    k = np.array([3.0, 4.0])
    f = plane_wave(tiny_grid, k)
    g = apply_oio(half_wave(0.3), f)
    assert np.allclose(g.values, np.exp(0.3j * 5.0) * f.values, atol=1e-12)


def test_adjoint_undoes_the_half_wave(tiny_grid):
    f = plane_wave(tiny_grid, [2.0, -1.0])
    T = half_wave(1.3)
    assert np.allclose(apply_oio(adjoint(T), apply_oio(T, f)).values, f.values, atol=1e-12)
    with pytest.raises(ConfigurationError):
        adjoint(pseudo_operator())


def test_smoothing_operator_damps_high_frequencies(tiny_grid):
    f = plane_wave(tiny_grid, [4.0, 0.0])
    g = apply_oio(smoothing_operator(0.5), f)
    assert np.allclose(g.values, np.exp(-2.0) * f.values, atol=1e-12)


def test_operator_config():
    T = operator_from_config({'op': 'halfwave', 't': 2.0, 'newton_max_steps': 7})
    assert T.name == 'halfwave'
    assert T.newton_max_steps == 7
    with pytest.raises(ConfigurationError):
        operator_from_config({'op': 'heat'})


def test_half_wave_contact_map():
    chi = induced_contact(half_wave(1.5))
    y = np.array([[0.2, 0.3], [1.0, -1.0]])
    nu = np.array([[1.0, 0.0], [0.6, 0.8]])
    x, omega = chi.mapping(y, nu)
    assert np.allclose(x, y - 1.5 * nu)
    assert np.allclose(omega, nu)


def test_newton_contact_map():
    chi = induced_contact(_bent_operator())
    y = np.array([[0.3, 0.2]])
    nu = np.array([[1.0, 0.0]])
    x, omega = chi.mapping(y, nu)
    assert np.allclose(x[0] + 0.5 * np.sin(x[0, 0]) * nu[0], y[0], atol=1e-10)
    assert np.linalg.norm(omega[0]) == pytest.approx(1.0)
    with pytest.raises(SingularityError):
        induced_contact(_bent_operator(0)).mapping(y, nu)


def test_upsilon():
    assert np.allclose(upsilon([0.5, 1.0, 4.0]), [0.5, 1.0, 0.25])


def test_half_wave_kernel_moves_by_t(plan):
    kernel = lifted_kernel(half_wave(1.0, profiles=plan.profiles), plan, plan, 0.125, 0.125, E1, E1)
    peak = kernel_peak(kernel)
    assert np.linalg.norm(peak - np.array([-1.0, 0.0])) <= 2.0 * plan.grid.spacing


def test_cap_kernel_misses_high_packets(plan):
    kernel = lifted_kernel(identity_operator(), plan, plan, 1.0, 0.125, E1, E1)
    assert np.all(kernel.values == 0.0)


def test_identity_offsing_fit(plan, other_plan):
    samples = OffSingSamples([(0.25, 0.25), (0.25, 0.125), (0.125, 0.125)], OffSingSamples.default().directions)
    report = offsing_fit(identity_operator(), plan, other_plan, 3, samples, refine=False)
    assert np.isfinite(report.C_fit) and report.C_fit > 0
    assert report.refined_C is None
    assert len(report.rows()) == 3


def test_residual_table(plan, other_plan):
    pairs = [(0.25, 0.25), (0.125, 0.25)]
    table = residual_check(identity_operator(), plan, other_plan, (1, 2, 3), pairs)
    assert table.values.shape == (3, 2)
    assert np.all(np.diff(table.values, axis=0) >= 0)
    assert table.sup(3) >= table.sup(1)
    with pytest.raises(ConfigurationError):
        residual_check(identity_operator(), plan, other_plan, (1, 9), pairs)


def test_identity_tent_bound(plan):
    test_set = [analyze(plan, f) for f in test_family(plan, 4, 3)]
    stats = empirical_tent_bound(identity_operator(), plan, 2, test_set)
    assert stats.ratios.size == 3
    assert stats.max <= 1.05


@pytest.fixture(scope='module')
def wide_plan():
    return TransformPlan.build(GridSpec(2, 64), 'standard', angles=48, sigma_levels=8, sigma_min=SIGMA_MIN)


def _reflected(kernel):
    # x -> -x on the periodic grid
    axes = tuple(range(kernel.grid.dim))
    return np.roll(np.flip(kernel.values, axis=axes), 1, axis=axes)


def test_newton_contact_map_stalls_on_an_unreachable_point():
    # grad_eta Phi = arctan(x) never leaves (-pi/2, pi/2)^2
    phase = PhaseFunction(2, lambda x, eta: ca.atan(x[0]) * eta[0] + ca.atan(x[1]) * eta[1], name='bounded')
    T = NormalOIO(phase, SymbolFunction(lambda x, eta: 1.0), 'bounded')
    chi = induced_contact(T)
    y = np.array([[0.5, -0.3]])
    x, _ = chi.mapping(y, np.array([[1.0, 0.0]]))
    assert np.allclose(x, np.tan(y), atol=1e-10)
    with pytest.raises(SingularityError) as error:
        chi.mapping(np.array([[3.0, 0.0]]), np.array([[1.0, 0.0]]))
    assert np.allclose(error.value.point[0], [3.0, 0.0])


def test_half_wave_needs_its_own_contact_map(wide_plan):
    T = half_wave(1.0, profiles=wide_plan.profiles)
    samples = OffSingSamples([(0.25, 0.25), (0.125, 0.125)], OffSingSamples.default().directions)
    right = offsing_fit(T, wide_plan, wide_plan, 3, samples, refine=False)
    wrong = offsing_fit(T, wide_plan, wide_plan, 3, samples, contact=identity_contact(), refine=False)
    assert right.contact == 'induced' and wrong.contact == 'given'
    assert wrong.C_fit >= 10.0 * right.C_fit


def test_half_wave_is_not_a_residual_operator(wide_plan):
    pairs = [(0.25, 0.25), (0.125, 0.125), (0.0625, 0.0625)]
    wave = residual_check(half_wave(1.0, profiles=wide_plan.profiles), wide_plan, wide_plan, (1, 3, 6), pairs)
    smooth = residual_check(smoothing_operator(0.5), wide_plan, wide_plan, (1, 3, 6), pairs)
    row = wave.orders.index(3)
    assert wave.values[row, -1] >= 10.0 * wave.values[row, 0]
    assert wave.sup(3) >= 10.0 * smooth.sup(3)
    assert np.all(np.isfinite(smooth.values))


def test_adjoint_kernel_is_the_conjugate_transpose(plan):
    T = half_wave(0.7, profiles=plan.profiles)
    nu = np.array([np.cos(0.3), np.sin(0.3)])
    forward = lifted_kernel(T, plan, plan, 0.25, 0.125, E1, nu)
    backward = lifted_kernel(adjoint(T), plan, plan, 0.125, 0.25, nu, E1)
    scale = np.max(np.abs(forward.values))
    assert np.allclose(backward.values, np.conj(_reflected(forward)), rtol=0, atol=1e-10 * scale)


def test_linear_phases_are_translation_invariant(plan):
    T = half_wave(1.0, profiles=plan.profiles)
    shift = np.array([3, -5])
    y = shift * plan.grid.spacing
    base = lifted_kernel(T, plan, plan, 0.25, 0.25, E1, E1)
    moved = lifted_kernel(T, plan, plan, 0.25, 0.25, E1, E1, y=y)
    assert np.allclose(moved.values, base.translated(shift).values, rtol=0, atol=1e-10 * np.max(np.abs(base.values)))
    chi = induced_contact(T)
    x0, w0 = chi.mapping(np.zeros((1, 2)), E1[None])
    x1, w1 = chi.mapping(y[None], E1[None])
    assert np.allclose(x1 - x0, y[None])
    assert np.allclose(w1, w0)


def test_half_wave_contact_map_is_bilipschitz():
    upper, lower = bilipschitz_ratio(induced_contact(half_wave(1.0)), 5000, 21)
    assert upper <= 4.0
    assert lower >= 0.25


def test_half_wave_tent_bound_on_atoms(plan):
    centers = [np.zeros(2), np.array([1.0, -0.5]), np.array([-1.5, 1.0])]
    balls = [BallSpec(CospherePoint(x, E1), 0.9) for x in centers]
    atoms = [make_atom(ball, plan.grid, plan.sphere, plan.sigmas) for ball in balls]
    stats = empirical_tent_bound(half_wave(1.0, profiles=plan.profiles), plan, 1, atoms)
    assert stats.ratios.size == 3
    assert 0 < stats.mean <= stats.max < 25.0
