import numpy as np
import pytest
from scipy.stats import linregress

from fiohardy.errors import ConfigurationError, DomainError, ResolutionError
from fiohardy.field import GridSpec, SampledField, to_spectrum
from fiohardy.metric import SigmaGrid, SphereGrid, generator, random_directions
from fiohardy.packets import (INNER, OUTER, PacketIndex, build_profiles, cap_symbol, check_packet_resolved,
                              packet_anisotropy, packet_field, packet_space_decay, packet_symbol, plancherel_defect,
                              reproducing_constant, skewed_bump, standard_bump, validate_bump, write_profiles)
from fiohardy.utilities import read_csv


@pytest.fixture(scope='module')
def profiles():
    return build_profiles('standard', 2)


def test_bumps_live_on_the_support():
    t = np.linspace(0.0, 3.0, 301)
    for bump in (standard_bump, skewed_bump):
        values = bump(t)
        assert np.all(values[(t <= INNER) | (t >= OUTER)] == 0.0)
        assert np.all(values[(t > INNER + 1e-3) & (t < OUTER - 1e-3)] > 0.0)
        assert float(bump(1.0)) > 0.0
        assert bump(np.array(1.0)).shape == ()


def test_bad_bumps_are_rejected():
    with pytest.raises(ConfigurationError):
        validate_bump(lambda t: np.ones_like(np.asarray(t, dtype=float)))
    with pytest.raises(ConfigurationError):
        build_profiles('triangle')


def test_smoothed_step(profiles):
    t = np.linspace(0.0, 3.0, 601)
    phi = profiles.phi(t)
    assert np.all(phi[t <= INNER] == 1.0)
    assert np.all(phi[t >= OUTER] == 0.0)
    assert np.all(np.diff(phi) <= 1e-12)
    # the moved step is 1 below inner and 0 above outer
    assert profiles.cutoff(1.9, 2.0, 4.0) == 1.0
    assert profiles.cutoff(4.1, 2.0, 4.0) == 0.0


def test_littlewood_paley_identity(profiles):
    for t in (0.3, 1.0, 7.5):
        assert profiles.lp_defect(t) < 1e-8


def test_low_frequency_cap(profiles):
    assert profiles.r_cap(0.0) == 1.0
    assert profiles.r_cap(0.4) == 1.0
    assert profiles.r_cap(2.5) == 0.0
    # r(t)^2 + int_0^1 Psi(s t)^2 ds/s = 1
    s = np.exp(np.linspace(np.log(1e-3), 0.0, 20001))
    mid = np.sqrt(s[1:] * s[:-1])
    tail = np.sum(profiles.psi(mid * 1.2)**2 * np.diff(np.log(s)))
    assert profiles.r_cap(1.2)**2 + tail == pytest.approx(1.0, abs=1e-6)


def test_normalizations_are_cached_and_positive(profiles):
    c = profiles.c(0.1)
    assert c > 0
    assert profiles.c(0.1) == c
    assert np.all(np.diff(profiles.c_table([0.05, 0.1, 0.2])) < 0)
    with pytest.raises(DomainError):
        profiles.c(1.5)


def test_plancherel_identity_on_a_fine_sampling(profiles):
    sphere = SphereGrid.uniform(2, 256)
    sigmas = SigmaGrid.geometric(1.0 / 32.0, 64)
    rng = generator(1)
    zetas = random_directions(rng, 20, 2) * rng.uniform(0.1, sigmas.resolved_band, (20, 1))
    for zeta in zetas:
        assert plancherel_defect(zeta, profiles, sphere, sigmas) < 5e-3
    with pytest.raises(DomainError):
        plancherel_defect(np.zeros(2), profiles, sphere, sigmas)


def test_packet_symbol_support(profiles):
    idx = PacketIndex(np.array([1.0, 0.0]), 0.125)
    zeta = np.array([[6.0, 0.0], [0.0, 6.0], [1.0, 0.0], [30.0, 0.0]])
    values = packet_symbol(idx, profiles)(zeta)
    assert values[0] > 0
    assert np.all(values[1:] == 0.0)
    with pytest.raises(DomainError):
        packet_symbol(PacketIndex(np.array([1.0, 0.0]), 1.5), profiles)
    with pytest.raises(DomainError):
        PacketIndex(np.array([1.0, 1.0]), 0.1)


def test_cap_symbol_at_origin(profiles):
    assert cap_symbol(profiles)(np.zeros(2)) == pytest.approx(1.0 / np.sqrt(2.0 * np.pi))


def test_packet_resolution_check():
    grid = GridSpec(2, 32)
    check_packet_resolved(0.125, grid)
    with pytest.raises(ResolutionError):
        check_packet_resolved(1.0 / 32.0, grid)


def test_packet_field_frequency_support(profiles):
    grid = GridSpec(2, 64)
    idx = PacketIndex(np.array([0.0, 1.0]), 0.125)
    spectrum = np.abs(to_spectrum(packet_field(idx, profiles, grid)).coefficients)
    zeta = grid.frequencies()
    outside = np.linalg.norm(zeta, axis=-1) < 0.5 / idx.sigma
    assert np.max(spectrum[outside]) < 1e-12 * np.max(spectrum)


def test_packets_are_thin_along_their_direction(profiles):
    grid = GridSpec(2, 64)
    report = packet_space_decay(PacketIndex(np.array([1.0, 0.0]), 0.125), profiles, grid)
    assert report.along < report.across
    assert report.sups[1] <= report.sups[2] <= report.sups[3]


def test_packet_anisotropy_is_parabolic(profiles):
    along, across = packet_anisotropy(profiles, GridSpec(2, 128), np.array([0.0, 1.0]), [0.25, 0.125, 0.0625])
    assert 0.5 < along < 1.5
    assert 0.2 < across < 0.8
    assert along > across


def test_reproducing_constant_on_a_high_frequency_wave(profiles):
    grid = GridSpec(2, 64)
    sphere = SphereGrid.uniform(2, 128)
    x = grid.coordinates()
    f = SampledField(grid, np.exp(1j * 6.0 * x[..., 0]))
    constant, residual = reproducing_constant(0.125, profiles, f, sphere)
    assert constant > 0
    assert residual < 1e-10
    with pytest.raises(DomainError):
        reproducing_constant(0.125, profiles, SampledField(grid, np.ones(grid.shape)), sphere)


def test_profile_dump(tmp_path, profiles):
    path = tmp_path / 'profiles.csv'
    write_profiles(str(path), profiles, size=64)
    header, rows = read_csv(str(path))
    assert header == ['t', 'b', 's', 'psi', 'r']
    assert len(rows) == 64


def test_plancherel_identity_at_desk_resolution(profiles):
    sphere = SphereGrid.uniform(2, 128)
    sigmas = SigmaGrid.geometric(2.0**-7, 48)
    sphere.check_resolved(sigmas)
    rng = generator(20240607)
    zetas = random_directions(rng, 100, 2) * rng.uniform(0.05, sigmas.resolved_band, (100, 1))
    assert max(plancherel_defect(zeta, profiles, sphere, sigmas) for zeta in zetas) < 5e-3


@pytest.mark.parametrize('dim', [2, 3])
def test_normalization_scales_like_a_cap(dim):
    profiles = build_profiles('standard', dim)
    sigmas = np.geomspace(1e-4, 1e-2, 6)
    slope = linregress(np.log(sigmas), np.log(profiles.c_table(sigmas))).slope
    assert slope == pytest.approx(-0.25 * (dim - 1), abs=0.01)


def test_packet_bounds_are_uniform_in_sigma(profiles):
    grid = GridSpec(2, 128)
    sigmas = (0.25, 0.125, 0.0625)
    omega = np.array([0.6, 0.8])
    peaks = []
    for sigma in sigmas:
        samples = packet_symbol(PacketIndex(omega, sigma), profiles)(grid.frequencies())
        peaks.append(np.max(samples) * sigma**0.25)
    assert max(peaks) / min(peaks) < 1.25
    reports = [packet_space_decay(PacketIndex(omega, sigma), profiles, grid) for sigma in sigmas]
    masses = [report.l1_mass for report in reports]
    sups = [report.sups[1] for report in reports]
    assert max(masses) / min(masses) < 1.5
    assert max(sups) / min(sups) < 2.0
