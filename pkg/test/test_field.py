import numpy as np
import pytest

from fiohardy.errors import ConfigurationError, NumericError, StructuralError
from fiohardy.field import (GridSpec, SampledField, SpectralField, apply_multiplier, bessel_weight, check_exponent,
                            lp_norm, plane_wave, sample_multiplier, sobolev_norm, to_field, to_spectrum)


def test_grid_geometry(grid):
    assert grid.shape == (32, 32)
    assert grid.spacing == pytest.approx(2.0 * np.pi / 32)
    assert grid.nyquist == pytest.approx(16.0)
    assert grid.lattice_spacing == pytest.approx(1.0)
    assert grid.axis()[0] == pytest.approx(-np.pi)
    assert grid.coordinates().shape == (32, 32, 2)
    assert grid.tag == 'n2-M32-L6.28319'
    assert grid.refined(2).points_per_axis == 64


def test_grid_rejects_bad_parameters():
    with pytest.raises(ConfigurationError):
        GridSpec(4, 32)
    with pytest.raises(ConfigurationError):
        GridSpec(2, 31)
    with pytest.raises(ConfigurationError):
        GridSpec(2, 32, -1.0)


def test_wrap_gives_minimal_image(grid):
    z = np.array([np.pi + 0.5, -np.pi - 0.5])
    assert np.allclose(grid.wrap(z), [-np.pi + 0.5, np.pi - 0.5])


def test_spectrum_inverts(grid, random_field):
    f = random_field(grid)
    assert np.allclose(to_field(to_spectrum(f)).values, f.values, atol=1e-12)
    assert to_spectrum(f).l2_norm() == pytest.approx(f.norm(), rel=1e-12)


def test_continuum_transform_of_gaussian(grid):
    # int e^{-i x zeta} e^{-2 |x|^2} dx = (pi / 2) e^{-|zeta|^2 / 8}
    f = SampledField.from_function(grid, lambda x: np.exp(-2.0 * np.sum(x**2, axis=-1)))
    zeta = grid.frequencies()
    expected = 0.5 * np.pi * np.exp(-np.sum(zeta**2, axis=-1) / 8.0)
    assert np.allclose(to_spectrum(f).continuum(), expected, atol=1e-8)


def test_from_continuum_inverts_continuum(grid, random_field):
    fhat = to_spectrum(random_field(grid))
    again = SpectralField.from_continuum(grid, fhat.continuum())
    assert np.allclose(again.coefficients, fhat.coefficients)


def test_unit_multiplier_is_identity(grid, random_field):
    f = random_field(grid)
    assert np.allclose(apply_multiplier(lambda zeta: np.ones(zeta.shape[:-1]), f).values, f.values)


def test_multiplier_acts_on_plane_waves(grid):
    k = np.array([3.0, -2.0])
    f = plane_wave(grid, k)
    g = apply_multiplier(lambda zeta: np.sum(zeta**2, axis=-1), f)
    assert np.allclose(g.values, 13.0 * f.values)


def test_multiplier_origin_value_is_patched(grid):
    values = sample_multiplier(lambda zeta: 1.0 / np.linalg.norm(zeta, axis=-1), grid, at_zero=7.0)
    assert values[0, 0] == 7.0
    with pytest.raises(NumericError):
        sample_multiplier(lambda zeta: np.where(zeta[..., 0] == 3.0, np.nan, 1.0), grid)


def test_lp_norms_of_constant(grid):
    f = SampledField(grid, np.ones(grid.shape))
    area = (2.0 * np.pi)**2
    assert lp_norm(f, 1) == pytest.approx(area)
    assert lp_norm(f, 2) == pytest.approx(np.sqrt(area))
    assert lp_norm(f, 'inf') == pytest.approx(1.0)
    # the constant only sees the multiplier at zeta = 0
    assert sobolev_norm(f, 1.5, 2) == pytest.approx(np.sqrt(area))


def test_exponent_parsing():
    assert check_exponent('inf') == np.inf
    assert check_exponent('1') == 1.0
    assert check_exponent(4.0 / 3.0) == pytest.approx(4.0 / 3.0)
    with pytest.raises(ConfigurationError):
        check_exponent(0.5)
    with pytest.raises(ConfigurationError):
        check_exponent('one')


def test_fields_check_shapes_and_values(grid):
    with pytest.raises(StructuralError):
        SampledField(grid, np.zeros((16, 16)))
    with pytest.raises(NumericError):
        SampledField(grid, np.full(grid.shape, np.nan))
    with pytest.raises(StructuralError):
        SampledField.zeros(grid) + SampledField.zeros(GridSpec(2, 16))


def test_translation_moves_whole_cells(grid, random_field):
    f = random_field(grid)
    g = f.translated((3, -2))
    assert g.values[5, 7] == f.values[2, 9]
    assert g.norm() == pytest.approx(f.norm())


def test_multipliers_compose_and_keep_real_fields_real(grid, random_field):
    f = SampledField(grid, random_field(grid).values.real)
    weight, inverse = bessel_weight(2.0), bessel_weight(-2.0)
    g = apply_multiplier(weight, apply_multiplier(inverse, f))
    assert np.allclose(g.values, f.values)
    # an even real symbol commutes with complex conjugation
    h = apply_multiplier(lambda zeta: np.exp(-np.sum(zeta**2, axis=-1)), f)
    assert np.max(np.abs(h.values.imag)) < 1e-12 * np.max(np.abs(h.values))
