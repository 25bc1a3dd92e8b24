"""
Periodic grids standing in for R^n, unitary discrete Fourier transforms,
Fourier multipliers and discrete L^p / Sobolev norms.

The torus is [-L/2, L/2)^n sampled at M points per axis, so x_j = -L/2 + j h
with h = L/M. Frequencies live on (2 pi / L) Z^n in fft order. Spectra use
the unitary ('ortho') transform with the grid origin shifted to index 0, so
the coefficient at zeta is the continuum transform int e^{-i x zeta} f(x) dx
divided by h^n M^{n/2}.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from fiohardy.errors import ConfigurationError, NumericError, StructuralError

logger = logging.getLogger(__name__)

_workers = -1


def workers():
    return _workers


def set_workers(nworkers):
    global _workers
    _workers = int(nworkers)


def fftn(a, axes=None):
    return sfft.fftn(a, axes=axes, norm='ortho', workers=_workers)


def ifftn(a, axes=None):
    return sfft.ifftn(a, axes=axes, norm='ortho', workers=_workers)


@dataclass(frozen=True)
class GridSpec:
    dim: int = 2
    points_per_axis: int = 128
    extent: float = 2.0 * np.pi

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ConfigurationError(f"dim must be 2 or 3, got {self.dim}")
        if self.points_per_axis % 2 or self.points_per_axis < 16:
            raise ConfigurationError(f"points_per_axis must be even and >= 16, got {self.points_per_axis}")
        if not self.extent > 0:
            raise ConfigurationError(f"extent must be positive, got {self.extent}")

    @property
    def spacing(self):
        return self.extent / self.points_per_axis

    @property
    def cell_volume(self):
        return self.spacing**self.dim

    @property
    def shape(self):
        return (self.points_per_axis,) * self.dim

    @property
    def lattice_spacing(self):
        return 2.0 * np.pi / self.extent

    @property
    def nyquist(self):
        return np.pi * self.points_per_axis / self.extent

    @property
    def tag(self):
        return f"n{self.dim}-M{self.points_per_axis}-L{self.extent:.6g}"

    def axis(self):
        return -0.5 * self.extent + self.spacing * np.arange(self.points_per_axis)

    def coordinates(self):
        # (*shape, dim)
        axes = np.meshgrid(*([self.axis()] * self.dim), indexing='ij')
        return np.stack(axes, axis=-1)

    def frequency_axis(self):
        return 2.0 * np.pi * sfft.fftfreq(self.points_per_axis, d=self.spacing)

    def frequencies(self):
        # (*shape, dim), fft order
        axes = np.meshgrid(*([self.frequency_axis()] * self.dim), indexing='ij')
        return np.stack(axes, axis=-1)

    def displacements(self):
        # minimal image offsets x - y indexed by the (circular) index difference
        offsets = self.spacing * self.points_per_axis * sfft.fftfreq(self.points_per_axis)
        axes = np.meshgrid(*([offsets] * self.dim), indexing='ij')
        return np.stack(axes, axis=-1)

    def wrap(self, z):
        half = 0.5 * self.extent
        return np.mod(np.asarray(z) + half, self.extent) - half

    def refined(self, factor=2):
        return GridSpec(self.dim, self.points_per_axis * factor, self.extent)

    def check_values(self, values):
        if values.shape != self.shape:
            raise StructuralError(f"values of shape {values.shape} do not match grid {self.shape}")


def _finite(values, what):
    if not np.all(np.isfinite(values)):
        raise NumericError(f"{what} contains non-finite entries")


@dataclass
class SampledField:
    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        self.grid.check_values(self.values)
        _finite(self.values, 'field')

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.shape, dtype=np.complex128))

    @classmethod
    def from_function(cls, grid, func):
        return cls(grid, func(grid.coordinates()))

    def _same_grid(self, other):
        if other.grid != self.grid:
            raise StructuralError(f"grid mismatch: {self.grid.tag} vs {other.grid.tag}")

    def __add__(self, other):
        self._same_grid(other)
        return SampledField(self.grid, self.values + other.values)

    def __sub__(self, other):
        self._same_grid(other)
        return SampledField(self.grid, self.values - other.values)

    def __mul__(self, scalar):
        return SampledField(self.grid, scalar * self.values)

    __rmul__ = __mul__

    def __neg__(self):
        return SampledField(self.grid, -self.values)

    def inner(self, other):
        self._same_grid(other)
        return np.vdot(other.values, self.values) * self.grid.cell_volume

    def norm(self):
        return lp_norm(self, 2)

    def translated(self, shift):
        """Circular shift by a whole number of grid cells per axis."""
        return SampledField(self.grid, np.roll(self.values, tuple(shift), axis=tuple(range(self.grid.dim))))


@dataclass
class SpectralField:
    grid: GridSpec
    coefficients: np.ndarray

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=np.complex128)
        self.grid.check_values(self.coefficients)

    @classmethod
    def from_continuum(cls, grid, samples):
        return cls(grid, np.asarray(samples) / (grid.cell_volume * grid.points_per_axis**(0.5 * grid.dim)))

    def continuum(self):
        # samples of int e^{-i x zeta} f(x) dx on the lattice
        g = self.grid
        return self.coefficients * g.cell_volume * g.points_per_axis**(0.5 * g.dim)

    def l2_norm(self):
        # (2 pi)^{-n} int |f^|^2 d zeta on the lattice, equal to the spatial L^2 norm
        return np.sqrt(np.sum(np.abs(self.coefficients)**2) * self.grid.cell_volume)


def to_spectrum(f):
    f.grid.check_values(f.values)
    return SpectralField(f.grid, fftn(sfft.ifftshift(f.values)))


def to_field(fhat):
    return SampledField(fhat.grid, sfft.fftshift(ifftn(fhat.coefficients)))


def sample_multiplier(m, grid, at_zero=0.0):
    """
    Sample a frequency function on the lattice in fft order. Callables receive
    the (*shape, dim) array of frequencies. A non-finite value at zeta = 0 is
    replaced by at_zero, anywhere else it is an error.
    """
    if callable(m):
        zeta = grid.frequencies()
        with np.errstate(all='ignore'):
            values = np.asarray(m(zeta))
        values = np.broadcast_to(values, grid.shape).copy()
        origin = (0,) * grid.dim
        if not np.isfinite(values[origin]):
            values[origin] = at_zero
        bad = ~np.isfinite(values)
        if np.any(bad):
            index = tuple(np.argwhere(bad)[0])
            raise NumericError(f"multiplier is not finite at frequency {zeta[index].tolist()}")
        return values
    values = np.asarray(m)
    grid.check_values(values)
    _finite(values, 'multiplier')
    return values


def apply_multiplier(m, f, at_zero=0.0):
    # the origin shift of to_spectrum cancels between the two transforms
    mult = sample_multiplier(m, f.grid, at_zero)
    return SampledField(f.grid, ifftn(mult * fftn(f.values)))


def bessel_weight(s):
    def weight(zeta):
        return (1.0 + np.sum(zeta**2, axis=-1))**(0.5 * s)
    return weight


def plane_wave(grid, k):
    k = np.asarray(k, dtype=float)
    return SampledField(grid, np.exp(1j * grid.coordinates() @ k))


def _lp(values, p, cell_volume):
    modulus = np.abs(values)
    if p == np.inf:
        return float(np.max(modulus)) if modulus.size else 0.0
    return float(np.sum(modulus**p * cell_volume)**(1.0 / p))


def check_exponent(p):
    if isinstance(p, str):
        if p.strip().lower() in ('inf', 'infinity'):
            return np.inf
        try:
            p = float(p)
        except ValueError:
            raise ConfigurationError(f"bad exponent '{p}'") from None
    p = float(p)
    if not p >= 1:
        raise ConfigurationError(f"exponent must lie in [1, inf], got {p}")
    return p


def lp_norm(f, p):
    return _lp(f.values, check_exponent(p), f.grid.cell_volume)


def sobolev_norm(f, s, p):
    if s == 0:
        return lp_norm(f, p)
    return lp_norm(apply_multiplier(bessel_weight(s), f), p)
