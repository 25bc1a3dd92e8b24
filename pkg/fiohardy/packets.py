"""
Generating profiles and wave packets.

A bump b supported in [1/2, 2] generates everything:

    phi(t)  smoothed step, 1 on [0, 1/2], 0 on [2, inf), normalized integral of b
    Psi(t)  b(t) / sqrt(Z),  Z = int b(u)^2 du/u, so int_0^inf Psi(s t)^2 ds/s = 1
    r(t)    (int_1^inf Psi(s t)^2 ds/s)^{1/2}, the low frequency cap, r(0) = 1
    c_sigma (int_{S^{n-1}} phi(|e_1 - v| / sqrt(sigma))^2 dv)^{-1/2}

and the packet psi_{w,sigma}(zeta) = c_sigma phi(|zeta^ - w| / sqrt(sigma)) Psi(sigma |zeta|).
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.stats import linregress

from fiohardy.errors import ConfigurationError, DomainError, ResolutionError
from fiohardy.field import SampledField, SpectralField, apply_multiplier, to_field, to_spectrum
from fiohardy.metric import sphere_measure
from fiohardy.quadrature import gauss_cells, integrate
from fiohardy.utilities import write_csv

logger = logging.getLogger(__name__)

INNER = 0.5
OUTER = 2.0


def _on_support(t, expression):
    t = np.asarray(t, dtype=float)
    flat = t.reshape(-1)
    out = np.zeros_like(flat)
    inside = (flat > INNER) & (flat < OUTER)
    out[inside] = expression(flat[inside])
    return out.reshape(t.shape)


def standard_bump(t):
    return _on_support(t, lambda s: np.exp(-1.0 / ((s - INNER) * (OUTER - s))))


def skewed_bump(t):
    return _on_support(t, lambda s: np.exp(-1.0 / (s - INNER) - 1.0 / (OUTER - s)))


BUMPS = {
    'standard': standard_bump,
    'skewed': skewed_bump,
}


def validate_bump(b):
    outside = np.concatenate([np.linspace(0.0, INNER, 200), np.linspace(OUTER, 4.0, 200)])
    inside = np.linspace(INNER + 0.01, OUTER - 0.01, 400)
    vo = np.asarray(b(outside), dtype=float)
    vi = np.asarray(b(inside), dtype=float)
    if not (np.all(np.isfinite(vo)) and np.all(np.isfinite(vi))):
        raise ConfigurationError("bump returns non-finite values")
    if np.any(vo != 0.0):
        raise ConfigurationError("bump is not supported in [1/2, 2]")
    if np.any(vi <= 0.0) or np.any(vi > 1.0):
        raise ConfigurationError("bump must take values in (0, 1] inside (1/2, 2)")


class _Tabulated:
    # decreasing function equal to 1 below INNER and 0 above OUTER, given its
    # derivative; cubic Hermite interpolation with exact slopes
    def __init__(self, density, size):
        t = np.linspace(INNER, OUTER, size)
        cells = gauss_cells(density, t)
        tail = np.append(np.cumsum(cells[::-1])[::-1], 0.0)
        self.total = tail[0]
        self.spline = CubicHermiteSpline(t, tail / self.total, -density(t) / self.total)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        flat = t.reshape(-1)
        out = np.where(flat <= INNER, 1.0, 0.0)
        inside = (flat > INNER) & (flat < OUTER)
        out[inside] = np.clip(self.spline(flat[inside]), 0.0, 1.0)
        return out.reshape(t.shape)


@dataclass(frozen=True)
class PacketIndex:
    omega: np.ndarray
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError(f"sigma must be positive, got {self.sigma}")
        omega = np.asarray(self.omega, dtype=float)
        if abs(np.linalg.norm(omega) - 1.0) >= 1e-12:
            raise DomainError(f"direction {omega.tolist()} is not a unit vector")
        object.__setattr__(self, 'omega', omega)


class ProfilePair:
    """
    The profiles (phi, Psi) generated by a bump, with the cap r and the
    normalizations c_sigma (cached per sigma).
    """

    def __init__(self, bump='standard', dim=2, table_size=20001, c_tol=1e-6):
        if isinstance(bump, str):
            if bump not in BUMPS:
                raise ConfigurationError(f"unknown bump '{bump}', choose from {sorted(BUMPS)}")
            self.name = bump
            bump = BUMPS[bump]
        else:
            self.name = getattr(bump, '__name__', 'custom')
        validate_bump(bump)
        self.bump = bump
        self.dim = dim
        self.c_tol = c_tol

        self.step = _Tabulated(bump, table_size)
        self.Z = integrate(lambda u: bump(u)**2 / u, INNER, OUTER, tol=1e-13, max_nodes=8192)
        self.cap = _Tabulated(lambda u: bump(u)**2 / (u * self.Z), table_size)
        self._c_cache = {}

    def phi(self, t):
        return self.step(t)

    def cutoff(self, t, inner, outer):
        # smoothed step moved to 1 on [0, inner], 0 on [outer, inf)
        t = np.asarray(t, dtype=float)
        return self.step(INNER + (t - inner) * (OUTER - INNER) / (outer - inner))

    def psi(self, t):
        return self.bump(t) / np.sqrt(self.Z)

    def r_cap(self, t):
        return np.sqrt(self.cap(t))

    def c(self, sigma):
        sigma = float(sigma)
        if sigma not in self._c_cache:
            self._c_cache[sigma] = self._c_sigma(sigma)
        return self._c_cache[sigma]

    def _c_sigma(self, sigma):
        if not 0 < sigma < 1:
            raise DomainError(f"c_sigma needs 0 < sigma < 1, got {sigma}")
        root = np.sqrt(sigma)
        # phi(|e_1 - v| / sqrt(sigma)) = 1 while the chord is below sqrt(sigma)/2
        flat = 2.0 * np.arcsin(0.25 * root)
        edge = 2.0 * np.arcsin(min(root, 1.0))

        def profile(theta):
            return self.phi(2.0 * np.sin(0.5 * theta) / root)**2

        if self.dim == 2:
            total = 2.0 * (flat + integrate(profile, flat, edge, tol=self.c_tol))
        else:
            measure = 2.0 * np.pi
            total = measure * ((1.0 - np.cos(flat))
                               + integrate(lambda th: profile(th) * np.sin(th), flat, edge, tol=self.c_tol))
        return total**-0.5

    def c_table(self, sigmas):
        return np.array([self.c(s) for s in sigmas])

    def lp_defect(self, t, count=4096):
        # |int_0^inf Psi(s t)^2 ds/s - 1| on a log grid in s covering the support
        logs = np.linspace(np.log(INNER / t), np.log(OUTER / t), count + 1)
        mid = 0.5 * (logs[1:] + logs[:-1])
        step = logs[1] - logs[0]
        return abs(np.sum(self.psi(np.exp(mid) * t)**2) * step - 1.0)


def build_profiles(bump='standard', dim=2, table_size=20001, c_tol=1e-6):
    return ProfilePair(bump, dim, table_size, c_tol)


def packet_values(profiles, omega, sigma, norms, units):
    """
    psi_{omega,sigma} on frequencies given by their norms (...) and unit
    directions (..., n). Zero frequencies must carry norm 0.
    """
    chord = np.linalg.norm(units - omega, axis=-1)
    values = profiles.c(sigma) * profiles.phi(chord / np.sqrt(sigma)) * profiles.psi(sigma * norms)
    return np.where(norms > 0, values, 0.0)


def split_frequencies(zeta):
    norms = np.linalg.norm(zeta, axis=-1)
    with np.errstate(invalid='ignore', divide='ignore'):
        units = np.where(norms[..., None] > 0, zeta / norms[..., None], 0.0)
    return norms, units


def packet_symbol(idx, profiles):
    if idx.sigma >= 1:
        raise DomainError(f"packets need sigma < 1, got {idx.sigma}; the cap band uses r")

    def symbol(zeta):
        norms, units = split_frequencies(np.asarray(zeta, dtype=float))
        return packet_values(profiles, idx.omega, idx.sigma, norms, units)
    return symbol


def cap_symbol(profiles):
    measure = sphere_measure(profiles.dim)

    def symbol(zeta):
        return profiles.r_cap(np.linalg.norm(zeta, axis=-1)) / np.sqrt(measure)
    return symbol


def plancherel_defect(zeta, profiles, sphere, sigmas):
    zeta = np.asarray(zeta, dtype=float)
    norm = np.linalg.norm(zeta)
    if norm == 0:
        raise DomainError("the packet identity is not defined at zeta = 0")
    unit = zeta / norm
    total = float(profiles.r_cap(norm)**2)
    for sigma, weight in zip(sigmas.levels[:-1], sigmas.weights[:-1]):
        values = packet_values(profiles, sphere.directions, sigma, norm, unit[None, :])
        total += weight * np.dot(sphere.weights, values**2)
    return abs(total - 1.0)


@dataclass
class PacketDecayReport:
    sigma: float
    sups: dict
    l1_mass: float
    along: float
    across: float
    grid_tag: str


def check_packet_resolved(sigma, grid):
    lattice = grid.lattice_spacing
    if OUTER / sigma > grid.nyquist:
        raise ResolutionError(f"packet sigma={sigma:.4g} reaches {OUTER / sigma:.4g} beyond Nyquist {grid.nyquist:.4g}")
    if 2.0 / np.sqrt(sigma) < 4 * lattice or 1.5 / sigma < 4 * lattice:
        raise ResolutionError(f"packet sigma={sigma:.4g} covers fewer than 4 lattice cells")


def packet_field(idx, profiles, grid):
    """F^{-1} psi_{omega,sigma} sampled on the grid (continuum normalization)."""
    samples = packet_symbol(idx, profiles)(grid.frequencies())
    return to_field(SpectralField.from_continuum(grid, samples))


def packet_space_decay(idx, profiles, grid, orders=(1, 2, 3)):
    check_packet_resolved(idx.sigma, grid)
    n = grid.dim
    sigma = idx.sigma
    g = packet_field(idx, profiles, grid)
    x = grid.coordinates()
    along = x @ idx.omega
    radial = np.sum(x**2, axis=-1)
    weight = 1.0 + radial / sigma + along**2 / sigma**2
    modulus = np.abs(g.values)
    sups = {N: float(np.max(modulus * sigma**((3 * n + 1) / 4) * weight**N)) for N in orders}
    l1 = float(np.sum(modulus) * grid.cell_volume) * sigma**((n - 1) / 4)
    energy = np.sum(modulus**2)
    m_along = np.sqrt(np.sum(along**2 * modulus**2) / energy)
    m_across = np.sqrt(np.sum((radial - along**2) * modulus**2) / energy)
    return PacketDecayReport(sigma, sups, l1, float(m_along), float(m_across), grid.tag)


def packet_anisotropy(profiles, grid, omega, sigmas):
    """Log-log slopes of the along / across second moments against sigma."""
    reports = [packet_space_decay(PacketIndex(omega, s), profiles, grid) for s in sigmas]
    logs = np.log(sigmas)
    along = linregress(logs, np.log([r.along for r in reports])).slope
    across = linregress(logs, np.log([r.across for r in reports])).slope
    return along, across


def reproducing_constant(sigma, profiles, f, sphere):
    """
    Fit sigma^{-(n-1)/4} int phi_{w,sigma}(D) f dw = C_sigma f. Returns
    (C_sigma, relative residual).
    """
    spectrum = to_spectrum(f).coefficients
    origin = (0,) * f.grid.dim
    if abs(spectrum[origin])**2 > 1e-12 * np.sum(np.abs(spectrum)**2):
        raise DomainError("f carries mass at zeta = 0")
    n = f.grid.dim
    root = np.sqrt(sigma)
    scale = sigma**(-(n - 1) / 4) * profiles.c(sigma)

    def multiplier(zeta):
        norms, units = split_frequencies(zeta)
        total = np.zeros(norms.shape)
        for omega, weight in zip(sphere.directions, sphere.weights):
            total += weight * profiles.phi(np.linalg.norm(units - omega, axis=-1) / root)
        return np.where(norms > 0, scale * total, 0.0)

    lhs = apply_multiplier(multiplier, f)
    constant = (lhs.inner(f) / f.inner(f)).real
    residual = (lhs - constant * f).norm() / f.norm()
    return float(constant), float(residual)


def write_profiles(filename, profiles, size=4096):
    t = np.geomspace(0.25, 4.0, size)
    rows = zip(t, profiles.bump(t), profiles.phi(t), profiles.psi(t), profiles.r_cap(t))
    write_csv(filename, ['t', 'b', 's', 'psi', 'r'], [tuple(float(v) for v in row) for row in rows])
