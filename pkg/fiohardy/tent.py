"""
Tent spaces over the cosphere bundle.

Phase space fields carry values indexed (direction, sigma level, x...) with
cell measure h^n w_a Delta_j. Ball averages use the discrete volume of the
same ball under the same weights, which makes ||A F||_{L^2} = ||F|| exact.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from fiohardy.errors import ConfigurationError, NumericError, ResolutionError, StructuralError
from fiohardy.field import GridSpec, check_exponent, workers
from fiohardy.metric import BallSpec, CospherePoint, SigmaGrid, SphereGrid, quasi_dist_sq

logger = logging.getLogger(__name__)

__all__ = ['PhaseSpaceField', 'BallSpec', 'BallFamily', 'TentGeometry', 'default_ball_family', 'lusin_functional',
           'lusin_split', 'carleson_functional', 'carleson_sup', 'carleson_sup_split', 'tent_norm',
           'vertical_square_function', 'vertical_norm', 'cosphere_lp_norm', 'ball_energy', 'tent_mask',
           'discrete_volume', 'make_atom', 'restrict_sub_unit', 'domain_diameter']


@dataclass
class PhaseSpaceField:
    grid: GridSpec
    sphere: SphereGrid
    sigmas: SigmaGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        expected = (self.sphere.size, self.sigmas.size) + self.grid.shape
        if self.values.shape != expected:
            raise StructuralError(f"phase space values of shape {self.values.shape}, expected {expected}")
        if not np.all(np.isfinite(self.values)):
            raise NumericError("phase space field contains non-finite entries")

    @classmethod
    def zeros(cls, grid, sphere, sigmas):
        return cls(grid, sphere, sigmas, np.zeros((sphere.size, sigmas.size) + grid.shape, dtype=np.complex128))

    def like(self, values):
        return PhaseSpaceField(self.grid, self.sphere, self.sigmas, values)

    def measure(self):
        # cell weights h^n w_a Delta_j, broadcastable against values
        w = self.grid.cell_volume * np.outer(self.sphere.weights, self.sigmas.weights)
        return w.reshape(w.shape + (1,) * self.grid.dim)

    def same_space(self, other):
        if (other.grid != self.grid or other.sphere.size != self.sphere.size
                or other.sigmas.size != self.sigmas.size
                or not np.allclose(other.sigmas.levels, self.sigmas.levels)):
            raise StructuralError("phase space fields live on different grids")

    def inner(self, other):
        self.same_space(other)
        return np.sum(np.conj(other.values) * self.values * self.measure())

    def l2_norm(self):
        return float(np.sqrt(np.sum(np.abs(self.values)**2 * self.measure())))

    def __add__(self, other):
        self.same_space(other)
        return self.like(self.values + other.values)

    def __sub__(self, other):
        self.same_space(other)
        return self.like(self.values - other.values)

    def __mul__(self, scalar):
        return self.like(scalar * self.values)

    __rmul__ = __mul__


def restrict_sub_unit(F):
    # drop the cap level sigma = e
    values = F.values.copy()
    values[:, -1] = 0.0
    return F.like(values)


class _DistanceTable:
    """
    Squared quasi-distances between (0, omega_a) and (z, nu_b) for every
    lattice displacement z (fft order, minimal image) and direction nu_b.
    """

    def __init__(self, grid, sphere):
        self.grid = grid
        self.sphere = sphere
        z = grid.displacements()
        self.radial = np.sum(z**2, axis=-1)
        # (A, *shape) projections <nu_b, z>
        self.projections = np.moveaxis(np.abs(z @ sphere.directions.T), -1, 0)
        diff = sphere.directions[:, None, :] - sphere.directions[None, :, :]
        self.gaps = np.sum(diff**2, axis=-1)

    def squared(self, a):
        expand = (slice(None),) + (None,) * self.grid.dim
        return (self.projections[a][None] + self.projections + self.radial[None]
                + self.gaps[a][expand])


def _crop(grid, reach):
    # integer displacements k with |k h| < reach, at most one period, and the positions they wrap to
    M = grid.points_per_axis
    ks = np.arange(-(M // 2), M - M // 2)
    ks = ks[np.abs(ks * grid.spacing) < reach]
    return ks, np.mod(ks, M)


class TentGeometry:
    """
    Ball stencils of the conical square function for one grid, sphere and
    sigma grid. At level sigma the ball around (0, w_a) holds the (z, nu_b)
    with d^2 < sigma, so every stencil sits inside |z_i| < sqrt(sigma).
    Stencil spectra are kept level by level while their total size stays
    below cache_limit bytes; volumes are always kept.
    """

    def __init__(self, grid, sphere, sigmas, cache_limit=2**30):
        self.grid = grid
        self.sphere = sphere
        self.sigmas = sigmas
        self.cache_limit = cache_limit
        diff = sphere.directions[:, None, :] - sphere.directions[None, :, :]
        self.gaps = np.sum(diff**2, axis=-1)
        self._volumes = {}
        self._spectra = {}
        self._cached_bytes = 0

    def fits(self, F):
        return (F.grid == self.grid and F.sphere.size == self.sphere.size
                and F.sigmas.size == self.sigmas.size and np.allclose(F.sigmas.levels, self.sigmas.levels))

    @property
    def cached_bytes(self):
        return self._cached_bytes

    def _stencils(self, j):
        sigma = self.sigmas.levels[j]
        grid = self.grid
        A = self.sphere.size
        ks, positions = _crop(grid, np.sqrt(sigma))
        z = np.stack(np.meshgrid(*([grid.spacing * ks] * grid.dim), indexing='ij'), axis=-1)
        radial = np.sum(z**2, axis=-1)
        projections = np.moveaxis(np.abs(z @ self.sphere.directions.T), -1, 0)
        expand = (slice(None),) + (None,) * grid.dim
        counts = np.zeros((A, A))
        pairs = []
        for a in range(A):
            # |w_a - nu_b|^2 alone must stay below sigma
            active = np.flatnonzero(self.gaps[a] < sigma)
            d2 = projections[a][None] + projections[active] + radial[None] + self.gaps[a, active][expand]
            stencils = d2 < sigma
            n = np.count_nonzero(stencils.reshape(len(active), -1), axis=1)
            keep = n > 0
            counts[a, active[keep]] = n[keep]
            pairs.append((active[keep], stencils[keep]))
        return positions, pairs, counts

    def level(self, j):
        """
        (volumes, kernels) at sigma level j: the discrete volume of the ball
        around (y, nu_b) for every b, and per w_a the active nu_b with the
        rfft spectra of their stencils.
        """
        if j in self._spectra:
            return self._volumes[j], self._spectra[j]
        grid = self.grid
        positions, pairs, counts = self._stencils(j)
        volumes = grid.cell_volume * (self.sphere.weights @ counts)
        if np.any(volumes <= 0):
            raise ResolutionError(f"empty discrete ball at sigma={self.sigmas.levels[j]:.4g}")
        axes = tuple(range(1, grid.dim + 1))
        index = (slice(None),) + np.ix_(*([positions] * grid.dim))
        kernels = []
        for active, stencils in pairs:
            full = np.zeros((len(active),) + grid.shape)
            full[index] = stencils
            kernels.append((active, sfft.rfftn(full, axes=axes, workers=workers())))
        self._volumes[j] = volumes
        size = sum(kernel.nbytes for _, kernel in kernels)
        if self._cached_bytes + size <= self.cache_limit:
            self._spectra[j] = kernels
            self._cached_bytes += size
        return volumes, kernels


def _geometry_for(F, geometry):
    if geometry is not None and geometry.fits(F):
        return geometry
    return TentGeometry(F.grid, F.sphere, F.sigmas, cache_limit=0)


def _lusin_squares(F, geometry):
    # A F^2 summed over the sub-unit levels and over the cap level, separately
    grid, sphere, sigmas = F.grid, F.sphere, F.sigmas
    axes = tuple(range(-grid.dim, 0))
    expand = (slice(None),) + (None,) * grid.dim
    energy = np.abs(F.values)**2
    sub_unit = np.zeros((sphere.size,) + grid.shape)
    cap = np.zeros_like(sub_unit)
    for j, delta in enumerate(sigmas.weights):
        level = energy[:, j]
        if not np.any(level):
            continue
        volumes, kernels = geometry.level(j)
        spectra = sfft.rfftn(level / volumes[expand], axes=axes, workers=workers())
        target = cap if j == sigmas.size - 1 else sub_unit
        for a, (active, kernel) in enumerate(kernels):
            weights = (grid.cell_volume * sphere.weights[active])[expand]
            acc = np.sum(weights * kernel * spectra[active], axis=0)
            target[a] += delta * sfft.irfftn(acc, s=grid.shape, axes=axes, workers=workers())
        logger.debug('lusin level %d/%d done', j + 1, sigmas.size)
    return sub_unit, cap


def lusin_functional(F, geometry=None):
    """
    Conical square function A F on (direction, x...):

        A F(x, w)^2 = sum_j Delta_j sum_{(y,v) in B_sqrt(sigma_j)(x,w)} |F(y,v,sigma_j)|^2 h^n w_v / V(y, v, sigma_j)

    with V the discrete volume of the ball around the source cell (y, v),
    not around (x, w). The two agree up to a doubling constant, and with
    the source volume ||A F||_{L^2} = ||F|| holds exactly on the grid.
    """
    sub_unit, cap = _lusin_squares(F, _geometry_for(F, geometry))
    return np.sqrt(np.clip(sub_unit + cap, 0.0, None))


def lusin_split(F, geometry=None):
    """(A F, A of F restricted to sigma < 1) from one pass over the levels."""
    sub_unit, cap = _lusin_squares(F, _geometry_for(F, geometry))
    return np.sqrt(np.clip(sub_unit + cap, 0.0, None)), np.sqrt(np.clip(sub_unit, 0.0, None))


@dataclass
class BallFamily:
    # centers as lattice indices (K, n), center directions as sphere indices, radii
    centers: np.ndarray
    directions: np.ndarray
    radii: np.ndarray

    @property
    def size(self):
        return len(self.centers) * len(self.directions) * len(self.radii)

    def balls(self, grid, sphere):
        axis = grid.axis()
        for index in self.centers:
            for a in self.directions:
                for r in self.radii:
                    yield BallSpec(CospherePoint(axis[index], sphere.directions[a]), float(r))


def domain_diameter(grid):
    # largest quasi-distance on the torus
    half = 0.5 * grid.extent * np.sqrt(grid.dim)
    return float(np.sqrt(2.0 * half + half**2 + 4.0))


def default_ball_family(grid, sphere, sigmas, center_stride=8, direction_stride=8, radius_count=8):
    ticks = np.arange(0, grid.points_per_axis, center_stride)
    centers = np.stack(np.meshgrid(*([ticks] * grid.dim), indexing='ij'), axis=-1).reshape(-1, grid.dim)
    directions = np.arange(0, sphere.size, direction_stride)
    radii = np.geomspace(np.sqrt(sigmas.sigma_min), domain_diameter(grid), radius_count)
    return BallFamily(centers, directions, radii)


def _family_energies(F, family, split=False, chunk_bytes=2**27):
    """
    Tent energies E(T(B)) of the family as arrays (directions, radii,
    centers), with split also those of the sub-unit levels alone, and the
    ball volumes (directions, radii).

    Around (c, w_a) let L_b(z) count the levels whose tent holds (c+z, nu_b)
    and cum_l be the energy of the l lowest levels. Then
    E(c) = sum_l sum_b (1[L_b = l] star cum_l)(c), a correlation the FFT
    gives for every lattice center at once.
    """
    if family.size == 0:
        raise ConfigurationError("the ball family is empty")
    grid, sphere, sigmas = F.grid, F.sphere, F.sigmas
    A, K = sphere.size, sigmas.size
    axes = tuple(range(-grid.dim, 0))
    roots = np.sqrt(sigmas.levels)
    weights = sphere.weights.reshape((-1,) + (1,) * grid.dim)
    density = np.moveaxis(np.abs(F.values)**2 * F.measure(), 1, 0)
    table = _DistanceTable(grid, sphere)
    centers = tuple(np.asarray(family.centers).T)
    directions = np.asarray(family.directions)
    radii = np.asarray(family.radii, dtype=float)
    dtype = np.min_scalar_type(K)
    step = max(1, chunk_bytes // (len(radii) * A * int(np.prod(grid.shape)) * np.dtype(dtype).itemsize))
    rshape = grid.shape[:-1] + (grid.points_per_axis // 2 + 1,)

    energies, sub_energies, volumes = [], [], []
    for start in range(0, len(directions), step):
        chunk = directions[start:start + step]
        counts = np.empty((len(chunk), len(radii), A) + grid.shape, dtype)
        for i, a in enumerate(chunk):
            d = np.sqrt(table.squared(a))
            for k, r in enumerate(radii):
                counts[i, k] = np.searchsorted(roots, r - d, side='right')
                volumes.append(grid.cell_volume * float(np.sum(weights * (d < r))))
        flat = counts.reshape(len(chunk), len(radii), A, -1)
        highest = flat.max(axis=-1)
        lowest = np.where(flat > 0, flat, K + 1).min(axis=-1)

        acc = np.zeros((len(chunk), len(radii)) + rshape, dtype=np.complex128)
        tail = np.zeros_like(acc)
        sub_tail = np.zeros_like(acc) if split else None
        running = np.zeros((A,) + grid.shape)
        previous = np.zeros((A,) + rshape, dtype=np.complex128)
        for l in range(1, K + 1):
            running += density[l - 1]
            if not np.any(running):
                continue
            spectra = sfft.rfftn(running, axes=axes, workers=workers())
            for i in range(len(chunk)):
                for k in range(len(radii)):
                    active = np.flatnonzero((lowest[i, k] <= l) & (highest[i, k] >= l))
                    if active.size == 0:
                        continue
                    shells = sfft.rfftn((counts[i, k, active] == l).astype(float), axes=axes, workers=workers())
                    shells = np.conj(shells)
                    # only the top level tells the cap apart from the sub-unit levels
                    if l < K:
                        acc[i, k] += np.sum(shells * spectra[active], axis=0)
                        continue
                    tail[i, k] += np.sum(shells * spectra[active], axis=0)
                    if split:
                        sub_tail[i, k] += np.sum(shells * previous[active], axis=0)
            previous = spectra
            logger.debug('carleson level %d/%d done', l, K)

        E = sfft.irfftn(acc + tail, s=grid.shape, axes=axes, workers=workers())
        energies.append(E[(Ellipsis,) + centers])
        if split:
            E = sfft.irfftn(acc + sub_tail, s=grid.shape, axes=axes, workers=workers())
            sub_energies.append(E[(Ellipsis,) + centers])

    volumes = np.array(volumes).reshape(len(directions), len(radii))
    sub_unit = np.concatenate(sub_energies, axis=0) if split else None
    return np.concatenate(energies, axis=0), sub_unit, volumes


def _normalized(energies, volumes):
    return np.sqrt(np.clip(energies, 0.0, None) / volumes[..., None])


def carleson_functional(F, family):
    """
    C F(x, w): supremum of the normalized tent energies over the sampled balls
    containing (x, w).
    """
    energies, _, volumes = _family_energies(F, family)
    values = _normalized(energies, volumes)
    grid, sphere = F.grid, F.sphere
    M = grid.points_per_axis
    table = _DistanceTable(grid, sphere)
    centers = np.asarray(family.centers)
    out = np.zeros((sphere.size,) + grid.shape)
    for i, a in enumerate(family.directions):
        d = np.sqrt(table.squared(a))
        for k, r in enumerate(family.radii):
            row = values[i, k]
            if not np.any(row > 0):
                continue
            inside = d < r
            if np.all(inside):
                np.maximum(out, row.max(), out=out)
                continue
            ks, positions = _crop(grid, r)
            active = np.flatnonzero(np.any(inside.reshape(sphere.size, -1), axis=1))
            stencil = inside[np.ix_(active, *([positions] * grid.dim))]
            for center, value in zip(centers, row):
                if value <= 0:
                    continue
                index = np.ix_(active, *[np.mod(c + ks, M) for c in center])
                out[index] = np.maximum(out[index], np.where(stencil, value, 0.0))
    return out


def carleson_sup(F, family):
    # every ball contains its center, so the sup of C F is the sup over the family
    energies, _, volumes = _family_energies(F, family)
    return float(np.max(_normalized(energies, volumes)))


def carleson_sup_split(F, family):
    """(sup C F, sup C of F restricted to sigma < 1) from one pass over the levels."""
    energies, sub_unit, volumes = _family_energies(F, family, split=True)
    return float(np.max(_normalized(energies, volumes))), float(np.max(_normalized(sub_unit, volumes)))


def cosphere_lp_norm(values, p, grid, sphere):
    if p == np.inf:
        return float(np.max(np.abs(values))) if values.size else 0.0
    weights = grid.cell_volume * sphere.weights.reshape((-1,) + (1,) * grid.dim)
    return float(np.sum(np.abs(values)**p * weights)**(1.0 / p))


def tent_norm(F, p, family=None, geometry=None):
    p = check_exponent(p)
    if p == np.inf:
        if family is None:
            family = default_ball_family(F.grid, F.sphere, F.sigmas)
        return carleson_sup(F, family)
    return cosphere_lp_norm(lusin_functional(F, geometry), p, F.grid, F.sphere)


def vertical_square_function(F):
    weights = F.sigmas.weights.reshape((1, -1) + (1,) * F.grid.dim)
    return np.sqrt(np.sum(np.abs(F.values)**2 * weights, axis=1))


def vertical_norm(F, p):
    return cosphere_lp_norm(vertical_square_function(F), check_exponent(p), F.grid, F.sphere)


def _ball_distances(ball, grid, sphere):
    # quasi-distances from the ball center to every (nu_b, y), shape (A, *shape)
    expand = (slice(None),) + (None,) * grid.dim + (slice(None),)
    y = grid.coordinates()[None]
    nu = sphere.directions[expand]
    return np.sqrt(quasi_dist_sq(ball.center.x, ball.center.omega, y, nu, grid))


def discrete_volume(ball, grid, sphere):
    inside = _ball_distances(ball, grid, sphere) < ball.radius
    return grid.cell_volume * float(np.sum(sphere.weights.reshape((-1,) + (1,) * grid.dim) * inside))


def tent_mask(ball, grid, sphere, sigmas):
    # cells (a, j, x) with r - d(x, nu_a; center) >= sqrt(sigma_j)
    slack = ball.radius - _ball_distances(ball, grid, sphere)
    roots = np.sqrt(sigmas.levels).reshape((1, -1) + (1,) * grid.dim)
    return slack[:, None] >= roots


def ball_energy(F, ball):
    """(E(T(B)) / V(B))^{1/2} for a single ball."""
    mask = tent_mask(ball, F.grid, F.sphere, F.sigmas)
    energy = float(np.sum(np.abs(F.values)**2 * F.measure() * mask))
    return np.sqrt(energy / discrete_volume(ball, F.grid, F.sphere))


def make_atom(ball, grid, sphere, sigmas, shape='flat'):
    """
    A T^1 atom on the tent over `ball`: supported in T(B) with weighted l^2
    norm V(B)^{-1/2}. 'flat' is constant on the tent, 'cell' occupies the
    cell at the ball center with the largest sigma inside the tent.
    """
    mask = tent_mask(ball, grid, sphere, sigmas)
    if not np.any(mask):
        raise ResolutionError(f"the tent over the ball of radius {ball.radius:.4g} contains no grid cell")
    volume = discrete_volume(ball, grid, sphere)
    atom = PhaseSpaceField.zeros(grid, sphere, sigmas)
    measure = np.broadcast_to(atom.measure(), mask.shape)
    if shape == 'flat':
        mass = float(np.sum(measure[mask]))
        atom.values[mask] = (volume * mass)**-0.5
    elif shape == 'cell':
        slack = ball.radius - _ball_distances(ball, grid, sphere)
        spatial = (0,) + tuple(range(2, mask.ndim))
        j = int(np.flatnonzero(np.any(mask, axis=spatial))[-1])
        flat_index = np.argmax(np.where(mask[:, j], slack, -np.inf))
        a, *x = np.unravel_index(flat_index, slack.shape)
        cell = (a, j) + tuple(x)
        atom.values[cell] = (volume * measure[cell])**-0.5
    else:
        raise ConfigurationError(f"unknown atom shape '{shape}', use 'flat' or 'cell'")
    return atom
