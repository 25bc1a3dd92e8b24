"""
Geometry of the cosphere bundle S*(R^n) = R^n x S^{n-1}.

All runtime geometry uses the closed form quasi-metric

    d(x,w; y,v)^2 = |<w, x-y>| + |<v, x-y>| + |x-y|^2 + |w-v|^2

and its reduced form (the <v, x-y> term dropped). Point arrays carry the
coordinate on the last axis.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import gamma
from scipy.stats import linregress

from fiohardy.errors import ConfigurationError, DomainError, EmptySampleError, ResolutionError

logger = logging.getLogger(__name__)


def generator(seed):
    # counter based so spawned shards do not depend on execution order
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def sphere_measure(dim):
    return 2.0 * np.pi**(0.5 * dim) / gamma(0.5 * dim)


@dataclass
class CospherePoint:
    x: np.ndarray
    omega: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.omega = np.asarray(self.omega, dtype=float)
        if self.x.shape != self.omega.shape or self.x.ndim != 1:
            raise DomainError(f"position {self.x.shape} and direction {self.omega.shape} do not match")
        if abs(np.linalg.norm(self.omega) - 1.0) >= 1e-12:
            raise DomainError(f"direction {self.omega.tolist()} is not a unit vector")

    @classmethod
    def from_angle(cls, x, theta):
        return cls(np.asarray(x, dtype=float), np.array([np.cos(theta), np.sin(theta)]))

    @property
    def dim(self):
        return self.x.size


@dataclass
class BallSpec:
    center: CospherePoint
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError(f"ball radius must be positive, got {self.radius}")


@dataclass
class SphereGrid:
    dim: int
    directions: np.ndarray
    weights: np.ndarray

    @classmethod
    def uniform(cls, dim, count):
        if dim == 2:
            theta = 2.0 * np.pi * np.arange(count) / count
            directions = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        elif dim == 3:
            # fibonacci lattice
            k = np.arange(count) + 0.5
            z = 1.0 - 2.0 * k / count
            phi = np.pi * (1.0 + np.sqrt(5.0)) * k
            rho = np.sqrt(1.0 - z**2)
            directions = np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=-1)
        else:
            raise ConfigurationError(f"no sphere grid for dim {dim}")
        weights = np.full(count, sphere_measure(dim) / count)
        return cls(dim, directions, weights)

    @property
    def size(self):
        return len(self.weights)

    @property
    def measure(self):
        return sphere_measure(self.dim)

    @property
    def spacing(self):
        # typical angle between neighbouring directions
        if self.dim == 2:
            return 2.0 * np.pi / self.size
        return float(np.sqrt(self.measure / self.size))

    def check_resolved(self, sigmas, ratio=0.7):
        """Packets at sigma_min have angular width sqrt(sigma_min); the directions must sample it."""
        width = np.sqrt(sigmas.sigma_min)
        if self.spacing > ratio * width:
            raise ResolutionError(
                f"{self.size} directions are {self.spacing:.4g} apart, too coarse for packets of angular "
                f"width {width:.4g} at sigma_min={sigmas.sigma_min:.4g}; use at least "
                f"{self.directions_needed(sigmas, ratio)} directions")

    def directions_needed(self, sigmas, ratio=0.7):
        spacing = ratio * np.sqrt(sigmas.sigma_min)
        if self.dim == 2:
            return int(np.ceil(2.0 * np.pi / spacing))
        return int(np.ceil(self.measure / spacing**2))


@dataclass
class SigmaGrid:
    """
    Sub-unit levels are the log-midpoints of J equal cells covering
    [sigma_min, 1), each with weight ln(q). One more level sigma = e stands
    for the cap band [1, e] with weight 1.
    """
    levels: np.ndarray
    weights: np.ndarray

    @classmethod
    def geometric(cls, sigma_min, count):
        if not 0 < sigma_min < 1 or count < 1:
            raise ConfigurationError(f"bad sigma grid: sigma_min={sigma_min}, count={count}")
        step = -np.log(sigma_min) / count
        logs = np.log(sigma_min) + step * (np.arange(count) + 0.5)
        levels = np.append(np.exp(logs), np.e)
        weights = np.append(np.full(count, step), 1.0)
        return cls(levels, weights)

    @property
    def size(self):
        return len(self.levels)

    @property
    def sub_unit(self):
        return len(self.levels) - 1

    @property
    def sigma_min(self):
        return float(np.exp(np.log(self.levels[0]) - 0.5 * self.weights[0]))

    @property
    def resolved_band(self):
        return 0.5 / self.sigma_min

    def check_resolved(self, grid):
        if self.resolved_band > grid.nyquist * (1 + 1e-12):
            raise ResolutionError(
                f"sigma_min={self.sigma_min:.4g} needs frequencies up to {self.resolved_band:.4g}, "
                f"beyond the Nyquist frequency {grid.nyquist:.4g} of {grid.tag}")


@dataclass
class ContactMapSample:
    # mapping(x, omega) -> (x', omega') on (N, n) arrays
    mapping: Callable
    domain: Optional[Callable] = None

    def __call__(self, point):
        x, omega = self.mapping(point.x[None, :], point.omega[None, :])
        return CospherePoint(x[0], omega[0])


def quasi_dist_sq(x, omega, y, nu, grid=None):
    z = np.asarray(x) - np.asarray(y)
    if grid is not None:
        z = grid.wrap(z)
    return (np.abs(np.sum(omega * z, axis=-1)) + np.abs(np.sum(nu * z, axis=-1))
            + np.sum(z**2, axis=-1) + np.sum((np.asarray(omega) - np.asarray(nu))**2, axis=-1))


def reduced_dist_sq(x, omega, y, nu, grid=None):
    z = np.asarray(x) - np.asarray(y)
    if grid is not None:
        z = grid.wrap(z)
    return (np.abs(np.sum(omega * z, axis=-1)) + np.sum(z**2, axis=-1)
            + np.sum((np.asarray(omega) - np.asarray(nu))**2, axis=-1))


def quasi_dist(p, q, grid=None):
    return float(np.sqrt(quasi_dist_sq(p.x, p.omega, q.x, q.omega, grid)))


def reduced_dist(p, q, grid=None):
    return float(np.sqrt(reduced_dist_sq(p.x, p.omega, q.x, q.omega, grid)))


def in_tent(point, sigma, ball, grid=None):
    # r - d(point, center) >= sqrt(sigma) stands in for the distance to the complement
    if not (sigma > 0 and ball.radius > 0):
        raise DomainError("sigma and radius must be positive")
    return ball.radius - quasi_dist(point, ball.center, grid) >= np.sqrt(sigma)


def orthonormal_frame(omega):
    # rows form an orthonormal basis with omega first
    omega = np.asarray(omega, dtype=float)
    q, _ = np.linalg.qr(np.column_stack([omega, np.eye(omega.size)]))
    q = q[:, :omega.size].T
    if q[0] @ omega < 0:
        q = -q
    return q


def random_directions(rng, count, dim):
    v = rng.standard_normal((count, dim))
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def sample_cap(rng, omega, chord, count):
    """
    Uniform directions nu with |nu - omega| <= chord. Returns the samples and
    the surface measure of the cap.
    """
    dim = np.size(omega)
    theta_max = 2.0 * np.arcsin(min(0.5 * chord, 1.0))
    frame = orthonormal_frame(omega)
    if dim == 2:
        theta = rng.uniform(-theta_max, theta_max, count)
        nu = np.cos(theta)[:, None] * frame[0] + np.sin(theta)[:, None] * frame[1]
        return nu, 2.0 * theta_max
    # archimedes: the height is uniform on the cap
    height = rng.uniform(np.cos(theta_max), 1.0, count)
    phi = rng.uniform(0.0, 2.0 * np.pi, count)
    rho = np.sqrt(np.clip(1.0 - height**2, 0.0, None))
    nu = (height[:, None] * frame[0] + (rho * np.cos(phi))[:, None] * frame[1]
          + (rho * np.sin(phi))[:, None] * frame[2])
    return nu, 2.0 * np.pi * (1.0 - np.cos(theta_max))


def ball_volume(radius, trials, seed, dim=2, center=None, shards=1):
    """
    Monte-Carlo estimate of the volume of B_radius(center) under dx d omega.

    Samples are drawn uniformly from the region |<w,z>| <= min(r, r^2),
    |z| <= r, |w - v| <= min(r, 2) that contains the ball. Returns
    (estimate, standard error).
    """
    if trials < 1000:
        raise ConfigurationError(f"need at least 1000 trials, got {trials}")
    if not radius > 0:
        raise DomainError(f"radius must be positive, got {radius}")
    if center is None:
        omega = np.zeros(dim)
        omega[0] = 1.0
        center = CospherePoint(np.zeros(dim), omega)
    dim = center.dim
    frame = orthonormal_frame(center.omega)
    along = min(radius, radius**2)
    across = radius
    half_widths = np.array([along] + [across] * (dim - 1))
    box_volume = np.prod(2.0 * half_widths)

    hits = 0
    cap_measure = None
    for rng_seed in np.random.SeedSequence(seed).spawn(shards):
        rng = np.random.Generator(np.random.Philox(rng_seed))
        count = trials // shards
        z = (rng.uniform(-1.0, 1.0, (count, dim)) * half_widths) @ frame
        nu, cap_measure = sample_cap(rng, center.omega, min(radius, 2.0), count)
        d2 = quasi_dist_sq(center.x, center.omega, center.x + z, nu)
        hits += int(np.count_nonzero(d2 < radius**2))
    total = (trials // shards) * shards
    fraction = hits / total
    scale = box_volume * cap_measure
    estimate = scale * fraction
    stderr = scale * np.sqrt(fraction * (1.0 - fraction) / total)
    logger.debug('ball volume r=%g: %g +- %g', radius, estimate, stderr)
    return float(estimate), float(stderr)


@dataclass
class VolumeStudy:
    taus: np.ndarray
    volumes: np.ndarray
    stderrs: np.ndarray
    trials: int
    seed: int

    def slope(self, lo=0.0, hi=np.inf):
        keep = (self.taus >= lo) & (self.taus <= hi)
        if np.count_nonzero(keep) < 2:
            raise EmptySampleError(f"fewer than two radii in [{lo}, {hi}]")
        fit = linregress(np.log(self.taus[keep]), np.log(self.volumes[keep]))
        return fit.slope, fit.stderr

    def doubling_ratios(self):
        # V(B_2r)/V(B_r) for every r whose double is also in the study
        ratios = []
        for i, tau in enumerate(self.taus):
            j = np.flatnonzero(np.isclose(self.taus, 2.0 * tau))
            if j.size:
                ratios.append(self.volumes[j[0]] / self.volumes[i])
        return np.array(ratios)

    def rows(self):
        return [(float(t), float(v), float(e), self.trials, self.seed)
                for t, v, e in zip(self.taus, self.volumes, self.stderrs)]


def doubling_profile(taus, trials, seed, dim=2):
    taus = np.asarray(taus, dtype=float)
    volumes, stderrs = [], []
    for i, tau in enumerate(taus):
        v, e = ball_volume(tau, trials, [seed, i], dim)
        volumes.append(v)
        stderrs.append(e)
    return VolumeStudy(taus, np.array(volumes), np.array(stderrs), trials, seed)


def random_points(rng, count, dim, spread=2.0):
    x = rng.uniform(-spread, spread, (count, dim))
    return x, random_directions(rng, count, dim)


def nearby_points(rng, x, omega, scales):
    """
    Points at quasi-distance roughly `scales` from (x, omega): a random
    displacement is scaled so the leading terms of the quasi-metric match.
    """
    count, dim = x.shape
    z0 = random_directions(rng, count, dim) * rng.uniform(0.2, 1.0, (count, 1))
    w0 = random_directions(rng, count, dim)
    w0 -= np.sum(w0 * omega, axis=-1, keepdims=True) * omega
    w0 *= rng.uniform(0.0, 1.0, (count, 1))
    a = np.sum(z0**2, axis=-1) + np.sum(w0**2, axis=-1) + 1e-300
    b = 2.0 * np.abs(np.sum(omega * z0, axis=-1))
    c = (-b + np.sqrt(b**2 + 4.0 * a * scales**2)) / (2.0 * a)
    y = x + c[:, None] * z0
    nu = omega + c[:, None] * w0
    nu /= np.linalg.norm(nu, axis=-1, keepdims=True)
    return y, nu


def bilipschitz_ratio(chi, pairs, seed, dim=2, spread=2.0):
    rng = generator(seed)
    x, omega = random_points(rng, pairs, dim, spread)
    scales = 10.0**rng.uniform(-3.0, 0.0, pairs)
    y, nu = nearby_points(rng, x, omega, scales)
    if chi.domain is not None:
        keep = np.asarray(chi.domain(x, omega)) & np.asarray(chi.domain(y, nu))
        x, omega, y, nu = x[keep], omega[keep], y[keep], nu[keep]
    if len(x) == 0:
        raise EmptySampleError("every sampled pair lies outside the domain of the map")
    cx, comega = chi.mapping(x, omega)
    cy, cnu = chi.mapping(y, nu)
    for directions in (comega, cnu):
        if np.any(np.abs(np.linalg.norm(directions, axis=-1) - 1.0) > 1e-10):
            raise DomainError("contact map returned a direction off the unit sphere")
    before = np.sqrt(quasi_dist_sq(x, omega, y, nu))
    after = np.sqrt(quasi_dist_sq(cx, comega, cy, cnu))
    ratio = after / before
    return float(np.max(ratio)), float(np.min(ratio))


def quasi_triangle_constant(triples, seed, dim=2, spread=2.0):
    rng = generator(seed)
    px, pw = random_points(rng, triples, dim, spread)
    qx, qw = nearby_points(rng, px, pw, 10.0**rng.uniform(-3.0, 0.5, triples))
    rx, rw = nearby_points(rng, qx, qw, 10.0**rng.uniform(-3.0, 0.5, triples))
    direct = np.sqrt(quasi_dist_sq(px, pw, rx, rw))
    detour = np.sqrt(quasi_dist_sq(px, pw, qx, qw)) + np.sqrt(quasi_dist_sq(qx, qw, rx, rw))
    return float(np.max(direct / detour))


def metric_equivalence(pairs, seed, dim=2, spread=2.0):
    # range of d / d_reduced; 1 <= ratio <= sqrt(2)
    rng = generator(seed)
    x, omega = random_points(rng, pairs, dim, spread)
    y, nu = nearby_points(rng, x, omega, 10.0**rng.uniform(-3.0, 0.5, pairs))
    ratio = np.sqrt(quasi_dist_sq(x, omega, y, nu) / reduced_dist_sq(x, omega, y, nu))
    return float(np.min(ratio)), float(np.max(ratio))
