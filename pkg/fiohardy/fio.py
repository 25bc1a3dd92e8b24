"""
Normal oscillatory integral operators

    T f(x) = int e^{i Phi(x, eta)} a(x, eta) f^(eta) d eta

their induced contact maps, lifted kernels K_{sigma,tau} (the kernel of
W_sigma T V_tau^*) and the off-singularity and residual bound fits.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import casadi as ca
import numpy as np

from fiohardy.errors import ConfigurationError, SingularityError
from fiohardy.field import SampledField, SpectralField, apply_multiplier, sample_multiplier, to_field, to_spectrum
from fiohardy.metric import ContactMapSample, quasi_dist_sq
from fiohardy.packets import PacketIndex, build_profiles, cap_symbol, check_packet_resolved, packet_symbol
from fiohardy.phase import PhaseFunction, SymbolFunction
from fiohardy.tent import tent_norm
from fiohardy.transform import analyze, synthesize

logger = logging.getLogger(__name__)


@dataclass
class NormalOIO:
    phase: PhaseFunction
    symbol: SymbolFunction
    name: str = 'operator'
    newton_max_steps: int = 50
    newton_tol: float = 1e-12

    @property
    def dim(self):
        return self.phase.dim

    @property
    def translation_invariant(self):
        return self.phase.linear_in_eta and self.symbol.x_independent


def upsilon(t):
    t = np.asarray(t, dtype=float)
    return np.minimum(t, 1.0 / t)


def _high_pass(profiles, eps):
    def chi(eta):
        return 1.0 - profiles.cutoff(np.linalg.norm(eta, axis=-1), eps, 4.0 * eps)
    return chi


def identity_operator(dim=2):
    return NormalOIO(PhaseFunction.linear(dim, name='identity'),
                     SymbolFunction(lambda x, eta: 1.0, name='one'), 'identity')


def half_wave(t=1.0, eps=0.25, dim=2, profiles=None):
    """e^{it sqrt(-Delta)} with a smooth high-pass symbol vanishing on |eta| < eps."""
    profiles = profiles or build_profiles('standard', dim)
    chi = _high_pass(profiles, eps)
    phase = PhaseFunction.linear(dim, lambda eta: t * ca.norm_2(eta), name=f'halfwave(t={t:g})')
    return NormalOIO(phase, SymbolFunction(lambda x, eta: chi(eta), eps=eps, name='high-pass'), 'halfwave')


def pseudo_operator(eps=0.25, dim=2, profiles=None):
    # a(x, eta) = 1 + sin(x_1) chi(eta) / 2, order 0, x dependent
    profiles = profiles or build_profiles('standard', dim)
    chi = _high_pass(profiles, eps)

    def a(x, eta):
        return 1.0 + 0.5 * np.sin(np.asarray(x)[..., 0]) * chi(eta)
    return NormalOIO(PhaseFunction.linear(dim, name='pseudo'),
                     SymbolFunction(a, x_independent=False, name='pseudo'), 'pseudo')


def smoothing_operator(width=0.5, dim=2):
    # convolution with a gaussian of the given width
    def a(x, eta):
        return np.exp(-0.5 * width**2 * np.sum(np.asarray(eta)**2, axis=-1))
    return NormalOIO(PhaseFunction.linear(dim, name='smoothing'),
                     SymbolFunction(a, name='gaussian'), 'smoothing')


def zero_operator(dim=2):
    return NormalOIO(PhaseFunction.linear(dim, name='zero'),
                     SymbolFunction(lambda x, eta: 0.0, name='zero'), 'zero')


OPERATORS = ('identity', 'halfwave', 'pseudo', 'smoothing', 'zero')


def operator_from_config(settings, dim=2, profiles=None):
    """Build an operator from a flat config: op = halfwave, t = 1.0, eps = 0.25, ..."""
    op = str(settings.get('op', 'halfwave')).lower()
    eps = float(settings.get('eps', 0.25))
    if op == 'identity':
        T = identity_operator(dim)
    elif op == 'halfwave':
        T = half_wave(float(settings.get('t', 1.0)), eps, dim, profiles)
    elif op == 'pseudo':
        T = pseudo_operator(eps, dim, profiles)
    elif op == 'smoothing':
        T = smoothing_operator(float(settings.get('smoothing_width', settings.get('width', 0.5))), dim)
    elif op == 'zero':
        T = zero_operator(dim)
    else:
        raise ConfigurationError(f"unknown operator '{op}', choose from {OPERATORS}")
    T.newton_max_steps = int(settings.get('newton_max_steps', T.newton_max_steps))
    T.newton_tol = float(settings.get('newton_tol', T.newton_tol))
    return T


def adjoint(T):
    """T^* for translation invariant operators: conjugate multiplier."""
    if not T.translation_invariant:
        raise ConfigurationError(f"adjoint is only available for multiplier operators, not '{T.name}'")
    phi0 = T.phase.phi0
    phase = PhaseFunction.linear(T.dim, None if phi0 is None else (lambda eta: -phi0(eta)),
                                 name=T.phase.name + '*')
    symbol = SymbolFunction(lambda x, eta: np.conj(T.symbol(x, eta)), T.symbol.order, T.symbol.rho,
                            T.symbol.eps, True, T.symbol.name + '*')
    return NormalOIO(phase, symbol, T.name + '*', T.newton_max_steps, T.newton_tol)


def operator_multiplier(T, grid):
    """e^{i phi0(eta)} a(eta) on the lattice in fft order."""
    if not T.translation_invariant:
        raise ConfigurationError(f"operator '{T.name}' is not a Fourier multiplier")
    eta = grid.frequencies().reshape(-1, grid.dim)
    phi0 = T.phase.values(np.zeros_like(eta), eta)
    # eta = 0 sits first in fft order
    if not np.isfinite(phi0[0]):
        phi0[0] = 0.0
    a = T.symbol(np.zeros_like(eta), eta)
    return sample_multiplier((np.exp(1j * phi0) * a).reshape(grid.shape), grid)


def _dense_apply(T, f, rows=64):
    grid = f.grid
    n = grid.dim
    coefficients = to_spectrum(f).continuum().reshape(-1)
    eta = grid.frequencies().reshape(-1, n)
    x = grid.coordinates().reshape(-1, n)
    out = np.empty(len(x), dtype=np.complex128)
    for start in range(0, len(x), rows):
        xs = x[start:start + rows]
        X = np.repeat(xs, len(eta), axis=0)
        E = np.tile(eta, (len(xs), 1))
        phase = T.phase.values(X, E).reshape(len(xs), len(eta))
        a = np.asarray(T.symbol(X, E)).reshape(len(xs), len(eta))
        out[start:start + rows] = (np.exp(1j * phase) * a) @ coefficients
    return SampledField(grid, out.reshape(grid.shape) / grid.extent**n)


def apply_oio(T, f, path='auto'):
    """
    Apply T to a sampled field. Translation invariant operators use the
    multiplier e^{i phi0} a, everything else the direct quadrature over the
    frequency lattice, one row of output points at a time.
    """
    if path not in ('auto', 'fast', 'dense'):
        raise ConfigurationError(f"unknown path '{path}'")
    if path == 'fast' or (path == 'auto' and T.translation_invariant):
        return apply_multiplier(operator_multiplier(T, f.grid), f)
    return _dense_apply(T, f)


def identity_contact():
    return ContactMapSample(lambda y, nu: (np.array(y, dtype=float), np.array(nu, dtype=float)))


def induced_contact(T):
    """
    The contact map defined by chi(grad_eta Phi(x, eta), eta) = (x, grad_x Phi / |grad_x Phi|).
    Linear phases give chi(y, nu) = (y - grad phi0(nu), nu); other phases
    solve grad_eta Phi(x, nu) = y by damped Newton iteration started at x = y.
    """
    phase = T.phase

    if phase.linear_in_eta:
        def mapping(y, nu):
            y = np.atleast_2d(np.asarray(y, dtype=float))
            nu = np.atleast_2d(np.asarray(nu, dtype=float))
            shift = phase.evaluate(np.zeros_like(y), nu)['grad_eta']
            return y - shift, nu / np.linalg.norm(nu, axis=-1, keepdims=True)
        return ContactMapSample(mapping)

    def mapping(y, nu):
        y = np.atleast_2d(np.asarray(y, dtype=float))
        nu = np.atleast_2d(np.asarray(nu, dtype=float))
        x = y.copy()
        tol = T.newton_tol * (1.0 + np.linalg.norm(y, axis=-1))
        values = phase.evaluate(x, nu)
        residual = values['grad_eta'] - y
        size = np.linalg.norm(residual, axis=-1)
        for _ in range(T.newton_max_steps):
            if np.all(size <= tol):
                break
            step = np.linalg.solve(values['mixed'], residual[..., None])[..., 0]
            damping = np.ones(len(x))
            for _ in range(30):
                trial = x - damping[:, None] * step
                trial_values = phase.evaluate(trial, nu)
                trial_residual = trial_values['grad_eta'] - y
                trial_size = np.linalg.norm(trial_residual, axis=-1)
                worse = (trial_size >= size) & (size > tol)
                if not np.any(worse):
                    break
                damping[worse] *= 0.5
            # rows whose step failed every halving keep their iterate
            improved = trial_size < size
            if not np.any(improved & (size > tol)):
                break
            x = np.where(improved[:, None], trial, x)
            values = phase.evaluate(x, nu)
            residual = values['grad_eta'] - y
            size = np.linalg.norm(residual, axis=-1)
        if np.any(size > tol):
            k = int(np.argmax(size > tol))
            raise SingularityError(f"Newton iteration for the contact map did not converge at y={y[k].tolist()}, "
                                   f"nu={nu[k].tolist()} (residual {size[k]:.3g})", (y[k], nu[k]))
        grad = values['grad_x']
        return x, grad / np.linalg.norm(grad, axis=-1, keepdims=True)
    return ContactMapSample(mapping)


def _lift_symbol(plan, sigma, omega):
    zeta = plan.grid.frequencies()
    if sigma >= 1:
        return cap_symbol(plan.profiles)(zeta)
    check_packet_resolved(sigma, plan.grid)
    return packet_symbol(PacketIndex(omega, sigma), plan.profiles)(zeta)


def lifted_kernel(T, plan_w, plan_v, sigma, tau, omega, nu, y=None):
    """
    x -> K_{sigma,tau}((x, omega), (y, nu)) on the grid, the kernel of
    psi_{omega,sigma}(D) T psi~_{nu,tau}(D). Levels sigma >= 1 use the cap
    V^{-1/2} r. The point y defaults to the origin.
    """
    grid = plan_w.grid
    y = np.zeros(grid.dim) if y is None else np.asarray(y, dtype=float)
    left = _lift_symbol(plan_w, sigma, np.asarray(omega, dtype=float))
    right = _lift_symbol(plan_v, tau, np.asarray(nu, dtype=float))
    zeta = grid.frequencies()
    if T.translation_invariant:
        m = left * operator_multiplier(T, grid) * right * np.exp(-1j * zeta @ y)
        return to_field(SpectralField.from_continuum(grid, m))
    source = to_field(SpectralField.from_continuum(grid, right * np.exp(-1j * zeta @ y)))
    return apply_multiplier(left, apply_oio(T, source))


def kernel_peak(kernel):
    """Grid coordinate of the largest |K|."""
    index = np.unravel_index(np.argmax(np.abs(kernel.values)), kernel.grid.shape)
    return kernel.grid.coordinates()[index]


@dataclass
class OffSingSamples:
    pairs: list
    directions: list

    @classmethod
    def default(cls, dim=2, scales=(0.25, 0.125, 0.0625, 0.03125), angles=(0.0, 0.15, 0.4)):
        pairs = [(s, t) for s in scales for t in scales]
        e1 = np.eye(dim)[0]
        directions = []
        for theta in angles:
            nu = np.cos(theta) * e1 + np.sin(theta) * np.eye(dim)[1]
            directions.append((e1, nu))
        return cls(pairs, directions)


@dataclass
class OffSingReport:
    N: int
    C_fit: float
    worst: dict
    grid_tag: str
    contact: str = 'induced'
    refined_C: Optional[float] = None
    refinement_stable: Optional[bool] = None

    def rows(self):
        return [(self.N, s, t, float(v), self.grid_tag, self.contact) for (s, t), v in sorted(self.worst.items())]


def _offsing_sup(T, plan_w, plan_v, N, samples, chi):
    grid = plan_w.grid
    n = grid.dim
    x = grid.coordinates()
    worst = {}
    for sigma, tau in samples.pairs:
        rho = min(sigma, tau)
        for omega, nu in samples.directions:
            kernel = lifted_kernel(T, plan_w, plan_v, sigma, tau, omega, nu)
            target_x, target_w = chi.mapping(np.zeros((1, n)), np.asarray(nu)[None])
            d2 = quasi_dist_sq(x, omega, target_x[0], target_w[0], grid)
            bound = np.abs(kernel.values) * rho**n * upsilon(sigma / tau)**-N * (1.0 + d2 / rho)**N
            key = (sigma, tau)
            worst[key] = max(worst.get(key, 0.0), float(np.max(bound)))
    return worst


def offsing_fit(T, plan_w, plan_v, N=3, samples=None, contact=None, refine=True):
    """
    C_fit = sup |K| rho^n Upsilon(sigma/tau)^{-N} (1 + d(x, w; chi(y, nu))^2 / rho)^N
    over the sampled kernels, rho = min(sigma, tau). With refine the fit is
    repeated on the grid refined by 2 and the two values compared.
    """
    samples = samples or OffSingSamples.default(plan_w.grid.dim)
    chi = contact or induced_contact(T)
    name = 'induced' if contact is None else 'given'
    worst = _offsing_sup(T, plan_w, plan_v, N, samples, chi)
    C = max(worst.values())
    report = OffSingReport(N, C, worst, plan_w.grid.tag, name)
    if refine:
        fine = _offsing_sup(T, plan_w.refined(2), plan_v.refined(2), N, samples, chi)
        report.refined_C = max(fine.values())
        if C == 0:
            report.refinement_stable = report.refined_C == 0
        else:
            report.refinement_stable = bool(0.5 <= report.refined_C / C <= 2.0)
    logger.info('off-singularity fit %s N=%d: C=%.4g (refined %s)', T.name, N, C, report.refined_C)
    return report


@dataclass
class ResidualTable:
    orders: tuple
    pairs: list
    values: np.ndarray
    grid_tag: str

    def sup(self, N):
        return float(np.max(self.values[list(self.orders).index(N)]))

    def rows(self):
        return [(N, s, t, float(self.values[i, k]), self.grid_tag)
                for i, N in enumerate(self.orders) for k, (s, t) in enumerate(self.pairs)]


def residual_check(T, plan_w, plan_v, orders=(1, 2, 3, 4, 5, 6), pairs=None, omega=None, nu=None):
    """sup |K| (1 + |x| + |y| + Upsilon(sigma)^{-1} + Upsilon(tau)^{-1})^N per (sigma, tau), y = 0."""
    if max(orders) > 8:
        raise ConfigurationError(f"residual orders above 8 are not supported, got {max(orders)}")
    grid = plan_w.grid
    e1 = np.eye(grid.dim)[0]
    omega = e1 if omega is None else omega
    nu = e1 if nu is None else nu
    pairs = pairs or OffSingSamples.default(grid.dim).pairs
    radius = np.linalg.norm(grid.coordinates(), axis=-1)
    values = np.zeros((len(orders), len(pairs)))
    for k, (sigma, tau) in enumerate(pairs):
        modulus = np.abs(lifted_kernel(T, plan_w, plan_v, sigma, tau, omega, nu).values)
        base = 1.0 + radius + 1.0 / upsilon(sigma) + 1.0 / upsilon(tau)
        for i, N in enumerate(orders):
            values[i, k] = float(np.max(modulus * base**N))
    return ResidualTable(tuple(orders), list(pairs), values, grid.tag)


@dataclass
class TentBoundStats:
    ratios: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def max(self):
        return float(np.max(self.ratios)) if self.ratios.size else float('nan')

    @property
    def mean(self):
        return float(np.mean(self.ratios)) if self.ratios.size else float('nan')


def empirical_tent_bound(T, plan, p, test_set, family=None):
    """Ratios ||W T W^* F||_{T^p} / ||F||_{T^p} over the test set."""
    ratios = []
    for F in test_set:
        before = tent_norm(F, p, family, plan.tent)
        if before == 0:
            continue
        after = tent_norm(analyze(plan, apply_oio(T, synthesize(plan, F))), p, family, plan.tent)
        ratios.append(after / before)
    return TentBoundStats(np.array(ratios))
