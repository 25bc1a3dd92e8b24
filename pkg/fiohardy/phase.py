import logging
import re
from dataclasses import dataclass
from itertools import product
from typing import Callable, Optional

import casadi as ca
import numpy as np

from fiohardy.errors import ConfigurationError, NumericError
from fiohardy.metric import generator, random_directions

logger = logging.getLogger(__name__)


# The phase is built once as a casadi expression so every consumer sees the
# same derivatives. Batched evaluation maps the function over columns.
class PhaseFunction:
    def __init__(self, dim, builder, linear_in_eta=False, phi0=None, name='phase', check_seed=0):
        self.dim = dim
        self.linear_in_eta = linear_in_eta
        self.phi0 = phi0
        self.name = name

        x = ca.SX.sym('x', dim)
        eta = ca.SX.sym('eta', dim)
        self.expression = builder(x, eta)

        grad_x = ca.gradient(self.expression, x)
        grad_eta = ca.gradient(self.expression, eta)
        # mixed[i, j] = d/dx_j d/deta_i Phi
        mixed = ca.jacobian(grad_eta, x)

        # casadi only accepts identifier-like function names
        ca_name = re.sub(r'_+', '_', re.sub(r'[^0-9A-Za-z_]', '_', name)).strip('_')
        if not ca_name or not ca_name[0].isalpha() or ca_name in ('null', 'jac', 'hess'):
            ca_name = 'phase_' + ca_name
        self.f = ca.Function(ca_name, [x, eta], [self.expression, grad_x, grad_eta, ca.det(mixed), mixed],
                             ['x', 'eta'], ['phi', 'grad_x', 'grad_eta', 'det', 'mixed'])
        self._maps = {}

        self.check_homogeneity(check_seed)
        self.check_nondegenerate(check_seed)

    @classmethod
    def linear(cls, dim, phi0=None, name='linear'):
        """Phi(x, eta) = x . eta + phi0(eta) with phi0 homogeneous of degree 1."""
        if phi0 is None:
            return cls(dim, lambda x, eta: ca.dot(x, eta), True, None, name)
        return cls(dim, lambda x, eta: ca.dot(x, eta) + phi0(eta), True, phi0, name)

    def _mapped(self, count):
        if count not in self._maps:
            self._maps[count] = self.f.map(count)
        return self._maps[count]

    def evaluate(self, x, eta):
        """
        Evaluate on (N, n) point arrays. Returns a dict of numpy arrays:
        phi (N,), grad_x (N, n), grad_eta (N, n), det (N,), mixed (N, n, n).
        """
        x = np.atleast_2d(np.asarray(x, dtype=float))
        eta = np.atleast_2d(np.asarray(eta, dtype=float))
        x, eta = (np.ascontiguousarray(a) for a in np.broadcast_arrays(x, eta))
        count = x.shape[0]
        out = self._mapped(count)(x.T, eta.T)
        n = self.dim
        return {
            'phi': np.array(out[0]).reshape(count),
            'grad_x': np.array(out[1]).T,
            'grad_eta': np.array(out[2]).T,
            'det': np.array(out[3]).reshape(count),
            'mixed': np.array(out[4]).reshape(n, count, n).transpose(1, 0, 2),
        }

    def values(self, x, eta):
        return self.evaluate(x, eta)['phi']

    def check_homogeneity(self, seed, count=64, tol=1e-8):
        rng = generator(seed)
        x = rng.uniform(-2.0, 2.0, (count, self.dim))
        eta = random_directions(rng, count, self.dim) * rng.uniform(0.5, 4.0, (count, 1))
        lam = rng.uniform(0.5, 4.0, (count, 1))
        scaled = self.values(x, lam * eta)
        expected = lam[:, 0] * self.values(x, eta)
        defect = np.abs(scaled - expected) / (1.0 + np.abs(expected))
        if not np.all(defect < tol):
            raise ConfigurationError(f"phase '{self.name}' is not homogeneous of degree 1 in eta "
                                     f"(defect {np.nanmax(defect):.3g})")

    def check_nondegenerate(self, seed, count=64):
        rng = generator(seed)
        x = rng.uniform(-2.0, 2.0, (count, self.dim))
        eta = random_directions(rng, count, self.dim)
        det = self.evaluate(x, eta)['det']
        if not np.all(np.abs(det) > 1e-10):
            raise ConfigurationError(f"mixed hessian of phase '{self.name}' degenerates on the sample")


@dataclass
class SymbolFunction:
    """
    a(x, eta) evaluated on (..., n) arrays. An x-independent symbol ignores x.
    If eps is set the symbol must vanish for |eta| < eps.
    """
    evaluator: Callable
    order: float = 0.0
    rho: float = 1.0
    eps: Optional[float] = None
    x_independent: bool = True
    name: str = 'symbol'

    def __call__(self, x, eta):
        eta = np.asarray(eta, dtype=float)
        with np.errstate(all='ignore'):
            values = np.asarray(self.evaluator(x, eta))
        values = np.broadcast_to(values, eta.shape[:-1])
        bad = ~np.isfinite(values)
        if np.any(bad):
            index = tuple(np.argwhere(bad)[0])
            raise NumericError(f"symbol '{self.name}' is not finite at eta = {eta[index].tolist()}")
        if self.eps is not None:
            low = np.linalg.norm(eta, axis=-1) < self.eps
            if np.any(values[low] != 0):
                raise ConfigurationError(f"symbol '{self.name}' does not vanish on |eta| < {self.eps}")
        return values


def _derivative(symbol, x, eta, partials, hx, heta):
    if not partials:
        return symbol(x, eta)
    (variable, axis), rest = partials[0], partials[1:]
    unit = np.zeros(x.shape[-1])
    unit[axis] = 1.0
    if variable == 'x':
        step = hx
        plus = _derivative(symbol, x + step * unit, eta, rest, hx, heta)
        minus = _derivative(symbol, x - step * unit, eta, rest, hx, heta)
    else:
        step = heta
        plus = _derivative(symbol, x, eta + step[:, None] * unit, rest, hx, heta)
        minus = _derivative(symbol, x, eta - step[:, None] * unit, rest, hx, heta)
    return (plus - minus) / (2.0 * step)


def symbol_seminorms(symbol, dim=2, count=200, seed=0, step=1e-4):
    """
    Finite difference estimates of the S^m_{rho,1-rho,1} seminorms

        sup |d_x^alpha d_eta^beta a| <eta>^{-(m - rho |beta| + (1 - rho) |alpha|)}

    for |alpha| + |beta| <= 2 on random samples. Keys are (|alpha|, |beta|).
    """
    rng = generator(seed)
    x = rng.uniform(-np.pi, np.pi, (count, dim))
    radius = 10.0**rng.uniform(0.0, 2.0, count)
    if symbol.eps is not None:
        radius = np.maximum(radius, 8.0 * symbol.eps)
    eta = random_directions(rng, count, dim) * radius[:, None]
    japanese = np.sqrt(1.0 + radius**2)

    variables = [('x', i) for i in range(dim)] + [('eta', i) for i in range(dim)]
    seminorms = {}
    for order in range(3):
        for partials in product(variables, repeat=order):
            alpha = sum(1 for v, _ in partials if v == 'x')
            beta = order - alpha
            values = _derivative(symbol, x, eta, list(partials), step, step * radius)
            weight = japanese**-(symbol.order - symbol.rho * beta + (1.0 - symbol.rho) * alpha)
            key = (alpha, beta)
            seminorms[key] = max(seminorms.get(key, 0.0), float(np.max(np.abs(values) * weight)))
    return seminorms
