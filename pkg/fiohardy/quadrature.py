# Clenshaw-Curtis quadrature, used for the packet normalizations

import logging
from functools import lru_cache

import numpy as np

from fiohardy.errors import ConfigurationError

logger = logging.getLogger(__name__)


@lru_cache(maxsize=32)
def _reference_rule(N):
    # Lobatto nodes ascending on [-1, 1] with the cosine-series weights
    theta = np.pi * np.arange(N + 1) / N
    k = np.arange(1, N // 2 + 1)
    series = np.where(2 * k == N, 1.0, 2.0) / (4.0 * k**2 - 1.0)
    w = 1.0 - np.cos(2.0 * np.outer(theta, k)) @ series
    w[1:N] *= 2.0
    nodes, w = -np.cos(theta), w / N
    nodes.flags.writeable = False
    w.flags.writeable = False
    return nodes, w


def clenshaw_curtis_rule(N, a=-1.0, b=1.0):
    """
    Nodes and weights of the (N+1)-point Clenshaw-Curtis rule on [a, b],
    nodes ascending. Exact for polynomials of degree N.
    """
    if N < 2:
        raise ConfigurationError('a Clenshaw-Curtis rule needs N >= 2, got %d' % N)
    nodes, w = _reference_rule(int(N))
    half = 0.5 * (b - a)
    return a + half * (nodes + 1.0), half * w


def clenshaw_curtis(f, a, b, N):
    nodes, w = clenshaw_curtis_rule(N, a, b)
    return np.dot(w, f(nodes))


def integrate(f, a, b, tol=1e-6, start=16, max_nodes=4096):
    """
    Integrate a vectorized f over [a, b], doubling the Clenshaw-Curtis order
    until the relative change drops below tol.
    """
    if b <= a:
        return 0.0
    N = start
    previous = clenshaw_curtis(f, a, b, N)
    while N < max_nodes:
        N *= 2
        current = clenshaw_curtis(f, a, b, N)
        if abs(current - previous) <= tol * abs(current):
            return float(current)
        previous = current
    logger.warning('quadrature on [%g, %g] stopped at %d nodes', a, b, N)
    return float(previous)


def gauss_cells(f, edges, order=8):
    # integral of f over each cell [edges[k], edges[k+1]]
    x, w = np.polynomial.legendre.leggauss(order)
    left, right = edges[:-1], edges[1:]
    half = 0.5 * (right - left)
    mid = 0.5 * (right + left)
    nodes = mid[:, None] + half[:, None] * x[None, :]
    return np.sum(f(nodes) * w[None, :], axis=1) * half
