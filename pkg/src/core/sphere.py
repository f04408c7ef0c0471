"""
Quadrature rules on the unit sphere S^{n-1} for n = 2, 3.

n=2 uses the equispaced trapezoid rule in angle; n=3 uses Gauss-Legendre in
cos(theta) times the trapezoid rule in phi.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_legendre

from .errors import DomainError

logger = logging.getLogger(__name__)

MIN_ORDER = 8


@dataclass(frozen=True, eq=False)
class SphereQuadrature:
    """Nodes (unit vectors, shape (N, n)) and positive weights summing to n*omega_n."""

    n: int
    order: int
    nodes: np.ndarray
    weights: np.ndarray
    exactness: int

    @property
    def size(self) -> int:
        return self.weights.size

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Quadrature of ``values`` sampled at the nodes along axis 0."""
        values = np.asarray(values, dtype=float)
        return np.tensordot(self.weights, values, axes=(0, 0))

    def scaled(self, t: float):
        """Points and weights on the sphere of radius t (weights times t^{n-1})."""
        return t * self.nodes, self.weights * t ** (self.n - 1)


def sphere_quadrature(n: int, order: int) -> SphereQuadrature:
    """
    Build a quadrature rule on S^{n-1}.

    Args:
        n: Dimension (2 or 3)
        order: Number of angle nodes (n=2) or azimuthal nodes (n=3, with
            order//2 Gauss-Legendre nodes in cos(theta))

    Returns:
        SphereQuadrature
    """
    if order < MIN_ORDER:
        raise DomainError(f"quadrature order must be >= {MIN_ORDER}, got {order}")
    if n == 2:
        theta = 2.0 * np.pi * np.arange(order) / order
        nodes = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        weights = np.full(order, 2.0 * np.pi / order)
        return SphereQuadrature(2, order, nodes, weights, exactness=order - 1)
    if n == 3:
        n_polar = order // 2
        mu, w_mu = roots_legendre(n_polar)
        phi = 2.0 * np.pi * np.arange(order) / order
        sin_theta = np.sqrt(1.0 - mu ** 2)
        nodes = np.stack(
            [
                np.outer(sin_theta, np.cos(phi)).ravel(),
                np.outer(sin_theta, np.sin(phi)).ravel(),
                np.repeat(mu, order),
            ],
            axis=1,
        )
        weights = np.outer(w_mu, np.full(order, 2.0 * np.pi / order)).ravel()
        return SphereQuadrature(3, order, nodes, weights, exactness=min(2 * n_polar - 1, order - 1))
    raise DomainError(f"dimension must be 2 or 3, got {n}")
