"""
Homogeneous kernels generated by a symbol and the sphere identities they satisfy.

K~(x) = Omega(x/|x|) |x|^{-(n-1)} is the potential kernel, K(x) = Omega(x/|x|) |x|^{-n}
the singular one. The latter requires Omega to have zero mean on the sphere.
"""

import logging
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from .errors import DomainError, ZeroMeanError
from .sphere import SphereQuadrature, sphere_quadrature
from .symbols import SphereSymbol

logger = logging.getLogger(__name__)

ZERO_MEAN_TOLERANCE = 1e-8
ZERO_MEAN_ORDER = 64
NUMERIC_STEP = 1e-5


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """A symbol together with the homogeneity degree of its kernel."""

    symbol: SphereSymbol
    degree: int
    zero_mean_required: bool = field(init=False)

    def __post_init__(self):
        n = self.symbol.n
        if self.degree not in (-(n - 1), -n):
            raise DomainError(f"kernel degree must be {-(n - 1)} or {-n}, got {self.degree}")
        object.__setattr__(self, "zero_mean_required", self.degree == -n)
        if self.zero_mean_required:
            mean = symbol_integral(self.symbol, sphere_quadrature(n, ZERO_MEAN_ORDER))
            if np.max(np.abs(mean)) > ZERO_MEAN_TOLERANCE:
                raise ZeroMeanError(
                    f"symbol {self.symbol.catalog_id} has sphere integral {mean.tolist()}, "
                    f"a degree {-n} kernel needs zero mean"
                )

    @classmethod
    def potential(cls, symbol: SphereSymbol) -> "KernelSpec":
        return cls(symbol, -(symbol.n - 1))

    @classmethod
    def singular(cls, symbol: SphereSymbol) -> "KernelSpec":
        return cls(symbol, -symbol.n)

    @property
    def n(self) -> int:
        return self.symbol.n

    @property
    def m(self) -> int:
        return self.symbol.m

    @property
    def is_potential(self) -> bool:
        return self.degree == -(self.n - 1)

    @property
    def cache_key(self) -> Tuple[object, ...]:
        return self.symbol.cache_key + (self.degree,)

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """Kernel values at nonzero points (..., n), shape (..., m)."""
        x = np.asarray(x, dtype=float)
        r = np.sqrt(np.sum(x ** 2, axis=-1, keepdims=True))
        if np.any(r == 0.0):
            raise DomainError("homogeneous kernels are not defined at x = 0")
        return self.symbol.values(x / r) * r ** self.degree

    def gradient(self, x: np.ndarray) -> np.ndarray:
        """Pointwise gradient at nonzero points, shape (..., m, n)."""
        x = np.asarray(x, dtype=float)
        r = np.sqrt(np.sum(x ** 2, axis=-1, keepdims=True))
        if np.any(r == 0.0):
            raise DomainError("homogeneous kernels are not differentiable at x = 0")
        if self.symbol.has_grad_extension:
            u = x / r
            omega = self.symbol.values(u)
            grad_omega = self.symbol.extension_gradient(u, r)
            radial = self.degree * (r ** (self.degree - 1))[..., None] * omega[..., :, None] * u[..., None, :]
            return grad_omega * (r ** self.degree)[..., None] + radial
        return self.numeric_gradient(x)

    def numeric_gradient(self, x: np.ndarray) -> np.ndarray:
        """Central differences with step NUMERIC_STEP*|x| along each axis."""
        x = np.asarray(x, dtype=float)
        r = np.sqrt(np.sum(x ** 2, axis=-1, keepdims=True))
        step = NUMERIC_STEP * r
        parts = []
        for k in range(self.n):
            e = np.zeros(self.n)
            e[k] = 1.0
            forward = self.evaluate(x + step * e)
            backward = self.evaluate(x - step * e)
            parts.append((forward - backward) / (2.0 * step))
        return np.stack(parts, axis=-1)


@dataclass(frozen=True)
class BoundaryConstants:
    """Dirac coefficients c[i][j] = int_{S^{n-1}} K~_i(x) x_j/|x| dsigma."""

    c: np.ndarray
    order: int

    def drift(self, other: "BoundaryConstants") -> float:
        return float(np.max(np.abs(self.c - other.c)))


def _require_potential(spec: KernelSpec) -> None:
    if not spec.is_potential:
        raise DomainError(f"expected a degree {-(spec.n - 1)} kernel, got degree {spec.degree}")


def _require_singular(spec: KernelSpec) -> None:
    if spec.is_potential:
        raise DomainError(f"expected a degree {-spec.n} kernel, got degree {spec.degree}")


def ktilde_eval(spec: KernelSpec, x) -> np.ndarray:
    """Omega(x/|x|) |x|^{-(n-1)} at a nonzero point."""
    _require_potential(spec)
    return spec.evaluate(np.asarray(x, dtype=float))


def ksing_eval(spec: KernelSpec, x) -> np.ndarray:
    """Omega(x/|x|) |x|^{-n} at a nonzero point."""
    _require_singular(spec)
    return spec.evaluate(np.asarray(x, dtype=float))


def grad_ktilde(spec: KernelSpec, x) -> np.ndarray:
    """Pointwise gradient of K~ (an m x n matrix per point)."""
    _require_potential(spec)
    return spec.gradient(np.asarray(x, dtype=float))


def symbol_integral(symbol: SphereSymbol, quad: SphereQuadrature) -> np.ndarray:
    """Quadrature value of int_{S^{n-1}} Omega dsigma, shape (m,)."""
    if quad.n != symbol.n:
        raise DomainError(f"quadrature for n={quad.n} used with an n={symbol.n} symbol")
    return quad.integrate(symbol.values(quad.nodes))


def boundary_constants(spec: KernelSpec, quad: SphereQuadrature) -> BoundaryConstants:
    """On the unit sphere K~ = Omega, so c[i][j] = int Omega_i(u) u_j dsigma(u)."""
    _require_potential(spec)
    if quad.n != spec.n:
        raise DomainError(f"quadrature for n={quad.n} used with an n={spec.n} kernel")
    values = spec.symbol.values(quad.nodes)
    c = np.einsum("k,ki,kj->ij", quad.weights, values, quad.nodes)
    return BoundaryConstants(c, quad.order)


def grad_zero_mean_residual(spec: KernelSpec, quad: SphereQuadrature) -> float:
    """Largest entry of |int_{S^{n-1}} grad K~ dsigma|; zero for C^1 symbols."""
    _require_potential(spec)
    if quad.n != spec.n:
        raise DomainError(f"quadrature for n={quad.n} used with an n={spec.n} kernel")
    return float(np.max(np.abs(quad.integrate(spec.gradient(quad.nodes)))))
