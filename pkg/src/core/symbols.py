"""
Symbols Omega on the unit sphere and their catalog.

A symbol maps directions u in S^{n-1} to R^m. Each catalog symbol also knows
the gradient of its degree-0 extension x -> Omega(x/|x|) away from the origin,
which gives analytic kernel gradients.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Mapping, Optional, Tuple

import numpy as np

from .errors import CatalogError, DomainError
from .sphere import sphere_quadrature

logger = logging.getLogger(__name__)

CHECK_ORDER = 64
SUP_TOLERANCE = 1e-12


def _directions(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    r = np.sqrt(np.sum(x ** 2, axis=-1, keepdims=True))
    if np.any(r == 0.0):
        raise DomainError("symbols are not defined at the origin")
    return x / r, r


@dataclass(frozen=True, eq=False)
class SphereSymbol:
    """
    Symbol Omega: S^{n-1} -> R^m.

    ``values`` receives unit vectors of shape (..., n) and returns (..., m).
    ``extension_gradient`` (optional) receives unit vectors and radii and
    returns the gradient of x -> Omega(x/|x|) with shape (..., m, n).
    """

    n: int
    m: int
    catalog_id: str
    params: Tuple[Tuple[str, object], ...]
    sup_norm_bound: float
    values: Callable[[np.ndarray], np.ndarray]
    extension_gradient: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        quad = sphere_quadrature(self.n, CHECK_ORDER)
        largest = float(np.max(np.linalg.norm(self.values(quad.nodes), axis=-1)))
        if largest > self.sup_norm_bound * (1.0 + SUP_TOLERANCE):
            raise CatalogError(
                f"symbol {self.catalog_id}: sup bound {self.sup_norm_bound} below sampled max {largest}"
            )

    @property
    def cache_key(self) -> Tuple[object, ...]:
        return (self.catalog_id, self.n, self.params)

    @property
    def has_grad_extension(self) -> bool:
        return self.extension_gradient is not None

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """Omega(x/|x|) for nonzero points of shape (..., n)."""
        u, _ = _directions(x)
        return self.values(u)

    def grad_extension(self, x: np.ndarray) -> np.ndarray:
        """Gradient of x -> Omega(x/|x|), shape (..., m, n)."""
        if self.extension_gradient is None:
            raise DomainError(f"symbol {self.catalog_id} has no analytic gradient")
        u, r = _directions(x)
        return self.extension_gradient(u, r)


def _tangent(u: np.ndarray, j: int) -> np.ndarray:
    """Gradient of x_j/|x| at radius 1: e_j - u_j u."""
    e = np.zeros(u.shape[-1])
    e[j] = 1.0
    return e - u[..., j:j + 1] * u


def _one(n: int, params: Dict[str, object]) -> SphereSymbol:
    return SphereSymbol(
        n, 1, "one", (), 1.0,
        lambda u: np.ones(u.shape[:-1] + (1,)),
        lambda u, r: np.zeros(u.shape[:-1] + (1, n)),
    )


def _identity(n: int, params: Dict[str, object]) -> SphereSymbol:
    def grad(u, r):
        eye = np.eye(n)
        return (eye - u[..., :, None] * u[..., None, :]) / r[..., None]

    return SphereSymbol(n, n, "identity", (), 1.0, lambda u: u.copy(), grad)


def _coordinate(n: int, params: Dict[str, object]) -> SphereSymbol:
    j = int(params.get("j", 0))
    if not 0 <= j < n:
        raise CatalogError(f"coordinate index j must lie in [0, {n}), got {j}")
    return SphereSymbol(
        n, 1, "coordinate", (("j", j),), 1.0,
        lambda u: u[..., j:j + 1].copy(),
        lambda u, r: (_tangent(u, j) / r)[..., None, :],
    )


def _quadrupole(n: int, params: Dict[str, object]) -> SphereSymbol:
    def values(u):
        return (u[..., 0:1] ** 2 - u[..., 1:2] ** 2)

    def grad(u, r):
        g = u[..., 0:1] * _tangent(u, 0) - u[..., 1:2] * _tangent(u, 1)
        return (2.0 * g / r)[..., None, :]

    return SphereSymbol(n, 1, "quadrupole", (), 1.0, values, grad)


def _exp_mean_zero(n: int, params: Dict[str, object]) -> SphereSymbol:
    j = int(params.get("j", 0))
    if not 0 <= j < n:
        raise CatalogError(f"coordinate index j must lie in [0, {n}), got {j}")
    quad = sphere_quadrature(n, CHECK_ORDER)
    mean = float(quad.integrate(np.exp(quad.nodes[:, j])) / np.sum(quad.weights))
    bound = max(np.e - mean, mean - np.exp(-1.0))

    def values(u):
        return np.exp(u[..., j:j + 1]) - mean

    def grad(u, r):
        return (np.exp(u[..., j:j + 1]) * _tangent(u, j) / r)[..., None, :]

    return SphereSymbol(n, 1, "exp_mean_zero", (("j", j),), bound, values, grad)


SYMBOL_CATALOG: Dict[str, Callable[[int, Dict[str, object]], SphereSymbol]] = {
    "one": _one,
    "identity": _identity,
    "coordinate": _coordinate,
    "quadrupole": _quadrupole,
    "exp_mean_zero": _exp_mean_zero,
}

ZERO_MEAN_SYMBOLS = ("coordinate", "quadrupole", "exp_mean_zero")


def create_symbol(catalog_id: str = "one", n: int = 2,
                  params: Optional[Mapping[str, object]] = None) -> SphereSymbol:
    """
    Factory for catalog symbols.

    Args:
        catalog_id: One of SYMBOL_CATALOG
        n: Dimension (2 or 3)
        params: Optional parameters (``j`` for coordinate and exp_mean_zero)

    Returns:
        Configured SphereSymbol
    """
    if catalog_id not in SYMBOL_CATALOG:
        raise CatalogError(
            f"unknown symbol '{catalog_id}' (known: {', '.join(sorted(SYMBOL_CATALOG))})"
        )
    if n not in (2, 3):
        raise DomainError(f"dimension must be 2 or 3, got {n}")
    return SYMBOL_CATALOG[catalog_id](n, dict(params or {}))
