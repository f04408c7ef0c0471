"""
Sphere-supported operators: the surface measure term of the truncated kernel
gradient, spherical averages and the spherical maximal function.

Values of f at x +- t*u are obtained by shifting the whole sample array with
linear interpolation, one shift per quadrature node.
"""

import logging
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy import ndimage
from tqdm import tqdm

from .convolution import RadiusLadder
from .errors import DomainError
from .grid import Field, Grid, check_finite
from .sphere import SphereQuadrature, sphere_quadrature
from .symbols import SphereSymbol

logger = logging.getLogger(__name__)

DEFAULT_ORDER = 64


@lru_cache(maxsize=8)
def default_quadrature(n: int, order: int = DEFAULT_ORDER) -> SphereQuadrature:
    return sphere_quadrature(n, order)


def _resolve_quadrature(grid: Grid, quad: Optional[SphereQuadrature]) -> SphereQuadrature:
    quad = quad or default_quadrature(grid.n)
    if quad.n != grid.n:
        raise DomainError(f"quadrature for n={quad.n} used on an n={grid.n} grid")
    return quad


def _check_radius(grid: Grid, t: float) -> None:
    if t < grid.h * (1.0 - 1e-12):
        raise DomainError(f"radius {t} is below the grid spacing {grid.h}")
    if t > float(np.min(grid.half_widths)):
        logger.warning("sphere of radius %.4g leaves the box; samples outside count as zero", t)


def _shifted(values: np.ndarray, displacement: np.ndarray, h: float) -> np.ndarray:
    """Array whose value at node x is values interpolated at x - displacement."""
    return ndimage.shift(values, displacement / h, order=1, mode="constant", cval=0.0, prefilter=False)


def surface_convolution(f: Field, symbol: SphereSymbol, t: float,
                        quad: Optional[SphereQuadrature] = None) -> Field:
    """
    Convolution of f with the sphere measure K~(y) y/|y| dsigma on |y| = t.

    Args:
        f: Field with symbol.m components
        symbol: Symbol of the potential kernel
        t: Sphere radius
        quad: Unit-sphere quadrature (default order 64)

    Returns:
        Field with n components: sum_k w_k sum_i f_i(x - t u_k) Omega_i(u_k) u_k
    """
    grid = f.grid
    if f.m != symbol.m:
        raise DomainError(f"field has {f.m} components, symbol has {symbol.m}")
    quad = _resolve_quadrature(grid, quad)
    _check_radius(grid, t)
    omega = symbol.values(quad.nodes)
    out = np.zeros((grid.n,) + grid.dims)
    for u, w, coeffs in zip(quad.nodes, quad.weights, omega):
        combined = np.tensordot(coeffs, f.samples, axes=1)
        shifted = _shifted(combined, t * u, grid.h)
        for j in range(grid.n):
            out[j] += (w * u[j]) * shifted
    check_finite(out, "surface convolution")
    return Field(grid, out)


def spherical_average(f: Field, t: float, quad: Optional[SphereQuadrature] = None) -> Field:
    """Mean of f over the sphere S(x, t) at every node."""
    grid = f.grid
    if f.m != 1:
        raise DomainError(f"spherical averages need a scalar field, got {f.m} components")
    quad = _resolve_quadrature(grid, quad)
    _check_radius(grid, t)
    values = f.samples[0]
    total = np.zeros(grid.dims)
    for u, w in zip(quad.nodes, quad.weights):
        total += w * _shifted(values, -t * u, grid.h)
    out = total / grid.sphere_area
    check_finite(out, "spherical average")
    return Field(grid, out)


def spherical_maximal(f: Field, ladder: RadiusLadder, quad: Optional[SphereQuadrature] = None,
                      use_abs: bool = True, progress: bool = False) -> Field:
    """
    Maximum of spherical averages over the ladder.

    ``use_abs=True`` averages |f|; ``use_abs=False`` takes |average of f|, the
    signed variant matched by the gradient representation.
    """
    ladder.validate(f.grid)
    source = f.abs() if use_abs else f
    best = np.zeros(f.grid.dims)
    if ladder.include_zero:
        best = np.abs(source.samples[0]).copy()
    for t in tqdm(ladder.radii, desc="spherical maximal", disable=not progress):
        average = spherical_average(source, t, quad).samples[0]
        np.maximum(best, np.abs(average), out=best)
    logger.debug("spherical maximal over %d radii (use_abs=%s)", len(ladder), use_abs)
    return Field(f.grid, best)
