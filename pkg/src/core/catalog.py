"""
Catalog of sampled test functions.

Every entry evaluates an analytic formula at the grid nodes. Entries record
whether they are smooth (usable with finite-difference gradients) and, when the
function has compact support, a radius about the origin containing it.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Mapping, Optional

import numpy as np

from .errors import CatalogError
from .grid import Field, Grid

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CatalogEntry:
    """A named function family with default parameters."""

    name: str
    evaluate: Callable[[np.ndarray, Dict[str, object], Grid], np.ndarray]
    defaults: Dict[str, object]
    smooth: bool
    support: Optional[Callable[[Dict[str, object], int], Optional[float]]] = None


def _center(params: Mapping[str, object], n: int) -> np.ndarray:
    center = params.get("center")
    if center is None:
        return np.zeros(n)
    center = np.asarray(center, dtype=float).ravel()
    if center.size != n:
        raise CatalogError(f"center must have {n} coordinates, got {center.size}")
    return center


def _shifted_radius(coords: np.ndarray, params: Mapping[str, object]) -> np.ndarray:
    c = _center(params, coords.shape[0])
    shifted = coords - c.reshape((-1,) + (1,) * (coords.ndim - 1))
    return np.sqrt(np.sum(shifted ** 2, axis=0))


def _positive(params: Mapping[str, object], key: str) -> float:
    value = float(params[key])
    if not value > 0.0:
        raise CatalogError(f"parameter {key} must be positive, got {value}")
    return value


def bump_profile(r: np.ndarray, radius: float, inner: float) -> np.ndarray:
    """C-infinity profile: 1 on |x| <= inner, 0 for |x| >= radius."""
    out = np.zeros_like(r)
    if inner <= 0.0:
        inside = r < radius
        s = (r[inside] / radius) ** 2
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - s))
        return out
    out[r <= inner] = 1.0
    band = (r > inner) & (r < radius)
    s = (r[band] - inner) / (radius - inner)
    rise = np.exp(-1.0 / (1.0 - s))
    fall = np.exp(-1.0 / s)
    out[band] = rise / (rise + fall)
    return out


def _gaussian(coords, params, grid):
    sigma = _positive(params, "sigma")
    r = _shifted_radius(coords, params)
    return float(params["amplitude"]) * np.exp(-(r / sigma) ** 2)


def _ball_indicator(coords, params, grid):
    radius = _positive(params, "radius")
    return (_shifted_radius(coords, params) < radius).astype(float)


def _smooth_bump(coords, params, grid):
    radius = _positive(params, "radius")
    inner = float(params["inner"])
    if not 0.0 <= inner < radius:
        raise CatalogError(f"inner radius must lie in [0, radius), got {inner}")
    return float(params["amplitude"]) * bump_profile(_shifted_radius(coords, params), radius, inner)


def _gaussian_bump(coords, params, grid):
    radius = _positive(params, "radius")
    gauss = _gaussian(coords, params, grid)
    r0 = np.sqrt(np.sum(coords ** 2, axis=0))
    return gauss * bump_profile(r0, radius, 0.0)


def _truncated_power(coords, params, grid):
    a = float(params["a"])
    n = coords.shape[0]
    if not 0.0 <= a < n:
        raise CatalogError(f"power exponent must lie in [0, {n}), got {a}")
    radius = _positive(params, "radius")
    r = np.sqrt(np.sum(coords ** 2, axis=0))
    clipped = np.maximum(r, grid.h)
    return np.where(r <= radius, clipped ** (-a), 0.0)


def _half_space(coords, params, grid):
    axis = int(params["axis"])
    if not 0 <= axis < coords.shape[0]:
        raise CatalogError(f"axis must lie in [0, {coords.shape[0]}), got {axis}")
    return (coords[axis] > float(params["offset"])).astype(float)


def _random_bandlimited(coords, params, grid):
    n = coords.shape[0]
    modes = int(params["modes"])
    if modes < 1:
        raise CatalogError(f"modes must be >= 1, got {modes}")
    kmax = _positive(params, "kmax")
    radius = _positive(params, "radius")
    rng = np.random.default_rng(int(params["seed"]))
    wavevectors = rng.uniform(-kmax, kmax, size=(modes, n))
    phases = rng.uniform(0.0, 2.0 * np.pi, size=modes)
    amplitudes = rng.standard_normal(modes)
    total = np.zeros(coords.shape[1:])
    for k, phi, amp in zip(wavevectors, phases, amplitudes):
        total += amp * np.cos(np.tensordot(k, coords, axes=1) + phi)
    window = bump_profile(np.sqrt(np.sum(coords ** 2, axis=0)), radius, 0.0)
    return window * total / np.sqrt(modes)


def _affine(coords, params, grid):
    n = coords.shape[0]
    coeffs = np.asarray(params["coeffs"] if params["coeffs"] is not None else np.ones(n), dtype=float)
    if coeffs.size != n:
        raise CatalogError(f"coeffs must have {n} entries, got {coeffs.size}")
    return float(params["offset"]) + np.tensordot(coeffs, coords, axes=1)


def _centred_support(key: str):
    def support(params: Dict[str, object], n: int) -> float:
        return float(np.linalg.norm(_center(params, n))) + float(params[key])
    return support


def _origin_support(key: str):
    def support(params: Dict[str, object], n: int) -> float:
        return float(params[key])
    return support


FUNCTION_CATALOG: Dict[str, CatalogEntry] = {
    "gaussian": CatalogEntry(
        "gaussian", _gaussian, {"sigma": 1.0, "amplitude": 1.0, "center": None}, smooth=True
    ),
    "ball_indicator": CatalogEntry(
        "ball_indicator", _ball_indicator, {"radius": 1.0, "center": None}, smooth=False,
        support=_centred_support("radius"),
    ),
    "smooth_bump": CatalogEntry(
        "smooth_bump", _smooth_bump,
        {"radius": 1.0, "inner": 0.0, "amplitude": 1.0, "center": None}, smooth=True,
        support=_centred_support("radius"),
    ),
    "gaussian_bump": CatalogEntry(
        "gaussian_bump", _gaussian_bump,
        {"sigma": 0.5, "amplitude": 1.0, "center": None, "radius": 1.5}, smooth=True,
        support=_origin_support("radius"),
    ),
    "truncated_power": CatalogEntry(
        "truncated_power", _truncated_power, {"a": 0.5, "radius": 1.5}, smooth=False,
        support=_origin_support("radius"),
    ),
    "half_space": CatalogEntry(
        "half_space", _half_space, {"axis": 0, "offset": 0.0}, smooth=False
    ),
    "random_bandlimited": CatalogEntry(
        "random_bandlimited", _random_bandlimited,
        {"seed": 0, "modes": 6, "kmax": 3.0, "radius": 1.5}, smooth=True,
        support=_origin_support("radius"),
    ),
    "affine": CatalogEntry(
        "affine", _affine, {"coeffs": None, "offset": 0.0}, smooth=True
    ),
}


def resolve_params(name: str, params: Optional[Mapping[str, object]] = None) -> Dict[str, object]:
    """Merge ``params`` over the catalog defaults, rejecting unknown keys."""
    if name not in FUNCTION_CATALOG:
        raise CatalogError(
            f"unknown catalog function '{name}' (known: {', '.join(sorted(FUNCTION_CATALOG))})"
        )
    entry = FUNCTION_CATALOG[name]
    merged = dict(entry.defaults)
    for key, value in (params or {}).items():
        if key not in merged:
            raise CatalogError(f"unknown parameter '{key}' for catalog function '{name}'")
        merged[key] = value
    return merged


def sample_catalog(name: str, params: Optional[Mapping[str, object]], grid: Grid) -> Field:
    """
    Sample catalog function ``name`` at the nodes of ``grid``.

    Args:
        name: Catalog id (see FUNCTION_CATALOG)
        params: Parameter overrides; missing keys take the catalog defaults
        grid: Target grid

    Returns:
        Scalar Field carrying provenance, smoothness and support information
    """
    merged = resolve_params(name, params)
    entry = FUNCTION_CATALOG[name]
    values = entry.evaluate(grid.coordinates(), merged, grid)
    support = entry.support(merged, grid.n) if entry.support else None
    logger.debug("sampled %s with %s on dims %s", name, merged, grid.dims)
    return Field(grid, values, support_hint=support, provenance=name, smooth=entry.smooth)
