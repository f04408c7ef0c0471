"""
Discrete convolution with truncated homogeneous kernels.

Kernels are sampled on the lattice of node offsets and multiplied by a
truncation weight that discretises the indicator of {|y| >= t}. Two evaluation
paths share the same samples: a zero-padded real FFT (linear convolution) and
a direct sum used as reference on small grids.
"""

import logging
import math
import os
import threading
from collections import OrderedDict
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy import fft as sfft

from .errors import DomainError
from .grid import Field, Grid
from .kernels import KernelSpec

logger = logging.getLogger(__name__)

THREADS_ENV = "MAXPOT_THREADS"
DEFAULT_RATIO = 2.0 ** 0.25
TRUNCATION_MODES = ("overlap", "center")


def resolve_workers(requested: Optional[int] = None) -> int:
    """Worker count: explicit request, else MAXPOT_THREADS, else all CPUs."""
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            logger.warning("ignoring non-integer %s=%r", THREADS_ENV, env)
    return os.cpu_count() or 1


@dataclass(frozen=True)
class TruncationPolicy:
    """How the indicator of {|y| >= t} is sampled on the offset lattice."""

    mode: str = "overlap"
    subsamples: int = 4

    def __post_init__(self):
        if self.mode not in TRUNCATION_MODES:
            raise DomainError(f"truncation mode must be one of {TRUNCATION_MODES}, got {self.mode!r}")
        if self.mode == "overlap" and self.subsamples < 2:
            raise DomainError(f"overlap weighting needs at least 2 subsamples, got {self.subsamples}")

    @property
    def key(self) -> Tuple[str, int]:
        return (self.mode, self.subsamples if self.mode == "overlap" else 0)


@dataclass(frozen=True)
class RadiusLadder:
    """
    Finite set of truncation radii standing in for sup over t > 0.

    Geometric ladders hold t_min * ratio**k <= t_max. ``explicit`` replaces the
    geometric construction with a given list. ``include_zero`` adds the t -> 0
    limit (the untruncated operator) to the supremum.
    """

    t_min: float
    t_max: float
    ratio: float = DEFAULT_RATIO
    include_zero: bool = False
    explicit: Optional[Tuple[float, ...]] = None
    radii: Tuple[float, ...] = field(init=False)

    def __post_init__(self):
        if self.explicit is not None:
            radii = tuple(sorted(float(t) for t in self.explicit))
            if not radii:
                raise DomainError("radius ladder is empty")
            if radii[0] <= 0.0:
                raise DomainError(f"radii must be positive, got {radii[0]}")
            if any(b <= a for a, b in zip(radii, radii[1:])):
                raise DomainError("radii must be strictly increasing")
        else:
            if not self.ratio > 1.0:
                raise DomainError(f"ladder ratio must exceed 1, got {self.ratio}")
            if not 0.0 < self.t_min <= self.t_max:
                raise DomainError(f"need 0 < t_min <= t_max, got {self.t_min}, {self.t_max}")
            count = int(math.floor(math.log(self.t_max / self.t_min) / math.log(self.ratio) + 1e-9)) + 1
            radii = tuple(self.t_min * self.ratio ** k for k in range(count))
        object.__setattr__(self, "radii", radii)

    @classmethod
    def default(cls, grid: Grid, ratio: float = DEFAULT_RATIO, include_zero: bool = False) -> "RadiusLadder":
        """t_min = h, t_max = box diameter."""
        return cls(grid.h, grid.diameter, ratio, include_zero)

    @classmethod
    def from_radii(cls, radii: Iterable[float], include_zero: bool = False) -> "RadiusLadder":
        radii = tuple(float(t) for t in radii)
        if not radii:
            raise DomainError("radius ladder is empty")
        return cls(min(radii), max(radii), DEFAULT_RATIO, include_zero, explicit=radii)

    def __len__(self) -> int:
        return len(self.radii)

    def __iter__(self):
        return iter(self.radii)

    def validate(self, grid: Grid) -> None:
        if self.radii[0] < grid.h * (1.0 - 1e-12):
            raise DomainError(f"smallest radius {self.radii[0]} is below the grid spacing {grid.h}")

    def describe(self) -> dict:
        return {
            "radii": [float(t) for t in self.radii],
            "include_zero": self.include_zero,
            "ratio": self.ratio if self.explicit is None else None,
        }


def truncation_weights(coords: Sequence[np.ndarray], radius: np.ndarray, h: float,
                       t: float, policy: TruncationPolicy) -> np.ndarray:
    """
    Weight in [0, 1] of each lattice cell in the region {|y| >= t}.

    Args:
        coords: Offset coordinates per axis (broadcastable arrays)
        radius: |offset| on the same lattice
        h: Grid spacing (cell side)
        t: Truncation radius
        policy: Sampling policy

    Returns:
        Array shaped like ``radius``, nondecreasing in |offset| and nonincreasing in t
    """
    if policy.mode == "center":
        return (radius >= t).astype(float)
    n = len(coords)
    delta = 0.5 * h * math.sqrt(n)
    weights = (radius - delta >= t).astype(float)
    band = (radius + delta > t) & (radius - delta < t)
    if np.any(band):
        s = policy.subsamples
        sub = ((np.arange(s) + 0.5) / s - 0.5) * h
        offsets = np.stack(np.meshgrid(*([sub] * n), indexing="ij"), axis=-1).reshape(-1, n)
        centres = np.stack([np.broadcast_to(c, radius.shape)[band] for c in coords], axis=-1)
        points = centres[:, None, :] + offsets[None, :, :]
        outside = np.sqrt(np.sum(points ** 2, axis=-1)) >= t
        weights[band] = outside.mean(axis=1)
    return weights


class ConvolutionEngine:
    """
    Convolution plan for one grid.

    Holds the zero-padded FFT shape, the offset lattice in wrap-around order,
    a bounded cache of truncation weights and kernel transforms, and the
    direct reference path.
    """

    def __init__(self, grid: Grid, workers: Optional[int] = None, cache_size: int = 8):
        self.grid = grid
        self.workers = resolve_workers(workers)
        self.cache_size = cache_size
        self.padded = tuple(sfft.next_fast_len(2 * d, real=True) for d in grid.dims)
        self._axes = tuple(range(1, grid.n + 1))
        self._crop = (slice(None),) + tuple(slice(0, d) for d in grid.dims)
        self._weights: "OrderedDict[tuple, np.ndarray]" = OrderedDict()
        self._spectra: "OrderedDict[tuple, np.ndarray]" = OrderedDict()
        self._lock = threading.Lock()
        self._node_radius = grid.radius()

        fft_offsets = []
        for d, p in zip(grid.dims, self.padded):
            o = np.rint(sfft.fftfreq(p) * p).astype(int)
            fft_offsets.append(o)
        self._fft_lattice = self._lattice(fft_offsets)
        self._fft_valid = np.ones(self.padded, dtype=bool)
        for axis, (o, d) in enumerate(zip(fft_offsets, grid.dims)):
            shape = [1] * grid.n
            shape[axis] = -1
            self._fft_valid &= (np.abs(o) <= d - 1).reshape(shape)
        direct_offsets = [np.arange(-(d - 1), d) for d in grid.dims]
        self._direct_lattice = self._lattice(direct_offsets)
        logger.debug("convolution plan for dims %s: padded %s, %d workers",
                     grid.dims, self.padded, self.workers)

    def _lattice(self, offsets: Sequence[np.ndarray]):
        coords = np.meshgrid(*[o * self.grid.h for o in offsets], indexing="ij", sparse=True)
        radius = np.sqrt(sum(c ** 2 for c in coords))
        return coords, radius

    def _cached(self, cache: OrderedDict, limit: int, key: tuple, build):
        with self._lock:
            if key in cache:
                cache.move_to_end(key)
                return cache[key]
        value = build()
        with self._lock:
            cache[key] = value
            while len(cache) > limit:
                cache.popitem(last=False)
        return value

    def _weights_for(self, lattice, which: str, t: Optional[float], policy: TruncationPolicy) -> np.ndarray:
        coords, radius = lattice
        if t is None:
            return (radius > 0.0).astype(float)
        key = (which, float(t), policy.key)
        return self._cached(self._weights, 4 * self.cache_size, key,
                            lambda: truncation_weights(coords, radius, self.grid.h, t, policy))

    def sample_kernel(self, spec: KernelSpec, t: Optional[float], policy: TruncationPolicy,
                      gradient: bool = False, direct: bool = False) -> np.ndarray:
        """
        Weighted kernel samples times the cell volume.

        Returns shape (m, q, *lattice) with q = n for the pointwise gradient and
        q = 1 otherwise. ``t=None`` gives the untruncated kernel (origin excluded).
        """
        lattice = self._direct_lattice if direct else self._fft_lattice
        coords, radius = lattice
        weights = self._weights_for(lattice, "direct" if direct else "fft", t, policy)
        if not direct:
            weights = weights * self._fft_valid
        active = weights > 0.0
        points = np.stack([np.broadcast_to(c, radius.shape)[active] for c in coords], axis=-1)
        if gradient:
            values = spec.gradient(points)
        else:
            values = spec.evaluate(points)[..., np.newaxis]
        values = values * (weights[active] * self.grid.cell_volume)[:, None, None]
        out = np.zeros(values.shape[1:] + radius.shape)
        out[:, :, active] = np.moveaxis(values, 0, -1)
        return out

    def kernel_spectrum(self, spec: KernelSpec, t: Optional[float], policy: TruncationPolicy,
                        gradient: bool = False) -> np.ndarray:
        key = (spec.cache_key, gradient, None if t is None else float(t), policy.key)

        def build():
            samples = self.sample_kernel(spec, t, policy, gradient=gradient)
            axes = tuple(range(2, self.grid.n + 2))
            return sfft.rfftn(samples, axes=axes, workers=self.workers)

        return self._cached(self._spectra, self.cache_size, key, build)

    def field_spectrum(self, f: Field) -> np.ndarray:
        """Zero-padded transform of every component; reuse it across a ladder."""
        return sfft.rfftn(f.samples, s=self.padded, axes=self._axes, workers=self.workers)

    def gate(self, out: np.ndarray, f: Field, t: Optional[float]) -> np.ndarray:
        """Exact zero where the truncation ball swallows the known support of f."""
        if t is None or f.support_hint is None:
            return out
        delta = 0.5 * self.grid.h * math.sqrt(self.grid.n)
        empty = self._node_radius + f.support_hint < t - delta
        if np.any(empty):
            out[:, empty] = 0.0
        return out

    def apply(self, f: Field, spec: KernelSpec, t: Optional[float], policy: TruncationPolicy,
              gradient: bool = False, method: str = "fft",
              spectrum: Optional[np.ndarray] = None) -> np.ndarray:
        """
        Sum over components of f_i convolved with the (truncated) kernel K_i.

        Returns an array of shape (q, *dims): q = 1 for the kernel itself and
        q = n for its pointwise gradient.
        """
        if f.grid != self.grid:
            raise DomainError("field grid does not match the convolution plan")
        if f.m != spec.m:
            raise DomainError(f"field has {f.m} components, symbol has {spec.m}")
        if t is not None and t < self.grid.h * (1.0 - 1e-12):
            raise DomainError(f"truncation radius {t} is below the grid spacing {self.grid.h}")
        if method == "direct":
            out = self._direct(f, spec, t, policy, gradient)
        elif method == "fft":
            if spectrum is None:
                spectrum = self.field_spectrum(f)
            kernel = self.kernel_spectrum(spec, t, policy, gradient=gradient)
            product = np.einsum("i...,ij...->j...", spectrum, kernel)
            out = sfft.irfftn(product, s=self.padded, axes=self._axes, workers=self.workers)[self._crop]
            out = np.ascontiguousarray(out)
        else:
            raise DomainError(f"unknown convolution method {method!r}")
        return self.gate(out, f, t)

    def _direct(self, f: Field, spec: KernelSpec, t: Optional[float], policy: TruncationPolicy,
                gradient: bool) -> np.ndarray:
        kernel = self.sample_kernel(spec, t, policy, gradient=gradient, direct=True)
        flipped = kernel[(slice(None), slice(None)) + (slice(None, None, -1),) * self.grid.n]
        dims = self.grid.dims
        n = self.grid.n
        field_axes = list(range(n + 1))
        block_axes = [0] + list(range(2, n + 2))
        out = np.zeros((kernel.shape[1],) + dims)
        for node in np.ndindex(*dims):
            window = tuple(slice(d - 1 - x, 2 * d - 1 - x) for x, d in zip(node, dims))
            block = flipped[(slice(None), slice(None)) + window]
            out[(slice(None),) + node] = np.tensordot(f.samples, block, axes=(field_axes, block_axes))
        return out


def get_engine(grid: Grid, workers: Optional[int] = None) -> ConvolutionEngine:
    """Shared convolution plan per grid and resolved worker count."""
    return _shared_engine(grid, resolve_workers(workers))


@lru_cache(maxsize=4)
def _shared_engine(grid: Grid, workers: int) -> ConvolutionEngine:
    return ConvolutionEngine(grid, workers)
