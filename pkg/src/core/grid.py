"""
Regular box discretisation of R^n, sampled fields and the norms used throughout.

Fields live on a box centred at the origin and are extended by zero outside it.
All volume integrals use the midpoint rule (node value times cell volume).
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .errors import DomainError, NumericalError

logger = logging.getLogger(__name__)

MIN_NODES_PER_AXIS = 16
SUPPORTED_DIMENSIONS = (2, 3)


def unit_ball_volume(n: int) -> float:
    """Volume omega_n of the unit ball in R^n (pi for n=2, 4pi/3 for n=3)."""
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


def check_finite(values: np.ndarray, what: str) -> None:
    """Raise NumericalError if ``values`` holds NaN or Inf."""
    if not np.all(np.isfinite(values)):
        bad = int(np.size(values) - np.count_nonzero(np.isfinite(values)))
        raise NumericalError(f"{what}: {bad} non-finite value(s)")


@dataclass(frozen=True)
class Grid:
    """
    Regular grid of ``dims`` nodes per axis with spacing ``h``.

    The box is symmetric about the origin, so node ``k`` on axis ``i`` sits at
    ``origin[i] + k*h`` with ``origin[i] = -h*(dims[i]-1)/2``.
    """

    n: int
    dims: Tuple[int, ...]
    h: float

    def __post_init__(self):
        if self.n not in SUPPORTED_DIMENSIONS:
            raise DomainError(f"dimension must be 2 or 3, got {self.n}")
        dims = tuple(int(d) for d in self.dims)
        if len(dims) != self.n:
            raise DomainError(f"expected {self.n} axis sizes, got {len(dims)}")
        if min(dims) < MIN_NODES_PER_AXIS:
            raise DomainError(
                f"at least {MIN_NODES_PER_AXIS} nodes per axis required, got {dims}"
            )
        if not self.h > 0.0:
            raise DomainError(f"grid spacing must be positive, got {self.h}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "h", float(self.h))

    @classmethod
    def from_box(cls, n: int, res: int, half_width: float = 2.0) -> "Grid":
        """Grid with ``res`` cells per axis on [-half_width, half_width]^n."""
        if res < MIN_NODES_PER_AXIS - 1:
            raise DomainError(f"resolution {res} gives fewer than {MIN_NODES_PER_AXIS} nodes")
        if not half_width > 0.0:
            raise DomainError(f"half width must be positive, got {half_width}")
        return cls(n, (res + 1,) * n, 2.0 * half_width / res)

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.dims

    @property
    def size(self) -> int:
        return int(np.prod(self.dims))

    @property
    def origin(self) -> np.ndarray:
        return -self.h * (np.asarray(self.dims, dtype=float) - 1.0) / 2.0

    @property
    def half_widths(self) -> np.ndarray:
        return -self.origin

    @property
    def cell_volume(self) -> float:
        return self.h ** self.n

    @property
    def omega_n(self) -> float:
        return unit_ball_volume(self.n)

    @property
    def sphere_area(self) -> float:
        """Surface area n*omega_n of the unit sphere S^{n-1}."""
        return self.n * self.omega_n

    @property
    def diameter(self) -> float:
        return float(2.0 * np.linalg.norm(self.half_widths))

    @property
    def equivalent_radius(self) -> float:
        """Radius r_h of the ball with the volume of one cell."""
        return (self.cell_volume / self.omega_n) ** (1.0 / self.n)

    def axes(self) -> Sequence[np.ndarray]:
        origin = self.origin
        return [origin[i] + self.h * np.arange(d) for i, d in enumerate(self.dims)]

    def coordinates(self) -> np.ndarray:
        """Node coordinates as an array of shape (n, *dims)."""
        return np.stack(np.meshgrid(*self.axes(), indexing="ij"))

    def radius(self) -> np.ndarray:
        return np.sqrt(np.sum(self.coordinates() ** 2, axis=0))

    def refined(self) -> "Grid":
        """Same box with half the spacing."""
        return Grid(self.n, tuple(2 * (d - 1) + 1 for d in self.dims), self.h / 2.0)

    def node_index(self, point: Sequence[float]) -> Tuple[int, ...]:
        """Index of the node nearest to ``point``."""
        point = np.asarray(point, dtype=float)
        idx = np.rint((point - self.origin) / self.h).astype(int)
        return tuple(int(np.clip(i, 0, d - 1)) for i, d in zip(idx, self.dims))

    def interior_mask(self, margin: int = 1) -> np.ndarray:
        mask = np.zeros(self.dims, dtype=bool)
        mask[tuple(slice(margin, d - margin) for d in self.dims)] = True
        return mask

    def describe(self) -> Dict[str, object]:
        return {
            "n": self.n,
            "dims": list(self.dims),
            "h": self.h,
            "origin": [float(o) for o in self.origin],
        }


@dataclass(frozen=True, eq=False)
class Field:
    """
    Samples of a (possibly vector valued) function at the grid nodes.

    ``samples`` has shape (m, *grid.dims). ``support_hint`` is a radius about
    the origin outside which every sample is zero, when known.
    """

    grid: Grid
    samples: np.ndarray
    support_hint: Optional[float] = None
    provenance: Optional[str] = None
    smooth: Optional[bool] = None

    def __post_init__(self):
        samples = np.array(self.samples, dtype=np.float64, order="C", copy=True)
        if samples.shape == self.grid.dims:
            samples = samples[np.newaxis]
        if samples.ndim != self.grid.n + 1 or samples.shape[1:] != self.grid.dims:
            raise DomainError(
                f"samples of shape {samples.shape} do not fit grid dims {self.grid.dims}"
            )
        check_finite(samples, "field samples")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @classmethod
    def from_function(
        cls, grid: Grid, fn: Callable[[np.ndarray], np.ndarray], **kwargs
    ) -> "Field":
        """Sample ``fn`` (called with coordinates of shape (n, *dims))."""
        return cls(grid, fn(grid.coordinates()), **kwargs)

    @property
    def m(self) -> int:
        return self.samples.shape[0]

    def magnitude(self) -> np.ndarray:
        """Pointwise Euclidean norm across components."""
        if self.m == 1:
            return np.abs(self.samples[0])
        return np.sqrt(np.sum(self.samples ** 2, axis=0))

    def abs(self) -> "Field":
        return Field(self.grid, self.magnitude(), support_hint=self.support_hint)

    def _merged_hint(self, other: "Field") -> Optional[float]:
        if self.support_hint is None or other.support_hint is None:
            return None
        return max(self.support_hint, other.support_hint)

    def __add__(self, other: "Field") -> "Field":
        if other.grid != self.grid or other.m != self.m:
            raise DomainError("fields live on different grids or component counts")
        return Field(self.grid, self.samples + other.samples, support_hint=self._merged_hint(other))

    def __sub__(self, other: "Field") -> "Field":
        return self + (-1.0) * other

    def __mul__(self, scale: float) -> "Field":
        return Field(self.grid, float(scale) * self.samples, support_hint=self.support_hint,
                     provenance=self.provenance, smooth=self.smooth)

    __rmul__ = __mul__

    def __neg__(self) -> "Field":
        return (-1.0) * self


@dataclass(frozen=True)
class NormSettings:
    """Exponent p in (1, n) and its Sobolev conjugate p* = np/(n-p)."""

    p: float
    n: int
    p_star: float = field(init=False)

    def __post_init__(self):
        if self.n not in SUPPORTED_DIMENSIONS:
            raise DomainError(f"dimension must be 2 or 3, got {self.n}")
        if not 1.0 < self.p < self.n:
            raise DomainError(f"p must lie in (1, {self.n}), got {self.p}")
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "p_star", self.n * self.p / (self.n - self.p))

    @property
    def theorem_range(self) -> bool:
        """True when n/(n-1) < p < n, where maximal potentials are known bounded."""
        return self.p > self.n / (self.n - 1.0)


def lp_norm(f: Field, p: float) -> float:
    """Midpoint-rule L^p norm of |f| (Euclidean across components); p=inf is the max norm."""
    if p < 1.0:
        raise DomainError(f"p must be >= 1, got {p}")
    mag = f.magnitude()
    if math.isinf(p):
        return float(np.max(mag))
    total = np.sum(np.ascontiguousarray(mag ** p)) * f.grid.cell_volume
    return float(total ** (1.0 / p))


def fd_gradient(f: Field) -> Field:
    """Central differences in the interior, one-sided at the box faces."""
    if f.m != 1:
        raise DomainError(f"fd_gradient needs a scalar field, got {f.m} components")
    values = f.samples[0]
    parts = [np.gradient(values, f.grid.h, axis=k, edge_order=1) for k in range(f.grid.n)]
    return Field(f.grid, np.stack(parts), smooth=f.smooth)


def zero_extension_gradient(f: Field) -> Field:
    """
    Discrete distributional gradient of the zero-extended field.

    Central differences with zero padding, plus the jump layer on the box
    faces; the result sums to zero along every grid line.
    """
    if f.m != 1:
        raise DomainError(f"zero_extension_gradient needs a scalar field, got {f.m} components")
    values = f.samples[0]
    h = f.grid.h
    padded = np.pad(values, 1)
    inner = tuple(slice(1, -1) for _ in range(f.grid.n))
    parts = []
    for k in range(f.grid.n):
        grad = np.gradient(padded, h, axis=k)[inner].copy()
        low = [slice(None)] * f.grid.n
        high = [slice(None)] * f.grid.n
        low[k] = 0
        high[k] = -1
        grad[tuple(low)] += values[tuple(low)] / (2.0 * h)
        grad[tuple(high)] -= values[tuple(high)] / (2.0 * h)
        parts.append(grad)
    return Field(f.grid, np.stack(parts), smooth=f.smooth)


def _interpolator(f: Field) -> RegularGridInterpolator:
    values = np.moveaxis(f.samples, 0, -1)
    return RegularGridInterpolator(
        tuple(f.grid.axes()), values, method="linear", bounds_error=False, fill_value=0.0
    )


def interpolate_points(f: Field, points: np.ndarray) -> np.ndarray:
    """Multilinear interpolation at ``points`` of shape (N, n); zero outside the box."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[-1] != f.grid.n:
        raise DomainError(f"points must have {f.grid.n} coordinates")
    return _interpolator(f)(points)


def interpolate(f: Field, x: Sequence[float]) -> np.ndarray:
    """Multilinear interpolation of all m components at a single point."""
    return interpolate_points(f, np.asarray(x, dtype=float)[np.newaxis])[0]


def sobolev_seminorm_pair(f: Field, settings: NormSettings) -> Tuple[float, float]:
    """Return (||f||_{p*}, ||grad f||_p); their sum is the homogeneous W^{1,p} norm."""
    if settings.n != f.grid.n:
        raise DomainError(f"norm settings for n={settings.n} used on an n={f.grid.n} grid")
    return lp_norm(f, settings.p_star), lp_norm(fd_gradient(f), settings.p)
