"""
Grid refinement studies against closed-form values.

Each registered (operator, function) pair evaluates the operator on a box grid
at a fixed point and compares with its analytic value.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import erfc

from ..core.catalog import sample_catalog
from ..core.errors import OracleError
from ..core.grid import Grid, interpolate
from ..core.kernels import KernelSpec
from ..core.operators import riesz_potential, truncated_potential
from ..core.sphere import sphere_quadrature
from ..core.spherical import spherical_average, surface_convolution
from ..core.symbols import create_symbol

logger = logging.getLogger(__name__)

HALF_WIDTH = 2.0
ERROR_FLOOR = 1e-13


@dataclass(frozen=True)
class Oracle:
    """Numerical value at a point on a grid, and the exact value it should approach."""

    description: str
    exact: Tuple[float, ...]
    evaluate: Callable[[Grid], np.ndarray]


def _at_origin(field_values) -> np.ndarray:
    grid = field_values.grid
    index = grid.node_index(np.zeros(grid.n))
    return np.asarray(field_values.samples[(slice(None),) + index], dtype=float)


def _truncated_ball(grid: Grid) -> np.ndarray:
    spec = KernelSpec.potential(create_symbol("one", grid.n))
    f = sample_catalog("ball_indicator", {"radius": 1.0}, grid)
    return _at_origin(truncated_potential(f, spec, 0.5))


GAUSS_SIGMA = 0.5
GAUSS_T = 0.5


def _truncated_gaussian(grid: Grid) -> np.ndarray:
    spec = KernelSpec.potential(create_symbol("one", grid.n))
    f = sample_catalog("gaussian", {"sigma": GAUSS_SIGMA}, grid)
    return _at_origin(truncated_potential(f, spec, GAUSS_T))


def _riesz_ball(grid: Grid) -> np.ndarray:
    f = sample_catalog("ball_indicator", {"radius": 1.0}, grid)
    return _at_origin(riesz_potential(f))


def _average_gaussian(grid: Grid) -> np.ndarray:
    f = sample_catalog("gaussian", {"sigma": 1.0}, grid)
    return _at_origin(spherical_average(f, 1.0, sphere_quadrature(grid.n, 256)))


def _surface_half_space(grid: Grid) -> np.ndarray:
    f = sample_catalog("half_space", {"axis": 0, "offset": 0.0}, grid)
    return _at_origin(surface_convolution(f, create_symbol("one", grid.n), 1.0,
                                          sphere_quadrature(grid.n, 256)))


AFFINE = {"coeffs": (0.7, -1.3), "offset": 0.25}
AFFINE_POINT = (0.123, -0.456)


def _interpolate_affine(grid: Grid) -> np.ndarray:
    f = sample_catalog("affine", AFFINE, grid)
    return interpolate(f, AFFINE_POINT)


ORACLES: Dict[Tuple[str, str], Oracle] = {
    ("truncated_potential", "ball_indicator"): Oracle(
        "Omega=1, unit disk, t=0.5 at the origin", (math.pi,), _truncated_ball),
    ("truncated_potential", "gaussian"): Oracle(
        "Omega=1, gaussian sigma=0.5, t=0.5 at the origin",
        (math.pi ** 1.5 * GAUSS_SIGMA * float(erfc(GAUSS_T / GAUSS_SIGMA)),), _truncated_gaussian),
    ("riesz_potential", "ball_indicator"): Oracle(
        "unit disk at the origin", (2.0 * math.pi,), _riesz_ball),
    ("spherical_average", "gaussian"): Oracle(
        "gaussian sigma=1, t=1 at the origin", (math.exp(-1.0),), _average_gaussian),
    ("surface_convolution", "half_space"): Oracle(
        "Omega=1, half space x1>0, t=1 at the origin", (-2.0, 0.0), _surface_half_space),
    ("interpolate", "affine"): Oracle(
        "affine function at an off-node point",
        (AFFINE["offset"] + sum(c * x for c, x in zip(AFFINE["coeffs"], AFFINE_POINT)),),
        _interpolate_affine),
}


@dataclass
class RefinementRow:
    res: int
    h: float
    value: List[float]
    error: float
    order: Optional[float]


@dataclass
class RefinementTable:
    op: str
    function: str
    exact: List[float]
    rows: List[RefinementRow] = field(default_factory=list)
    fitted_order: Optional[float] = None

    def to_dict(self) -> Dict[str, object]:
        return {
            "op": self.op,
            "function": self.function,
            "exact": self.exact,
            "fitted_order": self.fitted_order,
            "rows": [vars(row) for row in self.rows],
        }


def _order(coarse: Tuple[float, float], fine: Tuple[float, float]) -> Optional[float]:
    (h1, e1), (h2, e2) = coarse, fine
    if e1 <= ERROR_FLOOR or e2 <= ERROR_FLOOR:
        return None
    return math.log(e1 / e2) / math.log(h1 / h2)


def refinement_study(op: str, function: str, resolutions: Sequence[int],
                     n: int = 2, half_width: float = HALF_WIDTH) -> RefinementTable:
    """
    Errors against the registered oracle for increasing resolutions.

    Args:
        op: Operator id
        function: Catalog function id
        resolutions: Cells per axis on [-half_width, half_width]^n, increasing
        n: Dimension; the oracles are planar

    Returns:
        RefinementTable with successive log2 orders and a least-squares order
    """
    key = (op, function)
    if key not in ORACLES:
        known = ", ".join(f"{o}/{f}" for o, f in sorted(ORACLES))
        raise OracleError(f"no oracle registered for {op}/{function} (known: {known})")
    if n != 2:
        raise OracleError(f"oracles are registered for n=2 only, got n={n}")
    oracle = ORACLES[key]
    exact = np.asarray(oracle.exact)
    table = RefinementTable(op, function, [float(v) for v in exact])
    previous = None
    for res in sorted(resolutions):
        grid = Grid.from_box(n, res, half_width)
        value = np.atleast_1d(oracle.evaluate(grid))
        error = float(np.linalg.norm(value - exact))
        order = _order(previous, (grid.h, error)) if previous else None
        table.rows.append(RefinementRow(res, grid.h, [float(v) for v in value], error, order))
        logger.info("%s/%s res=%d h=%.4g error=%.3e", op, function, res, grid.h, error)
        previous = (grid.h, error)

    usable = [(row.h, row.error) for row in table.rows if row.error > ERROR_FLOOR]
    if len(usable) >= 2:
        hs, errors = zip(*usable)
        table.fitted_order = float(np.polyfit(np.log(hs), np.log(errors), 1)[0])
    return table
