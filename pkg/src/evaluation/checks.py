"""
Verification of the exact identities and pointwise inequalities satisfied by
the operators: spherical-average representation, distributional gradient of
the potential kernel, domination by the Riesz potential and the gradient bound
of the maximal potential.
"""

import logging
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.integrate import quad as quad_1d

from ..core.catalog import bump_profile
from ..core.convolution import ConvolutionEngine, RadiusLadder, TruncationPolicy, truncation_weights
from ..core.errors import DomainError
from ..core.grid import Field, fd_gradient, unit_ball_volume, zero_extension_gradient
from ..core.kernels import (
    KernelSpec,
    boundary_constants,
    grad_zero_mean_residual,
    symbol_integral,
)
from ..core.operators import (
    DEFAULT_POLICY,
    grad_majorant,
    maximal_potential,
    riesz_potential,
    truncated_potential,
)
from ..core.sphere import SphereQuadrature, sphere_quadrature
from ..core.spherical import default_quadrature, spherical_average
from ..core.symbols import ZERO_MEAN_SYMBOLS, create_symbol

logger = logging.getLogger(__name__)

SEGMENT_SPANS = (1, 4, 16)


@dataclass
class CheckReport:
    """Outcome of one verification run."""

    name: str
    passed: bool
    max_residual: float
    mean_residual: float
    violation_fraction: float
    tolerances: Dict[str, float]
    metadata: Dict[str, object] = field(default_factory=dict)
    details: Dict[str, object] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)

    def summary_row(self) -> Dict[str, object]:
        return {
            "check": self.name,
            "grid": "x".join(str(d) for d in self.metadata.get("grid", {}).get("dims", [])),
            "ladder": len(self.metadata.get("ladder", {}).get("radii", [])),
            "max_residual": self.max_residual,
            "violation_fraction": self.violation_fraction,
            "pass": self.passed,
        }


def _finish(report: CheckReport) -> CheckReport:
    level = logging.INFO if report.passed else logging.WARNING
    logger.log(level, "%s: %s (max residual %.3e, violations %.2f%%)", report.name,
               "pass" if report.passed else "FAIL", report.max_residual,
               100.0 * report.violation_fraction)
    return report


def verify_representation(f: Field, radii: Sequence[float], tol: float = 2e-2,
                          quad: Optional[SphereQuadrature] = None,
                          policy: Optional[TruncationPolicy] = None,
                          engine: Optional[ConvolutionEngine] = None) -> CheckReport:
    """
    Compare spherical averages of f with their gradient representation
    (1/(n omega_n)) * integral over |x - z| >= t of grad f(z) . (x - z)/|x - z|^n dz.

    Only nodes whose sphere S(x, t) lies inside the box are compared.
    Residuals are relative to max|f|.
    """
    if f.m != 1:
        raise DomainError(f"representation check needs a scalar field, got {f.m} components")
    if f.smooth is False:
        raise DomainError(f"representation check needs a smooth field, got {f.provenance}")
    grid = f.grid
    scale = float(np.max(np.abs(f.samples)))
    spec = KernelSpec.potential(create_symbol("identity", grid.n))
    grad = zero_extension_gradient(f)
    coords = np.abs(grid.coordinates())
    half = grid.half_widths.reshape((-1,) + (1,) * grid.n)

    per_radius = []
    residuals: List[np.ndarray] = []
    for t in radii:
        inside = np.all(coords + t <= half + 1e-12, axis=0)
        if not np.any(inside):
            logger.warning("no node has its sphere of radius %.4g inside the box", t)
            continue
        lhs = spherical_average(f, t, quad).samples[0]
        rhs = truncated_potential(grad, spec, t, policy, engine).samples[0] / grid.sphere_area
        diff = np.abs(lhs - rhs)[inside] / (scale if scale > 0.0 else 1.0)
        residuals.append(diff)
        origin = grid.node_index(np.zeros(grid.n))
        per_radius.append({
            "t": float(t),
            "max_residual": float(diff.max()),
            "nodes": int(diff.size),
            "average_at_origin": float(lhs[origin]),
            "representation_at_origin": float(rhs[origin]),
        })

    if not residuals:
        raise DomainError("no radius leaves a node with its sphere inside the box")
    flat = np.concatenate(residuals)
    worst = float(flat.max())
    return _finish(CheckReport(
        name="representation",
        passed=worst <= tol,
        max_residual=worst,
        mean_residual=float(flat.mean()),
        violation_fraction=float(np.mean(flat > tol)),
        tolerances={"relative": tol},
        metadata={"grid": grid.describe(), "ladder": {"radii": [float(t) for t in radii]},
                  "function": f.provenance},
        details={"radii": per_radius},
    ))


def _radial_moment(rho: float, power: int, lower: float = 0.0) -> float:
    """int_lower^rho psi(r) r^power dr for the cutoff psi (1 on [0, rho/2], 0 past rho)."""
    inner = 0.5 * rho
    if lower >= rho:
        return 0.0

    def integrand(r):
        return float(bump_profile(np.array([r]), rho, inner)[0]) * r ** power

    plateau = 0.0
    if lower < inner:
        plateau = (inner ** (power + 1) - lower ** (power + 1)) / (power + 1)
    band, _ = quad_1d(integrand, max(lower, inner), rho, limit=200)
    return plateau + band


def verify_distributional_gradient(spec: KernelSpec, phi: Field, eps_list: Sequence[float],
                                   tol: float = 1e-2,
                                   quad: Optional[SphereQuadrature] = None,
                                   policy: Optional[TruncationPolicy] = None) -> CheckReport:
    """
    Check -int K~ d_j phi = c_j phi(0) + lim_{eps -> 0} int_{|x| >= eps} d_j K~ phi.

    Both integrands are split with a smooth radial cutoff psi: psi times the
    first-order Taylor polynomial of the smooth factor at the origin is
    integrated exactly (sphere quadrature times a radial integral), and only
    the O(|x|^2) remainder is summed on the grid. The principal value then
    reduces to an absolutely convergent sum, so the limit is evaluated
    directly; the truncated integrals along ``eps_list`` are reported as well.
    Residuals are relative to max_ij sum |K~_i| |d_j phi| h^n.
    """
    if not spec.is_potential:
        raise DomainError(f"expected a degree {-(spec.n - 1)} kernel, got degree {spec.degree}")
    if phi.m != 1:
        raise DomainError(f"test function must be scalar, got {phi.m} components")
    grid = phi.grid
    if spec.n != grid.n:
        raise DomainError(f"kernel for n={spec.n} used on an n={grid.n} grid")
    if phi.support_hint is None or phi.support_hint >= float(np.min(grid.half_widths)) - grid.h:
        raise DomainError("test function must be compactly supported inside the box")
    eps = sorted((float(e) for e in eps_list), reverse=True)
    if len(eps) < 2:
        raise DomainError("at least two truncation radii are needed")
    if eps[-1] < grid.h * (1.0 - 1e-12):
        raise DomainError(f"smallest radius {eps[-1]} is below the grid spacing {grid.h}")

    policy = policy or DEFAULT_POLICY
    quad = quad or default_quadrature(grid.n)
    coords = grid.coordinates()
    radius = np.sqrt(np.sum(coords ** 2, axis=0))
    nonzero = radius > 0.0
    points = np.stack([c[nonzero] for c in coords], axis=-1)
    origin = grid.node_index(np.zeros(grid.n))
    volume = grid.cell_volume

    rho = 0.5 * float(np.min(grid.half_widths))
    psi = bump_profile(radius, rho, 0.5 * rho)[nonzero]
    psi_r0 = _radial_moment(rho, 0)
    psi_r1 = _radial_moment(rho, 1)

    values = phi.samples[0]
    dphi = fd_gradient(phi).samples
    phi0 = float(values[origin])
    grad0 = dphi[(slice(None),) + origin]
    hess0 = np.stack([fd_gradient(Field(grid, dphi[j], smooth=True)).samples[(slice(None),) + origin]
                      for j in range(grid.n)])

    kernel = spec.evaluate(points)
    kernel_grad = spec.gradient(points)
    c = boundary_constants(spec, quad).c
    mean = symbol_integral(spec.symbol, quad)
    # moments[i, j, l] = int d_j K~_i(u) u_l dsigma(u)
    moments = np.einsum("k,kij,kl->ijl", quad.weights, spec.gradient(quad.nodes), quad.nodes)

    taylor_dphi = grad0[:, None] + hess0 @ points.T
    remainder_dphi = np.stack([dphi[j][nonzero] for j in range(grid.n)]) - psi * taylor_dphi
    lhs = -(kernel.T @ remainder_dphi.T) * volume
    lhs -= mean[:, None] * grad0[None, :] * psi_r0 + (c @ hess0.T) * psi_r1

    remainder_phi = values[nonzero] - psi * (phi0 + points @ grad0)
    linear = np.einsum("ijl,l->ij", moments, grad0)
    limit = c * phi0 + np.einsum("kij,k->ij", kernel_grad, remainder_phi) * volume + linear * psi_r0

    ladder_rhs = []
    for e in eps:
        weights = truncation_weights(coords, radius, grid.h, e, policy)[nonzero]
        integral = np.einsum("kij,k->ij", kernel_grad, weights * remainder_phi) * volume
        ladder_rhs.append(c * phi0 + integral + linear * _radial_moment(rho, 0, lower=e))

    scale = float(np.max(np.abs(kernel).T @ np.abs(np.stack([dphi[j][nonzero] for j in range(grid.n)])).T))
    scale = scale * volume if scale > 0.0 else 1.0
    raw = [float(np.max(np.abs(lhs - r))) / scale for r in ladder_rhs]
    residual = np.abs(lhs - limit) / scale
    worst = float(residual.max())
    return _finish(CheckReport(
        name="distributional_gradient",
        passed=worst <= tol,
        max_residual=worst,
        mean_residual=float(residual.mean()),
        violation_fraction=float(np.mean(residual > tol)),
        tolerances={"relative": tol},
        metadata={"grid": grid.describe(), "ladder": {"radii": eps},
                  "symbol": spec.symbol.catalog_id, "function": phi.provenance},
        details={
            "lhs": lhs.tolist(),
            "rhs_limit": limit.tolist(),
            "rhs_smallest_eps": ladder_rhs[-1].tolist(),
            "truncated_residuals": raw,
            "cutoff_radius": rho,
            "boundary_constants": c.tolist(),
            "phi_at_origin": phi0,
        },
    ))


def verify_domination(f: Field, spec: KernelSpec, ladder: RadiusLadder,
                      policy: Optional[TruncationPolicy] = None,
                      engine: Optional[ConvolutionEngine] = None,
                      progress: bool = False) -> CheckReport:
    """
    Check A* f <= sup|Omega| I_1|f| + slack at every node.

    The slack sup|Omega| n omega_n t_min max|f| bounds the near-ball part that
    the smallest truncation leaves out.
    """
    grid = f.grid
    bound = spec.symbol.sup_norm_bound
    upper = maximal_potential(f, spec, ladder, policy, engine, progress).samples[0]
    riesz = riesz_potential(f.abs(), policy, engine).samples[0]
    largest = float(np.max(f.magnitude()))
    slack = bound * grid.sphere_area * ladder.radii[0] * largest
    gap = bound * riesz - upper
    excess = np.maximum(-gap - slack, 0.0)
    scale = float(np.max(riesz)) * bound
    scale = scale if scale > 0.0 else 1.0
    # rounding floor
    violations = excess > 1e-12 * scale
    return _finish(CheckReport(
        name="domination",
        passed=not bool(np.any(violations)),
        max_residual=float(excess.max() / scale),
        mean_residual=float(excess.mean() / scale),
        violation_fraction=float(np.mean(violations)),
        tolerances={"slack": slack},
        metadata={"grid": grid.describe(), "ladder": ladder.describe(),
                  "symbol": spec.symbol.catalog_id, "function": f.provenance},
        details={"min_gap": float(gap.min()), "max_gap": float(gap.max()),
                 "sup_omega": bound, "max_f": largest},
    ))


def _segment_violations(upper: np.ndarray, majorant: np.ndarray, h: float,
                        rel_tol: float, floor: float) -> Dict[str, float]:
    """Fraction of axis segments where |A(x) - A(y)| exceeds the integral of T* along xy."""
    counts = {}
    total_bad = 0
    total = 0
    for axis in range(upper.ndim):
        integral = cumulative_trapezoid(majorant, dx=h, axis=axis, initial=0.0)
        size = upper.shape[axis]
        for span in SEGMENT_SPANS:
            if span >= size:
                continue
            head = [slice(None)] * upper.ndim
            tail = [slice(None)] * upper.ndim
            head[axis] = slice(span, None)
            tail[axis] = slice(0, size - span)
            jump = np.abs(upper[tuple(head)] - upper[tuple(tail)])
            allowed = (1.0 + rel_tol) * (integral[tuple(head)] - integral[tuple(tail)]) + floor
            bad = jump > allowed
            counts[f"axis{axis}_span{span}"] = float(np.mean(bad))
            total_bad += int(np.count_nonzero(bad))
            total += bad.size
    counts["all"] = total_bad / total if total else 0.0
    return counts


def verify_gradient_bound(f: Field, spec: KernelSpec, ladder: RadiusLadder,
                          rel_tol: float = 0.05, abs_tol: float = 1e-6,
                          max_violation: float = 0.01,
                          policy: Optional[TruncationPolicy] = None,
                          quad: Optional[SphereQuadrature] = None,
                          engine: Optional[ConvolutionEngine] = None,
                          extended: bool = False, progress: bool = False) -> CheckReport:
    """
    Check |grad A* f| <= (1 + rel_tol) T* f + abs_tol * max(T* f) at interior nodes.

    Args:
        f: Field with spec.m components
        spec: Potential kernel
        ladder: Radius ladder shared by A* and T*
        rel_tol: Relative slack on T*
        abs_tol: Absolute slack as a fraction of max T*
        max_violation: Largest tolerated fraction of violating nodes
        extended: Also check |A*(x) - A*(y)| <= integral of T* along axis segments

    Returns:
        CheckReport
    """
    grid = f.grid
    upper = maximal_potential(f, spec, ladder, policy, engine, progress)
    slope = fd_gradient(upper).magnitude()
    majorant = grad_majorant(f, spec, ladder, policy, quad, engine, progress).samples[0]
    scale = float(np.max(majorant))
    scale = scale if scale > 0.0 else 1.0
    floor = abs_tol * scale
    interior = grid.interior_mask(1)
    excess = np.maximum(slope - (1.0 + rel_tol) * majorant - floor, 0.0)[interior] / scale
    fraction = float(np.mean(excess > 0.0))
    passed = fraction < max_violation
    details: Dict[str, object] = {"max_slope": float(slope[interior].max()), "max_majorant": scale}
    if extended:
        segments = _segment_violations(upper.samples[0], majorant, grid.h, rel_tol, floor)
        details["segments"] = segments
        passed = passed and segments["all"] < max_violation
    return _finish(CheckReport(
        name="gradient_bound",
        passed=passed,
        max_residual=float(excess.max()),
        mean_residual=float(excess.mean()),
        violation_fraction=fraction,
        tolerances={"relative": rel_tol, "absolute": abs_tol, "max_violation": max_violation},
        metadata={"grid": grid.describe(), "ladder": ladder.describe(),
                  "symbol": spec.symbol.catalog_id, "function": f.provenance},
        details=details,
    ))


def verify_kernel_identities(n: int, symbol_ids: Optional[Sequence[str]] = None,
                             order: int = 64, tol: float = 1e-10) -> CheckReport:
    """
    Sphere identities of the catalog symbols at quadrature ``order``: zero mean
    of the singular symbols, vanishing sphere integral of grad K~ and stability
    of the boundary constants when the order grows by one.
    """
    symbol_ids = list(symbol_ids or ["one", "identity", "coordinate", "quadrupole", "exp_mean_zero"])
    quad = sphere_quadrature(n, order)
    finer = sphere_quadrature(n, order + 1)
    rows = []
    residuals = []
    for catalog_id in symbol_ids:
        symbol = create_symbol(catalog_id, n)
        spec = KernelSpec.potential(symbol)
        row = {"symbol": catalog_id}
        if catalog_id in ZERO_MEAN_SYMBOLS:
            row["zero_mean"] = float(np.max(np.abs(symbol_integral(symbol, quad))))
        row["grad_integral"] = grad_zero_mean_residual(spec, quad)
        row["constant_drift"] = boundary_constants(spec, quad).drift(boundary_constants(spec, finer))
        row["constants"] = boundary_constants(spec, quad).c.tolist()
        residuals.extend(v for k, v in row.items() if k in ("zero_mean", "grad_integral", "constant_drift"))
        rows.append(row)
    residuals = np.asarray(residuals)
    worst = float(residuals.max())
    return _finish(CheckReport(
        name="kernels",
        passed=worst < tol,
        max_residual=worst,
        mean_residual=float(residuals.mean()),
        violation_fraction=float(np.mean(residuals >= tol)),
        tolerances={"absolute": tol},
        metadata={"n": n, "order": order, "ladder": {"radii": []}},
        details={"symbols": rows, "omega_n": unit_ball_volume(n)},
    ))
