"""
Empirical operator-norm probes.

For every member f of a function family the probe computes
(||A f||_{p*} + ||grad A f||_p) / ||f||_p, the ratio whose supremum over f is
the L^p -> homogeneous W^{1,p} operator norm. Families are finite, so the probe
reports a lower bound and its stability under grid refinement.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..core.catalog import sample_catalog
from ..core.convolution import ConvolutionEngine, RadiusLadder, TruncationPolicy, resolve_workers
from ..core.errors import CatalogError, DomainError, NumericalError
from ..core.grid import Field, Grid, NormSettings, fd_gradient, lp_norm
from ..core.kernels import KernelSpec
from ..core.operators import maximal_potential, potential, riesz_potential, truncated_potential
from ..core.symbols import SphereSymbol, create_symbol

logger = logging.getLogger(__name__)

PROBE_OPERATORS = ("maximal_potential", "potential", "truncated_potential", "riesz_potential")
DILATE_SCALES = tuple(2.0 ** (k / 2.0) for k in range(5))


@dataclass(frozen=True)
class FamilyMember:
    """
    Catalog function with parameters. ``scale`` r > 1 evaluates f(r x) on a grid
    with spacing h/r, so the member is an exact dilate of its scale-1 form.
    """

    function: str
    params: Tuple[Tuple[str, object], ...] = ()
    scale: float = 1.0

    @property
    def label(self) -> str:
        parts = [f"{k}={v}" for k, v in self.params]
        if self.scale != 1.0:
            parts.append(f"scale={self.scale:.6g}")
        return ";".join(parts)


@dataclass(frozen=True)
class FunctionFamily:
    """Named, ordered set of members; ``seed`` fixes the random members."""

    name: str
    members: Tuple[FamilyMember, ...]
    seed: int = 0

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)


def _member(function: str, scale: float = 1.0, **params) -> FamilyMember:
    return FamilyMember(function, tuple(sorted(params.items())), scale)


def default_family(seed: int = 0) -> FunctionFamily:
    """Twenty members: gaussians, bumps, band-limited noise, indicators and powers."""
    members: List[FamilyMember] = []
    members += [_member("gaussian", sigma=s) for s in (0.2, 0.28, 0.4, 0.56, 0.8)]
    members += [_member("smooth_bump", radius=r) for r in (0.5, 0.8, 1.2)]
    members.append(_member("smooth_bump", radius=1.2, inner=0.4))
    members += [_member("random_bandlimited", seed=seed + k) for k in range(4)]
    members += [_member("ball_indicator", radius=r) for r in (0.4, 0.7, 1.0)]
    members += [_member("truncated_power", a=a, radius=1.0) for a in (0.2, 0.4, 0.6, 0.8)]
    return FunctionFamily("default", tuple(members), seed)


def dilate_family(scales: Sequence[float] = DILATE_SCALES, sigma: float = 0.5) -> FunctionFamily:
    """Gaussian f(x) = exp(-|x|^2/sigma^2) and its dilates f(r x)."""
    members = tuple(_member("gaussian", scale=float(r), sigma=sigma / float(r)) for r in scales)
    return FunctionFamily("dilate", members)


def open_range_family(settings: NormSettings, steps: int = 5, radius: float = 1.0) -> FunctionFamily:
    """Truncated powers |x|^{-a} with a approaching the L^p integrability edge n/p."""
    edge = settings.n / settings.p
    gaps = [0.5 ** k for k in range(1, steps + 1)]
    members = tuple(_member("truncated_power", a=round(edge * (1.0 - g), 6), radius=radius) for g in gaps)
    return FunctionFamily("open_range", members)


FAMILIES = ("default", "dilate", "open_range")


def create_family(name: str, settings: NormSettings, seed: int = 0) -> FunctionFamily:
    if name == "default":
        return default_family(seed)
    if name == "dilate":
        return dilate_family()
    if name == "open_range":
        return open_range_family(settings)
    raise CatalogError(f"unknown function family '{name}' (known: {', '.join(FAMILIES)})")


@dataclass
class ProbeRow:
    function: str
    params: str
    norm_pstar: float
    norm_grad_p: float
    ratio: float


@dataclass
class ProbeResult:
    """Per-member ratios; both norm columns are already divided by ||f||_p."""

    op: str
    family: str
    p: float
    p_star: float
    n: int
    exploratory: bool
    rows: List[ProbeRow] = field(default_factory=list)
    refined_max: Optional[float] = None

    @property
    def family_max(self) -> float:
        return max(row.ratio for row in self.rows) if self.rows else 0.0

    @property
    def refinement_delta(self) -> Optional[float]:
        if self.refined_max is None or self.family_max == 0.0:
            return None
        return abs(self.refined_max - self.family_max) / self.family_max

    def to_dict(self) -> Dict[str, object]:
        return {
            "op": self.op,
            "family": self.family,
            "p": self.p,
            "p_star": self.p_star,
            "n": self.n,
            "exploratory": self.exploratory,
            "family_max": self.family_max,
            "refined_max": self.refined_max,
            "refinement_delta": self.refinement_delta,
            "rows": [vars(row) for row in self.rows],
        }


class NormProbe:
    """
    Evaluate the Sobolev ratio of one operator over a function family.

    Engines are built per member grid (dilated members use their own spacing)
    and shared across members on the same grid.
    """

    def __init__(self, op: str, settings: NormSettings, grid: Grid,
                 symbol: Optional[SphereSymbol] = None,
                 ladder: Optional[RadiusLadder] = None,
                 policy: Optional[TruncationPolicy] = None,
                 t: Optional[float] = None, ratio: Optional[float] = None):
        if op not in PROBE_OPERATORS:
            raise CatalogError(f"unknown probe operator '{op}' (known: {', '.join(PROBE_OPERATORS)})")
        if settings.n != grid.n:
            raise DomainError(f"norm settings for n={settings.n} used on an n={grid.n} grid")
        self.op = op
        self.settings = settings
        self.grid = grid
        self.symbol = symbol or create_symbol("one", grid.n)
        if self.symbol.n != grid.n:
            raise DomainError(f"symbol for n={self.symbol.n} used on an n={grid.n} grid")
        self.spec = KernelSpec.potential(self.symbol)
        self.ladder = ladder
        self.ratio = ratio
        self.policy = policy
        self.t = t if t is not None else 0.5
        self._engines: Dict[Grid, ConvolutionEngine] = {}
        self._workers = 1

    @property
    def exploratory(self) -> bool:
        return not self.settings.theorem_range

    def _member_grid(self, member: FamilyMember) -> Grid:
        if member.scale == 1.0:
            return self.grid
        return Grid(self.grid.n, self.grid.dims, self.grid.h / member.scale)

    def _member_ladder(self, grid: Grid, member: FamilyMember) -> RadiusLadder:
        if self.ladder is None:
            if self.ratio is None:
                return RadiusLadder.default(grid, include_zero=True)
            return RadiusLadder.default(grid, ratio=self.ratio, include_zero=True)
        if member.scale == 1.0:
            return self.ladder
        return RadiusLadder.from_radii([t / member.scale for t in self.ladder.radii],
                                       include_zero=self.ladder.include_zero)

    def _engine(self, grid: Grid, cache_size: int) -> ConvolutionEngine:
        if grid not in self._engines:
            self._engines[grid] = ConvolutionEngine(grid, workers=self._workers, cache_size=cache_size)
        return self._engines[grid]

    def _sample(self, member: FamilyMember, grid: Grid) -> Field:
        f = sample_catalog(member.function, dict(member.params), grid)
        if self.symbol.m == 1 or self.op == "riesz_potential":
            return f
        samples = np.repeat(f.samples, self.symbol.m, axis=0)
        return Field(grid, samples, support_hint=f.support_hint, provenance=f.provenance, smooth=f.smooth)

    def _apply(self, f: Field, ladder: RadiusLadder, engine: ConvolutionEngine) -> Field:
        if self.op == "maximal_potential":
            return maximal_potential(f, self.spec, ladder, self.policy, engine)
        if self.op == "potential":
            return potential(f, self.spec, engine=engine)
        if self.op == "truncated_potential":
            return truncated_potential(f, self.spec, self.t, self.policy, engine)
        return riesz_potential(f, self.policy, engine)

    def probe_member(self, member: FamilyMember) -> ProbeRow:
        """Ratio for one member."""
        grid = self._member_grid(member)
        ladder = self._member_ladder(grid, member)
        engine = self._engine(grid, len(ladder) + 2)
        f = self._sample(member, grid)
        norm_f = lp_norm(f, self.settings.p)
        if not norm_f > 0.0:
            raise NumericalError(f"member {member.function} ({member.label}) has zero L^p norm")
        result = self._apply(f, ladder, engine)
        norm_pstar = lp_norm(result, self.settings.p_star) / norm_f
        norm_grad = lp_norm(fd_gradient(result), self.settings.p) / norm_f
        ratio = norm_pstar + norm_grad
        if not math.isfinite(ratio) or ratio < 0.0:
            raise NumericalError(f"member {member.function} ({member.label}) gave ratio {ratio}")
        logger.debug("%s %s: ratio %.6g", member.function, member.label, ratio)
        return ProbeRow(member.function, member.label, norm_pstar, norm_grad, ratio)

    def probe_family(self, family: FunctionFamily, max_workers: Optional[int] = None) -> List[ProbeRow]:
        """
        Probe all members in parallel, keeping the family order.

        Args:
            family: Members to evaluate
            max_workers: Thread count (default MAXPOT_THREADS or all CPUs)

        Returns:
            One ProbeRow per member
        """
        max_workers = min(len(family), resolve_workers(max_workers)) or 1
        self._workers = 1 if max_workers > 1 else resolve_workers()
        for member in family:
            grid = self._member_grid(member)
            self._engine(grid, len(self._member_ladder(grid, member)) + 2)

        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            futures = [executor.submit(self.probe_member, member) for member in family]
            rows = [future.result() for future in futures]
        return rows


def probe_operator_norm(op: str, family: FunctionFamily, settings: NormSettings, grid: Grid,
                        ladder: Optional[RadiusLadder] = None,
                        symbol: Optional[SphereSymbol] = None,
                        policy: Optional[TruncationPolicy] = None,
                        t: Optional[float] = None, ratio: Optional[float] = None,
                        refine: bool = False,
                        max_workers: Optional[int] = None) -> ProbeResult:
    """
    Probe the L^p -> W^{1,p} ratio of ``op`` over ``family``.

    Runs with p <= n/(n-1) are flagged exploratory: they report ratios only.
    With ``refine`` the family max is recomputed on the refined grid.
    """
    probe = NormProbe(op, settings, grid, symbol, ladder, policy, t, ratio)
    if probe.exploratory:
        logger.info("p=%.4g <= n/(n-1): exploratory run, ratios reported without a bound", settings.p)
    result = ProbeResult(op, family.name, settings.p, settings.p_star, settings.n, probe.exploratory)
    result.rows = probe.probe_family(family, max_workers)
    if refine:
        fine = NormProbe(op, settings, grid.refined(), symbol, ladder, policy, t, ratio)
        refined_rows = fine.probe_family(family, max_workers)
        result.refined_max = max(row.ratio for row in refined_rows)
        logger.info("family max %.6g, refined %.6g", result.family_max, result.refined_max)
    return result
