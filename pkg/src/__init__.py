"""
maxpot: maximal potentials and spherical maximal operators on grids

This package discretises R^n (n = 2, 3) on a regular box and provides the
operators generated by a homogeneous kernel Omega(x/|x|) |x|^{1-n}: truncated
and maximal potentials, the Riesz potential, truncated and maximal singular
integrals, the gradient majorant and spherical averages, together with
verification checks for the identities they satisfy and empirical norm probes.

Main Features:
- FFT evaluation of truncated kernels with overlap-weighted truncation
- Sphere quadrature, boundary constants and kernel identities
- Verification reports and L^p -> W^{1,p} ratio probes
- Config-driven command line interface

Quick Start:
    >>> from src import Grid, KernelSpec, RadiusLadder, create_symbol, sample_catalog
    >>> from src import maximal_potential
    >>> grid = Grid.from_box(2, 64)
    >>> f = sample_catalog("gaussian", {"sigma": 0.5}, grid)
    >>> spec = KernelSpec.potential(create_symbol("one", 2))
    >>> upper = maximal_potential(f, spec, RadiusLadder.default(grid))
"""

__version__ = "1.0.0"

from .core.catalog import sample_catalog
from .core.convolution import ConvolutionEngine, RadiusLadder, TruncationPolicy
from .core.grid import Field, Grid, NormSettings, lp_norm
from .core.kernels import KernelSpec
from .core.operators import (
    grad_majorant,
    grad_truncated_potential,
    maximal_potential,
    potential,
    riesz_potential,
    truncated_potential,
)
from .core.spherical import spherical_average, spherical_maximal
from .core.symbols import create_symbol
from .evaluation.probes import NormProbe, probe_operator_norm

__all__ = [
    "ConvolutionEngine",
    "Field",
    "Grid",
    "KernelSpec",
    "NormProbe",
    "NormSettings",
    "RadiusLadder",
    "TruncationPolicy",
    "create_symbol",
    "grad_majorant",
    "grad_truncated_potential",
    "lp_norm",
    "maximal_potential",
    "potential",
    "probe_operator_norm",
    "riesz_potential",
    "sample_catalog",
    "spherical_average",
    "spherical_maximal",
    "truncated_potential",
]
