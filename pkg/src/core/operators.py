"""
Potentials, maximal potentials, singular integrals and the gradient majorant.

All convolution operators evaluate on the grid nodes through a shared
ConvolutionEngine. Ladders are swept with the field transform computed once.
"""

import logging
from typing import Optional, Tuple

import numpy as np
from tqdm import tqdm

from .convolution import ConvolutionEngine, RadiusLadder, TruncationPolicy, get_engine
from .errors import DomainError
from .grid import Field, check_finite, fd_gradient, zero_extension_gradient
from .kernels import KernelSpec, symbol_integral
from .sphere import SphereQuadrature
from .spherical import default_quadrature, surface_convolution
from .symbols import create_symbol

logger = logging.getLogger(__name__)

DEFAULT_POLICY = TruncationPolicy()


def _setup(f: Field, spec: KernelSpec, engine: Optional[ConvolutionEngine],
           policy: Optional[TruncationPolicy]):
    if spec.n != f.grid.n:
        raise DomainError(f"kernel for n={spec.n} applied on an n={f.grid.n} grid")
    if f.m != spec.m:
        raise DomainError(f"field has {f.m} components, symbol has {spec.m}")
    return engine or get_engine(f.grid), policy or DEFAULT_POLICY


def _require_potential(spec: KernelSpec) -> None:
    if not spec.is_potential:
        raise DomainError(f"expected a degree {-(spec.n - 1)} kernel, got degree {spec.degree}")


def _require_singular(spec: KernelSpec) -> None:
    if spec.is_potential:
        raise DomainError(f"expected a degree {-spec.n} kernel, got degree {spec.degree}")


def _scalar(f: Field, values: np.ndarray, what: str) -> Field:
    check_finite(values, what)
    return Field(f.grid, values)


def truncated_potential(f: Field, spec: KernelSpec, t: float,
                        policy: Optional[TruncationPolicy] = None,
                        engine: Optional[ConvolutionEngine] = None,
                        method: str = "fft") -> Field:
    """
    (f * Phi_t)(x) = integral over |x - z| >= t of f(z) . K~(x - z) dz.

    Args:
        f: Field with spec.m components
        spec: Potential kernel (degree -(n-1))
        t: Truncation radius, at least the grid spacing
        policy: Truncation sampling (default overlap, 4 subsamples)
        engine: Convolution plan (default shared plan for f.grid)
        method: "fft" or "direct"

    Returns:
        Scalar Field
    """
    _require_potential(spec)
    engine, policy = _setup(f, spec, engine, policy)
    out = engine.apply(f, spec, t, policy, method=method)[0]
    return _scalar(f, out, "truncated potential")


def potential(f: Field, spec: KernelSpec, engine: Optional[ConvolutionEngine] = None,
              method: str = "fft") -> Field:
    """
    Untruncated potential A f = f * K~.

    The cell at z = x is replaced by the ball of equal volume, contributing
    f(x) . (r_h * int Omega dsigma).
    """
    _require_potential(spec)
    engine, policy = _setup(f, spec, engine, None)
    out = engine.apply(f, spec, None, policy, method=method)[0]
    mean = symbol_integral(spec.symbol, default_quadrature(spec.n))
    out = out + f.grid.equivalent_radius * np.tensordot(mean, f.samples, axes=1)
    return _scalar(f, out, "potential")


def riesz_potential(g: Field, policy: Optional[TruncationPolicy] = None,
                    engine: Optional[ConvolutionEngine] = None, method: str = "fft") -> Field:
    """I_1 g = g * |x|^{1-n}; the singular cell adds g(x) n omega_n r_h."""
    if g.m != 1:
        raise DomainError(f"the Riesz potential needs a scalar field, got {g.m} components")
    spec = KernelSpec.potential(create_symbol("one", g.grid.n))
    return potential(g, spec, engine=engine, method=method)


def maximal_potential(f: Field, spec: KernelSpec, ladder: RadiusLadder,
                      policy: Optional[TruncationPolicy] = None,
                      engine: Optional[ConvolutionEngine] = None,
                      progress: bool = False) -> Field:
    """A* f(x) = max over the ladder of |(f * Phi_t)(x)|."""
    _require_potential(spec)
    engine, policy = _setup(f, spec, engine, policy)
    ladder.validate(f.grid)
    spectrum = engine.field_spectrum(f)
    best = np.zeros(f.grid.dims)
    if ladder.include_zero:
        best = np.abs(potential(f, spec, engine=engine).samples[0])
    for t in tqdm(ladder.radii, desc="maximal potential", disable=not progress):
        out = engine.apply(f, spec, t, policy, spectrum=spectrum)[0]
        np.maximum(best, np.abs(out), out=best)
    logger.debug("maximal potential over %d radii, padded %s", len(ladder), engine.padded)
    return _scalar(f, best, "maximal potential")


def truncated_singular(f: Field, spec: KernelSpec, t: float,
                       policy: Optional[TruncationPolicy] = None,
                       engine: Optional[ConvolutionEngine] = None,
                       method: str = "fft") -> Field:
    """Integral over |x - z| >= t of f(z) K(x - z) dz with a zero-mean degree -n kernel."""
    _require_singular(spec)
    engine, policy = _setup(f, spec, engine, policy)
    out = engine.apply(f, spec, t, policy, method=method)[0]
    return _scalar(f, out, "truncated singular integral")


def maximal_singular(f: Field, spec: KernelSpec, ladder: RadiusLadder,
                     policy: Optional[TruncationPolicy] = None,
                     engine: Optional[ConvolutionEngine] = None,
                     progress: bool = False) -> Field:
    """
    T* f(x) = max over the ladder of |truncated_singular(f, t)(x)|.

    The principal value limit has no discrete counterpart, so include_zero is ignored.
    """
    _require_singular(spec)
    engine, policy = _setup(f, spec, engine, policy)
    ladder.validate(f.grid)
    spectrum = engine.field_spectrum(f)
    best = np.zeros(f.grid.dims)
    for t in tqdm(ladder.radii, desc="maximal singular", disable=not progress):
        out = engine.apply(f, spec, t, policy, spectrum=spectrum)[0]
        np.maximum(best, np.abs(out), out=best)
    return _scalar(f, best, "maximal singular integral")


def gradient_decomposition(f: Field, spec: KernelSpec, t: float,
                           policy: Optional[TruncationPolicy] = None,
                           quad: Optional[SphereQuadrature] = None,
                           engine: Optional[ConvolutionEngine] = None,
                           spectrum: Optional[np.ndarray] = None) -> Tuple[Field, Field]:
    """
    The two pieces of f * grad(Phi_t).

    Returns:
        (volume, surface): f convolved with grad(K~) restricted to |y| >= t,
        and f convolved with the sphere measure K~ u dsigma on |y| = t
    """
    _require_potential(spec)
    engine, policy = _setup(f, spec, engine, policy)
    volume = engine.apply(f, spec, t, policy, gradient=True, spectrum=spectrum)
    check_finite(volume, "gradient volume term")
    surface = surface_convolution(f, spec.symbol, t, quad)
    return Field(f.grid, volume), surface


def grad_truncated_potential(f: Field, spec: KernelSpec, t: float,
                             policy: Optional[TruncationPolicy] = None,
                             quad: Optional[SphereQuadrature] = None,
                             engine: Optional[ConvolutionEngine] = None,
                             spectrum: Optional[np.ndarray] = None) -> Field:
    """f * grad(Phi_t), the sum of both decomposition terms (n components)."""
    volume, surface = gradient_decomposition(f, spec, t, policy, quad, engine, spectrum)
    return volume + surface


def grad_majorant(f: Field, spec: KernelSpec, ladder: RadiusLadder,
                  policy: Optional[TruncationPolicy] = None,
                  quad: Optional[SphereQuadrature] = None,
                  engine: Optional[ConvolutionEngine] = None,
                  progress: bool = False) -> Field:
    """
    T* f(x) = max over the ladder of |f * grad(Phi_t)(x)|.

    With include_zero the t -> 0 limit is the gradient of the untruncated potential.
    """
    _require_potential(spec)
    engine, policy = _setup(f, spec, engine, policy)
    ladder.validate(f.grid)
    spectrum = engine.field_spectrum(f)
    best = np.zeros(f.grid.dims)
    if ladder.include_zero:
        best = fd_gradient(potential(f, spec, engine=engine)).magnitude()
    for t in tqdm(ladder.radii, desc="gradient majorant", disable=not progress):
        grad = grad_truncated_potential(f, spec, t, policy, quad, engine, spectrum)
        np.maximum(best, grad.magnitude(), out=best)
    return _scalar(f, best, "gradient majorant")


def spherical_via_gradient(f: Field, ladder: RadiusLadder,
                           policy: Optional[TruncationPolicy] = None,
                           engine: Optional[ConvolutionEngine] = None,
                           progress: bool = False) -> Field:
    """
    Spherical maximal function through the gradient representation
    (1/(n omega_n)) A*(grad f) with Omega(z) = z.

    The gradient is that of the zero-extended field, so fields that do not
    vanish on the box faces are represented consistently.
    """
    if f.m != 1:
        raise DomainError(f"spherical_via_gradient needs a scalar field, got {f.m} components")
    if f.smooth is False:
        logger.warning("field %s is not smooth; finite-difference gradient may be inaccurate",
                       f.provenance or "<unnamed>")
    spec = KernelSpec.potential(create_symbol("identity", f.grid.n))
    grad = zero_extension_gradient(f)
    result = maximal_potential(grad, spec, ladder, policy, engine, progress)
    return Field(f.grid, result.samples / f.grid.sphere_area)
