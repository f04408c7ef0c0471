import itertools
import math

import numpy as np
import pytest

from src.core.errors import CatalogError, DomainError, ZeroMeanError
from src.core.kernels import (
    KernelSpec,
    boundary_constants,
    grad_ktilde,
    grad_zero_mean_residual,
    ksing_eval,
    ktilde_eval,
    symbol_integral,
)
from src.core.sphere import sphere_quadrature
from src.core.symbols import SYMBOL_CATALOG, ZERO_MEAN_SYMBOLS, create_symbol

SINGULAR_SYMBOLS = ("identity",) + ZERO_MEAN_SYMBOLS


class TestSphereQuadrature:
    def test_weights_sum_to_sphere_area(self):
        assert np.sum(sphere_quadrature(2, 64).weights) == pytest.approx(2 * math.pi, abs=1e-13)
        assert np.sum(sphere_quadrature(3, 64).weights) == pytest.approx(4 * math.pi, abs=1e-12)

    def test_nodes_are_unit_vectors(self):
        for n in (2, 3):
            quad = sphere_quadrature(n, 32)
            assert np.allclose(np.linalg.norm(quad.nodes, axis=1), 1.0, atol=1e-14)

    def test_second_moments(self):
        quad2 = sphere_quadrature(2, 64)
        assert quad2.integrate(quad2.nodes[:, 0] ** 2) == pytest.approx(math.pi, abs=1e-12)
        assert abs(quad2.integrate(quad2.nodes[:, 0])) < 1e-13
        quad3 = sphere_quadrature(3, 64)
        assert quad3.integrate(quad3.nodes[:, 2] ** 2) == pytest.approx(4 * math.pi / 3, abs=1e-12)

    @staticmethod
    def _monomial_integral(powers):
        if any(a % 2 for a in powers):
            return 0.0
        betas = [(a + 1) / 2.0 for a in powers]
        return 2.0 * math.prod(math.gamma(b) for b in betas) / math.gamma(sum(betas))

    @pytest.mark.parametrize("n, order", [(2, 8), (2, 12), (3, 8), (3, 12)])
    def test_declared_exactness(self, n, order):
        quad = sphere_quadrature(n, order)
        for powers in itertools.product(range(quad.exactness + 1), repeat=n):
            if sum(powers) > quad.exactness:
                continue
            values = np.prod(quad.nodes ** np.array(powers), axis=1)
            assert quad.integrate(values) == pytest.approx(self._monomial_integral(powers), abs=1e-12)

    def test_exactness_is_sharp_in_the_plane(self):
        quad = sphere_quadrature(2, 8)
        degree = quad.exactness + 1
        values = quad.nodes[:, 0] ** degree
        assert abs(quad.integrate(values) - self._monomial_integral((degree, 0))) > 1e-3

    def test_scaled_sphere(self):
        quad = sphere_quadrature(3, 16)
        points, weights = quad.scaled(2.0)
        assert np.allclose(np.linalg.norm(points, axis=1), 2.0)
        assert np.sum(weights) == pytest.approx(16 * math.pi, rel=1e-12)

    def test_order_too_small(self):
        with pytest.raises(DomainError):
            sphere_quadrature(2, 4)
        with pytest.raises(DomainError):
            sphere_quadrature(4, 16)


class TestSymbols:
    def test_unknown_symbol(self):
        with pytest.raises(CatalogError):
            create_symbol("dipole", 2)

    def test_coordinate_index_range(self):
        with pytest.raises(CatalogError):
            create_symbol("coordinate", 2, {"j": 2})

    @pytest.mark.parametrize("catalog_id", sorted(SYMBOL_CATALOG))
    def test_degree_zero(self, catalog_id):
        symbol = create_symbol(catalog_id, 3)
        x = np.array([[0.3, -1.2, 0.7], [2.0, 0.1, -0.4]])
        assert np.allclose(symbol.evaluate(x), symbol.evaluate(7.5 * x), atol=1e-14)

    def test_sup_norm_bound_holds(self):
        quad = sphere_quadrature(2, 256)
        for catalog_id in SYMBOL_CATALOG:
            symbol = create_symbol(catalog_id, 2)
            largest = np.max(np.linalg.norm(symbol.values(quad.nodes), axis=-1))
            assert largest <= symbol.sup_norm_bound * (1 + 1e-9)

    def test_not_defined_at_origin(self):
        with pytest.raises(DomainError):
            create_symbol("one", 2).evaluate(np.zeros(2))


class TestKernelValues:
    def test_potential_kernel_values(self):
        one = KernelSpec.potential(create_symbol("one", 2))
        assert ktilde_eval(one, [2.0, 0.0])[0] == pytest.approx(0.5)
        identity = KernelSpec.potential(create_symbol("identity", 2))
        assert np.allclose(ktilde_eval(identity, [0.0, 3.0]), [0.0, 1.0 / 3.0])

    def test_singular_kernel_values_and_parity(self):
        spec = KernelSpec.singular(create_symbol("coordinate", 2))
        assert ksing_eval(spec, [1.0, 0.0])[0] == pytest.approx(1.0)
        x = np.array([0.4, -0.9])
        assert ksing_eval(spec, -x)[0] == pytest.approx(-ksing_eval(spec, x)[0])

    def test_singular_kernel_needs_zero_mean(self):
        with pytest.raises(ZeroMeanError):
            KernelSpec.singular(create_symbol("one", 2))
        KernelSpec.singular(create_symbol("exp_mean_zero", 3, {"j": 2}))

    def test_wrong_degree_for_accessor(self):
        spec = KernelSpec.singular(create_symbol("quadrupole", 2))
        with pytest.raises(DomainError):
            ktilde_eval(spec, [1.0, 1.0])

    @pytest.mark.parametrize("n", [2, 3])
    @pytest.mark.parametrize("catalog_id", sorted(SYMBOL_CATALOG))
    def test_potential_homogeneity(self, n, catalog_id):
        spec = KernelSpec.potential(create_symbol(catalog_id, n))
        x = np.linspace(0.2, 0.9, n) * np.array([1.0, -1.0, 0.5][:n])
        for lam in (0.5, 2.0, 10.0):
            assert np.allclose(spec.evaluate(lam * x), lam ** (1 - n) * spec.evaluate(x), rtol=1e-12)

    @pytest.mark.parametrize("n", [2, 3])
    @pytest.mark.parametrize("catalog_id", SINGULAR_SYMBOLS)
    def test_singular_homogeneity(self, n, catalog_id):
        spec = KernelSpec.singular(create_symbol(catalog_id, n))
        x = np.linspace(0.3, 1.1, n)
        for lam in (0.5, 2.0, 10.0):
            assert np.allclose(spec.evaluate(lam * x), lam ** (-n) * spec.evaluate(x),
                               rtol=1e-12, atol=1e-15)


class TestKernelGradients:
    def test_gradient_of_one(self):
        spec = KernelSpec.potential(create_symbol("one", 2))
        assert np.allclose(grad_ktilde(spec, [1.0, 0.0]), [[-1.0, 0.0]])

    @pytest.mark.parametrize("n", [2, 3])
    @pytest.mark.parametrize("catalog_id", sorted(SYMBOL_CATALOG))
    def test_analytic_matches_numeric(self, n, catalog_id):
        spec = KernelSpec.potential(create_symbol(catalog_id, n))
        rng = np.random.default_rng(11)
        points = rng.uniform(-1.5, 1.5, size=(20, n))
        analytic = spec.gradient(points)
        numeric = spec.numeric_gradient(points)
        scale = np.max(np.abs(analytic))
        assert np.max(np.abs(analytic - numeric)) < 1e-6 * scale

    def test_gradient_homogeneity(self):
        spec = KernelSpec.potential(create_symbol("exp_mean_zero", 3))
        x = np.array([0.3, -0.5, 0.8])
        assert np.allclose(spec.gradient(3.0 * x), 3.0 ** -3 * spec.gradient(x), rtol=1e-10)


class TestSphereIdentities:
    def test_symbol_integrals(self):
        quad = sphere_quadrature(2, 64)
        assert symbol_integral(create_symbol("one", 2), quad)[0] == pytest.approx(2 * math.pi)
        assert abs(symbol_integral(create_symbol("coordinate", 2), quad)[0]) < 1e-13
        assert abs(symbol_integral(create_symbol("quadrupole", 2), quad)[0]) < 1e-12

    def test_boundary_constants_identity(self):
        c2 = boundary_constants(KernelSpec.potential(create_symbol("identity", 2)), sphere_quadrature(2, 64))
        assert np.allclose(c2.c, math.pi * np.eye(2), atol=1e-12)
        c3 = boundary_constants(KernelSpec.potential(create_symbol("identity", 3)), sphere_quadrature(3, 64))
        assert np.allclose(c3.c, 4 * math.pi / 3 * np.eye(3), atol=1e-10)

    def test_boundary_constants_of_one_vanish(self):
        for n in (2, 3):
            c = boundary_constants(KernelSpec.potential(create_symbol("one", n)), sphere_quadrature(n, 64))
            assert np.max(np.abs(c.c)) < 1e-13

    @pytest.mark.parametrize("n", [2, 3])
    @pytest.mark.parametrize("catalog_id", sorted(SYMBOL_CATALOG))
    def test_gradient_sphere_integral_vanishes(self, n, catalog_id):
        spec = KernelSpec.potential(create_symbol(catalog_id, n))
        assert grad_zero_mean_residual(spec, sphere_quadrature(n, 64)) < 1e-10

    @pytest.mark.parametrize("n", [2, 3])
    def test_constants_stable_in_order(self, n):
        spec = KernelSpec.potential(create_symbol("exp_mean_zero", n))
        low = boundary_constants(spec, sphere_quadrature(n, 64))
        high = boundary_constants(spec, sphere_quadrature(n, 65))
        assert low.drift(high) < 1e-10
