import math

import numpy as np
import pytest

from src.core.catalog import sample_catalog
from src.core.convolution import RadiusLadder
from src.core.errors import DomainError
from src.core.grid import Field
from src.core.operators import spherical_via_gradient
from src.core.sphere import sphere_quadrature
from src.core.spherical import spherical_average, spherical_maximal, surface_convolution
from src.core.symbols import create_symbol


def _origin(field):
    return field.samples[(slice(None),) + field.grid.node_index(np.zeros(field.grid.n))]


class TestSphericalAverage:
    def test_constant(self, grid2):
        ones = Field(grid2, np.ones(grid2.dims))
        assert _origin(spherical_average(ones, 0.5))[0] == pytest.approx(1.0, abs=1e-12)

    def test_squared_radius(self, grid2):
        f = Field.from_function(grid2, lambda c: np.sum(c ** 2, axis=0))
        assert _origin(spherical_average(f, 1.0))[0] == pytest.approx(1.0, abs=grid2.h ** 2)

    def test_gaussian(self, grid2_fine):
        f = sample_catalog("gaussian", {"sigma": 1.0}, grid2_fine)
        assert _origin(spherical_average(f, 1.0))[0] == pytest.approx(math.exp(-1.0), rel=0.01)

    def test_linearity(self, grid2):
        f = sample_catalog("gaussian", {"sigma": 0.6}, grid2)
        g = sample_catalog("random_bandlimited", {"seed": 3}, grid2)
        left = spherical_average(f + 3.0 * g, 0.4).samples
        right = spherical_average(f, 0.4).samples + 3.0 * spherical_average(g, 0.4).samples
        assert np.allclose(left, right, atol=1e-12)

    def test_rejects_small_radius_and_vectors(self, grid2):
        ones = Field(grid2, np.ones(grid2.dims))
        with pytest.raises(DomainError):
            spherical_average(ones, grid2.h / 3)
        with pytest.raises(DomainError):
            spherical_average(Field(grid2, np.ones((2,) + grid2.dims)), 0.5)

    def test_three_dimensional_constant(self, grid3_small):
        ones = Field(grid3_small, np.ones(grid3_small.dims))
        value = _origin(spherical_average(ones, 0.5, sphere_quadrature(3, 16)))[0]
        assert value == pytest.approx(1.0, abs=1e-12)


class TestSurfaceConvolution:
    def test_half_space(self, grid2):
        f = sample_catalog("half_space", {"axis": 0, "offset": 0.0}, grid2)
        value = _origin(surface_convolution(f, create_symbol("one", 2), 1.0))
        assert value == pytest.approx([-2.0, 0.0], abs=0.04)

    def test_component_mismatch(self, gaussian2):
        with pytest.raises(DomainError):
            surface_convolution(gaussian2, create_symbol("identity", 2), 0.5)


class TestSphericalMaximal:
    def test_disk_at_origin(self, grid2):
        disk = sample_catalog("ball_indicator", {"radius": 1.0}, grid2)
        upper = spherical_maximal(disk, RadiusLadder.default(grid2))
        assert _origin(upper)[0] == pytest.approx(1.0, rel=0.02)

    def test_variants_agree_for_nonnegative_f(self, gaussian2):
        ladder = RadiusLadder.from_radii([0.25, 0.5, 1.0])
        plain = spherical_maximal(gaussian2, ladder, use_abs=True).samples
        signed = spherical_maximal(gaussian2, ladder, use_abs=False).samples
        assert np.allclose(plain, signed, rtol=1e-14, atol=0.0)

    def test_absolute_homogeneity(self, grid2):
        f = sample_catalog("random_bandlimited", {"seed": 8}, grid2)
        ladder = RadiusLadder.from_radii([0.25, 0.5])
        base = spherical_maximal(f, ladder).samples
        scaled = spherical_maximal(-3.0 * f, ladder).samples
        assert np.allclose(scaled, 3.0 * base, rtol=1e-12, atol=1e-14)

    def test_include_zero_dominates_field(self, grid2):
        f = sample_catalog("random_bandlimited", {"seed": 1}, grid2)
        ladder = RadiusLadder.from_radii([0.5], include_zero=True)
        upper = spherical_maximal(f, ladder).samples[0]
        assert np.all(upper >= np.abs(f.samples[0]))


@pytest.mark.parametrize("name, params", [
    ("gaussian", {"sigma": 0.5}),
    ("smooth_bump", {"radius": 1.2}),
    ("gaussian_bump", {"center": (0.3, 0.2)}),
])
def test_gradient_representation_matches_direct(grid2_fine, name, params):
    f = sample_catalog(name, params, grid2_fine)
    ladder = RadiusLadder.from_radii([0.25, 0.5, 1.0])
    via = spherical_via_gradient(f, ladder).samples[0]
    direct = spherical_maximal(f, ladder, use_abs=False).samples[0]
    inside = np.all(np.abs(grid2_fine.coordinates()) <= 1.0, axis=0)
    assert np.max(np.abs(via - direct)[inside]) <= 0.03 * np.max(np.abs(f.samples))
