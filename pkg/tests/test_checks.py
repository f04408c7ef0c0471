import json
import math

import numpy as np
import pytest

from src.core.catalog import sample_catalog
from src.core.convolution import RadiusLadder
from src.core.errors import DomainError
from src.core.grid import Field, Grid
from src.core.kernels import KernelSpec
from src.core.symbols import create_symbol
from src.evaluation.checks import (
    verify_distributional_gradient,
    verify_domination,
    verify_gradient_bound,
    verify_kernel_identities,
    verify_representation,
)


def _one(n=2):
    return KernelSpec.potential(create_symbol("one", n))


class TestRepresentation:
    def test_gaussian_passes(self, gaussian2):
        report = verify_representation(gaussian2, (0.5, 1.0, 2.0))
        assert report.passed
        assert report.max_residual <= 2e-2
        unit = [row for row in report.details["radii"] if row["t"] == 1.0][0]
        assert unit["average_at_origin"] == pytest.approx(math.exp(-1.0), rel=0.01)

    def test_relative_error_is_scale_free(self, gaussian2):
        base = verify_representation(gaussian2, (0.5, 1.0))
        scaled = verify_representation(3.0 * gaussian2, (0.5, 1.0))
        assert scaled.max_residual == pytest.approx(base.max_residual, rel=1e-9)

    def test_rejects_non_smooth_field(self, grid2):
        disk = sample_catalog("ball_indicator", {"radius": 1.0}, grid2)
        with pytest.raises(DomainError):
            verify_representation(disk, (0.5,))

    def test_report_is_json_serialisable(self, gaussian2):
        report = verify_representation(gaussian2, (0.5,))
        json.dumps(report.to_dict())
        assert report.summary_row()["grid"] == "65x65"

    @pytest.mark.slow
    def test_error_shrinks_under_refinement(self):
        coarse = Grid.from_box(2, 64)
        fine = coarse.refined()
        e_coarse = verify_representation(sample_catalog("gaussian", {}, coarse), (0.5, 1.0)).max_residual
        e_fine = verify_representation(sample_catalog("gaussian", {}, fine), (0.5, 1.0)).max_residual
        assert e_coarse / e_fine >= 1.7


class TestDistributionalGradient:
    def _phi(self, grid, center):
        return sample_catalog("gaussian_bump", {"center": center}, grid)

    @pytest.mark.parametrize("symbol_id", ["one", "identity"])
    def test_passes(self, grid2_fine, symbol_id):
        h = grid2_fine.h
        phi = self._phi(grid2_fine, (0.4, 0.25))
        spec = KernelSpec.potential(create_symbol(symbol_id, 2))
        report = verify_distributional_gradient(spec, phi, [8 * h, 4 * h, 2 * h, h])
        assert report.passed, report.details
        expected = math.exp(-(0.4 ** 2 + 0.25 ** 2) / 0.5 ** 2)
        assert report.details["phi_at_origin"] == pytest.approx(expected, rel=1e-12)

    def test_centred_test_function(self, grid2_fine):
        """Both sides vanish for a radial phi at the origin; the residual stays bounded."""
        h = grid2_fine.h
        report = verify_distributional_gradient(_one(), self._phi(grid2_fine, (0.0, 0.0)), [2 * h, h])
        assert report.passed, report.details
        assert np.max(np.abs(report.details["lhs"])) < 1e-10

    def test_limit_beats_truncation(self, grid2_fine):
        h = grid2_fine.h
        report = verify_distributional_gradient(_one(), self._phi(grid2_fine, (0.4, 0.25)),
                                                [4 * h, 2 * h, h])
        truncated = report.details["truncated_residuals"]
        assert truncated[0] > truncated[-1]
        assert report.max_residual < truncated[-1]
        assert report.details["cutoff_radius"] == pytest.approx(1.0)

    def test_boundary_constants_reported(self, grid2_fine):
        h = grid2_fine.h
        spec = KernelSpec.potential(create_symbol("identity", 2))
        report = verify_distributional_gradient(spec, self._phi(grid2_fine, (0.4, 0.25)), [2 * h, h])
        assert np.allclose(report.details["boundary_constants"], math.pi * np.eye(2), atol=1e-12)

    def test_odd_test_function(self, grid2_fine):
        h = grid2_fine.h
        bump = sample_catalog("gaussian_bump", {}, grid2_fine)
        x1 = grid2_fine.coordinates()[0]
        phi = Field(grid2_fine, x1 * bump.samples[0], support_hint=bump.support_hint, smooth=True)
        report = verify_distributional_gradient(_one(), phi, [4 * h, 2 * h, h])
        lhs = np.asarray(report.details["lhs"])
        rhs = np.asarray(report.details["rhs_limit"])
        scale = np.max(np.abs(lhs))
        assert abs(lhs[0][1]) < 1e-3 * scale
        assert abs(rhs[0][1]) < 1e-3 * scale

    def test_needs_compact_support(self, gaussian2):
        with pytest.raises(DomainError):
            verify_distributional_gradient(_one(), gaussian2, [0.25, 0.125])

    def test_needs_two_radii(self, grid2_fine):
        with pytest.raises(DomainError):
            verify_distributional_gradient(_one(), self._phi(grid2_fine, (0.0, 0.0)), [0.1])


class TestDomination:
    def test_disk_with_one(self, grid2):
        disk = sample_catalog("ball_indicator", {"radius": 1.0}, grid2)
        report = verify_domination(disk, _one(), RadiusLadder.default(grid2))
        assert report.passed
        assert report.details["min_gap"] >= -1e-12 * 2 * math.pi
        assert report.details["max_gap"] <= 1.01 * 2 * math.pi * grid2.h

    @pytest.mark.parametrize("seed", range(10))
    def test_sign_changing_fields(self, seed):
        grid = Grid.from_box(2, 32)
        f = sample_catalog("random_bandlimited", {"seed": seed}, grid)
        report = verify_domination(f, _one(), RadiusLadder.default(grid))
        assert report.passed

    def test_vector_symbol(self, grid2):
        base = sample_catalog("random_bandlimited", {"seed": 3}, grid2)
        f = Field(grid2, np.stack([base.samples[0], 0.5 * base.samples[0]]), support_hint=base.support_hint)
        spec = KernelSpec.potential(create_symbol("identity", 2))
        assert verify_domination(f, spec, RadiusLadder.default(grid2)).passed

    def test_zero_field(self, grid2):
        zero = Field(grid2, np.zeros(grid2.dims))
        report = verify_domination(zero, _one(), RadiusLadder.default(grid2))
        assert report.passed and report.max_residual == 0.0


class TestGradientBound:
    @pytest.mark.parametrize("sigma", [0.5, 0.7, 1.0])
    def test_gaussians(self, grid2_fine, sigma):
        f = sample_catalog("gaussian", {"sigma": sigma}, grid2_fine)
        report = verify_gradient_bound(f, _one(), RadiusLadder.default(grid2_fine))
        assert report.passed
        assert report.violation_fraction < 0.01

    def test_extended_segments(self, gaussian2):
        report = verify_gradient_bound(gaussian2, _one(), RadiusLadder.default(gaussian2.grid),
                                       extended=True)
        assert "segments" in report.details
        assert report.details["segments"]["all"] < 0.01

    @pytest.mark.slow
    def test_violations_do_not_grow_under_refinement(self):
        coarse = Grid.from_box(2, 64)
        fine = coarse.refined()
        fractions = []
        for grid in (coarse, fine):
            f = sample_catalog("gaussian", {"sigma": 0.5}, grid)
            fractions.append(verify_gradient_bound(f, _one(), RadiusLadder.default(grid)).violation_fraction)
        assert fractions[1] <= fractions[0]


class TestKernelIdentities:
    @pytest.mark.parametrize("n", [2, 3])
    def test_catalog_passes(self, n):
        report = verify_kernel_identities(n)
        assert report.passed
        assert len(report.details["symbols"]) == 5

    def test_subset(self):
        report = verify_kernel_identities(2, ["identity"])
        constants = report.details["symbols"][0]["constants"]
        assert np.allclose(constants, math.pi * np.eye(2), atol=1e-12)
