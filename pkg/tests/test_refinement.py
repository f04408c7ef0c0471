import math

import pytest

from src.core.errors import OracleError
from src.evaluation.refinement import ORACLES, refinement_study


def test_unknown_pair():
    with pytest.raises(OracleError):
        refinement_study("maximal_singular", "gaussian", [32, 64])


def test_planar_only():
    with pytest.raises(OracleError):
        refinement_study("truncated_potential", "gaussian", [16, 32], n=3)


def test_truncated_gaussian_converges():
    table = refinement_study("truncated_potential", "gaussian", [32, 64, 128])
    assert [row.res for row in table.rows] == [32, 64, 128]
    assert table.fitted_order >= 1.0
    assert table.rows[-1].error < 1e-2 * abs(table.exact[0])


def test_spherical_average_is_second_order():
    table = refinement_study("spherical_average", "gaussian", [32, 64, 128])
    assert table.exact[0] == pytest.approx(math.exp(-1.0))
    assert table.fitted_order >= 1.8


def test_truncated_ball_value():
    table = refinement_study("truncated_potential", "ball_indicator", [128])
    assert table.rows[0].value[0] == pytest.approx(math.pi, rel=0.02)
    assert table.rows[0].order is None


def test_riesz_ball_value():
    table = refinement_study("riesz_potential", "ball_indicator", [128])
    assert table.rows[0].value[0] == pytest.approx(2 * math.pi, rel=0.02)


def test_surface_half_space():
    table = refinement_study("surface_convolution", "half_space", [64])
    value = table.rows[0].value
    assert value[0] == pytest.approx(-2.0, rel=0.02)
    assert abs(value[1]) < 0.04


def test_interpolation_is_exact_for_affine():
    table = refinement_study("interpolate", "affine", [32, 64])
    assert all(row.error < 1e-12 for row in table.rows)
    assert all(row.order is None for row in table.rows)
    assert table.fitted_order is None


def test_every_oracle_has_a_description():
    assert all(oracle.description for oracle in ORACLES.values())
