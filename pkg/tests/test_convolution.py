import numpy as np
import pytest

from src.core.catalog import sample_catalog
from src.core.convolution import (
    ConvolutionEngine,
    RadiusLadder,
    TruncationPolicy,
    get_engine,
    resolve_workers,
    truncation_weights,
)
from src.core.errors import DomainError
from src.core.grid import Field, Grid
from src.core.kernels import KernelSpec
from src.core.symbols import create_symbol


class TestRadiusLadder:
    def test_geometric_radii(self):
        ladder = RadiusLadder(0.1, 1.0, ratio=2.0)
        assert ladder.radii == pytest.approx((0.1, 0.2, 0.4, 0.8))

    def test_endpoint_on_rung_is_kept(self):
        ladder = RadiusLadder(0.25, 1.0, ratio=2.0)
        assert ladder.radii == pytest.approx((0.25, 0.5, 1.0))

    def test_explicit_radii_sorted(self):
        ladder = RadiusLadder.from_radii([0.8, 0.2, 0.4], include_zero=True)
        assert ladder.radii == (0.2, 0.4, 0.8)
        assert ladder.include_zero
        assert len(ladder) == 3

    @pytest.mark.parametrize("kwargs", [
        {"t_min": 0.1, "t_max": 1.0, "ratio": 1.0},
        {"t_min": 0.0, "t_max": 1.0},
        {"t_min": 2.0, "t_max": 1.0},
    ])
    def test_invalid_ladders(self, kwargs):
        with pytest.raises(DomainError):
            RadiusLadder(**kwargs)

    def test_empty_and_duplicate_radii(self):
        with pytest.raises(DomainError):
            RadiusLadder.from_radii([])
        with pytest.raises(DomainError):
            RadiusLadder.from_radii([0.2, 0.2])

    def test_default_ladder(self, grid2):
        ladder = RadiusLadder.default(grid2)
        assert ladder.radii[0] == pytest.approx(grid2.h)
        assert ladder.radii[-1] <= grid2.diameter
        assert all(b > a for a, b in zip(ladder.radii, ladder.radii[1:]))

    def test_validate_rejects_subgrid_radius(self, grid2):
        with pytest.raises(DomainError):
            RadiusLadder.from_radii([grid2.h / 2, 1.0]).validate(grid2)


class TestTruncationWeights:
    def _lattice(self, h=0.1, size=15):
        axis = h * np.arange(-size, size + 1)
        coords = np.meshgrid(axis, axis, indexing="ij", sparse=True)
        radius = np.sqrt(coords[0] ** 2 + coords[1] ** 2)
        return coords, radius

    def test_policy_validation(self):
        with pytest.raises(DomainError):
            TruncationPolicy("overlap", 1)
        with pytest.raises(DomainError):
            TruncationPolicy("smooth")
        assert TruncationPolicy("center", 1).key == ("center", 0)

    def test_center_mode_is_indicator(self):
        coords, radius = self._lattice()
        weights = truncation_weights(coords, radius, 0.1, 0.5, TruncationPolicy("center"))
        assert np.array_equal(weights, (radius >= 0.5).astype(float))

    def test_overlap_weights_bounded_and_monotone(self):
        coords, radius = self._lattice()
        policy = TruncationPolicy()
        previous = None
        for t in (0.1, 0.25, 0.5, 0.9):
            weights = truncation_weights(coords, radius, 0.1, t, policy)
            assert weights.min() >= 0.0 and weights.max() <= 1.0
            assert weights[radius == 0.0].max() == 0.0
            if previous is not None:
                assert np.all(weights <= previous)
            previous = weights

    def test_overlap_weights_nondecreasing_in_radius(self):
        coords, radius = self._lattice()
        weights = truncation_weights(coords, radius, 0.1, 0.45, TruncationPolicy())
        row = weights[15, 15:]
        assert np.all(np.diff(row) >= 0.0)


def test_resolve_workers(monkeypatch):
    assert resolve_workers(3) == 3
    monkeypatch.setenv("MAXPOT_THREADS", "2")
    assert resolve_workers() == 2
    monkeypatch.setenv("MAXPOT_THREADS", "many")
    assert resolve_workers() >= 1


def test_shared_engine_follows_thread_setting(monkeypatch, grid2_small):
    monkeypatch.setenv("MAXPOT_THREADS", "1")
    single = get_engine(grid2_small)
    assert single.workers == 1
    assert get_engine(grid2_small) is single
    monkeypatch.setenv("MAXPOT_THREADS", "3")
    threaded = get_engine(grid2_small)
    assert threaded is not single
    assert threaded.workers == 3


class TestEngine:
    @pytest.mark.parametrize("n, res", [(2, 16), (3, 16)])
    def test_fft_matches_direct(self, n, res):
        grid = Grid.from_box(n, res)
        engine = ConvolutionEngine(grid, workers=1)
        policy = TruncationPolicy()
        f = sample_catalog("gaussian", {"sigma": 0.7, "center": (0.3,) + (0.0,) * (n - 1)}, grid)
        for spec, gradient in [
            (KernelSpec.potential(create_symbol("one", n)), False),
            (KernelSpec.potential(create_symbol("one", n)), True),
            (KernelSpec.singular(create_symbol("coordinate", n)), False),
        ]:
            fast = engine.apply(f, spec, 0.5, policy, gradient=gradient)
            slow = engine.apply(f, spec, 0.5, policy, gradient=gradient, method="direct")
            assert np.max(np.abs(fast - slow)) <= 1e-10 * np.max(np.abs(slow))

    def test_fft_matches_direct_untruncated_vector(self, grid2_small):
        engine = ConvolutionEngine(grid2_small, workers=1)
        spec = KernelSpec.potential(create_symbol("identity", 2))
        base = sample_catalog("random_bandlimited", {"seed": 2}, grid2_small)
        f = Field(grid2_small, np.stack([base.samples[0], -0.5 * base.samples[0]]))
        fast = engine.apply(f, spec, None, TruncationPolicy())
        slow = engine.apply(f, spec, None, TruncationPolicy(), method="direct")
        assert np.max(np.abs(fast - slow)) <= 1e-10 * np.max(np.abs(slow))

    def test_padded_shape_avoids_wraparound(self, grid2):
        engine = ConvolutionEngine(grid2, workers=1)
        assert all(p >= 2 * d - 1 for p, d in zip(engine.padded, grid2.dims))

    def test_spectrum_cache_reuse(self, grid2):
        engine = ConvolutionEngine(grid2, workers=1, cache_size=2)
        spec = KernelSpec.potential(create_symbol("one", 2))
        policy = TruncationPolicy()
        first = engine.kernel_spectrum(spec, 0.5, policy)
        assert engine.kernel_spectrum(spec, 0.5, policy) is first
        engine.kernel_spectrum(spec, 0.6, policy)
        engine.kernel_spectrum(spec, 0.7, policy)
        assert engine.kernel_spectrum(spec, 0.5, policy) is not first

    def test_support_gate_gives_exact_zero(self, grid2):
        engine = ConvolutionEngine(grid2, workers=1)
        spec = KernelSpec.potential(create_symbol("one", 2))
        f = sample_catalog("ball_indicator", {"radius": 0.5}, grid2)
        out = engine.apply(f, spec, 1.0, TruncationPolicy())
        origin = grid2.node_index((0.0, 0.0))
        assert out[(0,) + origin] == 0.0

    def test_rejects_mismatched_inputs(self, grid2, gaussian2):
        engine = ConvolutionEngine(grid2, workers=1)
        identity = KernelSpec.potential(create_symbol("identity", 2))
        with pytest.raises(DomainError):
            engine.apply(gaussian2, identity, 0.5, TruncationPolicy())
        one = KernelSpec.potential(create_symbol("one", 2))
        with pytest.raises(DomainError):
            engine.apply(gaussian2, one, grid2.h / 4, TruncationPolicy())
        with pytest.raises(DomainError):
            engine.apply(gaussian2, one, 0.5, TruncationPolicy(), method="spectral")
