import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import ndimage, stats

from src.exceptions import ValidationError
from src.gridgen import (
    BlocksParams,
    KernelMixtureParams,
    PercolationParams,
    ReactionDiffusionParams,
    diffuse,
    generate_blocks,
    generate_kernel_mixture,
    generate_percolation,
    generate_reaction_diffusion,
    kernel_mixture_from_centers,
    largest_cluster,
    place_blocks,
)
from src.indicators import grid_morphology
from src.rng import RngStream


class TestReactionDiffusion:
    def test_total_mass_exact(self):
        p = ReactionDiffusionParams(10, 1000, 100, 0.0, 0.0, 0)
        grid = generate_reaction_diffusion(p, RngStream(1))
        assert grid.total == 1000.0

    def test_partial_last_step_reaches_total(self):
        p = ReactionDiffusionParams(5, 250.5, 100, 1.0, 0.1, 1)
        assert generate_reaction_diffusion(p, RngStream(2)).total == pytest.approx(250.5, rel=1e-12)

    @pytest.mark.slow
    def test_alpha_zero_is_uniform(self):
        p = ReactionDiffusionParams(10, 1000, 100, 0.0, 0.0, 0)
        counts = sum(generate_reaction_diffusion(p, RngStream(seed)).values for seed in range(50))
        _, pvalue = stats.chisquare(counts.ravel())
        assert pvalue > 0.001

    def test_diffusion_conserves_mass(self):
        p = ReactionDiffusionParams(12, 3000, 100, 1.5, 0.2, 3)
        trace = []
        generate_reaction_diffusion(p, RngStream(3), trace=trace)
        assert trace
        for before, after in trace:
            assert after == pytest.approx(before, rel=1e-9)

    def test_diffuse_stencil(self):
        values = np.zeros((3, 3))
        values[1, 1] = 1.0
        result = diffuse(values, 0.4)
        assert result[1, 1] == pytest.approx(0.6)
        assert result[0, 1] == result[1, 0] == result[1, 2] == result[2, 1] == pytest.approx(0.1)
        assert result[0, 0] == 0.0

    def test_diffuse_corner_splits_between_two_neighbours(self):
        values = np.zeros((2, 2))
        values[0, 0] = 1.0
        result = diffuse(values, 0.5)
        assert result[0, 1] == result[1, 0] == pytest.approx(0.25)
        assert result.sum() == pytest.approx(1.0)

    def test_single_cell_grid(self):
        grid = generate_reaction_diffusion(ReactionDiffusionParams(1, 10, 3, 1.0, 0.5, 2), RngStream(0))
        assert grid.values.tolist() == [[10.0]]

    def test_same_seed_same_grid(self):
        p = ReactionDiffusionParams(10, 500, 50, 1.2, 0.05, 1)
        assert generate_reaction_diffusion(p, RngStream(5)) == generate_reaction_diffusion(p, RngStream(5))

    @pytest.mark.slow
    def test_higher_alpha_more_autocorrelated(self):
        def mean_moran(alpha):
            p = ReactionDiffusionParams(20, 5000, 100, alpha, 0.05, 1)
            return np.mean(
                [grid_morphology(generate_reaction_diffusion(p, RngStream(s))).moran for s in range(20)]
            )

        assert mean_moran(4.0) > mean_moran(0.5)

    @settings(max_examples=50)
    @given(
        size=st.integers(1, 8),
        total=st.floats(1.0, 2000.0),
        growth=st.floats(1.0, 100.0),
        alpha=st.floats(0.0, 4.0),
        beta=st.floats(0.0, 1.0),
        steps=st.integers(0, 3),
        seed=st.integers(0, 2**32),
    )
    def test_mass_within_one_step_of_total(self, size, total, growth, alpha, beta, steps, seed):
        grid = generate_reaction_diffusion(ReactionDiffusionParams(size, total, growth, alpha, beta, steps), RngStream(seed))
        assert grid.values.shape == (size, size)
        assert abs(grid.total - total) <= growth
        assert np.all(grid.values >= 0)

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(total_population=0),
            dict(growth_rate=0),
            dict(alpha=-1),
            dict(beta=1.5),
            dict(diffusion_steps=-1),
            dict(size=0),
        ],
    )
    def test_invalid_params(self, kwargs):
        base = dict(size=10, total_population=100, growth_rate=10, alpha=1, beta=0.1, diffusion_steps=1)
        with pytest.raises(ValidationError):
            ReactionDiffusionParams(**{**base, **kwargs})


class TestKernelMixture:
    def test_exponential_peak(self):
        grid = kernel_mixture_from_centers(5, [(2.5, 2.5)], 7.0, 2.0, "exponential")
        assert grid.values[2, 2] == 7.0

    def test_gaussian_at_radius(self):
        grid = kernel_mixture_from_centers(5, [(0.5, 0.5)], 3.0, 2.0, "gaussian")
        # (row 4, col 2) 중심 = (2.5, 0.5), 거리 2
        assert grid.values[4, 2] == pytest.approx(3.0 * math.exp(-0.5), rel=1e-12)

    def test_three_centres_match_direct_sum(self):
        p = KernelMixtureParams(15, 3, 10.0, 3.0)
        grid = generate_kernel_mixture(p, RngStream(7))

        rng = RngStream(7)
        cols = rng.integers(0, 15, 3)
        levels = rng.integers(0, 15, 3)
        for row in range(15):
            for col in range(15):
                x, y = col + 0.5, 15 - 1 - row + 0.5
                expected = sum(
                    10.0 * math.exp(-math.hypot(x - (c + 0.5), y - (l + 0.5)) / 3.0)
                    for c, l in zip(cols, levels)
                )
                assert grid.values[row, col] == pytest.approx(expected, rel=1e-12)

    @given(
        centers=st.lists(st.tuples(st.floats(0.0, 12.0), st.floats(0.0, 12.0)), min_size=1, max_size=4),
        radius=st.floats(0.5, 6.0),
        kernel=st.sampled_from(["exponential", "gaussian"]),
    )
    def test_mirrored_centres_mirror_grid(self, centers, radius, kernel):
        size = 12
        grid = kernel_mixture_from_centers(size, centers, 5.0, radius, kernel)
        flipped_x = kernel_mixture_from_centers(size, [(size - x, y) for x, y in centers], 5.0, radius, kernel)
        flipped_y = kernel_mixture_from_centers(size, [(x, size - y) for x, y in centers], 5.0, radius, kernel)
        np.testing.assert_allclose(flipped_x.values, grid.values[:, ::-1], rtol=1e-9, atol=1e-12)
        np.testing.assert_allclose(flipped_y.values, grid.values[::-1, :], rtol=1e-9, atol=1e-12)

    def test_unknown_kernel(self):
        with pytest.raises(ValidationError, match="kernel"):
            KernelMixtureParams(10, 1, 1.0, 1.0, "cauchy")


class TestPercolation:
    @pytest.mark.parametrize("p, expected", [(1.0, 1.0), (0.0, 0.0)])
    def test_extremes(self, p, expected):
        grid = generate_percolation(PercolationParams(8, p), RngStream(0))
        assert np.all(grid.values == expected)

    @pytest.mark.parametrize("p, seed", [(0.3, 11), (0.6, 12), (0.85, 13)])
    def test_occupation_frequency(self, p, seed):
        grid = generate_percolation(PercolationParams(100, p), RngStream(seed))
        standard_error = math.sqrt(p * (1 - p) / grid.size)
        assert abs(grid.values.mean() - p) < 3 * standard_error

    def test_largest_cluster_is_single_component(self):
        grid = generate_percolation(PercolationParams(50, 0.6, True), RngStream(4))
        _, count = ndimage.label(grid.values > 0)
        assert count == 1

    def test_largest_cluster_tie_keeps_first_row_major(self):
        mask = np.array([[0, 1, 0, 1], [0, 1, 0, 1]], dtype=bool)
        kept = largest_cluster(mask)
        assert kept[:, 1].all() and not kept[:, 3].any()


class TestBlocks:
    def test_no_blocks(self):
        assert generate_blocks(BlocksParams(10, 0, 1, 3), RngStream(0)).total == 0.0

    def test_single_forced_block(self):
        grid = generate_blocks(BlocksParams(10, 1, 3, 3), RngStream(3))
        rows, cols = np.nonzero(grid.values)
        assert len(rows) == 9
        assert rows.max() - rows.min() == 2 and cols.max() - cols.min() == 2

    def test_no_overlap(self):
        blocks = place_blocks(BlocksParams(30, 5, 2, 5, allow_overlap=False), RngStream(8))
        for i, (r1, c1, h1, w1) in enumerate(blocks):
            for r2, c2, h2, w2 in blocks[i + 1 :]:
                disjoint_rows = r1 + h1 <= r2 or r2 + h2 <= r1
                disjoint_cols = c1 + w1 <= c2 or c2 + w2 <= c1
                assert disjoint_rows or disjoint_cols

    def test_block_sides_bounded_by_size(self):
        with pytest.raises(ValidationError):
            BlocksParams(5, 1, 2, 6)
