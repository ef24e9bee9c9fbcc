import math

import numpy as np
import pytest

from src.exceptions import ValidationError
from src.models import Edge, Grid, Node
from src.netgen import generate_random_planar
from src.perturb import (
    DeletionStrategy,
    delete_links,
    delete_nodes,
    jitter_nodes,
    perturb_grid_noise,
    perturb_grid_poisson,
)
from src.pointgen import sample_homogeneous_poisson
from src.rng import RngStream


class TestGridNoise:
    def test_zero_sigma_is_identity(self):
        grid = Grid([[1.0, 2.0]])
        assert perturb_grid_noise(grid, 0.0, RngStream(1)) == grid

    def test_clipped_at_zero(self):
        grid = Grid(np.full((20, 20), 0.1))
        assert perturb_grid_noise(grid, 5.0, RngStream(2)).values.min() >= 0.0

    def test_mean_absolute_change_is_half_normal(self):
        grid = Grid(np.full((100, 100), 100.0))
        changed = perturb_grid_noise(grid, 1.0, RngStream(3))
        mean_change = np.abs(changed.values - grid.values).mean()
        assert mean_change == pytest.approx(math.sqrt(2 / math.pi), rel=0.05)

    def test_negative_sigma(self):
        with pytest.raises(ValidationError):
            perturb_grid_noise(Grid([[1.0]]), -1.0, RngStream(0))


class TestGridPoisson:
    def test_zero_lambda_is_identity(self):
        grid = Grid(np.ones((5, 5)))
        assert perturb_grid_poisson(grid, 0.0, 2.0, RngStream(4)) == grid

    def test_mass_increase_is_delta_times_points(self):
        grid = Grid(np.ones((10, 10)))
        result = perturb_grid_poisson(grid, 0.5, 2.5, RngStream(5))
        # 같은 스트림 상태에서 같은 점 수
        n = len(sample_homogeneous_poisson(0.5, grid.window, RngStream(5)))
        assert result.total - grid.total == pytest.approx(2.5 * n)

    @pytest.mark.slow
    def test_expected_mass_increase(self):
        grid = Grid.zeros(10, 10)
        increases = [perturb_grid_poisson(grid, 0.2, 1.5, RngStream(s)).total for s in range(500)]
        expected = 1.5 * 0.2 * 100
        standard_error = 1.5 * math.sqrt(0.2 * 100) / math.sqrt(500)
        assert abs(np.mean(increases) - expected) < 3 * standard_error


class TestDeletion:
    def test_zero_is_identity(self, triangle):
        assert delete_nodes(triangle, 0, "random", RngStream(0)) == triangle
        assert delete_links(triangle, 0, "targeted", RngStream(0)) == triangle

    def test_delete_one_node_of_triangle(self, triangle):
        net = delete_nodes(triangle, 1, "random", RngStream(1))
        assert len(net.nodes) == 2 and len(net.edges) == 1

    def test_targeted_removes_path_centre(self, path_abc):
        net = delete_nodes(path_abc, 1, DeletionStrategy.TARGETED, RngStream(0))
        assert net.node_ids == [0, 2]
        assert net.edges == ()

    def test_targeted_links_removes_bridge_first(self, path_abc):
        net = path_abc.with_nodes(path_abc.nodes + (Node(3, 4, 0),), path_abc.edges)
        net = net.with_edges(net.edges + (Edge(2, 3, 1.0),))
        # 링크 1-2는 쌍 4개, 나머지는 3개
        assert delete_links(net, 1, "targeted", RngStream(0)).edge_pairs() == [(0, 1), (2, 3)]

    def test_random_deletes_exact_count(self):
        net = generate_random_planar(30, 0.5, (0, 0, 1, 1), RngStream(2))
        assert len(delete_links(net, 7, "randomUniform", RngStream(3)).edges) == len(net.edges) - 7
        assert len(delete_nodes(net, 4, "random", RngStream(3)).nodes) == 26

    def test_k_too_large(self, triangle):
        with pytest.raises(ValidationError, match="k too large"):
            delete_links(triangle, 4, "random", RngStream(0))

    def test_unknown_strategy(self, triangle):
        with pytest.raises(ValidationError, match="unknown deletion strategy"):
            delete_links(triangle, 1, "degree", RngStream(0))


class TestJitter:
    def test_zero_sigma_is_identity(self, triangle):
        assert jitter_nodes(triangle, 0.0, RngStream(0)) == triangle

    def test_topology_kept_and_lengths_recomputed(self):
        net = generate_random_planar(20, 0.5, (0, 0, 1, 1), RngStream(4))
        moved = jitter_nodes(net, 0.05, RngStream(5))
        assert moved.edge_pairs() == net.edge_pairs()
        for edge in moved.edges:
            a, b = moved.node(edge.source), moved.node(edge.target)
            assert edge.length == pytest.approx(math.hypot(a.x - b.x, a.y - b.y), abs=1e-12)
        assert not np.array_equal(moved.positions(), net.positions())
