import itertools
import math

import numpy as np
import pytest

from src.exceptions import ModelError
from src.gridgen import ReactionDiffusionParams, generate_reaction_diffusion
from src.models import Grid
from src.rng import RngStream
from src.schelling import (
    GROUP_A,
    GROUP_B,
    VACANT,
    SchellingState,
    init_schelling,
    run_schelling,
    segregation_index,
    step_schelling,
    unsatisfied_cells,
)


def neighbourhood(cells, row, col):
    """무어-8 이웃 값 (격자 밖 제외)"""
    h, w = cells.shape
    for dr, dc in itertools.product((-1, 0, 1), repeat=2):
        if (dr, dc) != (0, 0) and 0 <= row + dr < h and 0 <= col + dc < w:
            yield cells[row + dr, col + dc]


def enumerate_unsatisfied(cells, tolerance):
    result = []
    for row, col in itertools.product(range(cells.shape[0]), range(cells.shape[1])):
        if cells[row, col] == VACANT:
            continue
        around = [v for v in neighbourhood(cells, row, col) if v != VACANT]
        same = sum(1 for v in around if v == cells[row, col])
        if around and same / len(around) < tolerance:
            result.append(row * cells.shape[1] + col)
    return result


def enumerate_index(cells):
    ratios = []
    for row, col in itertools.product(range(cells.shape[0]), range(cells.shape[1])):
        if cells[row, col] == VACANT:
            continue
        around = [v for v in neighbourhood(cells, row, col) if v != VACANT]
        if around:
            ratios.append(sum(1 for v in around if v == cells[row, col]) / len(around))
    return float(np.mean(ratios)) if ratios else 1.0


def random_state(seed, size=8, tolerance=0.5):
    cells = RngStream(seed).integers(0, 3, (size, size))
    return SchellingState(cells, tolerance)


class TestInit:
    def test_full_occupancy_single_group(self):
        state = init_schelling(Grid(np.ones((4, 4))), 1.0, 1.0, RngStream(0))
        assert np.all(state.cells == GROUP_A)

    def test_half_occupied(self):
        state = init_schelling(Grid(np.ones((5, 5))), 0.5, 0.5, RngStream(1))
        vacant, a, b = state.counts()
        assert a + b == math.ceil(25 / 2)

    def test_top_k_cells_occupied(self):
        grid = generate_reaction_diffusion(ReactionDiffusionParams(10, 2000, 100, 1.5, 0.1, 1), RngStream(2))
        state = init_schelling(grid, 0.3, 0.5, RngStream(3))
        k = math.ceil(0.3 * 100)
        order = sorted(range(100), key=lambda i: (-grid.values.ravel()[i], i))
        assert set(np.flatnonzero(state.cells.ravel() != VACANT)) == set(order[:k])


class TestStep:
    def test_zero_tolerance_never_moves(self):
        state = random_state(4, tolerance=0.0)
        assert unsatisfied_cells(state).size == 0
        moved = step_schelling(state, RngStream(5))
        assert np.array_equal(moved.cells, state.cells) and moved.step == 1

    def test_single_agent_satisfied(self):
        cells = np.zeros((3, 3), dtype=int)
        cells[1, 1] = GROUP_A
        assert unsatisfied_cells(SchellingState(cells, 0.5)).size == 0

    def test_hand_built_state_matches_enumeration(self):
        cells = np.array(
            [
                [1, 1, 0, 2, 2],
                [1, 2, 0, 2, 1],
                [0, 2, 1, 1, 0],
                [2, 2, 0, 1, 2],
                [1, 0, 2, 0, 1],
            ]
        )
        state = SchellingState(cells, 0.5)
        assert unsatisfied_cells(state).tolist() == enumerate_unsatisfied(cells, 0.5)

    def test_move_preserves_counts(self):
        state = random_state(6)
        moved = step_schelling(state, RngStream(7))
        assert moved.counts() == state.counts()
        assert np.count_nonzero(moved.cells != state.cells) == 2

    def test_no_vacancy(self):
        cells = np.array([[1, 2], [2, 1]])
        with pytest.raises(ModelError, match="no vacancy"):
            step_schelling(SchellingState(cells, 0.9), RngStream(0))


class TestSegregationIndex:
    def test_single_group(self):
        assert segregation_index(SchellingState(np.ones((4, 4), dtype=int), 0.5)) == 1.0

    def test_checkerboard_interior_half(self):
        cells = (np.indices((6, 6)).sum(axis=0) % 2) + 1
        index = segregation_index(SchellingState(cells, 0.5))
        assert index == pytest.approx(enumerate_index(cells))
        # 내부 셀은 4/8, 경계 셀은 그보다 작음
        assert 0.4 < index < 0.5

    def test_isolated_agents_only(self):
        cells = np.zeros((3, 3), dtype=int)
        cells[0, 0], cells[2, 2] = GROUP_A, GROUP_B
        assert segregation_index(SchellingState(cells, 0.5)) == 1.0

    @pytest.mark.parametrize("seed", range(5))
    def test_random_state_matches_enumeration(self, seed):
        state = random_state(seed)
        assert segregation_index(state) == pytest.approx(enumerate_index(state.cells))


class TestRun:
    def test_zero_tolerance_stops_immediately(self):
        state = random_state(8, tolerance=0.0)
        final, trajectory = run_schelling(state, 1000, RngStream(9))
        assert final.step == 0
        assert trajectory == [(0, segregation_index(state))]

    def test_trajectory_sampled_every_hundred_steps(self):
        grid = Grid(np.ones((20, 20)))
        state = init_schelling(grid, 0.8, 0.5, RngStream(10), tolerance=0.5)
        final, trajectory = run_schelling(state, 250, RngStream(11))
        steps = [step for step, _ in trajectory]
        assert steps[0] == 0 and steps[-1] == final.step
        assert all(step % 100 == 0 for step in steps[1:-1])

    def test_same_seed_same_trajectory(self):
        grid = Grid(np.ones((10, 10)))
        state = init_schelling(grid, 0.7, 0.5, RngStream(12))
        assert run_schelling(state, 300, RngStream(13)) == run_schelling(state, 300, RngStream(13))

    def test_uniform_grid_occupies_leading_rows(self):
        state = init_schelling(Grid(np.ones((20, 20))), 0.5, 0.5, RngStream(14))
        occupied = state.cells != VACANT
        assert occupied[:10].all() and not occupied[10:].any()

    @pytest.mark.slow
    @pytest.mark.parametrize("initialization", ["uniform", "reaction_diffusion"])
    def test_segregation_increases(self, initialization):
        initial, final = [], []
        for seed in range(30):
            rng = RngStream(seed)
            if initialization == "uniform":
                grid = Grid(np.ones((20, 20)))
            else:
                p = ReactionDiffusionParams(20, 5000, 100, 4.0, 0.05, 1)
                grid = generate_reaction_diffusion(p, rng.substream(2))
            state = init_schelling(grid, 0.8, 0.5, rng.substream(0), tolerance=0.5)
            end, _ = run_schelling(state, 2000, rng.substream(1))
            initial.append(segregation_index(state))
            final.append(segregation_index(end))
        assert np.mean(final) > np.mean(initial)
