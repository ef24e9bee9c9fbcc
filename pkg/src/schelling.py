# src/schelling.py
"""Schelling 분리 모델 (비동기 단일 에이전트 이동, 무어-8 이웃, 비토러스)"""
import logging
import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from scipy.signal import convolve2d

from src.exceptions import ModelError, ValidationError
from src.models import Grid
from src.rng import RngStream

logger = logging.getLogger(__name__)

VACANT, GROUP_A, GROUP_B = 0, 1, 2
TRAJECTORY_EVERY = 100

_MOORE = np.array([[1, 1, 1], [1, 0, 1], [1, 1, 1]])


@dataclass(frozen=True, eq=False)
class SchellingState:
    """Schelling 상태 (cells: 0 빈칸, 1 그룹A, 2 그룹B)"""

    cells: np.ndarray
    tolerance: float
    step: int = 0

    def __post_init__(self):
        cells = np.array(self.cells, dtype=np.int8)
        if cells.ndim != 2 or cells.size == 0:
            raise ValidationError("cells must be a non-empty 2D array")
        if not np.isin(cells, (VACANT, GROUP_A, GROUP_B)).all():
            raise ValidationError("cells must be 0 (vacant), 1 (A) or 2 (B)")
        if not 0 <= self.tolerance <= 1:
            raise ValidationError("tolerance must be in [0, 1]")
        if self.step < 0:
            raise ValidationError("step must be >= 0")
        cells.flags.writeable = False
        object.__setattr__(self, "cells", cells)

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    def counts(self) -> Tuple[int, int, int]:
        """(빈칸, A, B) 개수"""
        return (
            int((self.cells == VACANT).sum()),
            int((self.cells == GROUP_A).sum()),
            int((self.cells == GROUP_B).sum()),
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, SchellingState):
            return NotImplemented
        return (
            self.tolerance == other.tolerance
            and self.step == other.step
            and bool(np.array_equal(self.cells, other.cells))
        )


def neighbour_counts(cells: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(같은 그룹 이웃 수, 점유된 이웃 수): 무어-8, 격자 밖은 빈칸 취급"""
    count_a = convolve2d((cells == GROUP_A).astype(int), _MOORE, mode="same", boundary="fill")
    count_b = convolve2d((cells == GROUP_B).astype(int), _MOORE, mode="same", boundary="fill")
    same = np.where(cells == GROUP_A, count_a, np.where(cells == GROUP_B, count_b, 0))
    return same, count_a + count_b


def unsatisfied_cells(state: SchellingState) -> np.ndarray:
    """불만족 에이전트의 행 우선 인덱스 (점유 이웃이 없으면 만족)"""
    same, occupied = neighbour_counts(state.cells)
    agents = state.cells != VACANT
    unhappy = agents & (occupied > 0) & (same < state.tolerance * occupied)
    return np.flatnonzero(unhappy)


def init_schelling(
    grid: Grid,
    occupied_fraction: float,
    mix_ratio: float,
    rng: RngStream,
    tolerance: float = 0.5,
) -> SchellingState:
    """그리드 값 상위 ceil(fraction * n) 셀 점유 (동률은 행 우선), 각 셀 확률 mixRatio로 그룹A"""
    if not 0 < occupied_fraction <= 1:
        raise ValidationError("occupiedFraction must be in (0, 1]")
    if not 0 <= mix_ratio <= 1:
        raise ValidationError("mixRatio must be in [0, 1]")

    n = grid.size
    k = min(n, math.ceil(occupied_fraction * n - 1e-9))
    order = np.argsort(-grid.values.ravel(), kind="stable")
    occupied = np.sort(order[:k])

    cells = np.zeros(n, dtype=np.int8)
    draws = rng.random(k)
    cells[occupied] = np.where(draws < mix_ratio, GROUP_A, GROUP_B)
    return SchellingState(cells.reshape(grid.values.shape), tolerance)


def step_schelling(state: SchellingState, rng: RngStream) -> SchellingState:
    """불만족 에이전트 하나를 균등 선택해 균등 선택한 빈칸으로 이동"""
    unhappy = unsatisfied_cells(state)
    if unhappy.size == 0:
        return SchellingState(state.cells, state.tolerance, state.step + 1)

    vacant = np.flatnonzero(state.cells == VACANT)
    if vacant.size == 0:
        raise ModelError("no vacancy: unsatisfied agents cannot move")

    mover = unhappy[int(rng.integers(0, unhappy.size))]
    target = vacant[int(rng.integers(0, vacant.size))]
    cells = state.cells.ravel().copy()
    cells[target], cells[mover] = cells[mover], VACANT
    return SchellingState(cells.reshape(state.cells.shape), state.tolerance, state.step + 1)


def segregation_index(state: SchellingState) -> float:
    """점유 이웃이 있는 에이전트의 (같은 그룹 이웃 / 점유 이웃) 평균; 해당 에이전트가 없으면 1"""
    agents = state.cells != VACANT
    if not agents.any():
        raise ValidationError("segregation index needs at least one agent")
    same, occupied = neighbour_counts(state.cells)
    counted = agents & (occupied > 0)
    if not counted.any():
        return 1.0
    return float(np.mean(same[counted] / occupied[counted]))


def run_schelling(
    state: SchellingState, max_steps: int, rng: RngStream
) -> Tuple[SchellingState, List[Tuple[int, float]]]:
    """불만족 에이전트가 없거나 max_steps에 도달할 때까지 반복

    Returns:
        (최종 상태, 100 스텝마다의 (step, 분리 지수) 궤적, 시작과 끝 포함)
    """
    trajectory = [(state.step, segregation_index(state))]
    while state.step < max_steps and unsatisfied_cells(state).size > 0:
        state = step_schelling(state, rng)
        if state.step % TRAJECTORY_EVERY == 0:
            trajectory.append((state.step, segregation_index(state)))

    if trajectory[-1][0] != state.step:
        trajectory.append((state.step, segregation_index(state)))
    logger.debug("schelling stopped at step %d", state.step)
    return state, trajectory
