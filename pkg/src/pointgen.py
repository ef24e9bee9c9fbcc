# src/pointgen.py
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.exceptions import ValidationError
from src.models import Grid, PointSet, Window
from src.rng import RngStream

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PoissonParams:
    """포아송 과정 파라미터 (intensity 또는 intensity_grid 중 하나만)"""

    window: Window
    intensity: Optional[float] = None
    intensity_grid: Optional[Grid] = None

    def __post_init__(self):
        if (self.intensity is None) == (self.intensity_grid is None):
            raise ValidationError("exactly one of intensity / intensityGrid must be set")
        if self.intensity is not None and not self.intensity >= 0:
            raise ValidationError("intensity must be >= 0")


def _uniform_in_window(n: int, window: Window, rng: RngStream) -> np.ndarray:
    xmin, ymin, xmax, ymax = window
    xs = rng.uniform(xmin, xmax, n)
    ys = rng.uniform(ymin, ymax, n)
    return np.column_stack([xs, ys])


def sample_homogeneous_poisson(intensity: float, window: Window, rng: RngStream) -> PointSet:
    """균질 포아송 점 과정: N ~ Poisson(intensity * 면적), 위치는 균등"""
    if not intensity >= 0:
        raise ValidationError("intensity must be >= 0")
    empty = PointSet(window)
    n = rng.poisson(intensity * empty.area)
    return PointSet(empty.window, _uniform_in_window(n, empty.window, rng))


def sample_inhomogeneous_poisson(intensity_grid: Grid, rng: RngStream) -> PointSet:
    """비균질 포아송 점 과정 (솎아내기)

    최대 셀 강도로 균질 표본을 뽑고, 점이 속한 셀의 강도/최대 강도 확률로 유지한다.
    그리드 범위가 윈도우가 된다.
    """
    window = intensity_grid.window
    lam_max = float(intensity_grid.values.max())
    if lam_max <= 0:
        return PointSet(window)

    candidates = sample_homogeneous_poisson(lam_max, window, rng).points
    if len(candidates) == 0:
        return PointSet(window)

    cells = [intensity_grid.cell_of(x, y) for x, y in candidates]
    accept_prob = np.array([intensity_grid.values[r, c] for r, c in cells]) / lam_max
    keep = rng.random(len(candidates)) < accept_prob
    logger.debug("thinning kept %d of %d candidates", int(keep.sum()), len(candidates))
    return PointSet(window, candidates[keep])


def sample_poisson(p: PoissonParams, rng: RngStream) -> PointSet:
    if p.intensity_grid is not None:
        return sample_inhomogeneous_poisson(p.intensity_grid, rng)
    return sample_homogeneous_poisson(p.intensity, p.window, rng)


def sample_from_grid(grid: Grid, n: int, rng: RngStream) -> PointSet:
    """고정 개수 n개 점을 셀 값 비례 확률로 뽑은 셀 안에서 균등 배치"""
    if n < 0:
        raise ValidationError("n must be >= 0")
    total = grid.total
    if n > 0 and total <= 0:
        raise ValidationError("cannot sample points from an all-zero grid")
    if n == 0:
        return PointSet(grid.window)

    probs = grid.values.ravel() / total
    flat_cells = rng.generator.choice(grid.size, size=n, p=probs)
    rows, cols = np.divmod(flat_cells, grid.width)
    levels = grid.height - 1 - rows
    offsets = rng.random((n, 2))
    xs = (cols + offsets[:, 0]) * grid.cell_size
    ys = (levels + offsets[:, 1]) * grid.cell_size
    return PointSet(grid.window, np.column_stack([xs, ys]))
