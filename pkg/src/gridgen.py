# src/gridgen.py
"""합성 래스터 생성기

- 중간 규모 인구 밀도: 반응-확산 형태발생, 커널 혼합
- 미시 규모 건물 배치: 사이트 퍼콜레이션, 절차적 블록
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage

from src.exceptions import ValidationError
from src.models import Grid
from src.rng import RngStream

logger = logging.getLogger(__name__)

BLOCK_ATTEMPTS = 1000
KERNELS = ("exponential", "gaussian")


def _check_size(size: int) -> None:
    if not isinstance(size, (int, np.integer)) or size < 1:
        raise ValidationError(f"size must be a positive integer, got {size!r}")


@dataclass(frozen=True)
class ReactionDiffusionParams:
    """반응-확산 모델 파라미터"""

    size: int
    total_population: float
    growth_rate: float
    alpha: float
    beta: float
    diffusion_steps: int

    def __post_init__(self):
        _check_size(self.size)
        if not self.total_population > 0:
            raise ValidationError("totalPopulation must be > 0")
        if not self.growth_rate > 0:
            raise ValidationError("growthRate must be > 0")
        if not self.alpha >= 0:
            raise ValidationError("alpha must be >= 0")
        if not 0 <= self.beta <= 1:
            raise ValidationError("beta must be in [0, 1]")
        if self.diffusion_steps < 0:
            raise ValidationError("diffusionSteps must be >= 0")


@dataclass(frozen=True)
class KernelMixtureParams:
    size: int
    n_centers: int
    max_value: float
    radius: float
    kernel: str = "exponential"

    def __post_init__(self):
        _check_size(self.size)
        if self.n_centers < 1:
            raise ValidationError("nCenters must be >= 1")
        if not self.max_value > 0:
            raise ValidationError("maxValue must be > 0")
        if not self.radius > 0:
            raise ValidationError("radius must be > 0")
        if self.kernel not in KERNELS:
            raise ValidationError(f"kernel must be one of {KERNELS}, got {self.kernel!r}")


@dataclass(frozen=True)
class PercolationParams:
    size: int
    occupation_probability: float
    keep_largest_cluster_only: bool = False

    def __post_init__(self):
        _check_size(self.size)
        if not 0 <= self.occupation_probability <= 1:
            raise ValidationError("occupationProbability must be in [0, 1]")


@dataclass(frozen=True)
class BlocksParams:
    size: int
    n_blocks: int
    min_block_side: int
    max_block_side: int
    allow_overlap: bool = True

    def __post_init__(self):
        _check_size(self.size)
        if self.n_blocks < 0:
            raise ValidationError("nBlocks must be >= 0")
        if not 1 <= self.min_block_side <= self.max_block_side <= self.size:
            raise ValidationError("block sides must satisfy 1 <= min <= max <= size")


# ========== Reaction-diffusion ==========


def diffuse(values: np.ndarray, beta: float) -> np.ndarray:
    """확산 1회: 각 셀이 질량의 beta 비율을 존재하는 폰 노이만 이웃에게 균등 분배"""
    height, width = values.shape
    neighbours = np.full(values.shape, 4.0)
    neighbours[0, :] -= 1
    neighbours[-1, :] -= 1
    neighbours[:, 0] -= 1
    neighbours[:, -1] -= 1

    # 1x1 그리드는 이웃이 없으므로 그대로
    if height == 1 and width == 1:
        return values.copy()

    with np.errstate(divide="ignore", invalid="ignore"):
        share = np.where(neighbours > 0, beta * values / neighbours, 0.0)
    sent = np.where(neighbours > 0, beta * values, 0.0)

    result = values - sent
    result[1:, :] += share[:-1, :]
    result[:-1, :] += share[1:, :]
    result[:, 1:] += share[:, :-1]
    result[:, :-1] += share[:, 1:]
    return result


def _attachment_probabilities(values: np.ndarray, alpha: float) -> np.ndarray:
    flat = values.ravel()
    if flat.sum() <= 0:
        return np.full(flat.size, 1.0 / flat.size)
    weights = np.power(flat, alpha)
    total = weights.sum()
    if not np.isfinite(total) or total <= 0:
        # 큰 alpha에서 오버플로: 최댓값으로 정규화 후 재계산
        weights = np.power(flat / flat.max(), alpha)
        total = weights.sum()
    return weights / total


def generate_reaction_diffusion(
    p: ReactionDiffusionParams, rng: RngStream, trace: Optional[list] = None
) -> Grid:
    """반응-확산 형태발생 그리드 생성

    매 단계: (a) 직전 상태로 고정한 선호 부착 확률 (P_i^alpha) 로 growthRate 만큼
    인구를 단위 증분으로 배치 (b) diffusionSteps 회 확산. 총량이 totalPopulation에
    도달하면 종료한다. 마지막 단계는 남은 양만 배치하므로 최종 질량 = totalPopulation.

    Args:
        trace: 리스트를 넘기면 (확산 전 질량, 확산 후 질량) 쌍을 매 확산마다 기록
    """
    logger.debug("reaction-diffusion %s seed=%d", p, rng.seed)
    values = np.zeros((p.size, p.size))
    total = 0.0
    gen = rng.generator

    while total < p.total_population:
        increment = min(p.growth_rate, p.total_population - total)
        units = int(math.floor(increment))
        remainder = increment - units
        probs = _attachment_probabilities(values, p.alpha)

        counts = gen.multinomial(units, probs) if units > 0 else np.zeros(probs.size)
        flat = values.ravel() + counts
        if remainder > 0:
            flat[gen.choice(probs.size, p=probs)] += remainder
        values = flat.reshape(values.shape)
        total += increment

        for _ in range(p.diffusion_steps):
            before = values.sum()
            values = diffuse(values, p.beta)
            if trace is not None:
                trace.append((before, values.sum()))

    return Grid(np.maximum(values, 0.0))


# ========== Kernel mixture ==========


def kernel_mixture_from_centers(
    size: int,
    centers: Sequence[Tuple[float, float]],
    max_value: float,
    radius: float,
    kernel: str = "exponential",
) -> Grid:
    """주어진 중심들로 커널 혼합 그리드 계산 (중심 좌표는 기하 좌표계)"""
    grid = Grid.zeros(size, size)
    xs, ys = grid.cell_centers()
    values = np.zeros((size, size))
    for cx, cy in centers:
        u = np.hypot(xs - cx, ys - cy) / radius
        if kernel == "gaussian":
            values += max_value * np.exp(-0.5 * u * u)
        else:
            values += max_value * np.exp(-u)
    return Grid(values)


def generate_kernel_mixture(p: KernelMixtureParams, rng: RngStream) -> Grid:
    """커널 혼합 그리드: 중심은 그리드 셀 중심에서 균등 추출"""
    cols = rng.integers(0, p.size, p.n_centers)
    levels = rng.integers(0, p.size, p.n_centers)
    centers = [(c + 0.5, l + 0.5) for c, l in zip(cols, levels)]
    logger.debug("kernel mixture centers=%s", centers)
    return kernel_mixture_from_centers(p.size, centers, p.max_value, p.radius, p.kernel)


# ========== Percolation ==========


def largest_cluster(mask: np.ndarray) -> np.ndarray:
    """4-연결 최대 클러스터만 남김 (동률이면 행 우선 인덱스가 가장 작은 클러스터)"""
    labels, count = ndimage.label(mask)
    if count == 0:
        return np.zeros_like(mask, dtype=bool)
    sizes = np.bincount(labels.ravel())[1:]
    # label 번호는 행 우선 스캔의 첫 등장 순서이므로 argmax가 동률 규칙을 만족
    keep = int(np.argmax(sizes)) + 1
    return labels == keep


def count_clusters(mask: np.ndarray) -> int:
    _, count = ndimage.label(mask)
    return int(count)


def generate_percolation(p: PercolationParams, rng: RngStream) -> Grid:
    """사이트 퍼콜레이션 (0/1 그리드)"""
    occupied = rng.random((p.size, p.size)) < p.occupation_probability
    if p.keep_largest_cluster_only:
        occupied = largest_cluster(occupied)
    return Grid(occupied.astype(float))


# ========== Procedural blocks ==========


def _overlaps(a: Tuple[int, int, int, int], b: Tuple[int, int, int, int]) -> bool:
    ar, ac, ah, aw = a
    br, bc, bh, bw = b
    return ar < br + bh and br < ar + ah and ac < bc + bw and bc < ac + aw


def place_blocks(p: BlocksParams, rng: RngStream) -> list:
    """블록 사각형 목록 (row, col, height, width)"""
    blocks = []
    for _ in range(p.n_blocks):
        attempts = 1 if p.allow_overlap else BLOCK_ATTEMPTS
        for _ in range(attempts):
            h = int(rng.integers(p.min_block_side, p.max_block_side + 1))
            w = int(rng.integers(p.min_block_side, p.max_block_side + 1))
            r = int(rng.integers(0, p.size - h + 1))
            c = int(rng.integers(0, p.size - w + 1))
            candidate = (r, c, h, w)
            if p.allow_overlap or not any(_overlaps(candidate, b) for b in blocks):
                blocks.append(candidate)
                break
        else:
            logger.debug("block skipped after %d attempts", attempts)
    return blocks


def generate_blocks(p: BlocksParams, rng: RngStream) -> Grid:
    """절차적 블록 배치 (0/1 그리드)"""
    values = np.zeros((p.size, p.size))
    for r, c, h, w in place_blocks(p, rng):
        values[r : r + h, c : c + w] = 1.0
    return Grid(values)
