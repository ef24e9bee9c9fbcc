# src/perturb.py
import logging
from enum import Enum
from typing import List, Union

import numpy as np

from src.exceptions import ValidationError
from src.indicators import betweenness, edge_betweenness
from src.models import Edge, Grid, Node, SpatialNetwork, straight_length
from src.pointgen import sample_homogeneous_poisson
from src.rng import RngStream

logger = logging.getLogger(__name__)


class DeletionStrategy(str, Enum):
    """노드/링크 삭제 전략"""

    RANDOM = "random"
    TARGETED = "targeted"

    @classmethod
    def parse(cls, value: Union[str, "DeletionStrategy"]) -> "DeletionStrategy":
        aliases = {
            "random": cls.RANDOM,
            "randomUniform": cls.RANDOM,
            "targeted": cls.TARGETED,
            "targetedBetweennessDescending": cls.TARGETED,
        }
        if isinstance(value, cls):
            return value
        if value not in aliases:
            raise ValidationError(f"unknown deletion strategy {value!r}")
        return aliases[value]


# ========== Raster perturbations ==========


def perturb_grid_noise(grid: Grid, sigma: float, rng: RngStream) -> Grid:
    """가우시안 잡음 추가 후 0에서 절단"""
    if not sigma >= 0:
        raise ValidationError("sigma must be >= 0")
    if sigma == 0:
        return grid
    noise = rng.normal(sigma, grid.values.shape)
    return grid.with_values(np.maximum(0.0, grid.values + noise))


def perturb_grid_poisson(grid: Grid, intensity: float, delta: float, rng: RngStream) -> Grid:
    """그리드 범위에 포아송 점을 뽑아 점이 떨어진 셀마다 delta 추가"""
    if not intensity >= 0:
        raise ValidationError("lambda must be >= 0")
    if not delta > 0:
        raise ValidationError("delta must be > 0")
    points = sample_homogeneous_poisson(intensity, grid.window, rng)
    values = np.array(grid.values)
    for x, y in points.points:
        row, col = grid.cell_of(x, y)
        values[row, col] += delta
    return grid.with_values(values)


# ========== Network perturbations ==========


def _check_count(k: int, available: int, what: str) -> None:
    if k < 0:
        raise ValidationError("k must be >= 0")
    if k > available:
        raise ValidationError(f"k too large: cannot delete {k} {what} from {available}")


def delete_nodes(
    net: SpatialNetwork, k: int, strategy: Union[str, DeletionStrategy], rng: RngStream
) -> SpatialNetwork:
    """노드 k개와 연결 링크 삭제 (연결성은 보장하지 않음)"""
    strategy = DeletionStrategy.parse(strategy)
    _check_count(k, len(net.nodes), "nodes")
    if k == 0:
        return net

    if strategy is DeletionStrategy.TARGETED:
        scores = betweenness(net)
        removed = set(sorted(net.node_ids, key=lambda i: (-scores[i], i))[:k])
    else:
        picks = rng.generator.choice(len(net.nodes), size=k, replace=False)
        removed = {net.nodes[int(i)].id for i in picks}

    logger.debug("deleting nodes %s (%s)", sorted(removed), strategy.value)
    nodes = [node for node in net.nodes if node.id not in removed]
    edges = [e for e in net.edges if e.source not in removed and e.target not in removed]
    return net.with_nodes(nodes, edges)


def delete_links(
    net: SpatialNetwork, k: int, strategy: Union[str, DeletionStrategy], rng: RngStream
) -> SpatialNetwork:
    """링크 k개 삭제; targeted는 링크 매개 중심성 내림차순 (동률은 링크 순서)"""
    strategy = DeletionStrategy.parse(strategy)
    _check_count(k, len(net.edges), "links")
    if k == 0:
        return net

    if strategy is DeletionStrategy.TARGETED:
        scores = edge_betweenness(net)
        removed = set(sorted(range(len(net.edges)), key=lambda i: (-scores[i], i))[:k])
    else:
        removed = {int(i) for i in rng.generator.choice(len(net.edges), size=k, replace=False)}

    return net.with_edges(e for i, e in enumerate(net.edges) if i not in removed)


def jitter_nodes(net: SpatialNetwork, sigma: float, rng: RngStream) -> SpatialNetwork:
    """노드 좌표에 N(0, sigma^2) 잡음; 링크 길이는 새 직선 거리로 재계산

    자유 통행 시간은 길이 변화 비율만큼 조정한다.
    """
    if not sigma >= 0:
        raise ValidationError("sigma must be >= 0")
    if sigma == 0:
        return net

    noise = rng.normal(sigma, (len(net.nodes), 2))
    nodes: List[Node] = [
        Node(node.id, node.x + float(dx), node.y + float(dy), node.weight)
        for node, (dx, dy) in zip(net.nodes, noise)
    ]
    coords = {node.id: (node.x, node.y) for node in nodes}
    edges = []
    for edge in net.edges:
        length = straight_length(coords[edge.source], coords[edge.target])
        edges.append(
            Edge(
                edge.source,
                edge.target,
                length,
                edge.capacity,
                edge.free_flow_time * length / edge.length,
            )
        )
    return net.with_nodes(nodes, edges)
