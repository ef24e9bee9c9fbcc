# src/netgen.py
"""공간 네트워크 생성기

모든 평면 생성기는 Delaunay 삼각분할의 링크를 후보로 쓰고, 유클리드 최소 신장
트리(EMST, 항상 Delaunay의 부분집합)에서 출발하므로 결과는 연결된 평면 그래프다.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.spatial import Delaunay, QhullError

from src.exceptions import GeometryError, ValidationError
from src.geometry import window_diagonal
from src.graph import minimum_spanning_pairs
from src.models import Edge, Node, PointSet, SpatialNetwork, Window, straight_length
from src.rng import RngStream

logger = logging.getLogger(__name__)

Pair = Tuple[int, int]

PLACEMENT_ATTEMPTS = 10_000
NETWORK_KINDS = ("tree", "gravity", "complete")


@dataclass(frozen=True)
class GravityParams:
    """중력 포텐셜 붕괴 파라미터"""

    gamma: float = 1.0
    interaction_range: float = 1.0
    extra_edges: int = 0

    def __post_init__(self):
        if not self.gamma >= 0:
            raise ValidationError("gamma must be >= 0")
        if not self.interaction_range > 0:
            raise ValidationError("interactionRange must be > 0")
        if self.extra_edges < 0:
            raise ValidationError("extraEdges must be >= 0")


@dataclass(frozen=True)
class CostBenefitParams:
    cost_per_length: float = 1.0
    gamma: float = 1.0

    def __post_init__(self):
        if not self.cost_per_length >= 0:
            raise ValidationError("lambda must be >= 0")
        if not self.gamma >= 0:
            raise ValidationError("gamma must be >= 0")


@dataclass(frozen=True)
class CitySystemParams:
    n_cities: int
    largest_population: float
    zipf_exponent: float = 1.0
    min_separation: float = 0.0
    network_kind: str = "tree"

    def __post_init__(self):
        if self.n_cities < 1:
            raise ValidationError("nCities must be >= 1")
        if not self.largest_population > 0:
            raise ValidationError("largestPopulation must be > 0")
        if not self.zipf_exponent > 0:
            raise ValidationError("zipfExponent must be > 0")
        if not self.min_separation >= 0:
            raise ValidationError("minSeparation must be >= 0")
        if self.network_kind not in NETWORK_KINDS:
            raise ValidationError(f"networkKind must be one of {NETWORK_KINDS}")


# ========== Triangulation ==========


def _as_array(points: Union[PointSet, np.ndarray]) -> np.ndarray:
    if isinstance(points, PointSet):
        return np.asarray(points.points, dtype=float)
    return np.asarray(points, dtype=float).reshape(-1, 2)


def _check_distinct(positions: np.ndarray) -> None:
    if len(np.unique(positions, axis=0)) != len(positions):
        raise GeometryError("duplicate points")


def _is_collinear(positions: np.ndarray) -> bool:
    centred = positions - positions.mean(axis=0)
    return np.linalg.matrix_rank(centred, tol=1e-12 * max(1.0, np.abs(centred).max())) < 2


def delaunay(points: Union[PointSet, np.ndarray]) -> List[Pair]:
    """Delaunay 삼각분할의 링크 목록 (정렬된 인덱스 쌍)"""
    positions = _as_array(points)
    if len(positions) < 3:
        raise GeometryError("degenerate point set: need at least 3 points")
    _check_distinct(positions)
    if _is_collinear(positions):
        raise GeometryError("degenerate point set: all points collinear")
    try:
        tri = Delaunay(positions)
    except QhullError as e:
        raise GeometryError(f"degenerate point set: {e}")

    edges = set()
    for simplex in tri.simplices:
        for a, b in ((0, 1), (0, 2), (1, 2)):
            i, j = int(simplex[a]), int(simplex[b])
            edges.add((min(i, j), max(i, j)))
    return sorted(edges)


def candidate_pairs(positions: np.ndarray) -> List[Pair]:
    """후보 링크 풀: Delaunay, 점이 3개 미만이거나 일직선이면 직선 순서의 이웃 쌍"""
    n = len(positions)
    if n < 2:
        return []
    _check_distinct(positions)
    if n >= 3 and not _is_collinear(positions):
        return delaunay(positions)
    direction = positions[-1] - positions[0]
    order = np.argsort(positions @ direction, kind="stable")
    return sorted((min(int(a), int(b)), max(int(a), int(b))) for a, b in zip(order, order[1:]))


def _lengths(positions: np.ndarray, pairs: Sequence[Pair]) -> Dict[Pair, float]:
    return {(i, j): straight_length(positions[i], positions[j]) for i, j in pairs}


def euclidean_mst(positions: np.ndarray) -> List[Pair]:
    """유클리드 최소 신장 트리 (Delaunay 후보 위 Kruskal)"""
    positions = np.asarray(positions, dtype=float).reshape(-1, 2)
    pairs = candidate_pairs(positions)
    return minimum_spanning_pairs(len(positions), pairs, _lengths(positions, pairs))


def _network(nodes: Sequence[Node], pairs: Sequence[Pair]) -> SpatialNetwork:
    """인덱스 쌍 -> 노드 id 기반 직선 링크 네트워크"""
    edges = [
        Edge(nodes[i].id, nodes[j].id, nodes[i].distance_to(nodes[j])) for i, j in sorted(pairs)
    ]
    return SpatialNetwork(tuple(nodes), tuple(edges))


def _positions(nodes: Sequence[Node]) -> np.ndarray:
    return np.array([(node.x, node.y) for node in nodes], dtype=float).reshape(-1, 2)


def _random_nodes(n: int, window: Window, rng: RngStream) -> List[Node]:
    xmin, ymin, xmax, ymax = PointSet(window).window
    xs = rng.uniform(xmin, xmax, n)
    ys = rng.uniform(ymin, ymax, n)
    return [Node(i, float(x), float(y)) for i, (x, y) in enumerate(zip(xs, ys))]


# ========== Tree / random planar ==========


def tree_network_from_nodes(nodes: Sequence[Node]) -> SpatialNetwork:
    return _network(nodes, euclidean_mst(_positions(nodes)))


def generate_tree_network(n: int, window: Window, rng: RngStream) -> SpatialNetwork:
    """균등 랜덤 노드 위 유클리드 최소 신장 트리"""
    if n < 1:
        raise ValidationError("n must be >= 1")
    return tree_network_from_nodes(_random_nodes(n, window, rng))


def generate_random_planar(
    n: int, keep_probability: float, window: Window, rng: RngStream
) -> SpatialNetwork:
    """EMST + 나머지 Delaunay 링크를 각각 확률 q로 유지"""
    if n < 3:
        raise ValidationError("n must be >= 3")
    if not 0 <= keep_probability <= 1:
        raise ValidationError("keepProbability must be in [0, 1]")

    nodes = _random_nodes(n, window, rng)
    positions = _positions(nodes)
    triangulation = delaunay(positions)
    tree = minimum_spanning_pairs(n, triangulation, _lengths(positions, triangulation))
    in_tree = set(tree)

    rest = [pair for pair in triangulation if pair not in in_tree]
    draws = rng.random(len(rest))
    kept = [pair for pair, u in zip(rest, draws) if u < keep_probability]
    logger.debug("random planar: %d tree + %d of %d extra edges", len(tree), len(kept), len(rest))
    return _network(nodes, tree + kept)


# ========== Gravity / cost-benefit ==========


def _check_weighted(nodes: Sequence[Node], strictly_positive: bool) -> None:
    if len(nodes) < 2:
        raise ValidationError("need at least 2 nodes")
    if strictly_positive and any(node.weight <= 0 for node in nodes):
        raise ValidationError("node weights must be > 0")


def gravity_score(
    w_i: float, w_j: float, d_ij: float, gamma: float, interaction_range: float
) -> float:
    """g_ij = (w_i w_j)^gamma * exp(-d_ij / rg) / d_ij"""
    return (w_i * w_j) ** gamma * math.exp(-d_ij / interaction_range) / d_ij


def generate_gravity_network(nodes: Sequence[Node], p: GravityParams) -> SpatialNetwork:
    """중력 포텐셜 붕괴: EMST에 중력 점수 상위 extraEdges개의 Delaunay 링크 추가"""
    _check_weighted(nodes, strictly_positive=True)
    positions = _positions(nodes)
    pairs = candidate_pairs(positions)
    lengths = _lengths(positions, pairs)
    tree = minimum_spanning_pairs(len(nodes), pairs, lengths)
    in_tree = set(tree)

    scored = sorted(
        (
            -gravity_score(nodes[i].weight, nodes[j].weight, lengths[(i, j)], p.gamma, p.interaction_range),
            i,
            j,
        )
        for i, j in pairs
        if (i, j) not in in_tree
    )
    added = [(i, j) for _, i, j in scored[: p.extra_edges]]
    return _network(nodes, tree + added)


def link_benefit(w_i: float, w_j: float, d_ij: float, p: CostBenefitParams) -> float:
    """B_ij = (w_i w_j)^gamma - lambda * d_ij"""
    return (w_i * w_j) ** p.gamma - p.cost_per_length * d_ij


def generate_cost_benefit_network(
    nodes: Sequence[Node], p: CostBenefitParams, trace: Optional[list] = None
) -> SpatialNetwork:
    """비용-편익 링크 구축: 최대 편익 후보를 편익이 양수인 동안 반복 추가

    Args:
        trace: 리스트를 넘기면 추가된 (i, j, 편익) 순서를 기록
    """
    _check_weighted(nodes, strictly_positive=False)
    positions = _positions(nodes)
    pairs = candidate_pairs(positions)
    lengths = _lengths(positions, pairs)
    tree = minimum_spanning_pairs(len(nodes), pairs, lengths)
    in_tree = set(tree)

    candidates = {
        pair: link_benefit(nodes[pair[0]].weight, nodes[pair[1]].weight, lengths[pair], p)
        for pair in pairs
        if pair not in in_tree
    }
    added = []
    while candidates:
        best = min(candidates, key=lambda pair: (-candidates[pair], pair))
        benefit = candidates.pop(best)
        if benefit <= 0:
            break
        added.append(best)
        if trace is not None:
            trace.append((best[0], best[1], benefit))
    return _network(nodes, tree + added)


# ========== City system ==========


def zipf_weights(n: int, largest: float, exponent: float) -> np.ndarray:
    ranks = np.arange(1, n + 1, dtype=float)
    return largest * ranks ** (-exponent)


def _place_cities(p: CitySystemParams, window: Window, rng: RngStream) -> np.ndarray:
    xmin, ymin, xmax, ymax = PointSet(window).window
    placed: List[Tuple[float, float]] = []
    for _ in range(p.n_cities):
        for _ in range(PLACEMENT_ATTEMPTS):
            x, y = float(rng.uniform(xmin, xmax)), float(rng.uniform(ymin, ymax))
            if all(math.hypot(x - a, y - b) >= p.min_separation for a, b in placed):
                if (x, y) not in placed:
                    placed.append((x, y))
                    break
        else:
            raise GeometryError(
                f"cannot place cities: {len(placed)} of {p.n_cities} placed "
                f"with minSeparation={p.min_separation}"
            )
    return np.array(placed)


def city_nodes(p: CitySystemParams, window: Window, rng: RngStream) -> List[Node]:
    """Zipf 인구 도시 노드 (id = 인구 순위 - 1)"""
    positions = _place_cities(p, window, rng)
    weights = zipf_weights(p.n_cities, p.largest_population, p.zipf_exponent)
    return [
        Node(i, float(x), float(y), float(w)) for i, ((x, y), w) in enumerate(zip(positions, weights))
    ]


def substrate_network(nodes: Sequence[Node]) -> SpatialNetwork:
    """후보 링크 풀 전체를 링크로 갖는 기질 네트워크 (점균류 입력용)"""
    return _network(nodes, candidate_pairs(_positions(nodes)))


def generate_city_system(p: CitySystemParams, window: Window, rng: RngStream) -> SpatialNetwork:
    """Zipf 인구 도시 체계 + 공간 네트워크 (tree | gravity | complete)"""
    nodes = city_nodes(p, window, rng)

    if p.n_cities == 1:
        return SpatialNetwork(tuple(nodes))
    if p.network_kind == "complete":
        return _network(nodes, list(itertools.combinations(range(p.n_cities), 2)))
    if p.network_kind == "gravity":
        params = GravityParams(
            gamma=1.0, interaction_range=window_diagonal(window) / 4, extra_edges=p.n_cities
        )
        return generate_gravity_network(nodes, params)
    return tree_network_from_nodes(nodes)
