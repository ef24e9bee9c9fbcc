# src/indicators.py
"""공간 통계, 도시 형태 지표, 네트워크 지표"""
import heapq
import logging
import math
from dataclasses import asdict, dataclass, fields
from typing import Dict, List, Sequence, Tuple

import networkx as nx
import numpy as np
from scipy.spatial import cKDTree, distance

from src.exceptions import ValidationError
from src.gridgen import count_clusters
from src.graph import all_pairs_distances, connected_components, edge_weights
from src.models import Grid, IndicatorRecord, PointSet, SpatialNetwork

logger = logging.getLogger(__name__)

# 거리 행렬 블록 하나의 최대 원소 수
CHUNK_ELEMENTS = 4_000_000


def _camel(name: str) -> str:
    head, *rest = name.split("_")
    return head + "".join(part.capitalize() for part in rest)


class _RecordMixin:
    def to_record(self) -> IndicatorRecord:
        return IndicatorRecord((_camel(k), v) for k, v in asdict(self).items())

    @classmethod
    def indicator_names(cls) -> List[str]:
        return [_camel(f.name) for f in fields(cls)]


@dataclass(frozen=True)
class MorphologyRecord(_RecordMixin):
    """그리드 형태 지표"""

    mass: float
    centroid_x: float
    centroid_y: float
    dispersion: float
    moran: float
    entropy: float
    rank_size_slope: float
    avg_distance: float


@dataclass(frozen=True)
class NetworkSummary(_RecordMixin):
    """네트워크 기본 지표"""

    n_nodes: float
    n_edges: float
    total_length: float
    n_components: float
    cyclomatic: float
    alpha_index: float
    gamma_index: float
    diameter: float
    mean_path_length: float
    efficiency: float


# ========== Grid morphology ==========


def _pairwise_sums(centers: np.ndarray, z: np.ndarray, p: np.ndarray) -> Tuple[float, float, float]:
    """(sum_{i!=j} w_ij z_i z_j, sum_{i!=j} w_ij, sum_{i!=j} p_i p_j d_ij), w = 1/d"""
    n = len(centers)
    block = max(1, CHUNK_ELEMENTS // max(n, 1))
    cross, s0, spread = 0.0, 0.0, 0.0
    for start in range(0, n, block):
        stop = min(n, start + block)
        d = distance.cdist(centers[start:stop], centers)
        w = np.divide(1.0, d, out=np.zeros_like(d), where=d > 0)
        cross += float(z[start:stop] @ w @ z)
        s0 += float(w.sum())
        spread += float(p[start:stop] @ d @ p)
    return cross, s0, spread


def rank_size_slope(values: np.ndarray) -> float:
    """양수 셀 값의 log(값) ~ log(순위) 최소제곱 기울기"""
    positive = np.sort(values[values > 0])[::-1]
    if len(positive) < 2:
        return 0.0
    ranks = np.arange(1, len(positive) + 1, dtype=float)
    slope, _ = np.polyfit(np.log(ranks), np.log(positive), 1)
    return float(slope)


def grid_morphology(grid: Grid) -> MorphologyRecord:
    """그리드 형태 지표 계산

    - 중심/분산: p_i = x_i / sum(x) 가중 셀 중심 모멘트
    - Moran: 가중치 1/d_ij, 행 표준화 없음, 상수 그리드는 0
    - 엔트로피: -sum p ln p / ln n (셀 1개 그리드는 0)
    - avgDistance: sum_{i!=j} p_i p_j d_ij / 그리드 대각선 길이
    """
    x = grid.values.ravel()
    n = x.size
    mass = float(x.sum())
    if mass <= 0:
        return MorphologyRecord(mass, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)

    centers = grid.flat_centers()
    p = x / mass
    centroid = p @ centers
    dispersion = math.sqrt(float(p @ np.sum((centers - centroid) ** 2, axis=1)))

    nonzero = p[p > 0]
    entropy = float(-(nonzero * np.log(nonzero)).sum() / math.log(n)) if n > 1 else 0.0

    z = x - x.mean()
    variance = float(z @ z)
    cross, s0, spread = _pairwise_sums(centers, z, p)
    moran = (n / s0) * cross / variance if variance > 0 and s0 > 0 else 0.0

    diagonal = grid.cell_size * math.hypot(grid.width, grid.height)
    return MorphologyRecord(
        mass=mass,
        centroid_x=float(centroid[0]),
        centroid_y=float(centroid[1]),
        dispersion=dispersion,
        moran=float(moran),
        entropy=min(max(entropy, 0.0), 1.0),
        rank_size_slope=rank_size_slope(x),
        avg_distance=spread / diagonal,
    )


def building_morphology(grid: Grid) -> IndicatorRecord:
    """미시 규모 건물 지표: 형태 지표 + 4-연결 클러스터 수 + 점유 밀도"""
    record = grid_morphology(grid).to_record()
    occupied = grid.values > 0
    record.add("nClusters", count_clusters(occupied))
    record.add("density", float(occupied.mean()))
    return record


# ========== Point patterns ==========


def ripley_k(points: PointSet, radii: Sequence[float]) -> List[Tuple[float, float]]:
    """Ripley K (가장자리 보정 없음): K(r) = A / (n(n-1)) * sum_{i!=j} 1(d_ij <= r)"""
    n = len(points)
    if n < 2:
        raise ValidationError(f"too few points for Ripley K: {n}")
    if any(not r > 0 for r in radii):
        raise ValidationError("radii must be > 0")
    d = np.sort(distance.pdist(points.points))
    scale = points.area / (n * (n - 1))
    # pdist는 순서 없는 쌍이므로 2배
    return [(float(r), scale * 2 * int(np.searchsorted(d, r, side="right"))) for r in radii]


def point_moments(points: PointSet) -> IndicatorRecord:
    """점 집합 모멘트 (균등 가중)와 최근접 이웃 평균 거리"""
    record = IndicatorRecord()
    n = len(points)
    record.add("nPoints", n)
    if n == 0:
        for name in ("centroidX", "centroidY", "dispersion", "nearestNeighbourMean"):
            record.add(name, 0.0)
        return record

    centroid = points.points.mean(axis=0)
    dispersion = math.sqrt(float(np.mean(np.sum((points.points - centroid) ** 2, axis=1))))
    nearest = 0.0
    if n >= 2:
        d, _ = cKDTree(points.points).query(points.points, k=2)
        nearest = float(d[:, 1].mean())

    record.add("centroidX", float(centroid[0]))
    record.add("centroidY", float(centroid[1]))
    record.add("dispersion", dispersion)
    record.add("nearestNeighbourMean", nearest)
    return record


# ========== Networks ==========


def network_summary(net: SpatialNetwork) -> NetworkSummary:
    """네트워크 기본 지표 (경로 지표는 길이 가중 최단경로, 도달 가능한 쌍만)"""
    n = len(net.nodes)
    e = len(net.edges)
    c = len(connected_components(net)) if n else 0
    cyclomatic = e - n + c
    alpha = cyclomatic / (2 * n - 5) if n >= 3 else math.nan
    gamma = e / (3 * (n - 2)) if n >= 3 else math.nan

    diameter = mean_path = efficiency = 0.0
    if n >= 2:
        d = all_pairs_distances(net)
        off = ~np.eye(n, dtype=bool)
        pairs = d[off]
        reachable = pairs[np.isfinite(pairs)]
        if reachable.size:
            diameter = float(reachable.max())
            mean_path = float(reachable.mean())
        with np.errstate(divide="ignore"):
            efficiency = float(np.mean(np.where(np.isfinite(pairs), 1.0 / pairs, 0.0)))

    return NetworkSummary(
        n_nodes=float(n),
        n_edges=float(e),
        total_length=net.total_length,
        n_components=float(c),
        cyclomatic=float(cyclomatic),
        alpha_index=alpha,
        gamma_index=gamma,
        diameter=diameter,
        mean_path_length=mean_path,
        efficiency=efficiency,
    )


def _brandes(net: SpatialNetwork) -> Tuple[Dict[int, float], np.ndarray]:
    """모든 출발점에 대한 Brandes 누적 (노드 점수, 링크 순서 점수)

    평행 링크는 각각 별개의 최단경로로 센다. 무방향이면 순서 없는 쌍 기준으로 절반.
    """
    adj = net.adjacency(edge_weights(net, "length"))
    node_scores = dict.fromkeys(adj, 0.0)
    edge_scores = np.zeros(len(net.edges))

    for source in net.node_ids:
        sigma = dict.fromkeys(adj, 0.0)
        sigma[source] = 1.0
        preds: Dict[int, List[Tuple[int, int]]] = {v: [] for v in adj}
        dist = {source: 0.0}
        order: List[int] = []
        done = set()
        heap = [(0.0, source)]
        while heap:
            d, u = heapq.heappop(heap)
            if u in done:
                continue
            done.add(u)
            order.append(u)
            for v, w, k in adj[u]:
                if v in done:
                    continue
                nd = d + w
                if v not in dist or nd < dist[v]:
                    dist[v] = nd
                    sigma[v] = sigma[u]
                    preds[v] = [(u, k)]
                    heapq.heappush(heap, (nd, v))
                elif nd == dist[v]:
                    sigma[v] += sigma[u]
                    preds[v].append((u, k))

        delta = dict.fromkeys(order, 0.0)
        for v in reversed(order):
            for u, k in preds[v]:
                share = sigma[u] / sigma[v] * (1.0 + delta[v])
                delta[u] += share
                edge_scores[k] += share
            if v != source:
                node_scores[v] += delta[v]

    if not net.directed:
        node_scores = {v: s / 2 for v, s in node_scores.items()}
        edge_scores /= 2
    return node_scores, edge_scores


def betweenness(net: SpatialNetwork) -> Dict[int, float]:
    """노드 매개 중심성 (길이 가중, 정규화 없음, 끝점 제외, 평행 링크 경로 수 반영)"""
    scores, _ = _brandes(net)
    return {node_id: float(scores[node_id]) for node_id in net.node_ids}


def edge_betweenness(net: SpatialNetwork) -> List[float]:
    """링크 순서의 매개 중심성; 같은 길이의 평행 링크는 경로를 나눠 운반"""
    _, scores = _brandes(net)
    return [float(s) for s in scores]


def closeness(net: SpatialNetwork) -> Dict[int, float]:
    """길이 가중 근접 중심성 (도달 가능한 노드 기준 Wasserman-Faust 보정)"""
    graph = net.to_networkx("length")
    scores = nx.closeness_centrality(graph, distance="length", wf_improved=True)
    return {node_id: float(scores[node_id]) for node_id in net.node_ids}


GRID_INDICATORS = MorphologyRecord.indicator_names() + ["nClusters", "density"]
NETWORK_INDICATORS = NetworkSummary.indicator_names()
POINT_INDICATORS = ["nPoints", "centroidX", "centroidY", "dispersion", "nearestNeighbourMean"]
