# src/graph.py
import heapq
import math
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union

import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from src.exceptions import GraphError, ValidationError
from src.models import SpatialNetwork

WeightSpec = Union[str, Sequence[float]]

WEIGHT_ATTRIBUTES = {"length": "length", "freeFlowTime": "free_flow_time", "free_flow_time": "free_flow_time"}


def edge_weights(net: SpatialNetwork, weight: WeightSpec = "length") -> np.ndarray:
    """링크별 가중치 배열 (속성 이름 또는 링크 순서의 값 목록)"""
    if isinstance(weight, str):
        if weight not in WEIGHT_ATTRIBUTES:
            raise ValidationError(f"unknown weight attribute {weight!r}")
        attr = WEIGHT_ATTRIBUTES[weight]
        values = np.array([getattr(edge, attr) for edge in net.edges], dtype=float)
    else:
        values = np.asarray(weight, dtype=float)
        if values.shape != (len(net.edges),):
            raise ValidationError(
                f"expected {len(net.edges)} edge weights, got {values.shape}"
            )
    if values.size and not np.all(np.isfinite(values) & (values > 0)):
        raise ValidationError("invalid weight: edge weights must be finite and > 0")
    return values


def dijkstra(
    net: SpatialNetwork, source: int, weights: np.ndarray
) -> Tuple[Dict[int, float], Dict[int, Optional[int]], Dict[int, Optional[int]]]:
    """이진 힙 Dijkstra; 거리 동률이면 id가 작은 선행 노드, 그다음 인덱스가 작은 링크"""
    if source not in net.index:
        raise GraphError(f"no such node {source}")

    adj = net.adjacency(weights)
    dist: Dict[int, float] = {node_id: math.inf for node_id in adj}
    pred: Dict[int, Optional[int]] = {node_id: None for node_id in adj}
    pred_edge: Dict[int, Optional[int]] = {node_id: None for node_id in adj}
    done: Set[int] = set()

    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for v, w, k in adj[u]:
            if v in done:
                continue
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                pred[v] = u
                pred_edge[v] = k
                heapq.heappush(heap, (nd, v))
            elif nd == dist[v] and (u < pred[v] or (u == pred[v] and k < pred_edge[v])):
                pred[v] = u
                pred_edge[v] = k

    return dist, pred, pred_edge


def shortest_paths(
    net: SpatialNetwork, source: int, weight: WeightSpec = "length"
) -> Dict[int, Tuple[float, Optional[int]]]:
    """단일 출발점 최단거리

    Args:
        net: 대상 네트워크
        source: 출발 노드 id
        weight: "length" | "freeFlowTime" | 링크 순서의 사용자 가중치

    Returns:
        노드 id -> (거리 또는 inf, 선행 노드 id 또는 None)
    """
    weights = edge_weights(net, weight)
    dist, pred, _ = dijkstra(net, source, weights)
    return {node_id: (dist[node_id], pred[node_id]) for node_id in dist}


def path_edges(
    pred: Dict[int, Optional[int]], pred_edge: Dict[int, Optional[int]], target: int
) -> List[int]:
    """선행 정보로 목적지까지의 링크 인덱스 경로 복원 (출발점 쪽부터)"""
    edges = []
    node = target
    while pred[node] is not None:
        edges.append(pred_edge[node])
        node = pred[node]
    edges.reverse()
    return edges


def all_pairs_distances(net: SpatialNetwork, weight: WeightSpec = "length") -> np.ndarray:
    """전체 쌍 최단거리 행렬 (노드 순서 기준, 도달 불가 = inf)"""
    n = len(net.nodes)
    if n == 0:
        return np.zeros((0, 0))
    weights = edge_weights(net, weight)
    best: Dict[Tuple[int, int], float] = {}
    for k, edge in enumerate(net.edges):
        i, j = net.index[edge.source], net.index[edge.target]
        key = (i, j) if net.directed else (min(i, j), max(i, j))
        if key not in best or weights[k] < best[key]:
            best[key] = weights[k]
    if not best:
        matrix = np.full((n, n), math.inf)
        np.fill_diagonal(matrix, 0.0)
        return matrix
    rows, cols = zip(*best.keys())
    graph = csr_matrix((list(best.values()), (rows, cols)), shape=(n, n))
    return shortest_path(graph, method="D", directed=net.directed)


def connected_components(net: SpatialNetwork) -> List[Set[int]]:
    """방향 무시 연결 요소 (가장 작은 id 순으로 정렬)"""
    graph = nx.Graph()
    graph.add_nodes_from(net.node_ids)
    graph.add_edges_from(net.edge_pairs())
    components = [set(c) for c in nx.connected_components(graph)]
    return sorted(components, key=min)


def is_connected(net: SpatialNetwork) -> bool:
    return len(net.nodes) <= 1 or len(connected_components(net)) == 1


def minimum_spanning_pairs(
    n: int, candidates: Iterable[Tuple[int, int]], lengths: Dict[Tuple[int, int], float]
) -> List[Tuple[int, int]]:
    """후보 쌍 위의 Kruskal 최소 신장 트리(또는 숲); 동률은 (i, j) 사전순"""
    graph = nx.Graph()
    graph.add_nodes_from(range(n))
    for i, j in sorted({(min(i, j), max(i, j)) for i, j in candidates}):
        graph.add_edge(i, j, length=lengths[(i, j)])
    tree = nx.minimum_spanning_edges(graph, algorithm="kruskal", weight="length", data=False)
    return sorted((min(u, v), max(u, v)) for u, v in tree)


class UnionFind:
    """경로 압축 union-find"""

    def __init__(self, items: Iterable):
        self.parent = {item: item for item in items}

    def find(self, item):
        root = item
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[item] != root:
            self.parent[item], item = root, self.parent[item]
        return root

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True
