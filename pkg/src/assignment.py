# src/assignment.py
"""정적 통행 배정: 전량 배정(AON)과 BPR 혼잡 비용의 사용자 균형"""
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from src.exceptions import GraphError, ValidationError
from src.graph import connected_components, dijkstra, edge_weights, path_edges
from src.models import SpatialNetwork

logger = logging.getLogger(__name__)

METHODS = ("msa", "frank_wolfe")


@dataclass(frozen=True)
class BprParams:
    """BPR 링크 비용 t = t0 (1 + a (f/c)^b)"""

    a: float = 0.15
    b: float = 4.0

    def __post_init__(self):
        if not self.a >= 0:
            raise ValidationError("BPR a must be >= 0")
        if not self.b >= 1:
            raise ValidationError("BPR b must be >= 1")


@dataclass(frozen=True)
class OdMatrix:
    """기종점 수요 목록 (origin, destination, demand)"""

    entries: Tuple[Tuple[int, int, float], ...]

    def __post_init__(self):
        entries = tuple((int(o), int(d), float(q)) for o, d, q in self.entries)
        for o, d, q in entries:
            if o == d:
                raise ValidationError(f"origin equals destination ({o})")
            if not q >= 0:
                raise ValidationError(f"demand must be >= 0 for {o}->{d}")
        object.__setattr__(self, "entries", entries)

    @property
    def total(self) -> float:
        return float(sum(q for _, _, q in self.entries))

    def by_origin(self) -> Dict[int, List[Tuple[int, float]]]:
        grouped: Dict[int, List[Tuple[int, float]]] = defaultdict(list)
        for o, d, q in self.entries:
            grouped[o].append((d, q))
        return dict(sorted(grouped.items()))


@dataclass
class EquilibriumResult:
    flows: np.ndarray
    times: np.ndarray
    relative_gap: float
    iterations: int
    gap_history: List[float] = field(default_factory=list)


def bpr_times(net: SpatialNetwork, flows: np.ndarray, bpr: BprParams) -> np.ndarray:
    free_flow = edge_weights(net, "freeFlowTime")
    capacity = np.array([edge.capacity for edge in net.edges])
    return free_flow * (1.0 + bpr.a * (flows / capacity) ** bpr.b)


def beckmann_objective(net: SpatialNetwork, flows: np.ndarray, bpr: BprParams) -> float:
    """sum_e int_0^f t_e(x) dx"""
    free_flow = edge_weights(net, "freeFlowTime")
    capacity = np.array([edge.capacity for edge in net.edges])
    integral = flows + bpr.a * capacity / (bpr.b + 1) * (flows / capacity) ** (bpr.b + 1)
    return float((free_flow * integral).sum())


def _load(net: SpatialNetwork, od: OdMatrix, times: Sequence[float]) -> Tuple[np.ndarray, float]:
    """AON 배정 링크 흐름과 최단경로 비용 합 (sum demand * 최단 시간)"""
    weights = edge_weights(net, times)
    flows = np.zeros(len(net.edges))
    shortest_cost = 0.0
    for origin, demands in od.by_origin().items():
        if origin not in net.index:
            raise GraphError(f"no such node {origin}")
        dist, pred, pred_edge = dijkstra(net, origin, weights)
        for destination, demand in demands:
            if destination not in net.index:
                raise GraphError(f"no such node {destination}")
            if demand == 0:
                continue
            if math.isinf(dist[destination]):
                raise GraphError(f"infeasible demand: {destination} unreachable from {origin}")
            for k in path_edges(pred, pred_edge, destination):
                flows[k] += demand
            shortest_cost += demand * dist[destination]
    return flows, shortest_cost


def assign_all_or_nothing(net: SpatialNetwork, od: OdMatrix, times: Sequence[float]) -> np.ndarray:
    """각 OD 수요를 최소 시간 경로에 전량 배정 (링크 순서의 흐름 배열)"""
    flows, _ = _load(net, od, times)
    return flows


def relative_gap(flows: np.ndarray, times: np.ndarray, shortest_cost: float) -> float:
    total = float(flows @ times)
    if total <= 0:
        return 0.0
    return (total - shortest_cost) / total


def user_equilibrium(
    net: SpatialNetwork,
    od: OdMatrix,
    bpr: Optional[BprParams] = None,
    max_iter: int = 500,
    gap_tol: float = 1e-4,
    method: str = "msa",
) -> EquilibriumResult:
    """정적 사용자 균형

    Args:
        method: "msa" (단계 1/(k+1)) | "frank_wolfe" (Beckmann 목적함수 선 탐색)

    Returns:
        지금까지 가장 작은 상대 갭을 준 흐름/시간 (갭 이력은 단조 비증가가 아닐 수 있음)
    """
    bpr = bpr or BprParams()
    if method not in METHODS:
        raise ValidationError(f"method must be one of {METHODS}, got {method!r}")
    if max_iter < 1:
        raise ValidationError("maxIter must be >= 1")

    free_flow = edge_weights(net, "freeFlowTime")
    if od.total == 0:
        return EquilibriumResult(np.zeros(len(net.edges)), free_flow.copy(), 0.0, 0, [0.0])

    flows, _ = _load(net, od, free_flow)
    best: Optional[EquilibriumResult] = None
    history: List[float] = []

    iteration = 0
    for iteration in range(1, max_iter + 1):
        times = bpr_times(net, flows, bpr)
        target, shortest_cost = _load(net, od, times)
        gap = relative_gap(flows, times, shortest_cost)
        history.append(gap)
        if best is None or gap < best.relative_gap:
            best = EquilibriumResult(flows.copy(), times, gap, iteration)
        if gap <= gap_tol:
            break

        direction = target - flows
        if method == "frank_wolfe":
            search = minimize_scalar(
                lambda s: beckmann_objective(net, flows + s * direction, bpr),
                bounds=(0.0, 1.0),
                method="bounded",
                options={"xatol": 1e-12},
            )
            step = float(search.x)
        else:
            step = 1.0 / (iteration + 1)
        flows = flows + step * direction

    logger.info("%s equilibrium: gap=%.3g after %d iterations", method, best.relative_gap, iteration)
    best.iterations = iteration
    best.gap_history = history
    return best


def gravity_od(net: SpatialNetwork, total_demand: float, decay: Optional[float] = None) -> OdMatrix:
    """중력형 OD: q_ij ~ w_i w_j exp(-d_ij / decay), 같은 연결 요소 안의 순서쌍만

    decay 기본값은 노드 경계 상자 대각선 / 4.
    """
    if not total_demand >= 0:
        raise ValidationError("total demand must be >= 0")
    positions = net.positions()
    if decay is None:
        span = positions.max(axis=0) - positions.min(axis=0) if len(positions) else np.zeros(2)
        decay = float(np.hypot(*span)) / 4 or 1.0
    if not decay > 0:
        raise ValidationError("decay must be > 0")

    component_of = {}
    for label, component in enumerate(connected_components(net)):
        for node_id in component:
            component_of[node_id] = label

    raw = []
    for a in net.nodes:
        for b in net.nodes:
            if a.id == b.id or component_of[a.id] != component_of[b.id]:
                continue
            score = a.weight * b.weight * math.exp(-a.distance_to(b) / decay)
            if score > 0:
                raw.append((a.id, b.id, score))

    scale = sum(s for _, _, s in raw)
    if scale == 0 or total_demand == 0:
        return OdMatrix(())
    return OdMatrix(tuple((o, d, total_demand * s / scale) for o, d, s in raw))
