# src/slime_mould.py
"""점균류(Physarum) 전도도 동역학 네트워크 생성

매 반복마다 터미널 쌍 하나를 골라 Kirchhoff 방정식으로 전위를 풀고,
흐름이 큰 링크는 강화하고 나머지는 감쇠시킨다.
"""
import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from src.exceptions import GraphError, ValidationError
from src.graph import UnionFind, is_connected, minimum_spanning_pairs
from src.models import SpatialNetwork
from src.rng import RngStream

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SlimeMouldParams:
    """점균류 모델 파라미터"""

    terminals: Tuple[int, ...]
    iterations: int = 100
    flow_amplification: float = 1.8
    decay: float = 1.0
    time_step: float = 0.1
    input_flow: float = 1.0
    keep_threshold: float = 0.01
    weighted_terminals: bool = False

    def __post_init__(self):
        object.__setattr__(self, "terminals", tuple(self.terminals))
        if self.iterations < 1:
            raise ValidationError("iterations must be >= 1")
        for name in ("flow_amplification", "decay", "time_step", "input_flow", "keep_threshold"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be > 0")
        if not self.time_step * self.decay < 1:
            raise ValidationError("time_step * decay must be < 1")
        if len(set(self.terminals)) < 2:
            raise ValidationError("need at least 2 distinct terminals")


def kirchhoff_flows(
    net: SpatialNetwork,
    conductivity: np.ndarray,
    source: int,
    sink: int,
    input_flow: float,
) -> Tuple[np.ndarray, np.ndarray]:
    """노드 전위와 링크 흐름 계산

    sum_j (D_ij / L_ij)(p_i - p_j) = b_i, b = +I0 (source), -I0 (sink), p_sink = 0.

    Returns:
        (노드 순서의 전위, 링크 순서의 흐름 Q = (D/L)(p_from - p_to))
    """
    if not is_connected(net):
        raise GraphError("substrate not connected")

    n = len(net.nodes)
    src, dst = net.index[source], net.index[sink]
    ends = np.array([(net.index[e.source], net.index[e.target]) for e in net.edges], dtype=int)
    lengths = np.array([e.length for e in net.edges])
    conductance = np.asarray(conductivity, dtype=float) / lengths

    laplacian = np.zeros((n, n))
    np.add.at(laplacian, (ends[:, 0], ends[:, 0]), conductance)
    np.add.at(laplacian, (ends[:, 1], ends[:, 1]), conductance)
    np.add.at(laplacian, (ends[:, 0], ends[:, 1]), -conductance)
    np.add.at(laplacian, (ends[:, 1], ends[:, 0]), -conductance)

    rhs = np.zeros(n)
    rhs[src] = input_flow
    rhs[dst] = -input_flow

    keep = np.arange(n) != dst
    potentials = np.zeros(n)
    try:
        potentials[keep] = np.linalg.solve(laplacian[np.ix_(keep, keep)], rhs[keep])
    except np.linalg.LinAlgError:
        raise GraphError("substrate not connected")

    flows = conductance * (potentials[ends[:, 0]] - potentials[ends[:, 1]])
    return potentials, flows


def update_conductivity(conductivity: np.ndarray, flows: np.ndarray, p: SlimeMouldParams) -> np.ndarray:
    """D <- D + dt * (|Q|^g / (1 + |Q|^g) - mu * D)"""
    reinforced = np.abs(flows) ** p.flow_amplification
    return conductivity + p.time_step * (reinforced / (1.0 + reinforced) - p.decay * conductivity)


def _draw_terminal_pair(net: SpatialNetwork, p: SlimeMouldParams, rng: RngStream) -> Tuple[int, int]:
    terminals = sorted(set(p.terminals))
    if p.weighted_terminals:
        weights = np.array([net.node(t).weight for t in terminals], dtype=float)
        if weights.sum() <= 0:
            raise ValidationError("terminal weights must not all be zero")
        order = rng.generator.choice(len(terminals), size=2, replace=False, p=weights / weights.sum())
    else:
        order = rng.generator.choice(len(terminals), size=2, replace=False)
    return terminals[int(order[0])], terminals[int(order[1])]


def slime_mould_conductivities(
    substrate: SpatialNetwork,
    p: SlimeMouldParams,
    rng: RngStream,
    initial: Optional[Sequence[float]] = None,
) -> np.ndarray:
    """반복 후 링크별 최종 전도도 (초기값 기본 1)"""
    for terminal in p.terminals:
        substrate.node(terminal)
    if not is_connected(substrate):
        raise GraphError("substrate not connected")

    conductivity = (
        np.ones(len(substrate.edges)) if initial is None else np.array(initial, dtype=float)
    )
    for _ in range(p.iterations):
        source, sink = _draw_terminal_pair(substrate, p, rng)
        _, flows = kirchhoff_flows(substrate, conductivity, source, sink, p.input_flow)
        conductivity = update_conductivity(conductivity, flows, p)
    return conductivity


def _reconnect(substrate: SpatialNetwork, kept: set) -> set:
    """유지된 링크로 끊긴 요소들을 기질 MST 링크로 다시 연결"""
    best: Dict[Tuple[int, int], int] = {}
    for k, edge in enumerate(substrate.edges):
        i, j = substrate.index[edge.source], substrate.index[edge.target]
        key = (min(i, j), max(i, j))
        if key not in best or edge.length < substrate.edges[best[key]].length:
            best[key] = k
    lengths = {key: substrate.edges[k].length for key, k in best.items()}
    tree = minimum_spanning_pairs(len(substrate.nodes), best.keys(), lengths)

    components = UnionFind(range(len(substrate.nodes)))
    for k in kept:
        edge = substrate.edges[k]
        components.union(substrate.index[edge.source], substrate.index[edge.target])

    result = set(kept)
    for i, j in tree:
        if components.union(i, j):
            result.add(best[(i, j)])
    return result


def generate_slime_mould(substrate: SpatialNetwork, p: SlimeMouldParams, rng: RngStream) -> SpatialNetwork:
    """전도도가 keepThreshold 이상인 링크 유지, 연결이 끊기면 MST 링크 재추가"""
    conductivity = slime_mould_conductivities(substrate, p, rng)
    kept = {k for k, d in enumerate(conductivity) if d >= p.keep_threshold}
    logger.debug("slime mould kept %d of %d edges", len(kept), len(substrate.edges))

    kept = _reconnect(substrate, kept)
    edges = [edge for k, edge in enumerate(substrate.edges) if k in kept]
    return substrate.with_edges(edges)
