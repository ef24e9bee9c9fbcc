# src/models.py
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from src.exceptions import GraphError, ValidationError

Window = Tuple[float, float, float, float]

LENGTH_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class Grid:
    """래스터 모델 (행 0 = 위쪽, 값은 0 이상의 실수)"""

    values: np.ndarray
    cell_size: float = 1.0

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise ValidationError(f"grid must be a non-empty 2D array, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValidationError("non-finite cell value")
        if np.any(values < 0):
            raise ValidationError("negative cell value")
        if not self.cell_size > 0:
            raise ValidationError(f"cellSize must be > 0, got {self.cell_size}")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "cell_size", float(self.cell_size))

    @classmethod
    def zeros(cls, width: int, height: int, cell_size: float = 1.0) -> "Grid":
        return cls(np.zeros((height, width)), cell_size)

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def size(self) -> int:
        return self.values.size

    @property
    def window(self) -> Window:
        return (0.0, 0.0, self.width * self.cell_size, self.height * self.cell_size)

    @property
    def total(self) -> float:
        return float(self.values.sum())

    def cell_centers(self) -> Tuple[np.ndarray, np.ndarray]:
        """셀 중심 좌표 (x, y), 배열 모양은 values와 동일"""
        cols = np.arange(self.width)
        rows = np.arange(self.height)
        xs = (cols + 0.5) * self.cell_size
        ys = (self.height - 1 - rows + 0.5) * self.cell_size
        return np.meshgrid(xs, ys)

    def flat_centers(self) -> np.ndarray:
        """행 우선 순서의 셀 중심 좌표 (n, 2)"""
        xs, ys = self.cell_centers()
        return np.column_stack([xs.ravel(), ys.ravel()])

    def cell_of(self, x: float, y: float) -> Tuple[int, int]:
        """점이 속한 셀의 (row, col); 경계는 반열린 구간 [x, x+1) 기준"""
        col = min(int(math.floor(x / self.cell_size)), self.width - 1)
        level = min(int(math.floor(y / self.cell_size)), self.height - 1)
        return self.height - 1 - max(level, 0), max(col, 0)

    def with_values(self, values: np.ndarray) -> "Grid":
        return Grid(values, self.cell_size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Grid):
            return NotImplemented
        return (
            self.cell_size == other.cell_size
            and self.values.shape == other.values.shape
            and bool(np.array_equal(self.values, other.values))
        )

    def __repr__(self) -> str:
        return f"Grid({self.width}x{self.height}, cellSize={self.cell_size}, mass={self.total:g})"


@dataclass(frozen=True, eq=False)
class PointSet:
    """사각 윈도우 안의 점 집합"""

    window: Window
    points: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))

    def __post_init__(self):
        xmin, ymin, xmax, ymax = (float(v) for v in self.window)
        if not (xmax > xmin and ymax > ymin):
            raise ValidationError(f"invalid window {self.window}")
        points = np.array(self.points, dtype=float).reshape(-1, 2)
        if points.size and (
            np.any(points[:, 0] < xmin)
            or np.any(points[:, 0] > xmax)
            or np.any(points[:, 1] < ymin)
            or np.any(points[:, 1] > ymax)
        ):
            raise ValidationError("point outside window")
        points.flags.writeable = False
        object.__setattr__(self, "window", (xmin, ymin, xmax, ymax))
        object.__setattr__(self, "points", points)

    @property
    def area(self) -> float:
        xmin, ymin, xmax, ymax = self.window
        return (xmax - xmin) * (ymax - ymin)

    @property
    def diagonal(self) -> float:
        xmin, ymin, xmax, ymax = self.window
        return math.hypot(xmax - xmin, ymax - ymin)

    def __len__(self) -> int:
        return self.points.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, PointSet):
            return NotImplemented
        return self.window == other.window and bool(np.array_equal(self.points, other.points))


@dataclass(frozen=True)
class Node:
    """네트워크 노드 모델"""

    id: int
    x: float
    y: float
    weight: float = 1.0

    def __post_init__(self):
        if not self.weight >= 0:
            raise ValidationError(f"node {self.id}: weight must be >= 0")

    def distance_to(self, other: "Node") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class Edge:
    """네트워크 링크 모델 (free_flow_time 기본값 = length)"""

    source: int
    target: int
    length: float
    capacity: float = 1.0
    free_flow_time: Optional[float] = None

    def __post_init__(self):
        if self.free_flow_time is None:
            object.__setattr__(self, "free_flow_time", float(self.length))
        if not self.length > 0:
            raise ValidationError(f"edge {self.source}-{self.target}: length must be > 0")
        if not self.capacity > 0:
            raise ValidationError(f"edge {self.source}-{self.target}: capacity must be > 0")
        if not self.free_flow_time > 0:
            raise ValidationError(f"edge {self.source}-{self.target}: freeFlowTime must be > 0")

    @property
    def pair(self) -> Tuple[int, int]:
        return (self.source, self.target)


@dataclass(frozen=True)
class SpatialNetwork:
    """기하 그래프 모델 (무방향 링크는 한 번만 저장)"""

    nodes: Tuple[Node, ...]
    edges: Tuple[Edge, ...] = ()
    directed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(self.edges))

        seen = set()
        for node in self.nodes:
            if node.id in seen:
                raise ValidationError(f"duplicate node id {node.id}")
            seen.add(node.id)

        by_id = {node.id: node for node in self.nodes}
        for edge in self.edges:
            if edge.source not in by_id or edge.target not in by_id:
                raise GraphError(f"dangling edge {edge.source}-{edge.target}")
            if edge.source == edge.target:
                raise ValidationError(f"self-loop on node {edge.source}")
            straight = by_id[edge.source].distance_to(by_id[edge.target])
            if edge.length < straight - LENGTH_TOLERANCE:
                raise ValidationError(
                    f"edge {edge.source}-{edge.target} shorter than straight-line distance"
                )

    @classmethod
    def from_positions(
        cls,
        positions: np.ndarray,
        pairs: Iterable[Tuple[int, int]],
        weights: Optional[Sequence[float]] = None,
        directed: bool = False,
    ) -> "SpatialNetwork":
        """좌표 배열과 인덱스 쌍으로 직선 링크 네트워크 생성 (노드 id = 인덱스)"""
        positions = np.asarray(positions, dtype=float).reshape(-1, 2)
        if weights is None:
            weights = [1.0] * len(positions)
        nodes = [
            Node(i, float(x), float(y), float(w))
            for i, ((x, y), w) in enumerate(zip(positions, weights))
        ]
        edges = [
            Edge(int(i), int(j), straight_length(positions[i], positions[j]))
            for i, j in pairs
        ]
        return cls(tuple(nodes), tuple(edges), directed)

    # ========== Lookup ==========

    @cached_property
    def index(self) -> Dict[int, int]:
        """노드 id -> 위치 인덱스"""
        return {node.id: i for i, node in enumerate(self.nodes)}

    @property
    def node_ids(self) -> List[int]:
        return [node.id for node in self.nodes]

    def node(self, node_id: int) -> Node:
        try:
            return self.nodes[self.index[node_id]]
        except KeyError:
            raise GraphError(f"no such node {node_id}")

    def positions(self) -> np.ndarray:
        return np.array([(node.x, node.y) for node in self.nodes], dtype=float).reshape(-1, 2)

    def weights(self) -> np.ndarray:
        return np.array([node.weight for node in self.nodes], dtype=float)

    def edge_pairs(self) -> List[Tuple[int, int]]:
        return [edge.pair for edge in self.edges]

    @property
    def total_length(self) -> float:
        return float(sum(edge.length for edge in self.edges))

    def adjacency(self, weights: Optional[Sequence[float]] = None) -> Dict[int, List[Tuple[int, float, int]]]:
        """노드 id -> [(이웃 id, 가중치, 링크 인덱스)]; 무방향이면 양방향 등록"""
        adj: Dict[int, List[Tuple[int, float, int]]] = {node.id: [] for node in self.nodes}
        for k, edge in enumerate(self.edges):
            w = edge.length if weights is None else float(weights[k])
            adj[edge.source].append((edge.target, w, k))
            if not self.directed:
                adj[edge.target].append((edge.source, w, k))
        return adj

    # ========== Derived networks ==========

    def with_edges(self, edges: Iterable[Edge]) -> "SpatialNetwork":
        return SpatialNetwork(self.nodes, tuple(edges), self.directed)

    def with_nodes(self, nodes: Iterable[Node], edges: Iterable[Edge]) -> "SpatialNetwork":
        return SpatialNetwork(tuple(nodes), tuple(edges), self.directed)

    def to_networkx(self, weight: str = "length") -> nx.Graph:
        """networkx 그래프로 변환 (평행 링크는 가중치 최소값 하나로 합침)"""
        graph = nx.DiGraph() if self.directed else nx.Graph()
        for node in self.nodes:
            graph.add_node(node.id, x=node.x, y=node.y, weight=node.weight)
        for edge in self.edges:
            value = getattr(edge, weight)
            u, v = edge.pair
            if graph.has_edge(u, v) and graph[u][v][weight] <= value:
                continue
            graph.add_edge(u, v, **{weight: value})
        return graph


def straight_length(p, q) -> float:
    return float(math.hypot(p[0] - q[0], p[1] - q[1]))


class IndicatorRecord:
    """지표 이름 -> 값 (삽입 순서 유지, 이름 중복 불가)"""

    def __init__(self, entries: Optional[Iterable[Tuple[str, float]]] = None):
        self._entries: Dict[str, float] = {}
        for name, value in entries or ():
            self.add(name, value)

    def add(self, name: str, value: float) -> None:
        if name in self._entries:
            raise ValidationError(f"duplicate indicator name {name!r}")
        self._entries[name] = float(value)

    def merge(self, other: "IndicatorRecord", prefix: str = "") -> None:
        for name, value in other.items():
            self.add(prefix + name, value)

    def names(self) -> List[str]:
        return list(self._entries)

    def items(self) -> List[Tuple[str, float]]:
        return list(self._entries.items())

    def to_dict(self) -> Dict[str, float]:
        return dict(self._entries)

    def __getitem__(self, name: str) -> float:
        return self._entries[name]

    def __contains__(self, name: str) -> bool:
        return name in self._entries

    def __iter__(self) -> Iterator[str]:
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other) -> bool:
        if not isinstance(other, IndicatorRecord):
            return NotImplemented
        return self.items() == other.items()

    def __repr__(self) -> str:
        return f"IndicatorRecord({self._entries!r})"
