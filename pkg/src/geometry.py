# src/geometry.py
import math
from typing import Sequence

from src.models import SpatialNetwork, Window


def window_diagonal(window: Window) -> float:
    xmin, ymin, xmax, ymax = window
    return math.hypot(xmax - xmin, ymax - ymin)


def orientation(a: Sequence[float], b: Sequence[float], c: Sequence[float]) -> float:
    """(a, b, c)의 부호 있는 면적 x2; 양수면 반시계 방향"""
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def segments_cross(p1, p2, q1, q2, eps: float = 1e-12) -> bool:
    """두 선분이 끝점이 아닌 곳에서 교차하는지 (끝점 공유는 교차 아님)"""
    shared = {tuple(p1), tuple(p2)} & {tuple(q1), tuple(q2)}
    if shared:
        return False
    d1 = orientation(q1, q2, p1)
    d2 = orientation(q1, q2, p2)
    d3 = orientation(p1, p2, q1)
    d4 = orientation(p1, p2, q2)
    return ((d1 > eps and d2 < -eps) or (d1 < -eps and d2 > eps)) and (
        (d3 > eps and d4 < -eps) or (d3 < -eps and d4 > eps)
    )


def is_planar(net: SpatialNetwork) -> bool:
    """직선 링크들이 서로 교차하지 않는지 검사 (O(E^2))"""
    coords = {node.id: (node.x, node.y) for node in net.nodes}
    segments = [(coords[e.source], coords[e.target]) for e in net.edges]
    for a in range(len(segments)):
        for b in range(a + 1, len(segments)):
            if segments_cross(*segments[a], *segments[b]):
                return False
    return True
