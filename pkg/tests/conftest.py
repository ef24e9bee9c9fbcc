# tests/conftest.py
import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from src.models import Edge, Node, SpatialNetwork

settings.register_profile("fast", max_examples=25, deadline=None)
settings.register_profile(
    "ci", max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "fast"))


def straight_network(positions, pairs, directed=False):
    """좌표 목록 + 인덱스 쌍 -> 직선 링크 네트워크"""
    return SpatialNetwork.from_positions(np.array(positions, dtype=float), pairs, directed=directed)


@pytest.fixture
def path_abc():
    """A(0)–B(1)–C(2), 길이 1, 2"""
    return straight_network([(0, 0), (1, 0), (3, 0)], [(0, 1), (1, 2)])


@pytest.fixture
def triangle():
    """단위 길이 정삼각형"""
    return straight_network([(0, 0), (1, 0), (0.5, np.sqrt(3) / 2)], [(0, 1), (1, 2), (0, 2)])


@pytest.fixture
def star4():
    """중심 0 + 잎 4개"""
    return straight_network(
        [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)], [(0, 1), (0, 2), (0, 3), (0, 4)]
    )


@pytest.fixture
def two_links():
    """O(0)->D(1) 평행 링크 두 개: t=2 (용량 1e9), t=1 (용량 1)"""
    nodes = (Node(0, 0.0, 0.0), Node(1, 1.0, 0.0))
    edges = (Edge(0, 1, 2.0, capacity=1e9), Edge(0, 1, 1.0, capacity=1.0))
    return SpatialNetwork(nodes, edges)
