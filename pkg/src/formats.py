# src/formats.py
import csv
import json
import math
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np

from src.exceptions import FormatError, SpatialGenError
from src.models import Edge, Grid, Node, PointSet, SpatialNetwork

PathLike = Union[str, Path]


def format_number(value: float) -> str:
    """최단 왕복(repr) 표현; 정수값은 소수점 없이"""
    text = repr(float(value))
    if text.endswith(".0"):
        text = text[:-2]
    return text


def _parse_float(text: str, path: PathLike) -> float:
    try:
        value = float(text)
    except ValueError:
        raise FormatError(f"non-numeric value {text!r}", str(path))
    if not math.isfinite(value):
        raise FormatError(f"non-finite value {text!r}", str(path))
    return value


def _read_lines(path: PathLike) -> List[str]:
    try:
        with open(path, newline="", encoding="utf-8") as f:
            return [line.rstrip("\r\n") for line in f]
    except OSError as e:
        raise FormatError(f"cannot read file: {e.strerror}", str(path))


# ========== Grid CSV ==========


def read_grid_csv(path: PathLike) -> Grid:
    """그리드 CSV 읽기 (선택적 헤더 `# width,height,cellSize`)"""
    lines = [line for line in _read_lines(path) if line.strip()]
    if not lines:
        raise FormatError("empty grid file", str(path))

    header = None
    if lines[0].lstrip().startswith("#"):
        header = lines[0].lstrip()[1:].split(",")
        lines = lines[1:]
        if len(header) != 3:
            raise FormatError("header must be '# width,height,cellSize'", str(path))
    if not lines:
        raise FormatError("empty grid file", str(path))

    rows = [[_parse_float(cell, path) for cell in row] for row in csv.reader(lines)]
    width = len(rows[0])
    if width == 0 or any(len(row) != width for row in rows):
        raise FormatError("non-rectangular grid", str(path))

    values = np.array(rows, dtype=float)
    if np.any(values < 0):
        raise FormatError("negative cell value", str(path))

    cell_size = 1.0
    if header is not None:
        h_width, h_height = int(_parse_float(header[0], path)), int(_parse_float(header[1], path))
        cell_size = _parse_float(header[2], path)
        if (h_width, h_height) != (values.shape[1], values.shape[0]):
            raise FormatError(
                f"header says {h_width}x{h_height}, data is {values.shape[1]}x{values.shape[0]}",
                str(path),
            )

    try:
        return Grid(values, cell_size)
    except SpatialGenError as e:
        raise FormatError(e.message, str(path))


def write_grid_csv(grid: Grid, path: PathLike) -> None:
    """그리드 CSV 쓰기 (cellSize != 1 일 때만 헤더 기록)"""
    with open(path, "w", newline="", encoding="utf-8") as f:
        if grid.cell_size != 1.0:
            f.write(f"# {grid.width},{grid.height},{format_number(grid.cell_size)}\n")
        for row in grid.values:
            f.write(",".join(format_number(v) for v in row) + "\n")


# ========== Network JSON ==========


def network_to_dict(net: SpatialNetwork) -> Dict[str, Any]:
    return {
        "directed": net.directed,
        "nodes": [
            {"id": node.id, "x": node.x, "y": node.y, "weight": node.weight}
            for node in net.nodes
        ],
        "edges": [
            {
                "from": edge.source,
                "to": edge.target,
                "length": edge.length,
                "capacity": edge.capacity,
                "freeFlowTime": edge.free_flow_time,
            }
            for edge in net.edges
        ],
    }


def network_from_dict(data: Dict[str, Any]) -> SpatialNetwork:
    """JSON 객체 -> SpatialNetwork (선택 필드는 기본값)"""
    if not isinstance(data, dict) or "nodes" not in data:
        raise FormatError("network JSON must be an object with a 'nodes' list")
    try:
        nodes = [
            Node(
                int(n["id"]),
                float(n["x"]),
                float(n["y"]),
                float(n.get("weight", 1.0)),
            )
            for n in data["nodes"]
        ]
        by_id = {node.id: node for node in nodes}
        edges = []
        for e in data.get("edges", []):
            source, target = int(e["from"]), int(e["to"])
            length = e.get("length")
            if length is None:
                if source not in by_id or target not in by_id:
                    raise FormatError(f"dangling edge {source}-{target}")
                length = by_id[source].distance_to(by_id[target])
            edges.append(
                Edge(
                    source,
                    target,
                    float(length),
                    float(e.get("capacity", 1.0)),
                    None if e.get("freeFlowTime") is None else float(e["freeFlowTime"]),
                )
            )
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"malformed network JSON: {e}")
    return SpatialNetwork(tuple(nodes), tuple(edges), bool(data.get("directed", False)))


def read_network_json(path: PathLike) -> SpatialNetwork:
    """네트워크 JSON 읽기"""
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except OSError as e:
        raise FormatError(f"cannot read file: {e.strerror}", str(path))
    except json.JSONDecodeError as e:
        raise FormatError(f"invalid JSON: {e.msg}", str(path))

    try:
        return network_from_dict(data)
    except SpatialGenError as e:
        raise FormatError(e.message, str(path))


def write_network_json(net: SpatialNetwork, path: PathLike) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(network_to_dict(net), f, indent=2)
        f.write("\n")


# ========== PointSet CSV ==========


def read_points_csv(path: PathLike) -> PointSet:
    """점 CSV 읽기 (`# xmin,ymin,xmax,ymax` 주석 + `x,y` 헤더)"""
    window = None
    coords = []
    for line in _read_lines(path):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            parts = stripped[1:].split(",")
            if len(parts) != 4:
                raise FormatError("window line must be '# xmin,ymin,xmax,ymax'", str(path))
            window = tuple(_parse_float(p, path) for p in parts)
            continue
        if stripped.replace(" ", "") == "x,y":
            continue
        parts = stripped.split(",")
        if len(parts) != 2:
            raise FormatError(f"expected 2 columns, got {len(parts)}", str(path))
        coords.append((_parse_float(parts[0], path), _parse_float(parts[1], path)))

    if window is None:
        raise FormatError("missing window comment line", str(path))
    try:
        return PointSet(window, np.array(coords, dtype=float).reshape(-1, 2))
    except SpatialGenError as e:
        raise FormatError(e.message, str(path))


def write_points_csv(points: PointSet, path: PathLike) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        f.write("# " + ",".join(format_number(v) for v in points.window) + "\n")
        f.write("x,y\n")
        for x, y in points.points:
            f.write(f"{format_number(x)},{format_number(y)}\n")
