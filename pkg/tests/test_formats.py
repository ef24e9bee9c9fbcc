import json

import numpy as np
import pytest

from src.exceptions import FormatError
from src.formats import (
    format_number,
    network_to_dict,
    read_grid_csv,
    read_network_json,
    read_points_csv,
    write_grid_csv,
    write_network_json,
    write_points_csv,
)
from src.models import Grid, PointSet
from src.netgen import generate_random_planar
from src.rng import RngStream


@pytest.mark.parametrize("value, text", [(1.0, "1"), (0.1, "0.1"), (2.5e-10, "2.5e-10"), (1e16, "1e+16")])
def test_format_number(value, text):
    assert format_number(value) == text


class TestGridCsv:
    def test_small_grid_text(self, tmp_path):
        path = tmp_path / "g.csv"
        write_grid_csv(Grid([[1, 2], [3, 4]]), path)
        assert path.read_text() == "1,2\n3,4\n"
        assert read_grid_csv(path) == Grid([[1, 2], [3, 4]])

    def test_random_grid_round_trips_bit_exactly(self, tmp_path):
        grid = Grid(RngStream(1).random((100, 100)) * 1000)
        path = tmp_path / "g.csv"
        write_grid_csv(grid, path)
        assert read_grid_csv(path) == grid

    def test_cell_size_header(self, tmp_path):
        path = tmp_path / "g.csv"
        write_grid_csv(Grid([[1, 2]], cell_size=2.5), path)
        assert path.read_text().splitlines()[0] == "# 2,1,2.5"
        assert read_grid_csv(path).cell_size == 2.5

    @pytest.mark.parametrize(
        "text, message",
        [
            ("", "empty grid file"),
            ("1,2\n3\n", "non-rectangular grid"),
            ("1,-2\n", "negative cell value"),
            ("1,x\n", "non-numeric"),
            ("# 3,1,1\n1,2\n", "header says"),
        ],
    )
    def test_errors(self, tmp_path, text, message):
        path = tmp_path / "bad.csv"
        path.write_text(text)
        with pytest.raises(FormatError, match=message) as info:
            read_grid_csv(path)
        assert info.value.path == str(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FormatError, match="cannot read file"):
            read_grid_csv(tmp_path / "missing.csv")


class TestNetworkJson:
    def test_two_node_round_trip(self, tmp_path):
        path = tmp_path / "n.json"
        path.write_text(
            json.dumps(
                {"nodes": [{"id": 0, "x": 0, "y": 0}, {"id": 1, "x": 3, "y": 4}], "edges": [{"from": 0, "to": 1}]}
            )
        )
        net = read_network_json(path)
        assert net.edges[0].length == 5.0
        assert net.edges[0].free_flow_time == 5.0
        write_network_json(net, tmp_path / "out.json")
        assert read_network_json(tmp_path / "out.json") == net

    def test_dangling_edge(self, tmp_path):
        path = tmp_path / "n.json"
        path.write_text(json.dumps({"nodes": [{"id": 0, "x": 0, "y": 0}], "edges": [{"from": 0, "to": 7, "length": 1}]}))
        with pytest.raises(FormatError, match="dangling edge"):
            read_network_json(path)

    def test_duplicate_node(self, tmp_path):
        path = tmp_path / "n.json"
        path.write_text(json.dumps({"nodes": [{"id": 0, "x": 0, "y": 0}, {"id": 0, "x": 1, "y": 0}]}))
        with pytest.raises(FormatError, match="duplicate node id"):
            read_network_json(path)

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "n.json"
        path.write_text("{nodes:")
        with pytest.raises(FormatError, match="invalid JSON"):
            read_network_json(path)

    def test_generated_network_round_trips(self, tmp_path):
        net = generate_random_planar(200, 0.3, (0, 0, 10, 10), RngStream(9))
        path = tmp_path / "n.json"
        write_network_json(net, path)
        loaded = read_network_json(path)
        assert loaded == net
        assert network_to_dict(loaded) == network_to_dict(net)


class TestPointsCsv:
    def test_round_trip(self, tmp_path):
        points = PointSet((0, 0, 2, 1), RngStream(2).random((10, 2)))
        path = tmp_path / "p.csv"
        write_points_csv(points, path)
        assert path.read_text().startswith("# 0,0,2,1\nx,y\n")
        assert read_points_csv(path) == points

    def test_missing_window(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("x,y\n0.5,0.5\n")
        with pytest.raises(FormatError, match="missing window"):
            read_points_csv(path)
