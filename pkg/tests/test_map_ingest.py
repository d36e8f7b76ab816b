"""Map loading, point-in-polygon and prior-grid rasterization."""

import json

import numpy as np
import pytest

from evigrid import frames
from evigrid.grid import GridSpec
from evigrid.map_ingest import (MapConfidence, MapFormatError, MapOverlapError,
                                VectorMap, load_map, point_in_polygon,
                                rasterize_gg)

UNIT_SQUARE = np.array([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])


def write_map(path, features):
    path.write_text(json.dumps({"type": "FeatureCollection", "features": features}))
    return path


def polygon_feature(kind, ring):
    return {"type": "Feature", "properties": {"kind": kind},
            "geometry": {"type": "Polygon", "coordinates": [ring]}}


SQUARE_RING = [[0, 0], [10, 0], [10, 10], [0, 10], [0, 0]]


class TestLoadMap:
    def test_single_building(self, tmp_path):
        path = write_map(tmp_path / "m.geojson", [polygon_feature("building", SQUARE_RING)])
        vmap = load_map(path)
        assert len(vmap.buildings) == 1
        assert len(vmap.roads) == 0
        assert vmap.buildings[0].shape == (4, 2)  # closing vertex stripped

    def test_unknown_kind(self, tmp_path):
        path = write_map(tmp_path / "m.geojson", [polygon_feature("river", SQUARE_RING)])
        with pytest.raises(MapFormatError, match="unknown feature kind"):
            load_map(path)

    def test_missing_kind(self, tmp_path):
        feature = polygon_feature("building", SQUARE_RING)
        del feature["properties"]["kind"]
        path = write_map(tmp_path / "m.geojson", [feature])
        with pytest.raises(MapFormatError, match="missing kind"):
            load_map(path)

    def test_too_few_vertices(self, tmp_path):
        path = write_map(tmp_path / "m.geojson",
                         [polygon_feature("road", [[0, 0], [1, 1], [0, 0]])])
        with pytest.raises(MapFormatError, match="at least 3 vertices"):
            load_map(path)

    def test_empty_collection(self, tmp_path):
        vmap = load_map(write_map(tmp_path / "m.geojson", []))
        assert vmap.buildings == [] and vmap.roads == []

    def test_not_json(self, tmp_path):
        path = tmp_path / "m.geojson"
        path.write_text("not json {")
        with pytest.raises(MapFormatError, match="not valid JSON"):
            load_map(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(MapFormatError, match="cannot read"):
            load_map(tmp_path / "nope.geojson")


def winding_number_inside(point, polygon):
    """Independent oracle: winding number via summed signed angles."""
    angles = np.arctan2(polygon[:, 1] - point[1], polygon[:, 0] - point[0])
    total = 0.0
    n = len(polygon)
    for k in range(n):
        d = angles[(k + 1) % n] - angles[k]
        while d > np.pi:
            d -= 2 * np.pi
        while d < -np.pi:
            d += 2 * np.pi
        total += d
    return abs(total) > np.pi  # ~2*pi inside, ~0 outside


class TestPointInPolygon:
    def test_center(self):
        assert point_in_polygon((0.5, 0.5), UNIT_SQUARE)

    def test_outside(self):
        assert not point_in_polygon((2.0, 2.0), UNIT_SQUARE)

    def test_vertex_is_inside(self):
        assert point_in_polygon((0.0, 0.0), UNIT_SQUARE)

    def test_edge_is_inside(self):
        assert point_in_polygon((0.5, 0.0), UNIT_SQUARE)
        assert point_in_polygon((1.0, 0.5), UNIT_SQUARE)

    def test_matches_winding_oracle(self):
        rng = np.random.default_rng(7)
        # a non-convex polygon
        poly = np.array([(0, 0), (4, 0), (4, 3), (2, 1.5), (0, 3)])
        for _ in range(500):
            p = rng.uniform(-1, 5, size=2)
            # stay away from the boundary, where the conventions differ
            if abs(p[1] - 0) < 1e-6:
                continue
            assert point_in_polygon(p, poly) == winding_number_inside(p, poly)


class TestRasterize:
    SPEC = GridSpec(0.0, 0.0, 1.0, 4, 4)

    def test_contexts(self):
        vmap = VectorMap(buildings=[np.array([(0, 0), (2, 0), (2, 2), (0, 2)])],
                         roads=[np.array([(2, 2), (4, 2), (4, 4), (2, 4)])])
        conf = MapConfidence(building=0.9, road=0.8, intermediate=0.6)
        gg = rasterize_gg(vmap, conf, self.SPEC)
        building_cell = gg.cell(0, 0)
        assert building_cell[frames.BUILDING_SET] == pytest.approx(0.9)
        assert building_cell["FIUSM"] == pytest.approx(0.1)
        road_cell = gg.cell(3, 3)
        assert road_cell[frames.ROAD_SET] == pytest.approx(0.8)
        assert road_cell["FIUSM"] == pytest.approx(0.2)
        open_cell = gg.cell(0, 3)
        assert open_cell[frames.INTERMEDIATE_SET] == pytest.approx(0.6)
        assert open_cell["FIUSM"] == pytest.approx(0.4)

    def test_at_most_two_focal(self):
        vmap = VectorMap(buildings=[np.array([(0, 0), (2, 0), (2, 2), (0, 2)])])
        gg = rasterize_gg(vmap, MapConfidence(), self.SPEC)
        for i in range(4):
            for j in range(4):
                assert np.count_nonzero(gg.masses[i, j]) <= 2

    def test_overlap_rejected(self):
        square = np.array([(0, 0), (2, 0), (2, 2), (0, 2)])
        vmap = VectorMap(buildings=[square], roads=[square])
        with pytest.raises(MapOverlapError, match=r"map overlap at cell \(0, 0\)"):
            rasterize_gg(vmap, MapConfidence(), self.SPEC)

    def test_zero_confidence_is_vacuous(self):
        vmap = VectorMap(buildings=[np.array([(0, 0), (2, 0), (2, 2), (0, 2)])])
        gg = rasterize_gg(vmap, MapConfidence(0.0, 0.0, 0.0), self.SPEC)
        for i in range(4):
            for j in range(4):
                assert gg.cell(i, j).is_vacuous()

    def test_deterministic(self):
        vmap = VectorMap(roads=[np.array([(0, 0), (4, 0), (4, 4), (0, 4)])])
        a = rasterize_gg(vmap, MapConfidence(), self.SPEC)
        b = rasterize_gg(vmap, MapConfidence(), self.SPEC)
        assert np.array_equal(a.masses, b.masses)

    def test_confidence_range(self):
        with pytest.raises(ValueError):
            MapConfidence(building=1.2)
