import io
import math

import pytest

from errors import ConfigError
from geom import OrientedTriangle2, Point2
from partition import (
    CSV_COLUMNS,
    Partition,
    Polygon2,
    _bounding_boxes,
    _grid_buckets,
    lantern_apex_is_diameter_vertex,
    lantern_balanced_closed_form,
    polygon_from_spec,
    refine_midpoint,
    refine_times,
    schwarz_lantern_partition,
    schwarz_local_triangles,
    triangulate,
    validate_partition,
)
from surfaces import Rectangle, make_cylinder

UNIT_SQUARE = Polygon2.rect(0, 1, 0, 1)
PENTAGON = Polygon2(((0, 0), (2, 0), (3, 1.5), (1, 3), (-1, 1.5)))
L_HEXAGON = Polygon2(((0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)))


def checks(report):
    return {failure["check"] for failure in report["failures"]}


# 다각형
def test_polygon_area_and_bounds():
    assert UNIT_SQUARE.area == 1.0
    assert L_HEXAGON.area == 3.0
    assert PENTAGON.bounds == (-1.0, 3.0, 0.0, 3.0)
    assert L_HEXAGON.contains(Point2(0.5, 1.5))
    assert not L_HEXAGON.contains(Point2(1.5, 1.5))


@pytest.mark.parametrize(
    "vertices",
    [
        ((0, 0), (1, 0)),
        ((0, 0), (0, 1), (1, 0)),
        ((0, 0), (1, 0), (1, 0), (0, 1)),
        ((0, 0), (2, 0), (2, 2), (1, -1), (0, 2)),
    ],
    ids=["too-few", "clockwise", "duplicate", "self-intersecting"],
)
def test_polygon_rejects_invalid_input(vertices):
    with pytest.raises(ConfigError):
        Polygon2(vertices)


# 삼각 분할
@pytest.mark.parametrize("polygon,count", [(UNIT_SQUARE, 2), (PENTAGON, 3), (L_HEXAGON, 4)])
def test_triangulate_counts_and_area(polygon, count):
    partition = triangulate(polygon)
    assert len(partition) == count
    assert partition.total_area == pytest.approx(polygon.area, rel=1e-12)
    assert all(t.double_signed_area > 0 for t in partition)
    assert validate_partition(partition, polygon, seed=3)["status"] == "ok"


def test_triangulate_with_collinear_vertex():
    polygon = Polygon2(((0, 0), (1, 0), (2, 0), (2, 1), (0, 1)))
    partition = triangulate(polygon)
    assert partition.total_area == pytest.approx(2.0)
    assert not any(t.is_degenerate() for t in partition)


@pytest.mark.parametrize("polygon", [UNIT_SQUARE, PENTAGON, L_HEXAGON])
def test_midpoint_refinement(polygon):
    partition = triangulate(polygon)
    refined = refine_midpoint(partition)
    assert len(refined) == 4 * len(partition)
    assert refined.mesh_norm == pytest.approx(partition.mesh_norm / 2)
    assert refined.total_area == pytest.approx(partition.total_area, rel=1e-12)
    assert all(t.double_signed_area > 0 for t in refined)
    assert len(refine_times(partition, 3)) == 64 * len(partition)
    assert refine_times(partition, 0) is partition


def test_refined_partition_validates():
    partition = refine_times(triangulate(L_HEXAGON), 2)
    report = validate_partition(partition, L_HEXAGON, seed=11)
    assert report["status"] == "ok"
    assert report["triangle_count"] == 64
    assert report["polygon_area"] == 3.0


# 슈바르츠 삼각형과 랜턴
@pytest.mark.parametrize("m,n", [(4, 4), (16, 256), (256, 65536)])
def test_schwarz_local_triangle(m, n):
    triangle = schwarz_local_triangles(m, n)
    assert triangle.a == Point2(0.0, 0.0)
    assert triangle.double_signed_area == pytest.approx(math.pi / (m * n), rel=1e-12)
    lengths = triangle.side_lengths
    assert lengths[1] == pytest.approx(lengths[2], rel=1e-15)


@pytest.mark.parametrize("m,n", [(0, 1), (1, 0), (True, 1), (2.5, 1)])
def test_schwarz_local_triangle_rejects_bad_counts(m, n):
    with pytest.raises(ConfigError):
        schwarz_local_triangles(m, n)


@pytest.mark.parametrize("m,n,height", [(3, 1, 1.0), (4, 4, 1.0), (8, 64, 2.0), (16, 4, 0.5)])
def test_lantern_partition_shape(m, n, height):
    lantern = schwarz_lantern_partition(m, n, height)
    assert len(lantern) == 2 * m * n
    assert lantern.total_area == pytest.approx(2 * math.pi * height, rel=1e-12)
    width = 2 * math.pi / m
    for triangle in lantern:
        assert triangle.double_signed_area > 0
        assert triangle.area == pytest.approx(0.5 * width * height / n, rel=1e-12)
        legs = math.hypot(width / 2, height / n)
        assert sum(length == pytest.approx(legs, rel=1e-12) for length in triangle.side_lengths) >= 2


def test_lantern_partition_has_no_overlaps():
    lantern = schwarz_lantern_partition(6, 5)
    report = validate_partition(lantern)
    assert report["status"] == "ok"
    assert report["triangle_count"] == 60


@pytest.mark.parametrize("m,n,height", [(3, 1, 1.0), (8, 8, 1.0), (6, 5, 2.5), (16, 3, 0.5)])
def test_lantern_covers_rectangle_modulo_period(m, n, height):
    rectangle = Polygon2.rect(0, 2 * math.pi, 0, height)
    report = validate_partition(
        schwarz_lantern_partition(m, n, height), rectangle, seed=7, period=2 * math.pi
    )
    assert report["status"] == "ok", report["failures"]
    assert report["total_area"] == pytest.approx(report["polygon_area"], rel=1e-12)


def test_lantern_leaves_seam_gaps_without_period():
    lantern = schwarz_lantern_partition(4, 2)
    report = validate_partition(lantern, Polygon2.rect(0, 2 * math.pi, 0, 1), seed=7, samples=500)
    assert checks(report) == {"sample_gap"}


def test_grid_buckets_stay_small_on_flat_and_regular_meshes():
    lantern = schwarz_lantern_partition(8, 512)
    square = refine_times(triangulate(UNIT_SQUARE), 4)
    for partition in (lantern, square):
        buckets = _grid_buckets(_bounding_boxes(partition.triangles))
        assert max(len(members) for members in buckets.values()) <= 32


@pytest.mark.parametrize("m,n,height", [(2, 1, 1.0), (4, 0, 1.0), (4, 1, 0.0)])
def test_lantern_partition_rejects_bad_input(m, n, height):
    with pytest.raises(ConfigError):
        schwarz_lantern_partition(m, n, height)


def test_lantern_apex_condition():
    assert lantern_apex_is_diameter_vertex(16, 4)
    assert lantern_apex_is_diameter_vertex(32, 32**3)
    assert not lantern_apex_is_diameter_vertex(64, 1)


def test_lantern_balanced_closed_form_limit():
    assert lantern_balanced_closed_form(4, 1) == pytest.approx(8 * math.sin(math.pi / 4))
    assert lantern_balanced_closed_form(1024, 1) == pytest.approx(2 * math.pi, rel=1e-5)


# CSV
def test_partition_csv_round_trip(tmp_path):
    partition = refine_times(triangulate(PENTAGON), 1)
    text = partition.to_csv()
    assert text.splitlines()[0] == ",".join(CSV_COLUMNS)
    assert Partition.from_csv(io.StringIO(text)).triangles == partition.triangles
    path = tmp_path / "partition.csv"
    partition.to_csv(path)
    assert Partition.from_csv(path).triangles == partition.triangles


def test_partition_csv_missing_columns():
    with pytest.raises(ConfigError):
        Partition.from_csv(io.StringIO("tri_id,ax,ay\n0,0,0\n"))


def test_empty_partition_rejected():
    with pytest.raises(ConfigError):
        Partition(())


# 검증 보고서
def test_validate_flags_flipped_triangle():
    triangles = list(triangulate(UNIT_SQUARE))
    triangles[0] = triangles[0].reversed()
    report = validate_partition(Partition(tuple(triangles)), UNIT_SQUARE)
    assert report["status"] == "error"
    assert "orientation" in checks(report)
    assert [f["tri_id"] for f in report["failures"] if f["check"] == "orientation"] == [0]


def test_validate_flags_area_gap():
    triangles = refine_times(triangulate(UNIT_SQUARE), 1).triangles[1:]
    report = validate_partition(Partition(triangles), UNIT_SQUARE, seed=5)
    assert report["status"] == "error"
    assert {"area", "sample_gap"} <= checks(report)


def test_validate_flags_overlap():
    triangle = OrientedTriangle2.from_coords((0, 0), (1, 0), (0, 1))
    shifted = triangle.translated(Point2(0.25, 0.25))
    report = validate_partition(Partition((triangle, shifted)))
    assert "overlap" in checks(report)


def test_validate_flags_degenerate_triangle():
    flat = OrientedTriangle2.from_coords((0, 0), (1, 1), (2, 2))
    report = validate_partition(Partition((flat,)))
    assert checks(report) == {"nondegenerate"}


def test_validate_flags_reflection_outside_domain():
    surface = make_cylinder(1.0).restricted(Rectangle(0, 1, 0, 1))
    report = validate_partition(triangulate(UNIT_SQUARE), UNIT_SQUARE, surface=surface)
    assert "domain" in checks(report)
    assert validate_partition(triangulate(UNIT_SQUARE), UNIT_SQUARE, surface=make_cylinder(1.0))["status"] == "ok"


# 스펙 문자열
def test_polygon_from_spec():
    assert polygon_from_spec("rect(0,pi/2,0,1)").area == pytest.approx(math.pi / 2)
    assert polygon_from_spec("0,0; 1,0; 0,1").area == 0.5
    assert polygon_from_spec("rect(0, 2*pi, 0, 1)").bounds == pytest.approx((0.0, 2 * math.pi, 0.0, 1.0))


@pytest.mark.parametrize("spec", ["rect(0,1)", "rect 0,1,0,1", "0,0;1,0", "0,0;0,1;1,0", "0,0;1;0,1", "rect(1,0,0,1)"])
def test_polygon_from_spec_errors(spec):
    with pytest.raises(ConfigError):
        polygon_from_spec(spec)
