import io
import math

import pandas as pd
import pytest

from cli import main, parse_doubling_schedule, parse_lantern, parse_level_schedule, parse_point, parse_regime
from errors import ConfigError
from geom import Point2
from partition import Partition, Polygon2, lantern_balanced_closed_form, triangulate


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out


def read_table(text):
    return pd.read_csv(io.StringIO(text), float_precision="round_trip")


# 플래그 해석
def test_schedules():
    assert parse_doubling_schedule("4:256") == [4, 8, 16, 32, 64, 128, 256]
    assert parse_doubling_schedule("4:10") == [4, 8]
    assert parse_doubling_schedule("3,5,7") == [3, 5, 7]
    assert parse_level_schedule("0:3") == [0, 1, 2, 3]
    assert parse_level_schedule("2,4") == [2, 4]


@pytest.mark.parametrize("text", ["8:4", "0:4", "a:b", "4,0", ""])
def test_bad_doubling_schedule(text):
    with pytest.raises(ConfigError):
        parse_doubling_schedule(text)


def test_point_regime_and_lantern_flags():
    assert parse_point("pi/2, 1") == Point2(math.pi / 2, 1.0)
    assert parse_regime("n=m^3") == 3
    assert parse_lantern("m=8, n=64") == (8, 64)
    with pytest.raises(ConfigError):
        parse_regime("n=m^4")
    with pytest.raises(ConfigError):
        parse_lantern("m=8")
    with pytest.raises(ConfigError):
        parse_point("1")


# 종료 코드
@pytest.mark.parametrize(
    "argv",
    [
        ["tangent", "--surface", "sphere"],
        ["tangent", "--surface", "graph(u+)"],
        ["area", "--surface", "cylinder(rho=1)"],
        ["area", "--surface", "cylinder(rho=1)", "--lantern-schedule", "4:8"],
        ["schwarz-demo", "--m", "8:4"],
        ["schwarz-demo", "--threads", "0"],
        ["validate"],
        ["--log-level", "LOUD", "schwarz-demo"],
        ["nonsense"],
    ],
)
def test_configuration_errors_exit_with_two(argv, capsys):
    code, out = run(capsys, *argv)
    assert code == 2
    assert out == ""


# 하위 명령
def test_tangent_schwarz_table(capsys):
    code, out = run(capsys, "tangent", "--surface", "cylinder(rho=1)", "--schwarz", "n=m^3", "--m", "4:64")
    assert code == 0
    table = read_table(out)
    assert list(table["m"]) == [4, 8, 16, 32, 64]
    assert list(table["n"]) == [m**3 for m in table["m"]]
    for m, value in zip(table["m"], table["balanced_e23"]):
        assert value == pytest.approx(m / math.pi * math.sin(math.pi / m), rel=1e-12)
    assert table["ref_e23"].tolist() == pytest.approx([1.0] * len(table))
    assert table["naive_e12"].is_monotonic_increasing


def test_tangent_shrinking_triangles(capsys):
    code, out = run(capsys, "tangent", "--surface", "graph(sin(u)*cos(v))", "--levels", "2:6", "--at", "0.3,0.4")
    assert code == 0
    table = read_table(out)
    assert list(table.columns[:2]) == ["diameter", "naive_e12"]
    errors = list(table["balanced_abs_error"])
    assert errors[-1] < errors[0]


def test_area_polygon_table(capsys, tmp_path):
    out_path = tmp_path / "area.csv"
    code, out = run(
        capsys, "area", "--surface", "cylinder(rho=1)", "--polygon", "rect(0,pi/2,0,1)", "--levels", "0:3",
        "--out", str(out_path),
    )
    assert code == 0
    assert out == ""
    table = pd.read_csv(out_path, float_precision="round_trip")
    assert list(table["triangles"]) == [2, 8, 32, 128]
    assert table["oracle"].iloc[0] == pytest.approx(math.pi / 2, rel=1e-10)
    assert table["balanced_abs_error"].is_monotonic_decreasing


def test_area_lantern_row(capsys):
    code, out = run(capsys, "area", "--surface", "cylinder(rho=1)", "--lantern", "m=8,n=8")
    assert code == 0
    row = read_table(out).iloc[0]
    assert row["triangles"] == 128
    assert row["balanced"] == pytest.approx(lantern_balanced_closed_form(8, 8), rel=1e-9)
    assert row["balanced"] == pytest.approx(row["balanced_closed_form"], rel=1e-9)
    assert row["naive"] == pytest.approx(row["naive_closed_form"], rel=1e-9)
    assert row["reference"] == pytest.approx(2 * math.pi, rel=1e-10)


def test_area_lantern_on_periodic_custom_surface(capsys):
    code, out = run(capsys, "area", "--surface", "custom(cos(u), sin(u), v)", "--lantern", "m=8,n=8")
    assert code == 0
    row = read_table(out).iloc[0]
    assert row["balanced"] == pytest.approx(lantern_balanced_closed_form(8, 8), rel=1e-9)
    assert row["reference"] == pytest.approx(2 * math.pi, rel=1e-10)
    assert "balanced_closed_form" not in row.index


@pytest.mark.parametrize("surface", ["graph(u^2)", "flat", "custom(u, v, u*v)"])
def test_area_lantern_rejects_non_periodic_surface(surface, capsys):
    code, out = run(capsys, "area", "--surface", surface, "--lantern", "m=8,n=8")
    assert code == 2
    assert out == ""


def test_area_lantern_closed_form_blank_when_apex_condition_fails(capsys):
    code, out = run(capsys, "area", "--surface", "cylinder(rho=1)", "--lantern", "m=64,n=1")
    assert code == 0
    row = read_table(out).iloc[0]
    assert math.isnan(row["balanced_closed_form"])
    assert row["naive"] == pytest.approx(row["naive_closed_form"], rel=1e-9)
    assert row["balanced"] == pytest.approx(2 * math.pi, rel=1e-2)


def test_jacobian_table(capsys):
    code, out = run(capsys, "jacobian", "--transform", "custom(u*u, v)", "--at", "1,0", "--levels", "0:4")
    assert code == 0
    table = read_table(out)
    assert list(table["level"]) == [0, 1, 2, 3, 4]
    for level, estimate in zip(table["level"], table["estimate"]):
        assert estimate == pytest.approx(2.0 + 1.5 * 2.0**-level, rel=1e-12)
    assert (table["reference"] == 2.0).all()


def test_validate_ok(capsys):
    code, out = run(capsys, "validate", "--polygon", "rect(0,1,0,1)", "--levels", "2", "--seed", "7")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "field,value"
    assert "status,ok" in lines
    assert "triangle_count,32" in lines


def test_validate_flags_bad_partition_file(capsys, tmp_path):
    triangles = list(triangulate(Polygon2.rect(0, 1, 0, 1)))
    triangles[1] = triangles[1].reversed()
    path = tmp_path / "flipped.csv"
    Partition(tuple(triangles)).to_csv(path)
    code, out = run(capsys, "validate", "--partition", str(path))
    assert code == 3
    assert "status,error" in out
    assert any(line.startswith("failure:orientation,1|") for line in out.splitlines())


def test_schwarz_demo_is_byte_identical_across_threads(capsys):
    _, serial = run(capsys, "schwarz-demo", "--m", "4:64")
    _, again = run(capsys, "schwarz-demo", "--m", "4:64")
    code, threaded = run(capsys, "schwarz-demo", "--m", "4:64", "--threads", "4")
    assert code == 0
    assert serial == again == threaded
    table = read_table(serial)
    assert len(table) == 4 * 5
    assert set(table["study"]) == {"schwarz_n=m", "schwarz_n=m^2", "schwarz_n=m^3", "shifted_n=m"}
    schwarz = table[table["study"] != "shifted_n=m"]
    assert (schwarz["balanced_e23"] - schwarz["balanced_closed_e23"]).abs().max() <= 1e-12
    shifted = table[table["study"] == "shifted_n=m"]
    assert shifted["ratio"].tolist() == pytest.approx([0.5] * len(shifted))


def test_tangent_on_flat_surface_is_exact(capsys):
    code, out = run(capsys, "tangent", "--surface", "flat", "--levels", "0:4", "--at", "0.5,-0.25")
    assert code == 0
    table = read_table(out)
    assert (table["balanced_abs_error"] <= 1e-12).all()
    assert (table["naive_abs_error"] <= 1e-12).all()
