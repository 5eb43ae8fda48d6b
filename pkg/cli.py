"""schwarzga 명령행 인터페이스

수렴 표(CSV)와 분할 검증 보고서를 만든다. 같은 설정이면 출력 바이트가 같다.

    python cli.py tangent --surface "cylinder(rho=1)" --schwarz n=m --m 4:256
    python cli.py area --surface "cylinder(rho=1)" --polygon "rect(0,pi/2,0,1)" --levels 0:6
    python cli.py jacobian --transform "custom(u*u, v)" --at 1,0 --levels 0:10
    python cli.py validate --polygon "rect(0,1,0,1)" --levels 2 --seed 7
    python cli.py schwarz-demo --m 4:256
"""
import argparse
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import pandas as pd

from config import SETTINGS, setup_logging
from errors import EXIT_NUMERICAL, EXIT_OK, ConfigError, SchwarzGAError
from estimators import (
    area_estimate_balanced,
    area_estimate_naive,
    area_integral_oracle,
    balanced_mean_bivector,
    convergence_study,
    generalized_balanced_bivector,
    jacobian_estimate,
    mean_bivector_naive,
    relaxation_ratio,
    schwarz_balanced_closed_form,
    schwarz_naive_closed_form,
    schwarz_shifted_triangle,
)
from expr import parse
from ga import norm
from geom import OrientedTriangle2, Point2
from partition import (
    Partition,
    Polygon2,
    lantern_apex_is_diameter_vertex,
    lantern_area_closed_form,
    lantern_balanced_closed_form,
    polygon_from_spec,
    refine_times,
    schwarz_lantern_partition,
    schwarz_local_triangles,
    triangulate,
    validate_partition,
)
from surfaces import is_periodic_in_u, make_cylinder, surface_from_spec, tangent_bivector, transform_from_spec

logger = logging.getLogger("schwarzga.cli")

REGIMES = {"n=m": 1, "n=m^2": 2, "n=m^3": 3}
DEFAULT_M_SCHEDULE = "4:256"
DEFAULT_LEVELS = "0:6"
SUBCOMMANDS = ("tangent", "area", "jacobian", "validate", "schwarz-demo")


# 플래그 해석
def _number(text):
    return parse(text).eval(0.0, 0.0)


def parse_doubling_schedule(text):
    """`A:B`는 A부터 B까지 두 배씩, `a,b,c`는 명시 목록"""
    text = text.strip()
    try:
        if ":" in text:
            start, stop = (int(part) for part in text.split(":"))
            if start < 1 or stop < start:
                raise ConfigError(f"잘못된 schedule 범위입니다: {text!r}")
            values = []
            value = start
            while value <= stop:
                values.append(value)
                value *= 2
            return values
        values = [int(part) for part in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"schedule을 해석할 수 없습니다: {text!r}") from exc
    if not values or min(values) < 1:
        raise ConfigError(f"schedule 값은 1 이상이어야 합니다: {text!r}")
    return values


def parse_level_schedule(text):
    """`A:B`는 A..B 연속 세분 단계, `a,b,c`는 명시 목록"""
    text = text.strip()
    try:
        if ":" in text:
            start, stop = (int(part) for part in text.split(":"))
            values = list(range(start, stop + 1))
        else:
            values = [int(part) for part in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"단계 schedule을 해석할 수 없습니다: {text!r}") from exc
    if not values or min(values) < 0:
        raise ConfigError(f"단계는 0 이상이어야 합니다: {text!r}")
    return values


def parse_point(text):
    parts = text.split(",")
    if len(parts) != 2:
        raise ConfigError(f"점은 X,Y 형식이어야 합니다: {text!r}")
    return Point2(_number(parts[0]), _number(parts[1]))


def parse_regime(text):
    key = text.replace(" ", "")
    if key not in REGIMES:
        raise ConfigError(f"알 수 없는 regime입니다: {text!r} (가능: {', '.join(REGIMES)})")
    return REGIMES[key]


def parse_lantern(text):
    """`m=M,n=N`"""
    values = {}
    for part in text.split(","):
        key, _, value = part.partition("=")
        try:
            values[key.strip()] = int(value)
        except ValueError as exc:
            raise ConfigError(f"랜턴 매개변수를 해석할 수 없습니다: {text!r}") from exc
    if set(values) != {"m", "n"}:
        raise ConfigError(f"랜턴은 m=M,n=N 형식이어야 합니다: {text!r}")
    return values["m"], values["n"]


@dataclass
class RunConfig:
    """검증된 실행 설정"""

    subcommand: str
    surface: str = None
    polygon: str = None
    partition: str = None
    transform: str = None
    regime: int = None
    schedule: list = field(default_factory=list)
    levels: list = field(default_factory=list)
    lantern: tuple = None
    lantern_schedule: list = None
    height: float = 1.0
    at: Point2 = None
    out: str = None
    rtol: float = None
    threads: int = 1
    relaxed: bool = False
    kappa: float = None
    seed: int = None

    def validate(self):
        if self.subcommand not in SUBCOMMANDS:
            raise ConfigError(f"알 수 없는 하위 명령입니다: {self.subcommand!r}")
        if self.threads < 1:
            raise ConfigError(f"--threads는 1 이상이어야 합니다: {self.threads}")
        if self.kappa is not None and self.kappa < 1.0:
            raise ConfigError(f"--kappa는 1 이상이어야 합니다: {self.kappa}")
        if self.rtol is not None and not 0 < self.rtol < 1:
            raise ConfigError(f"--rtol은 (0, 1) 범위여야 합니다: {self.rtol}")
        if self.subcommand in ("tangent", "area") and not self.surface:
            raise ConfigError(f"{self.subcommand}에는 --surface가 필요합니다")
        if self.subcommand == "area":
            modes = [self.polygon is not None, self.lantern is not None, self.lantern_schedule is not None]
            if sum(modes) != 1:
                raise ConfigError("area에는 --polygon, --lantern, --lantern-schedule 중 하나만 지정합니다")
            if self.lantern_schedule is not None and self.regime is None:
                raise ConfigError("--lantern-schedule에는 --regime이 필요합니다")
            if not self.height > 0:
                raise ConfigError(f"--height는 양수여야 합니다: {self.height}")
        if self.subcommand == "jacobian" and (not self.transform or self.at is None):
            raise ConfigError("jacobian에는 --transform과 --at이 필요합니다")
        if self.subcommand == "validate" and self.polygon is None and self.partition is None:
            raise ConfigError("validate에는 --polygon 또는 --partition이 필요합니다")
        return self

    @classmethod
    def from_args(cls, args):
        sub = args.subcommand
        config = cls(subcommand=sub, out=getattr(args, "out", None))
        config.surface = getattr(args, "surface", None)
        config.polygon = getattr(args, "polygon", None)
        config.partition = getattr(args, "partition", None)
        config.transform = getattr(args, "transform", None)
        threads = getattr(args, "threads", None)
        config.threads = SETTINGS.threads if threads is None else threads
        config.relaxed = getattr(args, "relaxed", False)
        config.kappa = getattr(args, "kappa", None)
        config.rtol = getattr(args, "rtol", None)
        config.seed = getattr(args, "seed", None)
        config.height = getattr(args, "height", 1.0)
        if getattr(args, "at", None):
            config.at = parse_point(args.at)
        if sub == "tangent":
            if args.schwarz:
                config.regime = parse_regime(args.schwarz)
                config.schedule = parse_doubling_schedule(args.m or DEFAULT_M_SCHEDULE)
            else:
                config.levels = parse_level_schedule(args.levels or DEFAULT_LEVELS)
        elif sub == "area":
            if args.lantern:
                config.lantern = parse_lantern(args.lantern)
            if args.lantern_schedule:
                config.lantern_schedule = parse_doubling_schedule(args.lantern_schedule)
            if args.regime:
                config.regime = parse_regime(args.regime)
            config.levels = parse_level_schedule(args.levels or DEFAULT_LEVELS)
        elif sub == "jacobian":
            config.levels = parse_level_schedule(args.levels or "0:8")
        elif sub == "validate":
            config.levels = [args.levels if args.levels is not None else 0]
        elif sub == "schwarz-demo":
            config.schedule = parse_doubling_schedule(args.m or DEFAULT_M_SCHEDULE)
        return config.validate()


# 공용 표 생성기 (CLI와 탐색기에서 공유)
@dataclass
class StudyResult:
    """출력 표와 관측 차수 요약"""

    frame: pd.DataFrame
    orders: dict = field(default_factory=dict)


def _prefixed(table, prefix, keep):
    frame = table.frame.drop(columns=keep)
    return frame.rename(columns=lambda c: f"{prefix}_{c.removeprefix('est_')}")


def shrinking_triangle(at, size):
    """at을 꼭짓점으로 하는 한 변 size의 정삼각형"""
    return OrientedTriangle2(at, at + Point2(size, 0.0), at + Point2(0.5 * size, 0.5 * math.sqrt(3.0) * size))


def build_tangent_table(surface, at=None, regime=None, ms=None, levels=None):
    """naive와 균형 평균 이중벡터를 해석적 접평면 이중벡터와 비교

    regime이 있으면 at으로 옮긴 슈바르츠 삼각형(n = m^regime), 없으면 한 변 2^-level인 정삼각형을 쓴다.
    """
    at = at or Point2(0.0, 0.0)
    reference = tangent_bivector(surface, at)
    if regime is not None:
        parameter = "m"
        schedule = list(ms)
        triangle_of = lambda m: schwarz_local_triangles(m, m**regime).translated(at)
        measure = None
    else:
        parameter = "diameter"
        schedule = list(levels)
        triangle_of = lambda level: shrinking_triangle(at, 2.0**-level)
        measure = lambda level: 2.0**-level
    naive = convergence_study(
        lambda p: mean_bivector_naive(surface, triangle_of(p)), schedule, reference, parameter, measure
    )
    balanced = convergence_study(
        lambda p: balanced_mean_bivector(surface, triangle_of(p)).value, schedule, reference, parameter, measure
    )
    head = balanced.frame[[parameter]].copy()
    if regime is not None:
        head["n"] = [m**regime for m in schedule]
    ref_columns = [c for c in balanced.frame.columns if c.startswith("ref_")]
    frame = pd.concat(
        [
            head,
            _prefixed(naive, "naive", [parameter, *ref_columns]),
            _prefixed(balanced, "balanced", [parameter, *ref_columns]),
            balanced.frame[ref_columns],
        ],
        axis=1,
    )
    return StudyResult(frame, {"naive": naive.order_label, "balanced": balanced.order_label})


def build_area_table(surface, polygon, levels, rtol=None, threads=None, relaxed=False, kappa=None):
    """세분 단계별 ‖Π‖, 균형/naive 추정, 적분 오라클"""
    oracle = area_integral_oracle(surface, polygon, rtol=rtol)
    base = triangulate(polygon)
    partitions = {level: refine_times(base, level) for level in levels}
    balanced = convergence_study(
        lambda level: area_estimate_balanced(surface, partitions[level], threads, relaxed, kappa),
        levels,
        oracle,
        "mesh_norm",
        lambda level: partitions[level].mesh_norm,
    )
    naive = convergence_study(
        lambda level: area_estimate_naive(surface, partitions[level], threads),
        levels,
        oracle,
        "mesh_norm",
        lambda level: partitions[level].mesh_norm,
    )
    frame = pd.DataFrame(
        {
            "level": levels,
            "triangles": [len(partitions[level]) for level in levels],
            "mesh_norm": balanced.frame["mesh_norm"],
            "balanced": balanced.frame["estimate"],
            "naive": naive.frame["estimate"],
            "oracle": oracle,
            "balanced_abs_error": balanced.frame["abs_error"],
            "naive_abs_error": naive.frame["abs_error"],
            "balanced_local_order": balanced.frame["local_order"],
        }
    )
    return StudyResult(frame, {"balanced": balanced.order_label, "naive": naive.order_label})


def _lantern_row(surface, m, n, height, threads, relaxed, kappa, reference):
    partition = schwarz_lantern_partition(m, n, height)
    row = {
        "m": m,
        "n": n,
        "triangles": len(partition),
        "mesh_norm": partition.mesh_norm,
        "balanced": area_estimate_balanced(surface, partition, threads, relaxed, kappa),
        "naive": area_estimate_naive(surface, partition, threads),
        "reference": reference,
    }
    rho = surface.parameters.get("rho")
    if rho is not None:
        row["naive_closed_form"] = lantern_area_closed_form(m, n, height, rho)
        # 꼭짓점 조건이 깨지면 닫힌 형태가 성립하지 않음
        if lantern_apex_is_diameter_vertex(m, n, height):
            row["balanced_closed_form"] = lantern_balanced_closed_form(m, n, height, rho)
        else:
            row["balanced_closed_form"] = math.nan
    row["balanced_rel_error"] = abs(row["balanced"] - reference) / reference
    row["naive_rel_error"] = abs(row["naive"] - reference) / reference
    return row


def build_lantern_table(surface, pairs, height=1.0, rtol=None, threads=None, relaxed=False, kappa=None):
    """랜턴 분할 (m, n) 쌍마다 균형/naive 넓이와 기준 넓이 (2π×height 직사각형 적분)"""
    if not is_periodic_in_u(surface, 2.0 * math.pi, (0.0, height)):
        raise ConfigError(f"랜턴 분할은 u 방향 주기 2π 곡면에서만 쓸 수 있습니다: {surface.name}")
    reference = area_integral_oracle(surface, Polygon2.rect(0.0, 2.0 * math.pi, 0.0, height), rtol=rtol)
    rows = [_lantern_row(surface, m, n, height, threads, relaxed, kappa, reference) for m, n in pairs]
    return StudyResult(pd.DataFrame(rows))


def _schwarz_row(args):
    m, regime, rho = args
    n = m**regime
    triangle = schwarz_local_triangles(m, n)
    cylinder = make_cylinder(rho)
    naive = mean_bivector_naive(cylinder, triangle)
    balanced = balanced_mean_bivector(cylinder, triangle, which="A").value
    naive_closed = schwarz_naive_closed_form(m, n, rho)
    balanced_closed = schwarz_balanced_closed_form(m, rho)
    reference = tangent_bivector(cylinder, Point2(0.0, 0.0))
    return {
        "study": f"schwarz_{list(REGIMES)[regime - 1]}",
        "m": m,
        "n": n,
        "naive_e12": naive.coeffs[0b011],
        "naive_e13": naive.coeffs[0b101],
        "naive_e23": naive.coeffs[0b110],
        "naive_closed_e12": naive_closed.coeffs[0b011],
        "naive_closed_e23": naive_closed.coeffs[0b110],
        "balanced_e23": balanced.coeffs[0b110],
        "balanced_closed_e23": balanced_closed.coeffs[0b110],
        "naive_error": norm(naive - reference),
        "balanced_error": norm(balanced - reference),
        "ratio": math.nan,
    }


def _shifted_row(args):
    m, rho = args
    cylinder = make_cylinder(rho)
    triangle, d = schwarz_shifted_triangle(m, m)
    estimate = generalized_balanced_bivector(cylinder, triangle, d)
    reference = tangent_bivector(cylinder, Point2(0.0, 0.0))
    return {
        "study": "shifted_n=m",
        "m": m,
        "n": m,
        "naive_e12": math.nan,
        "naive_e13": math.nan,
        "naive_e23": math.nan,
        "naive_closed_e12": math.nan,
        "naive_closed_e23": math.nan,
        "balanced_e23": estimate.coeffs[0b110],
        "balanced_closed_e23": math.nan,
        "naive_error": math.nan,
        "balanced_error": norm(estimate - reference),
        "ratio": relaxation_ratio(triangle, d),
    }


def build_schwarz_demo_table(ms, rho=1.0, threads=1):
    """원기둥 위 슈바르츠 삼각형 세 regime과 거울이 아닌 점 d 추정 표"""
    jobs = [(m, regime, rho) for regime in (1, 2, 3) for m in ms]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            schwarz = list(executor.map(_schwarz_row, jobs))
            shifted = list(executor.map(_shifted_row, [(m, rho) for m in ms]))
    else:
        schwarz = [_schwarz_row(job) for job in jobs]
        shifted = [_shifted_row((m, rho)) for m in ms]
    rows = schwarz + shifted
    return StudyResult(pd.DataFrame(rows))


def report_frame(report):
    """검증 보고서를 field,value 표로"""
    rows = [
        ("status", report["status"]),
        ("triangle_count", report["triangle_count"]),
        ("total_area", format(report["total_area"], ".17g")),
        ("polygon_area", "" if report["polygon_area"] is None else format(report["polygon_area"], ".17g")),
        ("mesh_norm", format(report["mesh_norm"], ".17g")),
    ]
    for failure in report["failures"]:
        tri_id = "" if failure["tri_id"] is None else failure["tri_id"]
        rows.append((f"failure:{failure['check']}", f"{tri_id}|{failure['detail']}"))
    return pd.DataFrame(rows, columns=["field", "value"])


# 하위 명령
def _emit(frame, out):
    text = frame.to_csv(index=False, float_format="%.17g", lineterminator="\n")
    if out:
        Path(out).write_text(text, encoding="utf-8")
        logger.info(f"CSV 저장: {out}")
    else:
        sys.stdout.write(text)


def cmd_tangent(config):
    surface = surface_from_spec(config.surface)
    result = build_tangent_table(surface, config.at, config.regime, config.schedule, config.levels)
    logger.info(f"관측 차수: {result.orders}")
    _emit(result.frame, config.out)
    return EXIT_OK


def cmd_area(config):
    surface = surface_from_spec(config.surface)
    if config.polygon is not None:
        result = build_area_table(
            surface,
            polygon_from_spec(config.polygon),
            config.levels,
            config.rtol,
            config.threads,
            config.relaxed,
            config.kappa,
        )
        logger.info(f"관측 차수: {result.orders}")
    else:
        if config.lantern is not None:
            pairs = [config.lantern]
        else:
            pairs = [(m, m**config.regime) for m in config.lantern_schedule]
        result = build_lantern_table(
            surface, pairs, config.height, config.rtol, config.threads, config.relaxed, config.kappa
        )
    _emit(result.frame, config.out)
    return EXIT_OK


def build_jacobian_table(transform, at, levels, relaxed=False, kappa=None):
    """한 변 2^-level 정삼각형으로 야코비안 추정"""
    reference = transform.jacobian(at)
    table = convergence_study(
        lambda level: jacobian_estimate(transform, shrinking_triangle(at, 2.0**-level), relaxed=relaxed, kappa=kappa),
        levels,
        reference,
        "diameter",
        lambda level: 2.0**-level,
    )
    frame = table.frame.copy()
    frame.insert(0, "level", levels)
    return StudyResult(frame, {"jacobian": table.order_label})


def cmd_jacobian(config):
    transform = transform_from_spec(config.transform)
    result = build_jacobian_table(transform, config.at, config.levels, config.relaxed, config.kappa)
    logger.info(f"관측 차수: {result.orders}")
    _emit(result.frame, config.out)
    return EXIT_OK


def cmd_validate(config):
    polygon = polygon_from_spec(config.polygon) if config.polygon else None
    if config.partition:
        partition = Partition.from_csv(config.partition)
    else:
        partition = refine_times(triangulate(polygon), config.levels[0])
    surface = surface_from_spec(config.surface) if config.surface else None
    report = validate_partition(partition, polygon, surface, seed=config.seed)
    _emit(report_frame(report), config.out)
    return EXIT_OK if report["status"] == "ok" else EXIT_NUMERICAL


def cmd_schwarz_demo(config):
    result = build_schwarz_demo_table(config.schedule, threads=config.threads)
    _emit(result.frame, config.out)
    return EXIT_OK


COMMANDS = {
    "tangent": cmd_tangent,
    "area": cmd_area,
    "jacobian": cmd_jacobian,
    "validate": cmd_validate,
    "schwarz-demo": cmd_schwarz_demo,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="schwarzga", description="균형 거울 꼭짓점 추정기 수렴 연구")
    parser.add_argument("--log-level", default=None, help="로그 레벨 (기본값 SCHWARZGA_LOG_LEVEL)")
    subparsers = parser.add_subparsers(dest="subcommand", required=True)

    tangent = subparsers.add_parser("tangent", help="접평면 이중벡터 추정")
    tangent.add_argument("--surface", required=True)
    tangent.add_argument("--schwarz", help="n=m | n=m^2 | n=m^3")
    tangent.add_argument("--m", help="m schedule (A:B 두 배씩 또는 목록)")
    tangent.add_argument("--levels", help="정삼각형 축소 단계 (A:B 또는 목록)")
    tangent.add_argument("--at", help="기준점 X,Y")
    tangent.add_argument("--out")

    area = subparsers.add_parser("area", help="곡면 넓이 추정")
    area.add_argument("--surface", required=True)
    area.add_argument("--polygon")
    area.add_argument("--levels")
    area.add_argument("--lantern", help="m=M,n=N")
    area.add_argument("--lantern-schedule", dest="lantern_schedule")
    area.add_argument("--regime")
    area.add_argument("--height", type=float, default=1.0)
    area.add_argument("--rtol", type=float)
    area.add_argument("--threads", type=int)
    area.add_argument("--relaxed", action="store_true")
    area.add_argument("--kappa", type=float)
    area.add_argument("--out")

    jacobian = subparsers.add_parser("jacobian", help="야코비안 행렬식 추정")
    jacobian.add_argument("--transform", required=True)
    jacobian.add_argument("--at", required=True)
    jacobian.add_argument("--levels")
    jacobian.add_argument("--relaxed", action="store_true")
    jacobian.add_argument("--kappa", type=float)
    jacobian.add_argument("--out")

    validate = subparsers.add_parser("validate", help="분할 검증")
    validate.add_argument("--polygon")
    validate.add_argument("--partition")
    validate.add_argument("--levels", type=int)
    validate.add_argument("--surface")
    validate.add_argument("--seed", type=int)
    validate.add_argument("--out")

    demo = subparsers.add_parser("schwarz-demo", help="슈바르츠 삼각형 표 일괄 재현")
    demo.add_argument("--m")
    demo.add_argument("--threads", type=int)
    demo.add_argument("--out")
    return parser


def main(argv=None):
    """명령행 진입점

    Returns:
        int: 종료 코드 (0 성공, 2 설정 오류, 3 수치 실패)
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    try:
        setup_logging(args.log_level)
        config = RunConfig.from_args(args)
        return COMMANDS[config.subcommand](config)
    except SchwarzGAError as exc:
        logger.error(f"{type(exc).__name__}: {exc}")
        print(f"오류: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
