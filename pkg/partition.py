"""다각형 P, 삼각 분할 Π, 중점 세분, 슈바르츠 랜턴 생성기"""
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from errors import ConfigError
from expr import parse
from geom import EPS_DEG, OrientedTriangle2, Point2, balanced_vertex_choice, is_balanced, mirror_vertex, reflected_triangle
from surfaces import split_arguments

logger = logging.getLogger("schwarzga.partition")

AREA_RTOL = 1e-9
OVERLAP_CHECK_LIMIT = 10_000
DEFAULT_COVERAGE_SAMPLES = 2_000
CSV_COLUMNS = ["tri_id", "ax", "ay", "bx", "by", "cx", "cy"]


def _det(p, q):
    return p.chi1 * q.chi2 - p.chi2 * q.chi1


def _orient(p, q, r):
    """det(q−p, r−p): 양수면 반시계"""
    return _det(q - p, r - p)


def _segments_intersect(p1, p2, q1, q2):
    """닫힌 선분 [p1,p2], [q1,q2]의 교차 여부 (끝점 접촉 포함)"""
    d1 = _orient(q1, q2, p1)
    d2 = _orient(q1, q2, p2)
    d3 = _orient(p1, p2, q1)
    d4 = _orient(p1, p2, q2)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and 0 not in (d1, d2, d3, d4):
        return True

    def on_segment(p, q, r):
        return min(p.chi1, q.chi1) <= r.chi1 <= max(p.chi1, q.chi1) and min(p.chi2, q.chi2) <= r.chi2 <= max(p.chi2, q.chi2)

    return (
        (d1 == 0 and on_segment(q1, q2, p1))
        or (d2 == 0 and on_segment(q1, q2, p2))
        or (d3 == 0 and on_segment(p1, p2, q1))
        or (d4 == 0 and on_segment(p1, p2, q2))
    )


def _segments_cross(p1, p2, q1, q2, tol):
    """두 선분이 서로의 내부에서 진짜로 교차하는지 (접촉, 공선 제외)"""
    d1 = _orient(q1, q2, p1)
    d2 = _orient(q1, q2, p2)
    d3 = _orient(p1, p2, q1)
    d4 = _orient(p1, p2, q2)
    return ((d1 > tol and d2 < -tol) or (d1 < -tol and d2 > tol)) and ((d3 > tol and d4 < -tol) or (d3 < -tol and d4 > tol))


def _strictly_inside(triangle, point, tol):
    """점이 반시계 삼각형의 내부에 (경계에서 tol 이상 떨어져) 있는지"""
    a, b, c = triangle.vertices()
    return _orient(a, b, point) > tol and _orient(b, c, point) > tol and _orient(c, a, point) > tol


def _inside_closed(triangle, point, tol):
    a, b, c = triangle.vertices()
    return _orient(a, b, point) >= -tol and _orient(b, c, point) >= -tol and _orient(c, a, point) >= -tol


@dataclass(frozen=True)
class Polygon2:
    """단순 다각형 (반시계, 자기 교차 없음)

    Args:
        vertices (tuple): Point2 꼭짓점 (3개 이상)
    """

    vertices: tuple

    def __post_init__(self):
        vertices = tuple(p if isinstance(p, Point2) else Point2(*map(float, p)) for p in self.vertices)
        object.__setattr__(self, "vertices", vertices)
        if len(vertices) < 3:
            raise ConfigError(f"다각형은 꼭짓점이 3개 이상이어야 합니다: {len(vertices)}")
        if len(set(vertices)) != len(vertices):
            raise ConfigError("다각형에 중복된 꼭짓점이 있습니다")
        if self.signed_area <= 0.0:
            raise ConfigError(f"다각형은 반시계 방향이어야 합니다 (부호 넓이 {self.signed_area!r})")
        if self._self_intersects():
            raise ConfigError("다각형이 자기 교차합니다")

    @classmethod
    def rect(cls, x0, x1, y0, y1):
        """축 정렬 직사각형 [x0,x1]×[y0,y1]"""
        if not (x0 < x1 and y0 < y1):
            raise ConfigError(f"직사각형 범위가 잘못되었습니다: {(x0, x1, y0, y1)}")
        return cls(((x0, y0), (x1, y0), (x1, y1), (x0, y1)))

    @property
    def edges(self):
        n = len(self.vertices)
        return [(self.vertices[i], self.vertices[(i + 1) % n]) for i in range(n)]

    @property
    def signed_area(self):
        """신발끈 공식"""
        return 0.5 * math.fsum(_det(p, q) for p, q in self.edges)

    @property
    def area(self):
        return abs(self.signed_area)

    @property
    def bounds(self):
        xs = [p.chi1 for p in self.vertices]
        ys = [p.chi2 for p in self.vertices]
        return min(xs), max(xs), min(ys), max(ys)

    def _self_intersects(self):
        edges = self.edges
        n = len(edges)
        for i in range(n):
            for j in range(i + 1, n):
                if j == i + 1 or (i == 0 and j == n - 1):
                    continue
                if _segments_intersect(*edges[i], *edges[j]):
                    return True
        return False

    def contains(self, point):
        """반직선 교차 판정 (경계 위의 점은 정해지지 않음)"""
        inside = False
        for p, q in self.edges:
            if (p.chi2 > point.chi2) != (q.chi2 > point.chi2):
                x_cross = p.chi1 + (point.chi2 - p.chi2) * (q.chi1 - p.chi1) / (q.chi2 - p.chi2)
                if point.chi1 < x_cross:
                    inside = not inside
        return inside


@dataclass(frozen=True)
class Partition:
    """겹치지 않는 유향 삼각형들의 유한 집합 Π

    mesh_norm은 모든 삼각형의 최대 변 길이 ‖Π‖이다.
    """

    triangles: tuple
    mesh_norm: float = field(init=False)

    def __post_init__(self):
        triangles = tuple(self.triangles)
        if not triangles:
            raise ConfigError("빈 분할입니다")
        object.__setattr__(self, "triangles", triangles)
        object.__setattr__(self, "mesh_norm", max(t.diameter for t in triangles))

    def __len__(self):
        return len(self.triangles)

    def __iter__(self):
        return iter(self.triangles)

    @property
    def total_area(self):
        return math.fsum(t.area for t in self.triangles)

    def to_frame(self):
        rows = [
            (i, t.a.chi1, t.a.chi2, t.b.chi1, t.b.chi2, t.c.chi1, t.c.chi2)
            for i, t in enumerate(self.triangles)
        ]
        return pd.DataFrame(rows, columns=CSV_COLUMNS)

    def to_csv(self, path=None):
        """`tri_id, ax, ay, bx, by, cx, cy` CSV (path가 없으면 문자열 반환)"""
        return self.to_frame().to_csv(path, index=False, float_format="%.17g", lineterminator="\n")

    @classmethod
    def from_csv(cls, path_or_buffer):
        frame = pd.read_csv(path_or_buffer, float_precision="round_trip")
        missing = [c for c in CSV_COLUMNS if c not in frame.columns]
        if missing:
            raise ConfigError(f"분할 CSV에 열이 없습니다: {', '.join(missing)}")
        frame = frame.sort_values("tri_id", kind="stable")
        triangles = [
            OrientedTriangle2.from_coords((row.ax, row.ay), (row.bx, row.by), (row.cx, row.cy))
            for row in frame.itertuples(index=False)
        ]
        return cls(tuple(triangles))


# 삼각 분할
def triangulate(polygon):
    """귀 자르기 삼각 분할

    공선 꼭짓점은 삼각형 없이 제거한다. 모든 결과 삼각형은 반시계이다.

    Args:
        polygon (Polygon2): 단순 다각형

    Returns:
        Partition: 꼭짓점 n개(공선 제외)의 다각형에서 n−2개의 삼각형
    """
    points = list(polygon.vertices)
    x_min, x_max, y_min, y_max = polygon.bounds
    scale = max(x_max - x_min, y_max - y_min)
    tol = EPS_DEG * scale * scale
    remaining = list(range(len(points)))
    triangles = []
    while len(remaining) > 3:
        count = len(remaining)
        for i in range(count):
            p = points[remaining[i - 1]]
            c = points[remaining[i]]
            n = points[remaining[(i + 1) % count]]
            turn = _orient(p, c, n)
            if abs(turn) <= tol:
                del remaining[i]
                break
            if turn < 0:
                continue
            ear = OrientedTriangle2(p, c, n)
            others = (points[k] for k in remaining if points[k] not in (p, c, n))
            if any(_inside_closed(ear, q, tol) for q in others):
                continue
            triangles.append(ear)
            del remaining[i]
            break
        else:
            raise ConfigError("귀를 찾을 수 없습니다 (자기 교차 다각형)")
    last = OrientedTriangle2(*(points[k] for k in remaining))
    if not last.is_degenerate():
        triangles.append(last)
    logger.debug(f"삼각 분할: 꼭짓점 {len(points)}개 → 삼각형 {len(triangles)}개")
    return Partition(tuple(triangles))


def _midpoint(p, q):
    return Point2(0.5 * (p.chi1 + q.chi1), 0.5 * (p.chi2 + q.chi2))


def refine_midpoint(partition):
    """각 삼각형을 변 중점으로 닮은 삼각형 4개로 나눈다 (‖Π‖ 절반)"""
    children = []
    for t in partition:
        m_ab = _midpoint(t.a, t.b)
        m_bc = _midpoint(t.b, t.c)
        m_ca = _midpoint(t.c, t.a)
        children.extend(
            (
                OrientedTriangle2(t.a, m_ab, m_ca),
                OrientedTriangle2(m_ab, t.b, m_bc),
                OrientedTriangle2(m_ca, m_bc, t.c),
                OrientedTriangle2(m_bc, m_ca, m_ab),
            )
        )
    return Partition(tuple(children))


def refine_times(partition, levels):
    for _ in range(levels):
        partition = refine_midpoint(partition)
    return partition


# 슈바르츠 삼각형 족
def _require_positive_int(name, value, low=1):
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < low:
        raise ConfigError(f"{name}은(는) {low} 이상의 정수여야 합니다: {value!r}")
    return int(value)


def schwarz_local_triangles(m, n):
    """a = 0, b = (π/m, 1/2n), c = (−π/m, 1/2n)  (⟨a;b;c⟩·𝕀_2 = π/(mn))"""
    m = _require_positive_int("m", m)
    n = _require_positive_int("n", n)
    half_width = math.pi / m
    height = 1.0 / (2 * n)
    return OrientedTriangle2(Point2(0.0, 0.0), Point2(half_width, height), Point2(-half_width, height))


def schwarz_lantern_partition(m, n, height=1.0):
    """직사각형 [0,2π]×[0,height]의 랜턴 분할

    각 행은 위/아래 이등변 삼각형 2m개이고 홀수 행은 반 주기(π/m) 밀려 있다.
    밀린 행은 2π를 넘어가므로 직사각형을 χ1 방향 주기 2π를 법으로 정확히 덮는다.
    (`validate_partition(..., period=2π)`로 확인) 따라서 u 방향 주기가 2π인 곡면에서만 쓴다.

    Args:
        m (int): 한 행의 위 삼각형 수 (≥ 3)
        n (int): 행 수 (≥ 1)
        height (float): 원기둥 높이

    Returns:
        Partition: 2mn개의 합동 삼각형
    """
    m = _require_positive_int("m", m, low=3)
    n = _require_positive_int("n", n)
    if not height > 0:
        raise ConfigError(f"높이는 양수여야 합니다: {height}")
    width = 2.0 * math.pi / m
    step = height / n
    triangles = []
    for j in range(n):
        y0 = j * step
        y1 = (j + 1) * step
        offset = (j % 2) * 0.5 * width
        for k in range(m):
            x = k * width + offset
            triangles.append(OrientedTriangle2(Point2(x, y0), Point2(x + width, y0), Point2(x + 0.5 * width, y1)))
            triangles.append(
                OrientedTriangle2(Point2(x + 0.5 * width, y1), Point2(x + width, y0), Point2(x + 1.5 * width, y1))
            )
    return Partition(tuple(triangles))


def lantern_area_closed_form(m, n, height=1.0, rho=1.0):
    """랜턴 내접 다면체 넓이 2mn·ρsin(π/m)·√((height/n)² + ρ²(1−cos(π/m))²)"""
    half_angle = math.pi / m
    slant = math.hypot(height / n, rho * (1.0 - math.cos(half_angle)))
    return 2 * m * n * rho * math.sin(half_angle) * slant


def lantern_balanced_closed_form(m, n, height=1.0, rho=1.0):
    """랜턴 위 균형 넓이 추정 2π·height·ρ(m/π)sin(π/m)

    꼭대기 꼭짓점이 지름의 대변일 때(height/n < (√3/2)(2π/m)) 성립한다.
    """
    return 2.0 * math.pi * height * rho * (m / math.pi) * math.sin(math.pi / m)


def lantern_apex_is_diameter_vertex(m, n, height=1.0):
    return height / n < (math.sqrt(3.0) / 2.0) * (2.0 * math.pi / m)


# 검증
def _failure(check, detail, tri_id=None):
    return {"check": check, "tri_id": tri_id, "detail": detail}


def _bounding_boxes(triangles):
    boxes = []
    for t in triangles:
        xs = [p.chi1 for p in t.vertices()]
        ys = [p.chi2 for p in t.vertices()]
        boxes.append((min(xs), max(xs), min(ys), max(ys)))
    return boxes


def _grid_buckets(boxes):
    """경계 상자 폭/높이의 중앙값 크기 격자에 삼각형 번호를 나눠 담는다

    납작한 삼각형이 많아도 칸마다 몇 개만 들어가도록 가로세로 칸 크기를 따로 정한다.
    """
    widths = np.array([box[1] - box[0] for box in boxes])
    heights = np.array([box[3] - box[2] for box in boxes])
    cell_x = max(float(np.median(widths)), 1e-300)
    cell_y = max(float(np.median(heights)), 1e-300)
    buckets = defaultdict(list)
    for i, box in enumerate(boxes):
        for gx in range(math.floor(box[0] / cell_x), math.floor(box[1] / cell_x) + 1):
            for gy in range(math.floor(box[2] / cell_y), math.floor(box[3] / cell_y) + 1):
                buckets[(gx, gy)].append(i)
    return buckets


def _candidate_pairs(triangles):
    """격자 버킷으로 경계 상자가 겹칠 수 있는 쌍만 골라낸다"""
    boxes = _bounding_boxes(triangles)
    buckets = _grid_buckets(boxes)
    pairs = set()
    for members in buckets.values():
        for x in range(len(members)):
            for y in range(x + 1, len(members)):
                i, j = members[x], members[y]
                bi, bj = boxes[i], boxes[j]
                if bi[0] < bj[1] and bj[0] < bi[1] and bi[2] < bj[3] and bj[2] < bi[3]:
                    pairs.add((i, j))
    return sorted(pairs)


def _interiors_overlap(s, t, tol):
    centroid_s = Point2(*(sum(c) / 3.0 for c in zip(*s.vertices())))
    centroid_t = Point2(*(sum(c) / 3.0 for c in zip(*t.vertices())))
    if _strictly_inside(t, centroid_s, tol) or _strictly_inside(s, centroid_t, tol):
        return True
    if any(_strictly_inside(t, p, tol) for p in s.vertices()) or any(_strictly_inside(s, p, tol) for p in t.vertices()):
        return True
    edges_s = [(s.a, s.b), (s.b, s.c), (s.c, s.a)]
    edges_t = [(t.a, t.b), (t.b, t.c), (t.c, t.a)]
    return any(_segments_cross(*e, *f, tol) for e in edges_s for f in edges_t)


def _sample_coverage(triangles, polygon, rng, samples, tol, period=None):
    """다각형 안의 무작위 점마다 덮는 삼각형 수를 센다

    period가 있으면 χ1 방향으로 ±period 만큼 옮긴 점도 같은 점으로 본다.
    """
    x_min, x_max, y_min, y_max = polygon.bounds
    shifts = (0.0,) if period is None else (0.0, period, -period)
    gaps = overlaps = 0
    drawn = 0
    while drawn < samples:
        point = Point2(float(rng.uniform(x_min, x_max)), float(rng.uniform(y_min, y_max)))
        if not polygon.contains(point):
            continue
        drawn += 1
        copies = [Point2(point.chi1 + shift, point.chi2) for shift in shifts]
        if not any(_inside_closed(t, p, tol) for t in triangles for p in copies):
            gaps += 1
        elif sum(_strictly_inside(t, p, tol) for t in triangles for p in copies) > 1:
            overlaps += 1
    return gaps, overlaps


def validate_partition(
    partition, polygon=None, surface=None, seed=None, samples=DEFAULT_COVERAGE_SAMPLES, period=None
):
    """균형 넓이 합의 전제 조건 점검 보고서

    비퇴화, 방향 일관성, 균형 꼭짓점, (surface가 있으면) 반사 삼각형의 정의역 포함,
    (polygon이 있으면) 넓이 합 일치와 표본 탐침, 삼각형 쌍 겹침을 검사한다.
    실패해도 예외를 던지지 않는다.

    Args:
        partition (Partition): 검사할 분할
        polygon (Polygon2, optional): 덮어야 할 다각형
        surface (Surface, optional): 반사 삼각형 정의역 검사용 곡면
        seed (int, optional): 표본 탐침 시드 (없으면 탐침 생략)
        samples (int): 탐침 표본 수
        period (float, optional): χ1 방향 주기. 주면 표본 탐침이 주기를 법으로 덮음을 검사한다 (랜턴)

    Returns:
        dict: status, triangle_count, total_area, polygon_area, mesh_norm, failures
    """
    triangles = partition.triangles
    failures = []
    scale = partition.mesh_norm
    tol = EPS_DEG * scale * scale

    for i, t in enumerate(triangles):
        if t.is_degenerate():
            failures.append(_failure("nondegenerate", "퇴화 삼각형", i))
            continue
        if t.double_signed_area < 0:
            failures.append(_failure("orientation", "𝕀_2와 반대 방향", i))
        which = balanced_vertex_choice(t)
        mirror = mirror_vertex(t, which)
        if not is_balanced(mirror):
            failures.append(_failure("balanced", f"꼭짓점 {which.name}의 τ={mirror.tau!r}", i))
        elif surface is not None and not surface.domain.contains_triangle(reflected_triangle(mirror)):
            failures.append(_failure("domain", "반사 삼각형이 정의역 밖", i))

    total_area = partition.total_area
    polygon_area = None
    if polygon is not None:
        polygon_area = polygon.area
        if abs(total_area - polygon_area) > AREA_RTOL * polygon_area:
            failures.append(_failure("area", f"넓이 합 {total_area!r} ≠ 다각형 넓이 {polygon_area!r}"))

    if len(triangles) <= OVERLAP_CHECK_LIMIT:
        for i, j in _candidate_pairs(triangles):
            if _interiors_overlap(triangles[i], triangles[j], tol):
                failures.append(_failure("overlap", f"삼각형 {j}과(와) 내부가 겹침", i))
    else:
        logger.info(f"삼각형 {len(triangles)}개: 쌍별 겹침 검사를 생략하고 넓이 합만 검사합니다")

    if polygon is not None and seed is not None and len(triangles) <= OVERLAP_CHECK_LIMIT:
        gaps, overlaps = _sample_coverage(triangles, polygon, np.random.default_rng(seed), samples, tol, period)
        if gaps:
            failures.append(_failure("sample_gap", f"표본 {samples}개 중 {gaps}개가 덮이지 않음"))
        if overlaps:
            failures.append(_failure("sample_overlap", f"표본 {samples}개 중 {overlaps}개가 중복으로 덮임"))

    report = {
        "status": "ok" if not failures else "error",
        "triangle_count": len(triangles),
        "total_area": total_area,
        "polygon_area": polygon_area,
        "mesh_norm": partition.mesh_norm,
        "failures": failures,
    }
    if failures:
        logger.warning(f"분할 검증 실패 {len(failures)}건: {sorted({f['check'] for f in failures})}")
    return report


# 스펙 문자열
def _number(text):
    return parse(text).eval(0.0, 0.0)


def polygon_from_spec(spec):
    """`rect(x0,x1,y0,y1)` 또는 `x,y;x,y;...` 다각형

    숫자 자리에는 수식(예: pi/2)을 쓸 수 있다.
    """
    text = (spec or "").strip()
    if text.startswith("rect"):
        inner = text[len("rect"):].strip()
        if not (inner.startswith("(") and inner.endswith(")")):
            raise ConfigError(f"rect(x0,x1,y0,y1) 형식이어야 합니다: {spec!r}")
        args = split_arguments(inner[1:-1])
        if len(args) != 4:
            raise ConfigError(f"rect에는 인자 4개가 필요합니다: {spec!r}")
        return Polygon2.rect(*(_number(a) for a in args))
    points = []
    for chunk in text.split(";"):
        coords = split_arguments(chunk)
        if len(coords) != 2:
            raise ConfigError(f"꼭짓점은 x,y 형식이어야 합니다: {chunk!r}")
        points.append(Point2(_number(coords[0]), _number(coords[1])))
    return Polygon2(tuple(points))
