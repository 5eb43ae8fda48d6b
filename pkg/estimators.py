"""야코비안, 접평면 이중벡터, 곡면 넓이 추정기와 적분 오라클

균형 거울 꼭짓점을 쓰는 세 추정기(야코비안, 평균 이중벡터, 넓이 합), 내접 삼각형의 naive 기준값,
가우스-르장드르 적분 오라클, 수렴 차수 표를 제공한다.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import pandas as pd

from config import SETTINGS
from errors import ConfigError, DegenerateTriangleError, DomainError, OracleConvergenceError, UnbalancedVertexError
from ga import Multivector, _blade_label, _popcounts, norm, outer_product
from geom import (
    EPS_DEG,
    MirrorData,
    OrientedTriangle2,
    Point2,
    balance_ratio,
    balanced_vertex_choice,
    is_balanced,
    mirror_vertex,
    reflected_triangle,
    triangle_bivector,
)
from partition import schwarz_local_triangles, triangulate
from surfaces import area_density

logger = logging.getLogger("schwarzga.estimators")

EXACT_ATOL = 1e-12
ORACLE_MAX_DEPTH = 24
_GAUSS_ORDER = 7


@dataclass(frozen=True)
class BivectorEstimate:
    """균형 평균 이중벡터 추정 결과

    triangle은 선택된 꼭짓점이 a 자리에 오도록 재배열된 삼각형이다.
    """

    value: Multivector
    triangle: OrientedTriangle2
    mirror: MirrorData
    plane_bivector_scalar: float
    relaxed: bool = False

    def __post_init__(self):
        if self.plane_bivector_scalar == 0.0:
            raise DegenerateTriangleError("평면 이중벡터 스칼라가 0입니다")


# 공통 준비
def _choose_mirror(triangle, which, relaxed, kappa):
    """거울 꼭짓점 선택과 균형 검사

    Returns:
        tuple: (MirrorData, 재배열된 삼각형, relaxed 수용 여부)
    """
    triangle.require_nondegenerate()
    if which is None:
        which = balanced_vertex_choice(triangle)
    mirror = mirror_vertex(triangle, which)
    accepted_relaxed = False
    if not is_balanced(mirror):
        ratio = balance_ratio(mirror)
        kappa = SETTINGS.relax_kappa if kappa is None else kappa
        if not relaxed or ratio > kappa:
            raise UnbalancedVertexError(
                f"꼭짓점 {mirror.vertex_id.name}의 거울 꼭짓점이 균형이 아닙니다 (τ={mirror.tau!r}, 비율 {ratio!r})"
            )
        logger.warning(f"완화 모드: 비균형 꼭짓점 {mirror.vertex_id.name} 수용 (비율 {ratio:.6g} ≤ κ={kappa})")
        accepted_relaxed = True
    return mirror, triangle.rotated(mirror.vertex_id), accepted_relaxed


def _require_reflection_in_domain(domain, mirror):
    if not domain.contains_triangle(reflected_triangle(mirror)):
        raise DomainError(f"반사 삼각형이 정의역 {domain.name} 밖입니다 (x′={mirror.x_prime})")


# 평균 이중벡터
def mean_bivector_naive(surface, triangle):
    """내접 평균 이중벡터 ⟨s(a);s(b);s(c)⟩ / (⟨a;b;c⟩·𝕀_2)"""
    triangle.require_nondegenerate()
    images = [surface.eval(p) for p in triangle.vertices()]
    return triangle_bivector(*images) / triangle.double_signed_area


def balanced_mean_bivector(surface, triangle, which=None, relaxed=False, kappa=None):
    """내접 균형 평균 이중벡터 [s(a′)−s(a)]∧[s(c)−s(b)] / (2⟨a;b;c⟩·𝕀_2)

    Args:
        surface (Surface): 곡면
        triangle (OrientedTriangle2): 비퇴화 삼각형
        which (Vertex | str, optional): 거울 꼭짓점. 없으면 지름의 대변 꼭짓점
        relaxed (bool): 비균형 꼭짓점을 비율 ≤ κ까지 허용
        kappa (float, optional): 완화 한계 (기본값 SCHWARZGA_RELAX_KAPPA)

    Returns:
        BivectorEstimate: 추정값과 사용한 거울 데이터
    """
    mirror, relabeled, accepted_relaxed = _choose_mirror(triangle, which, relaxed, kappa)
    _require_reflection_in_domain(surface.domain, mirror)
    s_a = surface.eval(relabeled.a)
    s_b = surface.eval(relabeled.b)
    s_c = surface.eval(relabeled.c)
    s_mirror = surface.eval(mirror.x_prime)
    scalar = 2.0 * relabeled.double_signed_area
    value = outer_product(s_mirror - s_a, s_c - s_b) / scalar
    return BivectorEstimate(value, relabeled, mirror, scalar, accepted_relaxed)


def balanced_numerator_alternative(surface, estimate):
    """⟨s(a);s(b);s(c)⟩ − ⟨s(a′);s(b);s(c)⟩ (균형 분자의 전개형)"""
    t = estimate.triangle
    s_b = surface.eval(t.b)
    s_c = surface.eval(t.c)
    return triangle_bivector(surface.eval(t.a), s_b, s_c) - triangle_bivector(
        surface.eval(estimate.mirror.x_prime), s_b, s_c
    )


def jacobian_estimate(transform, triangle, which=None, relaxed=False, kappa=None):
    """{[f(a′)−f(a)]∧[f(c)−f(b)]}·𝕀_2 / (2⟨a;b;c⟩·𝕀_2)

    아핀 변환에서는 모든 비퇴화 삼각형에 대해 정확한 행렬식이다.

    Returns:
        float: 야코비안 근사값
    """
    mirror, relabeled, _ = _choose_mirror(triangle, which, relaxed, kappa)
    _require_reflection_in_domain(transform.domain, mirror)
    f_a = transform.eval(relabeled.a)
    f_b = transform.eval(relabeled.b)
    f_c = transform.eval(relabeled.c)
    f_mirror = transform.eval(mirror.x_prime)
    first = f_mirror - f_a
    second = f_c - f_b
    numerator = first.chi1 * second.chi2 - first.chi2 * second.chi1
    return numerator / (2.0 * relabeled.double_signed_area)


def relaxation_ratio(triangle, d):
    """점 d에 대한 max{|v_a|/|ℓ_a|, |ℓ_a−v_a|/|ℓ_a|}, v_a = c − (a+d)/2"""
    a_bar = (triangle.a + d) * 0.5
    v = triangle.c - a_bar
    ell = triangle.c - triangle.b
    length = ell.norm()
    if length == 0.0:
        raise DegenerateTriangleError("ℓ_a가 영벡터입니다")
    return max(v.norm() / length, (ell - v).norm() / length)


def generalized_balanced_bivector(surface, triangle, d, kappa=None):
    """거울 꼭짓점이 아닌 점 d를 쓰는 일반화 추정

    [⟨s(a);s(b);s(c)⟩ − ⟨s(d);s(b);s(c)⟩] / ([⟨a;b;c⟩ − ⟨d;b;c⟩]·𝕀_2)

    Args:
        surface (Surface): 곡면
        triangle (OrientedTriangle2): 삼각형 [a, b, c]
        d (Point2): 네 번째 점
        kappa (float, optional): 주어지면 완화 비율이 κ를 넘을 때 오류

    Returns:
        Multivector: grade 2 추정값
    """
    denominator = triangle.double_signed_area - OrientedTriangle2(d, triangle.b, triangle.c).double_signed_area
    scale = max(triangle.diameter, (d - triangle.b).norm(), (d - triangle.c).norm())
    if abs(denominator) <= EPS_DEG * scale * scale:
        raise DegenerateTriangleError(f"분모 [⟨a;b;c⟩−⟨d;b;c⟩]·𝕀_2가 0입니다 (d={d})")
    ratio = relaxation_ratio(triangle, d)
    if kappa is not None and ratio > kappa:
        raise UnbalancedVertexError(f"완화 비율 {ratio!r}가 κ={kappa}를 넘습니다")
    logger.debug(f"일반화 추정: 완화 비율 {ratio:.6g}")
    s_b = surface.eval(triangle.b)
    s_c = surface.eval(triangle.c)
    numerator = triangle_bivector(surface.eval(triangle.a), s_b, s_c) - triangle_bivector(surface.eval(d), s_b, s_c)
    return numerator / denominator


# 슈바르츠 삼각형 닫힌 형태
def schwarz_shifted_triangle(m, n):
    """a = (−π/m, 1/2n), b = 0, c = (π/m, 1/2n)와 거울이 아닌 점 d = (2π/m, 0)

    Returns:
        tuple: (OrientedTriangle2, Point2)
    """
    local = schwarz_local_triangles(m, n)
    triangle = OrientedTriangle2(local.c, local.a, local.b)
    return triangle, Point2(2.0 * math.pi / m, 0.0)


def schwarz_naive_closed_form(m, n, rho=1.0):
    """원기둥 위 슈바르츠 삼각형의 naive 평균 이중벡터 닫힌 형태"""
    theta = math.pi / m
    coeffs = np.zeros(8)
    coeffs[0b011] = 2.0 * rho * rho * math.sin(theta) * (1.0 - math.cos(theta)) * m * n / math.pi
    coeffs[0b110] = rho * math.sin(theta) * m / math.pi
    return Multivector(3, coeffs)


def schwarz_balanced_closed_form(m, rho=1.0):
    """ρ(m/π)sin(π/m) h2∧h3 (n과 무관)"""
    return Multivector.blade(3, 2, 3) * (rho * (m / math.pi) * math.sin(math.pi / m))


# 넓이
def _ordered_terms(term, triangles, threads):
    threads = SETTINGS.threads if threads is None else threads
    if threads <= 1:
        return [term(t) for t in triangles]
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(term, triangles))


def area_estimate_balanced(surface, partition, threads=None, relaxed=False, kappa=None):
    """¼ Σ_i |[s(a_i′)−s(a_i)]∧[s(c_i)−s(b_i)]|

    삼각형마다 지름의 대변 꼭짓점을 a_i로 재배열한다.
    합은 분할 순서의 보정 합이므로 스레드 수와 무관하게 같은 값이다.
    """

    def term(triangle):
        estimate = balanced_mean_bivector(surface, triangle, relaxed=relaxed, kappa=kappa)
        return 0.25 * norm(estimate.value) * abs(estimate.plane_bivector_scalar)

    return math.fsum(_ordered_terms(term, partition.triangles, threads))


def area_estimate_naive(surface, partition, threads=None):
    """Σ_i ½|⟨s(a_i);s(b_i);s(c_i)⟩| (내접 다면체 넓이)"""

    def term(triangle):
        triangle.require_nondegenerate()
        return 0.5 * norm(triangle_bivector(*(surface.eval(p) for p in triangle.vertices())))

    return math.fsum(_ordered_terms(term, partition.triangles, threads))


@dataclass(frozen=True)
class _GaussRule:
    nodes: np.ndarray
    weights: np.ndarray


def _gauss_rule():
    """[0,1]²의 7×7 텐서 가우스-르장드르 노드"""
    x, w = np.polynomial.legendre.leggauss(_GAUSS_ORDER)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    s, t = np.meshgrid(x, x, indexing="ij")
    ws, wt = np.meshgrid(w, w, indexing="ij")
    return _GaussRule(np.column_stack([s.ravel(), t.ravel()]), (ws * wt).ravel())


_RULE = _gauss_rule()


def _triangle_quadrature(surface, triangle):
    """더피 사상 p = a + s(b−a) + st(c−b), 야코비안 s·2A"""
    a, b, c = triangle.vertices()
    double_area = abs(triangle.double_signed_area)
    values = []
    for (s, t), weight in zip(_RULE.nodes, _RULE.weights):
        point = Point2(
            a.chi1 + s * (b.chi1 - a.chi1) + s * t * (c.chi1 - b.chi1),
            a.chi2 + s * (b.chi2 - a.chi2) + s * t * (c.chi2 - b.chi2),
        )
        values.append(weight * s * double_area * area_density(surface, point))
    return math.fsum(values)


def _bisect_longest(triangle):
    """가장 긴 변의 중점으로 이등분 (방향 유지)"""
    rotated = triangle.rotated(balanced_vertex_choice(triangle))
    a, b, c = rotated.vertices()
    mid = Point2(0.5 * (b.chi1 + c.chi1), 0.5 * (b.chi2 + c.chi2))
    return OrientedTriangle2(a, b, mid), OrientedTriangle2(a, mid, c)


def area_integral_oracle(surface, polygon, rtol=None, max_depth=ORACLE_MAX_DEPTH):
    """∫_P |∂ℓ1 s(x)∧∂ℓ2 s(x)| dx 의 적응 적분

    삼각형별 7×7 가우스-르장드르를 쓰고, 가장 긴 변 이등분 결과와의 차이가
    넓이 비례 허용오차보다 크면 계속 나눈다.

    Args:
        surface (Surface): 곡면 (P ⊂ 정의역)
        polygon (Polygon2): 적분 영역
        rtol (float, optional): 상대 허용오차 (기본값 SCHWARZGA_ORACLE_RTOL)
        max_depth (int): 최대 이등분 깊이

    Returns:
        float: 적분값

    Raises:
        OracleConvergenceError: 최대 깊이 안에 수렴하지 못한 경우 (최선 추정값 포함)
    """
    rtol = SETTINGS.oracle_rtol if rtol is None else rtol
    triangles = triangulate(polygon).triangles
    initial = [_triangle_quadrature(surface, t) for t in triangles]
    scale = max(abs(math.fsum(initial)), 1e-300)
    total_area = polygon.area
    accepted = []
    stack = [(t, q, 0) for t, q in zip(reversed(triangles), reversed(initial))]
    while stack:
        triangle, coarse, depth = stack.pop()
        left, right = _bisect_longest(triangle)
        q_left = _triangle_quadrature(surface, left)
        q_right = _triangle_quadrature(surface, right)
        fine = q_left + q_right
        tolerance = rtol * scale * triangle.area / total_area
        if abs(fine - coarse) <= tolerance:
            accepted.append(fine)
            continue
        if depth + 1 >= max_depth:
            best = math.fsum(accepted + [fine] + [q for _, q, _ in stack])
            raise OracleConvergenceError(f"적분 오라클이 깊이 {max_depth} 안에 수렴하지 않았습니다", best)
        stack.append((right, q_right, depth + 1))
        stack.append((left, q_left, depth + 1))
    return math.fsum(accepted)


# 수렴 표
def _bivector_columns(dim):
    return [i for i in range(1 << dim) if _popcounts(dim)[i] == 2]


class EstimateTable:
    """수렴 연구 결과 표 (pandas DataFrame 래퍼)

    행은 schedule 순서이다. 관측 차수는 log(오차) 대 log(매개변수)의 최소제곱 기울기로 구하며,
    매개변수가 커질수록 해상도가 높아지면(m, 단계 수) 차수 = −기울기,
    작아질수록(‖Π‖, 지름) 차수 = 기울기이다.
    """

    def __init__(self, frame, parameter="parameter"):
        self.frame = frame
        self.parameter = parameter

    def __len__(self):
        return len(self.frame)

    def _fit_data(self):
        frame = self.frame
        mask = (frame["abs_error"] > 0) & (frame[self.parameter] > 0)
        return np.log(frame.loc[mask, self.parameter].to_numpy(float)), np.log(frame.loc[mask, "abs_error"].to_numpy(float))

    @property
    def exact(self):
        return bool((self.frame["abs_error"] <= EXACT_ATOL).all())

    @property
    def slope(self):
        x, y = self._fit_data()
        if len(x) < 2 or np.ptp(x) == 0:
            return None
        return float(np.polyfit(x, y, 1)[0])

    @property
    def r_squared(self):
        x, y = self._fit_data()
        if len(x) < 2 or np.ptp(x) == 0:
            return None
        fitted = np.polyval(np.polyfit(x, y, 1), x)
        total = float(np.sum((y - y.mean()) ** 2))
        if total == 0.0:
            return 1.0
        return 1.0 - float(np.sum((y - fitted) ** 2)) / total

    @property
    def increasing(self):
        values = self.frame[self.parameter].to_numpy(float)
        return len(values) < 2 or values[-1] >= values[0]

    @property
    def observed_order(self):
        slope = self.slope
        if slope is None:
            return None
        return -slope if self.increasing else slope

    @property
    def order_label(self):
        if self.exact:
            return "exact"
        order = self.observed_order
        return "n/a" if order is None else format(order, ".6g")

    def to_csv(self, path=None):
        return self.frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")


def _local_orders(parameters, errors):
    orders = [math.nan]
    for i in range(1, len(errors)):
        p0, p1 = parameters[i - 1], parameters[i]
        e0, e1 = errors[i - 1], errors[i]
        if min(p0, p1, e0, e1) <= 0 or p0 == p1:
            orders.append(math.nan)
            continue
        slope = math.log(e1 / e0) / math.log(p1 / p0)
        orders.append(-slope if p1 > p0 else slope)
    return orders


def convergence_study(estimate_fn, schedule, reference, parameter="parameter", measure=None):
    """schedule의 각 값에서 추정하고 기준값과 비교한 표

    Args:
        estimate_fn (callable): schedule 값 → 추정값 (float 또는 Multivector)
        schedule (iterable): 세분 매개변수 목록 (비어 있으면 안 됨)
        reference (float | Multivector | callable): 기준값 또는 schedule 값 → 기준값
        parameter (str): 매개변수 열 이름
        measure (callable, optional): schedule 값 → 기울기 적합에 쓸 매개변수 값

    Returns:
        EstimateTable: parameter, 추정/기준 성분, abs_error, rel_error, local_order
    """
    schedule = list(schedule)
    if not schedule:
        raise ConfigError("schedule이 비어 있습니다")
    rows = []
    for entry in schedule:
        estimate = estimate_fn(entry)
        expected = reference(entry) if callable(reference) else reference
        row = {parameter: float(measure(entry)) if measure else entry}
        if isinstance(estimate, Multivector):
            for index in _bivector_columns(estimate.dim):
                label = _blade_label(index)
                row[f"est_{label}"] = float(estimate.coeffs[index])
                row[f"ref_{label}"] = float(expected.coeffs[index])
            error = norm(estimate - expected)
            size = norm(expected)
        else:
            row["estimate"] = float(estimate)
            row["reference"] = float(expected)
            error = abs(float(estimate) - float(expected))
            size = abs(float(expected))
        row["abs_error"] = error
        row["rel_error"] = error / size if size > 0 else math.nan
        rows.append(row)
        logger.info(f"{parameter}={row[parameter]}: 오차 {error:.6g}")
    frame = pd.DataFrame(rows)
    frame["local_order"] = _local_orders(frame[parameter].to_numpy(float), frame["abs_error"].to_numpy(float))
    table = EstimateTable(frame, parameter)
    logger.info(f"관측 차수: {table.order_label}")
    return table
