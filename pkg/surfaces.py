"""곡면 s: Ω → E_n 과 평면 변환 f: Ω → E_2, 내장 곡면과 이름 레지스트리"""
import logging
import math
import re

import numpy as np

from config import SETTINGS
from errors import AlgebraError, ConfigError, DomainError, NumericalError
from expr import compile_expr, gradient, parse
from ga import MAX_DIM, Multivector, cross, det2, norm, outer_product
from geom import Point2

logger = logging.getLogger("schwarzga.surfaces")


class Domain:
    """평면 열린 집합 Ω (기본값: E_2 전체)"""

    name = "plane"

    def contains(self, point):
        return True

    def contains_triangle(self, triangle):
        """볼록 정의역이므로 세 꼭짓점 포함이면 삼각형 포함"""
        return all(self.contains(p) for p in triangle.vertices())


class Rectangle(Domain):
    """열린 직사각형 (x_min, x_max) × (y_min, y_max)"""

    def __init__(self, x_min, x_max, y_min, y_max):
        if not (x_min < x_max and y_min < y_max):
            raise ConfigError(f"직사각형 정의역의 범위가 잘못되었습니다: {(x_min, x_max, y_min, y_max)}")
        self.bounds = (float(x_min), float(x_max), float(y_min), float(y_max))
        self.name = f"rect({x_min},{x_max},{y_min},{y_max})"

    def contains(self, point):
        x_min, x_max, y_min, y_max = self.bounds
        return x_min < point.chi1 < x_max and y_min < point.chi2 < y_max


WHOLE_PLANE = Domain()


def _fd_step(point):
    return SETTINGS.fd_step * max(1.0, point.norm())


def _central_gradient(func, point):
    """중심 차분 그래디언트 (∂1, ∂2)"""
    h = _fd_step(point)
    u, v = point.chi1, point.chi2
    d1 = (func(u + h, v) - func(u - h, v)) / (2.0 * h)
    d2 = (func(u, v + h) - func(u, v - h)) / (2.0 * h)
    return d1, d2


class Surface:
    """매끄러운 곡면 s(x) = Σ σ_j(x) h_j

    Args:
        name (str): 식별자
        components (sequence): σ_j(χ1, χ2) -> float 호출 가능 객체 n개
        gradients (sequence, optional): ∇σ_j(χ1, χ2) -> (∂1, ∂2) n개
        domain (Domain, optional): 정의역 (기본값 E_2 전체)
        parameters (dict, optional): 닫힌 형태 계산용 매개변수 (예: 원기둥의 rho)
    """

    def __init__(self, name, components, gradients=None, domain=None, parameters=None):
        components = tuple(components)
        if not 2 <= len(components) <= MAX_DIM:
            raise AlgebraError(f"곡면의 출력 차원은 2 이상 {MAX_DIM} 이하여야 합니다: {len(components)}")
        if gradients is not None:
            gradients = tuple(gradients)
            if len(gradients) != len(components):
                raise AlgebraError("그래디언트 개수가 성분 개수와 다릅니다")
        self.name = name
        self.components = components
        self.gradients = gradients
        self.domain = domain or WHOLE_PLANE
        self.parameters = dict(parameters or {})

    @property
    def dim_out(self):
        return len(self.components)

    @property
    def has_analytic_partials(self):
        return self.gradients is not None

    def require_in_domain(self, point):
        if not self.domain.contains(point):
            raise DomainError(f"점 ({point.chi1}, {point.chi2})이(가) {self.name}의 정의역 {self.domain.name} 밖입니다")

    def eval(self, point):
        """s(x) ∈ E_n"""
        self.require_in_domain(point)
        return Multivector.vector([f(point.chi1, point.chi2) for f in self.components])

    def __call__(self, point):
        return self.eval(point)

    def component_gradients(self, point, numeric=False):
        """각 성분의 그래디언트 ∇σ_j(x) 목록 (해석적 우선, 없으면 중심 차분)"""
        if self.gradients is not None and not numeric:
            return [tuple(map(float, g(point.chi1, point.chi2))) for g in self.gradients]
        return [_central_gradient(f, point) for f in self.components]

    def partials(self, point, numeric=False):
        """(∂_{ℓ1}s(x), ∂_{ℓ2}s(x))"""
        self.require_in_domain(point)
        grads = np.array(self.component_gradients(point, numeric=numeric))
        return Multivector.vector(grads[:, 0]), Multivector.vector(grads[:, 1])

    def restricted(self, domain):
        """같은 성분, 다른 정의역의 곡면"""
        return Surface(self.name, self.components, self.gradients, domain, self.parameters)

    def __repr__(self):
        return f"Surface({self.name!r}, n={self.dim_out})"


class PlaneTransform:
    """평면 변환 f(x) = φ1(x)ℓ1 + φ2(x)ℓ2

    Args:
        name (str): 식별자
        components (sequence): (φ1, φ2)
        gradients (sequence, optional): (∇φ1, ∇φ2)
        domain (Domain, optional): 정의역
    """

    def __init__(self, name, components, gradients=None, domain=None):
        components = tuple(components)
        if len(components) != 2:
            raise AlgebraError(f"평면 변환은 성분이 2개여야 합니다: {len(components)}")
        self.name = name
        self.components = components
        self.gradients = tuple(gradients) if gradients is not None else None
        self.domain = domain or WHOLE_PLANE

    def require_in_domain(self, point):
        if not self.domain.contains(point):
            raise DomainError(f"점 ({point.chi1}, {point.chi2})이(가) {self.name}의 정의역 밖입니다")

    def eval(self, point):
        self.require_in_domain(point)
        phi1, phi2 = self.components
        return Point2(float(phi1(point.chi1, point.chi2)), float(phi2(point.chi1, point.chi2)))

    def __call__(self, point):
        return self.eval(point)

    def component_gradients(self, point, numeric=False):
        if self.gradients is not None and not numeric:
            return [tuple(map(float, g(point.chi1, point.chi2))) for g in self.gradients]
        return [_central_gradient(f, point) for f in self.components]

    def jacobian(self, point, numeric=False):
        """(∇φ1(x)∧∇φ2(x))·𝕀_2"""
        self.require_in_domain(point)
        grad1, grad2 = self.component_gradients(point, numeric=numeric)
        return det2(Multivector.vector(grad1), Multivector.vector(grad2))

    def __repr__(self):
        return f"PlaneTransform({self.name!r})"


# 내장 곡면
def make_cylinder(rho):
    """반지름 ρ인 원기둥 s(x) = ρcos(χ1)h1 + ρsin(χ1)h2 + χ2 h3

    Args:
        rho (float): 반지름 (> 0)

    Returns:
        Surface: 해석적 편미분을 가진 곡면
    """
    rho = float(rho)
    if not rho > 0:
        raise ConfigError(f"원기둥 반지름은 양수여야 합니다: {rho}")
    return Surface(
        f"cylinder(rho={rho!r})",
        components=(
            lambda u, v: rho * math.cos(u),
            lambda u, v: rho * math.sin(u),
            lambda u, v: v,
        ),
        gradients=(
            lambda u, v: (-rho * math.sin(u), 0.0),
            lambda u, v: (rho * math.cos(u), 0.0),
            lambda u, v: (0.0, 1.0),
        ),
        parameters={"rho": rho},
    )


def make_flat():
    """E_2를 E_3에 평평하게 넣는 곡면 s(x) = χ1h1 + χ2h2"""
    return Surface(
        "flat",
        components=(lambda u, v: u, lambda u, v: v, lambda u, v: 0.0),
        gradients=(lambda u, v: (1.0, 0.0), lambda u, v: (0.0, 1.0), lambda u, v: (0.0, 0.0)),
    )


def make_graph(psi, grad_psi=None, name=None):
    """그래프 곡면 s(x) = x + ψ(x)h3

    Args:
        psi (Expr | callable): 스칼라장 ψ. Expr이면 기호 그래디언트를 사용
        grad_psi (callable, optional): ∇ψ(χ1, χ2) -> (∂1, ∂2)
        name (str, optional): 곡면 이름

    Returns:
        Surface: n = 3 곡면
    """
    if isinstance(psi, str):
        psi = parse(psi)
    if callable(psi) and not hasattr(psi, "eval"):
        psi_fn = psi
        label = name or "graph(<callable>)"
    else:
        psi_fn = compile_expr(psi)
        label = name or f"graph({psi})"
        if grad_psi is None:
            d1, d2 = (compile_expr(d) for d in gradient(psi))
            grad_psi = lambda u, v: (d1(u, v), d2(u, v))
    gradients = None
    if grad_psi is not None:
        gradients = (lambda u, v: (1.0, 0.0), lambda u, v: (0.0, 1.0), grad_psi)
    return Surface(label, components=(lambda u, v: u, lambda u, v: v, psi_fn), gradients=gradients)


def make_custom(exprs, name=None):
    """성분을 수식으로 지정한 곡면 (기호 그래디언트 사용)

    Args:
        exprs (sequence): Expr 또는 수식 문자열 n개
        name (str, optional): 곡면 이름
    """
    trees = [parse(e) if isinstance(e, str) else e for e in exprs]
    components = [compile_expr(t) for t in trees]
    gradients = []
    for tree in trees:
        d1, d2 = (compile_expr(d) for d in gradient(tree))
        gradients.append(lambda u, v, d1=d1, d2=d2: (d1(u, v), d2(u, v)))
    label = name or f"custom({','.join(str(t) for t in trees)})"
    return Surface(label, components, gradients)


def make_identity_transform():
    """항등 평면 변환"""
    return PlaneTransform(
        "identity",
        components=(lambda u, v: u, lambda u, v: v),
        gradients=(lambda u, v: (1.0, 0.0), lambda u, v: (0.0, 1.0)),
    )


def make_custom_transform(exprs, name=None):
    """성분을 수식으로 지정한 평면 변환"""
    surface = make_custom(exprs, name=name)
    if surface.dim_out != 2:
        raise ConfigError(f"평면 변환에는 수식이 2개 필요합니다: {surface.dim_out}")
    label = name or surface.name
    return PlaneTransform(label, surface.components, surface.gradients)


# 접평면 이중벡터
def tangent_bivector(surface, point, numeric=False):
    """∂_{ℓ1}s(x)∧∂_{ℓ2}s(x)

    Args:
        surface (Surface): 곡면
        point (Point2): 정의역의 점
        numeric (bool): True면 해석적 편미분이 있어도 중심 차분 사용

    Returns:
        Multivector: grade 2 다중벡터
    """
    d1, d2 = surface.partials(point, numeric=numeric)
    return outer_product(d1, d2)


def tangent_bivector_by_components(surface, point):
    """Σ_{j<k} det2(∇σ_j, ∇σ_k) h_j∧h_k (성분별 전개)"""
    surface.require_in_domain(point)
    grads = [Multivector.vector(g) for g in surface.component_gradients(point)]
    n = surface.dim_out
    coeffs = np.zeros(1 << n)
    for j in range(n):
        for k in range(j + 1, n):
            coeffs[(1 << j) | (1 << k)] = det2(grads[j], grads[k])
    return Multivector(n, coeffs)


def tangent_normal(surface, point):
    """E_3 곡면의 법선 ∂_{ℓ1}s × ∂_{ℓ2}s"""
    if surface.dim_out != 3:
        raise AlgebraError(f"법선은 n = 3에서만 정의됩니다: n={surface.dim_out}")
    d1, d2 = surface.partials(point)
    return cross(d1, d2)


def area_density(surface, point):
    """|∂_{ℓ1}s(x)∧∂_{ℓ2}s(x)| (넓이 적분의 피적분 함수)"""
    return norm(tangent_bivector(surface, point))


def is_periodic_in_u(surface, period=2.0 * math.pi, v_range=(0.0, 1.0), samples=8, rtol=1e-9):
    """격자 표본에서 s(u + period, v) = s(u, v)인지 확인

    Returns:
        bool: 모든 표본에서 상대 오차 rtol 이내면 True (정의역 밖이나 평가 실패는 False)
    """
    for u in np.linspace(0.0, period, samples, endpoint=False):
        for v in np.linspace(v_range[0], v_range[1], 3):
            try:
                here = surface.eval(Point2(float(u), float(v)))
                shifted = surface.eval(Point2(float(u) + period, float(v)))
            except NumericalError:
                return False
            if norm(shifted - here) > rtol * max(1.0, norm(here)):
                return False
    return True


def component_transform(surface, j, k):
    """s_{j,k}(x) = σ_j(x)ℓ1 + σ_k(x)ℓ2 (1 ≤ j < k ≤ n)"""
    n = surface.dim_out
    if not (isinstance(j, int) and isinstance(k, int) and 1 <= j < k <= n):
        raise AlgebraError(f"성분 번호는 1 ≤ j < k ≤ {n} 이어야 합니다: ({j}, {k})")
    gradients = None
    if surface.gradients is not None:
        gradients = (surface.gradients[j - 1], surface.gradients[k - 1])
    return PlaneTransform(
        f"{surface.name}[{j},{k}]",
        (surface.components[j - 1], surface.components[k - 1]),
        gradients,
        surface.domain,
    )


# 레지스트리
_CALL_RE = re.compile(r"^\s*(?P<name>[a-z_]+)\s*(?:\((?P<args>.*)\))?\s*$", re.DOTALL)


def split_arguments(text):
    """괄호 깊이 0의 쉼표로 인자 분리"""
    args = []
    depth = 0
    current = []
    for char in text:
        if char == "(":
            depth += 1
        elif char == ")":
            depth -= 1
            if depth < 0:
                raise ConfigError(f"괄호가 맞지 않습니다: {text!r}")
        if char == "," and depth == 0:
            args.append("".join(current).strip())
            current = []
        else:
            current.append(char)
    if depth != 0:
        raise ConfigError(f"괄호가 맞지 않습니다: {text!r}")
    args.append("".join(current).strip())
    return [a for a in args if a] if len(args) == 1 else args


def _split_call(spec):
    match = _CALL_RE.match(spec or "")
    if match is None:
        raise ConfigError(f"스펙 문자열을 해석할 수 없습니다: {spec!r}")
    args = match.group("args")
    return match.group("name"), (split_arguments(args) if args is not None else None)


def _number(text):
    """스펙 안의 숫자 (수식 허용, 예: pi/2)"""
    return parse(text).eval(0.0, 0.0)


def _build_cylinder(args):
    if not args or len(args) != 1:
        raise ConfigError("cylinder는 cylinder(rho=<float>) 형식이어야 합니다")
    key, _, value = args[0].partition("=")
    if not value:
        key, value = "rho", key
    if key.strip() != "rho":
        raise ConfigError(f"cylinder의 알 수 없는 인자: {key.strip()!r}")
    return make_cylinder(_number(value))


def _build_flat(args):
    if args:
        raise ConfigError("flat은 인자를 받지 않습니다")
    return make_flat()


def _build_graph(args):
    if not args or len(args) != 1:
        raise ConfigError("graph는 graph(<expr>) 형식이어야 합니다")
    return make_graph(parse(args[0]))


def _build_custom(args):
    if not args or len(args) != 3:
        raise ConfigError("custom은 custom(<expr>,<expr>,<expr>) 형식이어야 합니다")
    return make_custom(args)


SURFACE_REGISTRY = {
    "cylinder": _build_cylinder,
    "flat": _build_flat,
    "graph": _build_graph,
    "custom": _build_custom,
}


def surface_from_spec(spec):
    """이름 문법으로 곡면 만들기

    `cylinder(rho=<float>)`, `flat`, `graph(<expr>)`, `custom(<expr>,<expr>,<expr>)`

    Args:
        spec (str): 곡면 스펙 문자열

    Returns:
        Surface: 곡면
    """
    name, args = _split_call(spec)
    builder = SURFACE_REGISTRY.get(name)
    if builder is None:
        raise ConfigError(f"알 수 없는 곡면입니다: {name!r} (가능: {', '.join(SURFACE_REGISTRY)})")
    surface = builder(args)
    logger.debug(f"곡면 생성: {surface.name}")
    return surface


def transform_from_spec(spec):
    """`identity` 또는 `custom(<expr>,<expr>)` 평면 변환"""
    name, args = _split_call(spec)
    if name == "identity" and not args:
        return make_identity_transform()
    if name == "custom" and args and len(args) == 2:
        return make_custom_transform(args)
    raise ConfigError(f"알 수 없는 평면 변환입니다: {spec!r}")
