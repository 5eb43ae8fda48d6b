"""평면 유향 삼각형, 삼각형 이중벡터, 거울 꼭짓점과 균형 판정"""
import logging
import math
from dataclasses import dataclass
from enum import Enum

from errors import AlgebraError, DegenerateTriangleError, SingularVectorError
from ga import Multivector, norm, outer_product, scalar_product, vector_inverse

logger = logging.getLogger("schwarzga.geom")

# 퇴화 판정: |⟨a;b;c⟩| ≤ EPS_DEG·diam² (척도 불변)
EPS_DEG = 1e-12
# 균형 판정: τ ∈ [−EPS_BAL, 1+EPS_BAL]
EPS_BAL = 1e-12
# 가장 긴 변 비교 시 동률로 보는 상대 허용오차
_TIE_RTOL = 1e-12


class Vertex(Enum):
    """삼각형 꼭짓점 식별자 (A < B < C 순서)"""

    A = "A"
    B = "B"
    C = "C"

    @property
    def index(self):
        return "ABC".index(self.value)

    @property
    def next(self):
        return _VERTICES[(self.index + 1) % 3]

    @property
    def prev(self):
        return _VERTICES[(self.index + 2) % 3]

    @classmethod
    def parse(cls, label):
        """'A' / 'b' 같은 문자열이나 Vertex를 Vertex로 변환"""
        if isinstance(label, cls):
            return label
        try:
            return cls(str(label).strip().upper())
        except ValueError:
            raise AlgebraError(f"꼭짓점은 A, B, C 중 하나여야 합니다: {label!r}")


_VERTICES = (Vertex.A, Vertex.B, Vertex.C)


@dataclass(frozen=True)
class Point2:
    """E_2의 점 (기저 {ℓ1, ℓ2}에 대한 좌표 χ1, χ2)"""

    chi1: float
    chi2: float

    def __post_init__(self):
        if not (math.isfinite(self.chi1) and math.isfinite(self.chi2)):
            raise AlgebraError(f"좌표는 유한해야 합니다: ({self.chi1}, {self.chi2})")

    def __add__(self, other):
        return Point2(self.chi1 + other.chi1, self.chi2 + other.chi2)

    def __sub__(self, other):
        return Point2(self.chi1 - other.chi1, self.chi2 - other.chi2)

    def __mul__(self, factor):
        return Point2(self.chi1 * factor, self.chi2 * factor)

    __rmul__ = __mul__

    def __neg__(self):
        return Point2(-self.chi1, -self.chi2)

    def __iter__(self):
        yield self.chi1
        yield self.chi2

    def dot(self, other):
        return self.chi1 * other.chi1 + self.chi2 * other.chi2

    def norm(self):
        return math.hypot(self.chi1, self.chi2)

    def as_vector(self):
        """G_2의 grade 1 다중벡터로 변환"""
        return Multivector.vector((self.chi1, self.chi2))

    @classmethod
    def from_vector(cls, vector):
        if vector.dim != 2 or not vector.is_vector():
            raise AlgebraError(f"E_2 벡터가 아닙니다: {vector!r}")
        chi1, chi2 = vector.vector_components()
        return cls(float(chi1), float(chi2))


def _det(p, q):
    return p.chi1 * q.chi2 - p.chi2 * q.chi1


@dataclass(frozen=True)
class OrientedTriangle2:
    """E_2의 유향 삼각형 [a, b, c]

    변은 ℓ_a = c−b, ℓ_b = a−c, ℓ_c = b−a 이며 ℓ_a + ℓ_b + ℓ_c = 0.
    """

    a: Point2
    b: Point2
    c: Point2

    @classmethod
    def from_coords(cls, a, b, c):
        """좌표 쌍 세 개로 삼각형 만들기"""
        return cls(Point2(*map(float, a)), Point2(*map(float, b)), Point2(*map(float, c)))

    def vertex(self, which):
        return (self.a, self.b, self.c)[Vertex.parse(which).index]

    def neighbours(self, which):
        """(x, x_+, x_−): 꼭짓점과 그 다음, 이전 꼭짓점"""
        which = Vertex.parse(which)
        return self.vertex(which), self.vertex(which.next), self.vertex(which.prev)

    def side(self, which):
        """꼭짓점 x의 대변 방향 ℓ_x = x_− − x_+"""
        _, x_plus, x_minus = self.neighbours(which)
        return x_minus - x_plus

    @property
    def sides(self):
        return self.side(Vertex.A), self.side(Vertex.B), self.side(Vertex.C)

    @property
    def side_lengths(self):
        return tuple(side.norm() for side in self.sides)

    @property
    def diameter(self):
        return max(self.side_lengths)

    @property
    def double_signed_area(self):
        """⟨a;b;c⟩·𝕀_2 = det(b−a, c−a)"""
        return _det(self.b - self.a, self.c - self.a)

    @property
    def area(self):
        return 0.5 * abs(self.double_signed_area)

    def bivector(self):
        """⟨a;b;c⟩ (G_2의 이중벡터)"""
        return triangle_bivector(self.a, self.b, self.c)

    def is_degenerate(self, eps=EPS_DEG):
        diameter = self.diameter
        return abs(self.double_signed_area) <= eps * diameter * diameter

    def require_nondegenerate(self):
        if self.is_degenerate():
            raise DegenerateTriangleError(f"퇴화 삼각형입니다: {self}")

    def rotated(self, which):
        """꼭짓점 which가 첫 자리에 오도록 순환 재배열 (방향 유지)"""
        return OrientedTriangle2(*self.neighbours(which))

    def reversed(self):
        """[a, c, b] (방향 반전)"""
        return OrientedTriangle2(self.a, self.c, self.b)

    def translated(self, offset):
        return OrientedTriangle2(self.a + offset, self.b + offset, self.c + offset)

    def scaled(self, factor, center):
        """center를 중심으로 factor배 닮음 변환"""
        return OrientedTriangle2(
            center + (self.a - center) * factor,
            center + (self.b - center) * factor,
            center + (self.c - center) * factor,
        )

    def vertices(self):
        return self.a, self.b, self.c


@dataclass(frozen=True)
class MirrorData:
    """거울 꼭짓점 x′과 파생량

    x̄ = (x′+x)/2, u = (x′−x)/2, v = x_− − x̄, v = τ·ℓ_x
    """

    vertex_id: Vertex
    x: Point2
    x_plus: Point2
    x_minus: Point2
    x_prime: Point2
    x_bar: Point2
    u: Point2
    v: Point2
    tau: float

    @property
    def ell(self):
        """ℓ_x = x_− − x_+"""
        return self.x_minus - self.x_plus


def _as_multivector(point):
    if isinstance(point, Point2):
        return point.as_vector()
    return point


def reflect_point(x, v):
    """원점과 v를 지나는 직선에 대한 x의 거울상 vxv⁻¹ = 2((x·v)/|v|²)v − x

    Args:
        x (Multivector): 반사할 점
        v (Multivector): 직선 방향 (0이 아닌 벡터)

    Returns:
        Multivector: 반사된 점
    """
    squared = scalar_product(v, v)
    if squared == 0.0:
        raise SingularVectorError("반사 방향이 영벡터입니다")
    return v * (2.0 * scalar_product(x, v) / squared) - x


def triangle_bivector(a, b, c):
    """⟨a;b;c⟩ = a∧b + b∧c + c∧a = (b−a)∧(c−a)

    Args:
        a, b, c (Multivector | Point2): 같은 차원의 점

    Returns:
        Multivector: grade 2 다중벡터
    """
    a, b, c = (_as_multivector(p) for p in (a, b, c))
    return outer_product(b - a, c - a)


def area(a, b, c):
    """삼각형 넓이 ½|⟨a;b;c⟩| (0이면 퇴화)"""
    return 0.5 * norm(triangle_bivector(a, b, c))


def area_via_sides(a, b, c):
    """넓이의 두 번째 경로 ½√(|ℓ_a|²|ℓ_b|² − (ℓ_a·ℓ_b)²)"""
    a, b, c = (_as_multivector(p) for p in (a, b, c))
    ell_a = c - b
    ell_b = a - c
    gram = scalar_product(ell_a, ell_a) * scalar_product(ell_b, ell_b) - scalar_product(ell_a, ell_b) ** 2
    return 0.5 * math.sqrt(max(gram, 0.0))


def mirror_vertex(triangle, which):
    """꼭짓점 x의 거울 꼭짓점과 균형 데이터

    x′ = x_− + 2 (ℓ_x·ℓ_{x+})/|ℓ_x|² ℓ_x − ℓ_{x+} 로 계산한다 (평행이동 불변 형태).

    Args:
        triangle (OrientedTriangle2): 비퇴화 삼각형
        which (Vertex | str): 꼭짓점

    Returns:
        MirrorData: x′, x̄, u_x, v_x, τ
    """
    which = Vertex.parse(which)
    triangle.require_nondegenerate()
    x, x_plus, x_minus = triangle.neighbours(which)
    ell = x_minus - x_plus
    ell_next = x - x_minus
    squared = ell.dot(ell)
    x_prime = x_minus + ell * (2.0 * ell.dot(ell_next) / squared) - ell_next
    x_bar = (x_prime + x) * 0.5
    u = (x_prime - x) * 0.5
    v = x_minus - x_bar
    tau = v.dot(ell) / squared
    return MirrorData(which, x, x_plus, x_minus, x_prime, x_bar, u, v, tau)


def mirror_vertex_expanded(triangle, which):
    """완전 전개형 x′ = −[x + 2x_+(ℓ_{x+}·ℓ_x)/|ℓ_x|² + 2x_−(ℓ_{x−}·ℓ_x)/|ℓ_x|²]"""
    which = Vertex.parse(which)
    triangle.require_nondegenerate()
    x, x_plus, x_minus = triangle.neighbours(which)
    ell = triangle.side(which)
    ell_plus = triangle.side(which.next)
    ell_minus = triangle.side(which.prev)
    squared = ell.dot(ell)
    return -(x + x_plus * (2.0 * ell_plus.dot(ell) / squared) + x_minus * (2.0 * ell_minus.dot(ell) / squared))


def mirror_vertex_clifford(triangle, which):
    """클리퍼드 곱으로 계산한 x′ = x_− + ℓ_x ℓ_{x+} ℓ_x⁻¹"""
    which = Vertex.parse(which)
    triangle.require_nondegenerate()
    x_minus = triangle.vertex(which.prev).as_vector()
    ell = triangle.side(which).as_vector()
    ell_plus = triangle.side(which.next).as_vector()
    reflected = ell * ell_plus * vector_inverse(ell)
    return Point2.from_vector(x_minus + reflected.grade(1))


def is_balanced(mirror, eps=EPS_BAL):
    """균형 거울 꼭짓점 판정: τ ∈ [−ε, 1+ε]

    |ℓ_x| = |ℓ_x − v_x| + |v_x| 와 동치이다.
    """
    return -eps <= mirror.tau <= 1.0 + eps


def balance_ratio(mirror):
    """max{|v_x|/|ℓ_x|, |ℓ_x − v_x|/|ℓ_x|} (균형이면 ≤ 1)"""
    ell = mirror.ell
    length = ell.norm()
    return max(mirror.v.norm() / length, (ell - mirror.v).norm() / length)


def reflected_triangle(mirror):
    """반사된 삼각형 [x′, x_+, x_−]"""
    return OrientedTriangle2(mirror.x_prime, mirror.x_plus, mirror.x_minus)


def balanced_vertex_choice(triangle):
    """가장 긴 변(지름)의 대변 꼭짓점 선택, 동률이면 A < B < C

    Returns:
        Vertex: 항상 균형인 거울 꼭짓점을 갖는 꼭짓점
    """
    triangle.require_nondegenerate()
    lengths = triangle.side_lengths
    longest = max(lengths)
    for vertex, length in zip(_VERTICES, lengths):
        if length >= longest * (1.0 - _TIE_RTOL):
            return vertex
    return Vertex.A


def point_on_line(x, x0, v, tol=1e-12):
    """x가 x0를 지나고 v에 평행한 직선 위에 있는지: (x−x0)∧v = 0"""
    x, x0, v = (_as_multivector(p) for p in (x, x0, v))
    offset = x - x0
    return norm(outer_product(offset, v)) <= tol * max(norm(offset) * norm(v), 1e-300)


def point_on_plane(x, x0, u, v, tol=1e-12):
    """x가 x0를 지나고 u∧v 방향인 평면 위에 있는지: (x−x0)∧u∧v = 0"""
    x, x0, u, v = (_as_multivector(p) for p in (x, x0, u, v))
    offset = x - x0
    volume = outer_product(outer_product(offset, u), v)
    return norm(volume) <= tol * max(norm(offset) * norm(u) * norm(v), 1e-300)
