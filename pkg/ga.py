"""유클리드 클리퍼드 대수 G_n (n ≤ 8)

계수는 2^n 길이의 조밀한 배열에 저장하며, 인덱스 k의 비트 i가 켜져 있으면
기저 글자 ℓ_{i+1}이 블레이드에 포함된다 (글자는 오름차순).
"""
import logging
from functools import lru_cache

import numpy as np

from config import SETTINGS
from errors import AlgebraError, SingularVectorError

logger = logging.getLogger("schwarzga.ga")

MAX_DIM = SETTINGS.max_dim

# 비교 허용오차 기본값
DEFAULT_ATOL = 1e-12
DEFAULT_RTOL = 1e-9


def _check_dim(dim):
    if not isinstance(dim, (int, np.integer)) or not 1 <= dim <= MAX_DIM:
        raise AlgebraError(f"차원은 1 이상 {MAX_DIM} 이하의 정수여야 합니다: {dim!r}")


@lru_cache(maxsize=None)
def _popcounts(dim):
    counts = np.array([bin(k).count("1") for k in range(1 << dim)], dtype=np.int64)
    counts.setflags(write=False)
    return counts


@lru_cache(maxsize=None)
def _cayley_tables(dim):
    """블레이드 곱 테이블 (결과 인덱스, 부호, 외적 마스크)

    ℓ_iℓ_j = −ℓ_jℓ_i (i≠j), ℓ_iℓ_i = 𝟙 이므로 결과 블레이드는 A XOR B,
    부호는 A의 각 글자가 B의 더 작은 글자를 건너가는 횟수의 홀짝으로 정해진다.
    """
    size = 1 << dim
    indices = np.arange(size, dtype=np.int64)
    left = indices[:, None]
    right = indices[None, :]
    popcounts = _popcounts(dim)

    swaps = np.zeros((size, size), dtype=np.int64)
    for bit in range(dim):
        has_bit = (left >> bit) & 1
        lower_letters = popcounts[right & ((1 << bit) - 1)]
        swaps += has_bit * lower_letters

    result_index = left ^ right
    signs = np.where(swaps % 2 == 1, -1.0, 1.0)
    outer_mask = (left & right) == 0

    for table in (result_index, signs, outer_mask):
        table.setflags(write=False)
    return result_index, signs, outer_mask


def _blade_label(index):
    if index == 0:
        return ""
    letters = [str(bit + 1) for bit in range(MAX_DIM) if index >> bit & 1]
    return "e" + "".join(letters)


class Multivector:
    """G_n의 조밀한 다중벡터 (불변 값 객체)

    Args:
        dim (int): 벡터 공간 차원 n (1 ≤ n ≤ MAX_DIM)
        coeffs (array-like, optional): 길이 2^n 계수 배열. 없으면 𝕆
    """

    __slots__ = ("_dim", "_coeffs")

    def __init__(self, dim, coeffs=None):
        _check_dim(dim)
        size = 1 << dim
        if coeffs is None:
            values = np.zeros(size)
        else:
            values = np.array(coeffs, dtype=float)
        if values.shape != (size,):
            raise AlgebraError(f"G_{dim}의 계수 배열 길이는 {size}여야 합니다: {values.shape}")
        values.setflags(write=False)
        self._dim = int(dim)
        self._coeffs = values

    # 생성자
    @classmethod
    def zero(cls, dim):
        """영 다중벡터 𝕆"""
        return cls(dim)

    @classmethod
    def scalar(cls, dim, value=1.0):
        """스칼라 다중벡터 (기본값은 단위 𝟙)"""
        coeffs = np.zeros(1 << dim)
        coeffs[0] = value
        return cls(dim, coeffs)

    @classmethod
    def vector(cls, components):
        """성분 χ_i로 벡터 Σ χ_i ℓ_i 만들기

        Args:
            components (sequence): n개의 실수 성분

        Returns:
            Multivector: grade 1 다중벡터
        """
        components = np.asarray(components, dtype=float)
        dim = len(components)
        _check_dim(dim)
        coeffs = np.zeros(1 << dim)
        coeffs[[1 << i for i in range(dim)]] = components
        return cls(dim, coeffs)

    @classmethod
    def basis(cls, dim, letter):
        """기저 벡터 ℓ_letter (1부터 시작)"""
        _check_dim(dim)
        if not 1 <= letter <= dim:
            raise AlgebraError(f"기저 글자 번호가 범위를 벗어났습니다: {letter} (n={dim})")
        coeffs = np.zeros(1 << dim)
        coeffs[1 << (letter - 1)] = 1.0
        return cls(dim, coeffs)

    @classmethod
    def blade(cls, dim, *letters):
        """기저 글자들의 기하곱 ℓ_{i1}ℓ_{i2}⋯ (중복 허용, 축약됨)"""
        result = cls.scalar(dim)
        for letter in letters:
            result = geometric_product(result, cls.basis(dim, letter))
        return result

    # 속성
    @property
    def dim(self):
        return self._dim

    @property
    def coeffs(self):
        return self._coeffs

    def grade(self, k):
        """grade k 성분만 남긴 사영"""
        return grade_project(self, k)

    def grades(self):
        """0이 아닌 계수를 가진 grade 집합"""
        nonzero = np.nonzero(self._coeffs)[0]
        return set(_popcounts(self._dim)[nonzero].tolist())

    def is_vector(self):
        return self.grades() <= {1}

    def vector_components(self):
        """grade 1 성분 χ_i = x·ℓ_i (길이 n 배열)"""
        return np.array([self._coeffs[1 << i] for i in range(self._dim)])

    @property
    def scalar_part(self):
        return float(self._coeffs[0])

    # 연산자
    def __add__(self, other):
        if isinstance(other, Multivector):
            _check_same_dim(self, other)
            return Multivector(self._dim, self._coeffs + other._coeffs)
        if np.isscalar(other):
            return self + Multivector.scalar(self._dim, other)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Multivector):
            _check_same_dim(self, other)
            return Multivector(self._dim, self._coeffs - other._coeffs)
        if np.isscalar(other):
            return self - Multivector.scalar(self._dim, other)
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return Multivector(self._dim, -self._coeffs)

    def __mul__(self, other):
        if isinstance(other, Multivector):
            return geometric_product(self, other)
        if np.isscalar(other):
            return Multivector(self._dim, self._coeffs * float(other))
        return NotImplemented

    def __rmul__(self, other):
        if np.isscalar(other):
            return Multivector(self._dim, self._coeffs * float(other))
        return NotImplemented

    def __truediv__(self, other):
        if np.isscalar(other):
            return Multivector(self._dim, self._coeffs / float(other))
        return NotImplemented

    def __xor__(self, other):
        if isinstance(other, Multivector):
            return outer_product(self, other)
        return NotImplemented

    def __eq__(self, other):
        if not isinstance(other, Multivector):
            return NotImplemented
        return self._dim == other._dim and np.array_equal(self._coeffs, other._coeffs)

    def __hash__(self):
        return hash((self._dim, self._coeffs.tobytes()))

    def __abs__(self):
        return norm(self)

    def __repr__(self):
        terms = []
        for index in np.nonzero(self._coeffs)[0]:
            value = float(self._coeffs[index])
            label = _blade_label(int(index))
            magnitude = format(abs(value), ".17g")
            body = f"{magnitude}*{label}" if label else magnitude
            if not terms:
                terms.append(f"-{body}" if value < 0 else body)
            else:
                terms.append(f" - {body}" if value < 0 else f" + {body}")
        return "".join(terms) if terms else "0"


def _check_same_dim(a, b):
    if a.dim != b.dim:
        raise AlgebraError(f"다중벡터 차원이 다릅니다: G_{a.dim} vs G_{b.dim}")


def _require_vector(x, what="벡터"):
    if not isinstance(x, Multivector) or not x.is_vector():
        raise AlgebraError(f"{what}는 grade 1 다중벡터여야 합니다: {x!r}")


def geometric_product(a, b):
    """기하곱 AB (쌍선형, 결합법칙, 단위원 𝟙)"""
    _check_same_dim(a, b)
    result_index, signs, _ = _cayley_tables(a.dim)
    terms = np.outer(a.coeffs, b.coeffs) * signs
    coeffs = np.bincount(result_index.ravel(), weights=terms.ravel(), minlength=1 << a.dim)
    return Multivector(a.dim, coeffs)


def outer_product(a, b):
    """외적 A∧B (블레이드끼리 글자를 공유하면 0)"""
    _check_same_dim(a, b)
    result_index, signs, outer_mask = _cayley_tables(a.dim)
    terms = np.outer(a.coeffs, b.coeffs) * np.where(outer_mask, signs, 0.0)
    coeffs = np.bincount(result_index.ravel(), weights=terms.ravel(), minlength=1 << a.dim)
    return Multivector(a.dim, coeffs)


def scalar_product(a, b):
    """정규직교 블레이드 기저에서의 스칼라곱 Σ_k A_k B_k"""
    _check_same_dim(a, b)
    return float(np.dot(a.coeffs, b.coeffs))


def norm(a):
    """|A| = √(A·A)"""
    return float(np.sqrt(np.dot(a.coeffs, a.coeffs)))


def grade_project(a, k):
    """⟨A⟩_k: popcount ≠ k인 계수를 모두 0으로"""
    mask = _popcounts(a.dim) == k
    return Multivector(a.dim, np.where(mask, a.coeffs, 0.0))


def vector_inverse(v):
    """벡터의 역원 v⁻¹ = v / |v|²

    Args:
        v (Multivector): 0이 아닌 벡터

    Returns:
        Multivector: v⁻¹
    """
    _require_vector(v)
    squared = scalar_product(v, v)
    if squared == 0.0:
        raise SingularVectorError("영벡터는 역원이 없습니다")
    return v / squared


def pseudo_unit(n):
    """의사단위 𝕀_n = ℓ_1ℓ_2⋯ℓ_n"""
    _check_dim(n)
    coeffs = np.zeros(1 << n)
    coeffs[(1 << n) - 1] = 1.0
    return Multivector(n, coeffs)


def pseudo_unit_inverse(n):
    """(𝕀_n)⁻¹ = ℓ_n⋯ℓ_1 = (−1)^{n(n−1)/2} 𝕀_n"""
    sign = -1.0 if (n * (n - 1) // 2) % 2 else 1.0
    return pseudo_unit(n) * sign


def det2(x, y):
    """(x∧y)·𝕀_2 = χ1ζ2 − χ2ζ1

    Args:
        x (Multivector): E_2의 벡터
        y (Multivector): E_2의 벡터

    Returns:
        float: 2×2 행렬식
    """
    for vec in (x, y):
        _require_vector(vec)
        if vec.dim != 2:
            raise AlgebraError(f"det2는 E_2 벡터에만 정의됩니다: n={vec.dim}")
    return scalar_product(outer_product(x, y), pseudo_unit(2))


def dual3(x):
    """x* = x𝕀_3 (벡터 → 이중벡터)"""
    _require_vector(x)
    if x.dim != 3:
        raise AlgebraError(f"dual3는 E_3에서만 정의됩니다: n={x.dim}")
    return geometric_product(x, pseudo_unit(3))


def undual3(bivector):
    """X^# = −X𝕀_3 (이중벡터 → 벡터)"""
    if bivector.dim != 3:
        raise AlgebraError(f"undual3는 G_3에서만 정의됩니다: n={bivector.dim}")
    if not bivector.grades() <= {2}:
        raise AlgebraError(f"undual3의 입력은 순수 grade 2여야 합니다: {bivector!r}")
    return -geometric_product(bivector, pseudo_unit(3))


def cross(a, b):
    """고전적 외적 a×b = (a∧b)^#"""
    _require_vector(a)
    _require_vector(b)
    if a.dim != 3 or b.dim != 3:
        raise AlgebraError("cross는 E_3 벡터에만 정의됩니다")
    return undual3(outer_product(a, b))


def isclose(a, b, atol=DEFAULT_ATOL, rtol=DEFAULT_RTOL):
    """성분별 |Δ| ≤ atol + rtol·|ref| 비교 (b가 기준값)"""
    _check_same_dim(a, b)
    return bool(np.all(np.abs(a.coeffs - b.coeffs) <= atol + rtol * np.abs(b.coeffs)))
