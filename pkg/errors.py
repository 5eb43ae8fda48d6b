"""schwarzga 예외 계층

입력/설정 오류는 ValueError, 수치 오류는 ArithmeticError 계열이며
CLI는 이 구분으로 종료 코드(2/3)를 정한다.
"""

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class SchwarzGAError(Exception):
    """모든 schwarzga 오류의 기반 클래스"""

    exit_code = EXIT_NUMERICAL


# 입력 / 설정 오류
class ConfigError(SchwarzGAError, ValueError):
    """잘못된 설정, 스펙 문자열, 플래그"""

    exit_code = EXIT_CONFIG


class AlgebraError(SchwarzGAError, ValueError):
    """차원 불일치, 잘못된 grade, 범위를 벗어난 차원"""

    exit_code = EXIT_CONFIG


class ParseError(SchwarzGAError, ValueError):
    """수식 구문 오류

    Args:
        message (str): 오류 설명
        offset (int): 오류가 발생한 바이트 위치
        expected (iterable): 기대했던 토큰 집합
    """

    exit_code = EXIT_CONFIG

    def __init__(self, message, offset, expected=()):
        self.offset = offset
        self.expected = frozenset(expected)
        detail = f"{message} (위치 {offset}"
        if self.expected:
            detail += f", 기대 토큰: {', '.join(sorted(self.expected))}"
        detail += ")"
        super().__init__(detail)


# 수치 오류
class NumericalError(SchwarzGAError, ArithmeticError):
    """수치 계산 실패의 기반 클래스"""


class SingularVectorError(NumericalError):
    """영벡터의 역원/반사 방향 요청"""


class DegenerateTriangleError(NumericalError):
    """퇴화 삼각형 (⟨a;b;c⟩ ≈ 0)"""


class UnbalancedVertexError(NumericalError):
    """균형이 맞지 않는 거울 꼭짓점"""


class DomainError(NumericalError):
    """정의역 밖의 점에서 곡면을 평가하려는 경우"""


class ExprEvaluationError(NumericalError):
    """수식 평가 중 정의역 오류

    Args:
        message (str): 오류 설명
        subexpression (str): 오류가 발생한 부분식
    """

    def __init__(self, message, subexpression=""):
        self.subexpression = subexpression
        super().__init__(f"{message}: {subexpression}" if subexpression else message)


class OracleConvergenceError(NumericalError):
    """적분 오라클이 최대 깊이 안에 수렴하지 못한 경우

    Args:
        message (str): 오류 설명
        best_estimate (float): 지금까지의 최선 추정값
    """

    def __init__(self, message, best_estimate):
        self.best_estimate = best_estimate
        super().__init__(f"{message} (최선 추정값 {best_estimate!r})")
