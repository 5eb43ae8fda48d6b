import os
import logging
from dataclasses import dataclass
from dotenv import load_dotenv

from errors import ConfigError

# .env 파일 로드
load_dotenv()

LOGGER_NAME = "schwarzga"


def _env_int(name, default, low=None, high=None):
    """환경변수에서 정수 설정값 읽기

    Args:
        name (str): 환경변수 이름
        default (int): 기본값
        low (int, optional): 허용 최솟값 (이보다 작으면 잘라냄)
        high (int, optional): 허용 최댓값 (이보다 크면 잘라냄)

    Returns:
        int: 설정값
    """
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"환경변수 {name}의 값이 정수가 아닙니다: {raw!r}")
    if low is not None:
        value = max(low, value)
    if high is not None:
        value = min(high, value)
    return value


def _env_float(name, default):
    """환경변수에서 실수 설정값 읽기"""
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"환경변수 {name}의 값이 실수가 아닙니다: {raw!r}")
    if not value > 0:
        raise ConfigError(f"환경변수 {name}는 양수여야 합니다: {raw!r}")
    return value


@dataclass(frozen=True)
class Settings:
    """실행 설정 (환경변수 / .env 기반)"""

    log_level: str = "INFO"
    max_dim: int = 8
    threads: int = 1
    relax_kappa: float = 4.0
    oracle_rtol: float = 1e-8
    fd_step: float = 1e-5


def load_settings():
    """환경변수에서 설정 로드

    Returns:
        Settings: 검증된 설정
    """
    return Settings(
        log_level=os.getenv("SCHWARZGA_LOG_LEVEL", "INFO").upper(),
        max_dim=_env_int("SCHWARZGA_MAX_DIM", 8, low=1, high=8),
        threads=_env_int("SCHWARZGA_THREADS", 1, low=1),
        relax_kappa=_env_float("SCHWARZGA_RELAX_KAPPA", 4.0),
        oracle_rtol=_env_float("SCHWARZGA_ORACLE_RTOL", 1e-8),
        fd_step=_env_float("SCHWARZGA_FD_STEP", 1e-5),
    )


SETTINGS = load_settings()


def setup_logging(level=None):
    """로깅 설정

    Args:
        level (str, optional): 로그 레벨 이름. 없으면 설정값 사용

    Returns:
        logging.Logger: 패키지 루트 로거
    """
    level_name = (level or SETTINGS.log_level).upper()
    if not isinstance(logging.getLevelName(level_name), int):
        raise ConfigError(f"알 수 없는 로그 레벨입니다: {level_name}")
    logging.basicConfig(
        level=level_name,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    logger = logging.getLogger(LOGGER_NAME)
    logger.setLevel(level_name)
    return logger
