# src/config.py
import os
from dataclasses import dataclass

from dotenv import load_dotenv

from src.exceptions import ConfigError

load_dotenv()

DEFAULT_JOB_CAP = 1_000_000
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def _int_env(name: str, default: int, minimum: int = 1) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{name} must be an integer, got {raw!r}")
    if value < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {value}")
    return value


@dataclass(frozen=True)
class RuntimeConfig:
    """실행 환경 설정 클래스"""

    jobs: int = 1
    job_cap: int = DEFAULT_JOB_CAP
    log_level: str = "WARNING"

    @classmethod
    def from_env(cls) -> "RuntimeConfig":
        """환경변수에서 설정을 로드"""
        jobs = _int_env("SPATIALGEN_JOBS", 1)
        job_cap = _int_env("SPATIALGEN_JOB_CAP", DEFAULT_JOB_CAP)
        log_level = os.getenv("SPATIALGEN_LOG_LEVEL", "WARNING").upper()

        if log_level not in LOG_LEVELS:
            raise ConfigError(f"SPATIALGEN_LOG_LEVEL is not a log level: {log_level!r}")

        return cls(jobs=jobs, job_cap=job_cap, log_level=log_level)
