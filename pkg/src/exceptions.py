# src/exceptions.py
from typing import Optional


class SpatialGenError(Exception):
    """spatialgen 기본 에러 클래스"""

    exit_code = 1

    def __init__(self, message: str):
        self.message = message
        super().__init__(message)


class ValidationError(SpatialGenError):
    """파라미터/입력값 검증 에러"""

    pass


class FormatError(SpatialGenError):
    """파일 파싱 에러"""

    def __init__(self, message: str, path: Optional[str] = None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
        self.message = message


class GraphError(SpatialGenError):
    """그래프 구조 에러 (노드 없음, 연결 끊김 등)"""

    pass


class GeometryError(SpatialGenError):
    """기하 입력 에러 (퇴화된 점 집합, 도시 배치 실패 등)"""

    pass


class ModelError(SpatialGenError):
    """시뮬레이션 모델 실행 에러"""

    pass


class ConfigError(SpatialGenError):
    """설정 에러 클래스"""

    exit_code = 2
