# src/renderers.py
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from src.models import IndicatorRecord, SpatialNetwork


class TableRenderer:
    """지표/결과를 표(DataFrame)로 변환하는 유틸리티 클래스"""

    @staticmethod
    def records_frame(records: Sequence[IndicatorRecord]) -> pd.DataFrame:
        """레코드 목록 -> 넓은 형식 (지표 하나당 열 하나)"""
        columns: List[str] = []
        for record in records:
            for name in record.names():
                if name not in columns:
                    columns.append(name)
        rows = [[record.to_dict().get(name, np.nan) for name in columns] for record in records]
        return pd.DataFrame(rows, columns=columns)

    @staticmethod
    def ripley_frame(values: Sequence[Tuple[float, float]]) -> pd.DataFrame:
        return pd.DataFrame(list(values), columns=["r", "K"])

    @staticmethod
    def trajectory_frame(trajectory: Sequence[Tuple[int, float]]) -> pd.DataFrame:
        """Schelling 궤적 (step, segregationIndex)"""
        return pd.DataFrame(list(trajectory), columns=["step", "segregationIndex"])

    @staticmethod
    def node_scores_frame(scores: Dict[int, float], name: str) -> pd.DataFrame:
        return pd.DataFrame(sorted(scores.items()), columns=["id", name])

    @staticmethod
    def flows_frame(net: SpatialNetwork, flows: np.ndarray, times: np.ndarray) -> pd.DataFrame:
        """링크 순서의 흐름과 통행 시간"""
        return pd.DataFrame(
            {
                "from": [edge.source for edge in net.edges],
                "to": [edge.target for edge in net.edges],
                "flow": np.asarray(flows, dtype=float),
                "time": np.asarray(times, dtype=float),
            }
        )


def write_csv(frame: pd.DataFrame, path: Union[str, Path]) -> None:
    """결정적 CSV 출력 (인덱스 없음, NaN은 빈 칸, LF 줄바꿈)"""
    frame.to_csv(path, index=False, na_rep="", lineterminator="\n")
