"""Per-episode run records and their CSV files."""
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

BASE_COLUMNS: List[str] = ["step", "episode", "return_raw", "return_norm", "eval_return_norm"]
GUIDE_COLUMNS: List[str] = ["h"]
ESTIMATE_COLUMNS: List[str] = ["v_ft", "v_init"]


class MetricSource(Enum):
    """Return series the metrics are computed on."""

    EVALUATION = "evaluation"
    BEHAVIOR = "behavior"


class RunRecord:
    """Rows of one fine-tuning run.

    Row 0 is the pre-fine-tuning evaluation (step 0, episode 0) holding p0;
    every further row closes one training episode.
    """

    def __init__(
        self,
        columns: Sequence[str] = tuple(BASE_COLUMNS),
        seed: Optional[int] = None,
        config_hash: str = "",
    ) -> None:
        missing: List[str] = [name for name in BASE_COLUMNS if name not in columns]
        if missing:
            raise ValueError(f"Run record misses columns {missing}")
        self.columns: List[str] = list(columns)
        self.seed: Optional[int] = seed
        self.config_hash: str = config_hash
        self._rows: List[Dict[str, Any]] = []

    def __len__(self) -> int:
        return len(self._rows)

    def append(self, **values: Any) -> None:
        unknown: List[str] = [name for name in values if name not in self.columns]
        if unknown:
            raise ValueError(f"Unknown run record columns {unknown}")
        self._rows.append({name: values.get(name, np.nan) for name in self.columns})

    @property
    def frame(self) -> pd.DataFrame:
        return pd.DataFrame(self._rows, columns=self.columns)

    @classmethod
    def from_frame(
        cls, frame: pd.DataFrame, seed: Optional[int] = None, config_hash: str = ""
    ) -> "RunRecord":
        record = cls(list(frame.columns), seed, config_hash)
        record._rows = frame.to_dict("records")  # pylint: disable = (protected-access)
        return record

    def to_csv(self, path: Union[str, Path], horizon: Optional[int] = None) -> Path:
        """Validate and write the record."""
        frame: pd.DataFrame = self.frame
        validate_run_record(frame, horizon)
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, float_format="%.10g")
        return path

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "RunRecord":
        return cls.from_frame(pd.read_csv(path))

    @property
    def initial_performance(self) -> float:
        """Normalized p0 from the initial evaluation row."""
        if not self._rows:
            raise ValueError("Run record is empty.")
        return float(self._rows[0]["eval_return_norm"])

    def online_returns(self, source: MetricSource = MetricSource.EVALUATION) -> np.ndarray:
        """Normalized online returns after the initial row.

        Evaluation falls back to behavior returns when no evaluation ran.
        """
        frame: pd.DataFrame = self.frame.iloc[1:]
        if source == MetricSource.EVALUATION:
            evaluated = frame["eval_return_norm"].dropna()
            if len(evaluated):
                return evaluated.to_numpy(dtype=np.float64)
        return frame["return_norm"].to_numpy(dtype=np.float64)

    def online_steps(self, source: MetricSource = MetricSource.EVALUATION) -> np.ndarray:
        """Steps matching `online_returns`, starting with step 0 of p0."""
        frame: pd.DataFrame = self.frame.iloc[1:]
        if source == MetricSource.EVALUATION and frame["eval_return_norm"].notna().any():
            frame = frame[frame["eval_return_norm"].notna()]
        return frame["step"].to_numpy(dtype=np.float64)


def validate_run_record(frame: pd.DataFrame, horizon: Optional[int] = None) -> None:
    """Check header, step monotonicity and guide-step invariants.

    Raises:
        ValueError: if the record violates an invariant.
    """
    columns: List[str] = list(frame.columns)
    if columns[: len(BASE_COLUMNS)] != BASE_COLUMNS:
        raise ValueError(f"Run record header {columns} does not start with {BASE_COLUMNS}")
    allowed: List[str] = BASE_COLUMNS + GUIDE_COLUMNS + ESTIMATE_COLUMNS
    if any(name not in allowed for name in columns):
        raise ValueError(f"Unexpected run record columns in {columns}")
    steps: np.ndarray = frame["step"].to_numpy(dtype=np.float64)
    if np.any(np.diff(steps) < 0):
        raise ValueError("Run record steps must be non-decreasing.")
    if "h" in frame:
        guide_steps: np.ndarray = frame["h"].to_numpy(dtype=np.float64)
        if np.any(guide_steps < 0) or (horizon is not None and np.any(guide_steps > horizon)):
            raise ValueError(f"Guide step outside [0, {horizon}].")
        if np.any(np.diff(guide_steps) > 0):
            raise ValueError("Guide step increased between episodes.")
