# pylint: disable = missing-class-docstring
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from o2orl.training import (
    BASE_COLUMNS,
    ESTIMATE_COLUMNS,
    GUIDE_COLUMNS,
    MetricSource,
    RunRecord,
    validate_run_record,
)


def guided_record() -> RunRecord:
    columns = BASE_COLUMNS + GUIDE_COLUMNS + ESTIMATE_COLUMNS
    record = RunRecord(columns, seed=2, config_hash="abc")
    rows = [
        (0, 0, 5.0, 0.5, 0.5, 60.0, np.nan, 1.0),
        (40, 1, 7.0, 0.7, np.nan, 60.0, 0.8, 1.0),
        (70, 2, 9.0, 0.9, 0.6, 48.0, 1.2, 1.0),
    ]
    for row in rows:
        record.append(**dict(zip(columns, row)))
    return record


class TestRunRecord:
    def test_header_order(self, tmp_path: Path) -> None:
        path = guided_record().to_csv(tmp_path / "run_record.csv", horizon=60)
        header = path.read_text(encoding="utf-8").splitlines()[0]
        assert header == "step,episode,return_raw,return_norm,eval_return_norm,h,v_ft,v_init"

    def test_csv_round_trip_keeps_rows(self, tmp_path: Path) -> None:
        path = guided_record().to_csv(tmp_path / "run_record.csv")
        loaded = RunRecord.from_csv(path)
        assert len(loaded) == 3
        assert loaded.initial_performance == 0.5
        assert np.isnan(loaded.frame["v_ft"].iloc[0])

    def test_evaluation_source_uses_evaluated_rows(self) -> None:
        record = guided_record()
        np.testing.assert_array_equal(record.online_returns(), [0.6])
        np.testing.assert_array_equal(record.online_steps(), [70.0])

    def test_behavior_source_uses_every_episode(self) -> None:
        record = guided_record()
        np.testing.assert_array_equal(
            record.online_returns(MetricSource.BEHAVIOR), [0.7, 0.9]
        )
        np.testing.assert_array_equal(record.online_steps(MetricSource.BEHAVIOR), [40.0, 70.0])

    def test_evaluation_falls_back_to_behavior(self) -> None:
        record = RunRecord()
        record.append(step=0, episode=0, return_raw=0.0, return_norm=0.1, eval_return_norm=0.1)
        record.append(step=10, episode=1, return_raw=0.0, return_norm=0.3)
        np.testing.assert_array_equal(record.online_returns(), [0.3])

    def test_unknown_column_raises(self) -> None:
        with pytest.raises(ValueError):
            RunRecord().append(step=0, h=3.0)

    def test_missing_base_column_raises(self) -> None:
        with pytest.raises(ValueError):
            RunRecord(["step", "episode"])

    def test_empty_record_has_no_initial_performance(self) -> None:
        with pytest.raises(ValueError):
            _ = RunRecord().initial_performance


class TestValidation:
    def frame(self, **columns) -> pd.DataFrame:
        base = {
            "step": [0, 10, 20],
            "episode": [0, 1, 2],
            "return_raw": [0.0, 1.0, 2.0],
            "return_norm": [0.0, 0.1, 0.2],
            "eval_return_norm": [0.0, np.nan, 0.2],
        }
        base.update(columns)
        return pd.DataFrame(base)

    def test_valid_frame_passes(self) -> None:
        validate_run_record(self.frame(h=[10.0, 8.0, 8.0]), horizon=10)

    def test_increasing_guide_step_raises(self) -> None:
        with pytest.raises(ValueError):
            validate_run_record(self.frame(h=[8.0, 10.0, 6.0]), horizon=10)

    def test_guide_step_above_horizon_raises(self) -> None:
        with pytest.raises(ValueError):
            validate_run_record(self.frame(h=[12.0, 8.0, 6.0]), horizon=10)

    def test_decreasing_steps_raise(self) -> None:
        with pytest.raises(ValueError):
            validate_run_record(self.frame(step=[0, 20, 10]))

    def test_unexpected_column_raises(self) -> None:
        with pytest.raises(ValueError):
            validate_run_record(self.frame(loss=[0.0, 0.0, 0.0]))

    def test_reordered_header_raises(self) -> None:
        frame = self.frame()
        with pytest.raises(ValueError):
            validate_run_record(frame[["episode", "step", *BASE_COLUMNS[2:]]])
