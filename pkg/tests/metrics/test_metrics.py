"""File contains unit tests for metrics.py file."""
import numpy as np
import pandas as pd
import pytest

from o2orl.metrics import (
    aligned_curves,
    auc,
    bootstrap_ci,
    degradation,
    final_improvement,
    run_curve,
    run_metrics,
    summarize_metrics,
)
from o2orl.training import MetricSource, RunRecord


def make_record(p0: float, steps, returns, seed: int = 0) -> RunRecord:
    record = RunRecord(seed=seed)
    record.append(step=0, episode=0, return_raw=p0, return_norm=p0, eval_return_norm=p0)
    for episode, (step, value) in enumerate(zip(steps, returns), start=1):
        record.append(
            step=step,
            episode=episode,
            return_raw=value,
            return_norm=value,
            eval_return_norm=value,
        )
    return record


def test_degradation() -> None:
    assert degradation(100.0, [90.0, 80.0, 110.0]) == pytest.approx(-0.2)
    assert degradation(50.0, [50.0, 70.0]) == 0.0
    assert degradation(1.0, [1.5, 2.0]) >= 0


def test_final_improvement() -> None:
    assert final_improvement(100.0, [0.0] * 9 + [150.0]) == pytest.approx(0.5)
    assert final_improvement(2.0, [2.0] * 7) == 0.0
    assert final_improvement(1.0, [1.0] * 10 + [2.0, 4.0], tail_fraction=0.1) == pytest.approx(2.0)


def test_relative_metrics_are_scale_invariant() -> None:
    returns = [0.4, 0.9, 0.7, 1.3]
    scaled = [3.0 * value for value in returns]
    assert degradation(0.8, returns) == pytest.approx(degradation(2.4, scaled))
    assert final_improvement(0.8, returns, 0.5) == pytest.approx(
        final_improvement(2.4, scaled, 0.5)
    )


@pytest.mark.parametrize(
    "call",
    [
        lambda: degradation(0.0, [1.0]),
        lambda: degradation(1.0, []),
        lambda: final_improvement(0.0, [1.0]),
        lambda: final_improvement(1.0, [1.0], tail_fraction=0.0),
        lambda: auc([1.0], 10),
        lambda: auc([1.0, 1.0], 0),
        lambda: auc([1.0, 1.0], 10, steps=[0.0, 5.0, 10.0]),
    ],
)
def test_invalid_inputs_raise(call) -> None:
    with pytest.raises(ValueError):
        call()


def test_auc() -> None:
    """Constant curves keep their height, a ramp covers half the budget."""
    assert auc([0.7] * 5, 1000) == pytest.approx(0.7)
    assert auc([0.0, 1.0], 100) == pytest.approx(0.5)
    assert auc([0.0, 0.5, 1.0], 10, steps=[0.0, 5.0, 10.0]) == pytest.approx(0.5)


def test_auc_ignores_order_of_equal_plateaus() -> None:
    first = auc([1.0, 1.0, 3.0, 3.0], 3, steps=[0.0, 1.0, 2.0, 3.0])
    assert first == pytest.approx(auc([3.0, 3.0, 1.0, 1.0], 3, steps=[0.0, 1.0, 2.0, 3.0]))


@pytest.mark.filterwarnings("error")
def test_auc_raises_no_warnings() -> None:
    """Area uses no numpy integration helper that warns on newer numpy releases."""
    assert auc([0.0, 2.0, 2.0], 4, steps=[0.0, 2.0, 4.0]) == pytest.approx(1.5)


def test_run_curve_holds_last_value_until_budget() -> None:
    steps, values = run_curve(make_record(0.5, [40, 80], [0.6, 0.8]), 100)
    np.testing.assert_array_equal(steps, [0.0, 40.0, 80.0, 100.0])
    np.testing.assert_array_equal(values, [0.5, 0.6, 0.8, 0.8])


def test_run_metrics() -> None:
    metrics = run_metrics(make_record(0.5, [50, 100], [0.25, 1.0]), 100)
    assert metrics["degradation"] == pytest.approx(-0.5)
    assert metrics["final_improvement"] == pytest.approx(1.0)
    assert metrics["auc"] == pytest.approx((0.375 * 50 + 0.625 * 50) / 100)


def test_run_metrics_on_behavior_source() -> None:
    record = RunRecord()
    record.append(step=0, episode=0, return_raw=1, return_norm=0.5, eval_return_norm=0.5)
    record.append(step=5, episode=1, return_raw=1, return_norm=0.2, eval_return_norm=0.9)
    assert run_metrics(record, 5, MetricSource.BEHAVIOR)["degradation"] == pytest.approx(-0.6)
    assert run_metrics(record, 5)["degradation"] == pytest.approx(0.8)


def test_bootstrap_is_seeded() -> None:
    values = [0.1, 0.5, 0.3, 0.9, 0.2]
    assert bootstrap_ci(values, seed=4) == bootstrap_ci(values, seed=4)
    low, high = bootstrap_ci(values, seed=4)
    assert low <= np.mean(values) <= high


def test_identical_runs_give_zero_width_interval() -> None:
    assert bootstrap_ci([0.3] * 5) == pytest.approx((0.3, 0.3))


def test_summarize_metrics_groups_algorithms() -> None:
    per_run = pd.DataFrame(
        {
            "algorithm": ["sac", "sac", "ajs"],
            "degradation": [-0.2, -0.4, 0.0],
            "final_improvement": [0.1, 0.3, 0.5],
            "auc": [0.5, 0.7, 0.9],
        }
    )
    summary = summarize_metrics(per_run, n_resamples=200)
    assert list(summary["algorithm"]) == ["ajs", "sac"]
    assert list(summary["runs"]) == [1, 2]
    sac = summary.set_index("algorithm").loc["sac"]
    assert sac["degradation"] == pytest.approx(-0.3)
    assert sac["degradation_low"] <= sac["degradation"] <= sac["degradation_high"]


def test_aligned_curves_share_grid() -> None:
    records = {
        "sac": [make_record(0.5, [50, 100], [0.2, 0.4], seed=3)],
        "ajs": [make_record(0.5, [100], [0.9], seed=4)],
    }
    curves = aligned_curves(records, 100, points=5)
    assert len(curves) == 10
    assert set(curves["seed"]) == {3, 4}
    ajs = curves[curves["algorithm"] == "ajs"]["return_norm"].to_numpy()
    np.testing.assert_allclose(ajs, [0.5, 0.6, 0.7, 0.8, 0.9])


def test_aligned_curves_without_runs() -> None:
    assert aligned_curves({}, 100).empty
