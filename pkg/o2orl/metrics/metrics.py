"""Fine-tuning metrics per run and their bootstrap summaries over seeds."""
import math
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from o2orl.training.run_record import MetricSource, RunRecord

DEFAULT_TAIL_FRACTION: float = 0.1
DEFAULT_RESAMPLES: int = 1000
DEFAULT_CONFIDENCE: float = 0.95


class Metrics(Enum):
    """
    Helper Enum representing the per-run fine-tuning metrics.
    """

    DEGRADATION = "degradation"
    FINAL_IMPROVEMENT = "final_improvement"
    AUC = "auc"


def _check_inputs(p0: float, online_returns: Sequence[float]) -> np.ndarray:
    returns: np.ndarray = np.asarray(online_returns, dtype=np.float64)
    if p0 == 0:
        raise ValueError("Initial performance p0 must be non-zero.")
    if returns.size == 0:
        raise ValueError("Online returns must not be empty.")
    return returns


def degradation(p0: float, online_returns: Sequence[float]) -> float:
    """Relative drop of the worst online return below p0.

    Args:
        p0: Performance before fine-tuning.
        online_returns: Returns collected during fine-tuning.

    Returns:
        (min(online_returns) - p0) / p0; negative values are degradation.

    Raises:
        ValueError: if p0 is zero or there are no online returns.
    """
    returns: np.ndarray = _check_inputs(p0, online_returns)
    return float((returns.min() - p0) / p0)


def final_improvement(
    p0: float,
    online_returns: Sequence[float],
    tail_fraction: float = DEFAULT_TAIL_FRACTION,
) -> float:
    """Relative change of the mean over the last ceil(tail_fraction * n) returns.

    Args:
        p0: Performance before fine-tuning.
        online_returns: Returns collected during fine-tuning.
        tail_fraction: Fraction of the run averaged at its end.

    Returns:
        (tail mean - p0) / p0.

    Raises:
        ValueError: if p0 is zero, there are no online returns or the
            fraction lies outside (0, 1].
    """
    returns: np.ndarray = _check_inputs(p0, online_returns)
    if not 0 < tail_fraction <= 1:
        raise ValueError(f"Tail fraction must lie in (0, 1], got {tail_fraction}")
    count: int = max(1, math.ceil(tail_fraction * returns.size))
    return float((returns[-count:].mean() - p0) / p0)


def auc(
    returns: Sequence[float],
    step_budget: float,
    steps: Optional[Sequence[float]] = None,
) -> float:
    """Trapezoidal area under the return curve divided by the step budget.

    Args:
        returns: Normalized returns.
        step_budget: Online step budget.
        steps: Wall steps of the returns. Defaults to an even spacing of
            [0, step_budget].

    Returns:
        Mean height of the curve.

    Raises:
        ValueError: if there are fewer than 2 points, the budget is not
            positive or steps and returns differ in length.
    """
    values: np.ndarray = np.asarray(returns, dtype=np.float64)
    if values.size < 2:
        raise ValueError("AUC needs at least 2 points.")
    if step_budget <= 0:
        raise ValueError(f"Step budget must be > 0, got {step_budget}")
    grid: np.ndarray = (
        np.linspace(0.0, step_budget, values.size)
        if steps is None
        else np.asarray(steps, dtype=np.float64)
    )
    if grid.shape != values.shape:
        raise ValueError(f"Steps {grid.shape} and returns {values.shape} differ in shape.")
    area: float = float(np.sum(np.diff(grid) * (values[1:] + values[:-1])) / 2.0)
    return area / step_budget


def run_curve(
    record: RunRecord, step_budget: int, source: MetricSource = MetricSource.EVALUATION
) -> Tuple[np.ndarray, np.ndarray]:
    """Steps and normalized returns of a run from p0 at step 0 to the budget.

    The last value is held until `step_budget` when the run ends earlier.
    """
    steps: List[float] = [0.0] + list(record.online_steps(source))
    values: List[float] = [record.initial_performance] + list(record.online_returns(source))
    if steps[-1] < step_budget:
        steps.append(float(step_budget))
        values.append(values[-1])
    return np.asarray(steps), np.asarray(values)


def run_metrics(
    record: RunRecord,
    step_budget: int,
    source: MetricSource = MetricSource.EVALUATION,
    tail_fraction: float = DEFAULT_TAIL_FRACTION,
) -> Dict[str, float]:
    """Degradation, final improvement and AUC of one run."""
    p0: float = record.initial_performance
    online: np.ndarray = record.online_returns(source)
    steps, values = run_curve(record, step_budget, source)
    return {
        Metrics.DEGRADATION.value: degradation(p0, online),
        Metrics.FINAL_IMPROVEMENT.value: final_improvement(p0, online, tail_fraction),
        Metrics.AUC.value: auc(values, max(step_budget, 1), steps),
    }


def bootstrap_ci(
    values: Iterable[float],
    n_resamples: int = DEFAULT_RESAMPLES,
    confidence: float = DEFAULT_CONFIDENCE,
    seed: int = 0,
) -> Tuple[float, float]:
    """Percentile bootstrap confidence interval of the mean.

    Args:
        values: Per-seed values.
        n_resamples: Number of resamples.
        confidence: Interval coverage.
        seed: Seed of the resampling.

    Returns:
        Tuple of lower and upper bound.

    Raises:
        ValueError: if there are no values or confidence lies outside (0, 1).
    """
    data: np.ndarray = np.asarray(list(values), dtype=np.float64)
    if data.size == 0:
        raise ValueError("Bootstrap needs at least one value.")
    if not 0 < confidence < 1:
        raise ValueError(f"Confidence must lie in (0, 1), got {confidence}")
    rng: np.random.Generator = np.random.default_rng(seed)
    indices: np.ndarray = rng.integers(0, data.size, size=(n_resamples, data.size))
    means: np.ndarray = data[indices].mean(axis=1)
    tail: float = 100.0 * (1.0 - confidence) / 2.0
    low, high = np.percentile(means, [tail, 100.0 - tail])
    return float(low), float(high)


def summarize_metrics(
    per_run: pd.DataFrame,
    group_column: str = "algorithm",
    n_resamples: int = DEFAULT_RESAMPLES,
    confidence: float = DEFAULT_CONFIDENCE,
    seed: int = 0,
) -> pd.DataFrame:
    """Aggregate per-run metrics into means with bootstrap intervals per group.

    Args:
        per_run: One row per run holding `group_column` and the metric columns.
        group_column: Column naming the compared variants.
        n_resamples: Bootstrap resamples.
        confidence: Interval coverage.
        seed: Bootstrap seed.

    Returns:
        One row per group with `<metric>`, `<metric>_low`, `<metric>_high`
        and the number of runs.
    """
    rows: List[Dict[str, object]] = []
    for group, frame in per_run.groupby(group_column, sort=True):
        row: Dict[str, object] = {group_column: group, "runs": len(frame)}
        for metric in Metrics:
            values: np.ndarray = frame[metric.value].to_numpy(dtype=np.float64)
            low, high = bootstrap_ci(values, n_resamples, confidence, seed)
            row[metric.value] = float(values.mean())
            row[f"{metric.value}_low"] = low
            row[f"{metric.value}_high"] = high
        rows.append(row)
    return pd.DataFrame(rows)


def aligned_curves(
    records: Dict[str, Sequence[RunRecord]],
    step_budget: int,
    points: int = 50,
    source: MetricSource = MetricSource.EVALUATION,
) -> pd.DataFrame:
    """Interpolate every run onto a shared step grid for plotting.

    Args:
        records: Run records per algorithm label.
        step_budget: Online step budget; the grid spans [0, step_budget].
        points: Number of grid points.
        source: Return series of the curves.

    Returns:
        Long frame with columns algorithm, seed, step and return_norm.
    """
    grid: np.ndarray = np.linspace(0.0, max(step_budget, 1), points)
    frames: List[pd.DataFrame] = []
    for label, runs in records.items():
        for index, record in enumerate(runs):
            steps, values = run_curve(record, step_budget, source)
            frames.append(
                pd.DataFrame(
                    {
                        "algorithm": label,
                        "seed": record.seed if record.seed is not None else index,
                        "step": grid,
                        "return_norm": np.interp(grid, steps, values),
                    }
                )
            )
    if not frames:
        return pd.DataFrame(columns=["algorithm", "seed", "step", "return_norm"])
    return pd.concat(frames, ignore_index=True)
