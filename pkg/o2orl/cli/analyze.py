"""File contains CLI application aggregating fine-tuning runs into metrics and figures."""
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional

import hydra
import numpy as np
import pandas as pd
import torch
from omegaconf import DictConfig, OmegaConf

from o2orl.algos.checkpoint import Checkpoint, load_checkpoint
from o2orl.analysis import (
    linear_interp_eval,
    pca2,
    q_estimate_gap,
    true_return_estimate,
    value_shift,
)
from o2orl.approx.networks import flat_parameters
from o2orl.cli.common import (
    CONFIG_ECHO,
    FINAL_CHECKPOINT,
    METRICS_FILE,
    RUN_RECORD_FILE,
    build_env,
    dataset_path,
    finetune_checkpoint_path,
    load_run_config,
    log,
    out_dir,
    run_stage,
)
from o2orl.cli.config_model import RunConfig, parse_tag
from o2orl.cli.errors import EmptyAnalysisError, HarnessError, MissingInputError
from o2orl.data import FormatError, load_dataset
from o2orl.env import Environment
from o2orl.metrics import aligned_curves, run_metrics, summarize_metrics
from o2orl.seeding import SeedStream, derive_seed, make_generators
from o2orl.training import MetricSource, RunRecord
from o2orl.visualizer import (
    guide_step_figure,
    interpolation_figure,
    learning_curve_figure,
    save_figure,
    value_shift_figure,
)

RUNS_FILE: str = "runs.csv"
CURVES_FILE: str = "learning_curves.csv"
GUIDE_STEPS_FILE: str = "guide_steps.csv"
VALUE_SHIFT_FILE: str = "value_shift.csv"
INTERPOLATION_FILE: str = "interpolation.csv"
ESTIMATE_GAP_FILE: str = "estimate_gap.csv"
_SEED_DIRECTORY = re.compile(r"seed_(-?\d+)$")


@dataclass
class LoadedRun:
    """One fine-tuning run found on disk."""

    algorithm: str
    seed: int
    directory: Path
    record: RunRecord
    config: Optional[RunConfig]
    budget_steps: int


def discover_records(config: RunConfig) -> List[Path]:
    """Run-record files below the configured run directories.

    Raises:
        MissingInputError: if a run directory does not exist.
        EmptyAnalysisError: if no run records are found.
    """
    roots: List[Path] = [Path(root) for root in config.analysis.run_dirs] or [out_dir(config)]
    paths: List[Path] = []
    for root in roots:
        if not root.is_dir():
            raise MissingInputError(f"run directory {root} does not exist")
        paths.extend(sorted(root.rglob(RUN_RECORD_FILE)))
    if not paths:
        raise EmptyAnalysisError(f"no {RUN_RECORD_FILE} below {[str(root) for root in roots]}")
    return paths


def load_run(path: Path, fallback: RunConfig, position: int) -> LoadedRun:
    """Read a run record with the config echoed next to it."""
    directory: Path = path.parent
    run_config: Optional[RunConfig] = None
    if (directory / CONFIG_ECHO).exists():
        try:
            run_config = load_run_config(OmegaConf.load(directory / CONFIG_ECHO))
        except HarnessError as error:
            log().warning("Ignoring unreadable config echo in %s: %s", directory, error)
    match = _SEED_DIRECTORY.search(directory.name)
    seed: int = int(match.group(1)) if match else position
    source: RunConfig = run_config or fallback
    record: RunRecord = RunRecord.from_csv(path)
    record.seed = seed
    return LoadedRun(
        algorithm=source.finetune.algorithm,
        seed=seed,
        directory=directory,
        record=record,
        config=run_config,
        budget_steps=source.finetune.budget_steps,
    )


def per_run_metrics(
    runs: List[LoadedRun], source: MetricSource, tail_fraction: float
) -> pd.DataFrame:
    """Metrics of every run that has online returns and a non-zero p0."""
    rows: List[Dict[str, object]] = []
    for run in runs:
        if len(run.record) < 2:
            log().warning("Skipping %s: no online episodes.", run.directory)
            continue
        try:
            metrics: Dict[str, float] = run_metrics(
                run.record, run.budget_steps, source, tail_fraction
            )
        except ValueError as error:
            log().warning("Skipping %s: %s", run.directory, error)
            continue
        rows.append(
            {
                "algorithm": run.algorithm,
                "seed": run.seed,
                "run_dir": str(run.directory),
                "p0": run.record.initial_performance,
                **metrics,
            }
        )
    return pd.DataFrame(rows)


def guide_steps(runs: List[LoadedRun]) -> pd.DataFrame:
    frames: List[pd.DataFrame] = [
        pd.DataFrame(
            {
                "algorithm": run.algorithm,
                "seed": run.seed,
                "step": run.record.frame["step"],
                "h": run.record.frame["h"],
            }
        )
        for run in runs
        if "h" in run.record.columns
    ]
    if not frames:
        return pd.DataFrame(columns=["algorithm", "seed", "step", "h"])
    return pd.concat(frames, ignore_index=True)


@dataclass
class RunArtifacts:
    """Agents and environment needed by the checkpoint-based studies."""

    final: Checkpoint
    offline: Checkpoint
    env: Environment
    states: np.ndarray
    start_states: np.ndarray


def load_artifacts(run: LoadedRun, seed: int, max_states: int) -> Optional[RunArtifacts]:
    """Checkpoints, environment and offline states of a run, if they are all present."""
    final_path: Path = run.directory / FINAL_CHECKPOINT
    if run.config is None or not final_path.exists():
        log().warning("Skipping studies of %s: no final checkpoint or config echo.", run.directory)
        return None
    try:
        final: Checkpoint = load_checkpoint(final_path)
        offline: Checkpoint = load_checkpoint(
            final.extra.get("offline_checkpoint") or finetune_checkpoint_path(run.config)
        )
        dataset, meta = load_dataset(dataset_path(run.config))
    except (FileNotFoundError, FormatError) as error:
        log().warning("Skipping studies of %s: %s", run.directory, error)
        return None
    rng, _ = make_generators(derive_seed(seed, SeedStream.ANALYSIS, run.seed))
    count: int = min(max_states, len(dataset))
    indices: np.ndarray = np.sort(rng.choice(len(dataset), size=count, replace=False))
    return RunArtifacts(
        final=final,
        offline=offline,
        env=build_env(run.config, meta.reference_returns),
        states=dataset.states[indices],
        start_states=dataset.start_states(),
    )


def value_shift_study(run: LoadedRun, artifacts: RunArtifacts, seed: int) -> pd.DataFrame:
    """Projected offline states with the value shift of the fine-tuned actor."""
    offline_agent = artifacts.offline.agent
    generator = torch.Generator()
    generator.manual_seed(derive_seed(seed, SeedStream.ANALYSIS, run.seed, 1))
    shift: np.ndarray = value_shift(
        offline_agent.critics,
        offline_agent.actor,
        artifacts.final.agent.actor,
        artifacts.states,
        offline_agent.reduce,
        generator,
    )
    projected: np.ndarray = pca2(artifacts.states)
    return pd.DataFrame(
        {
            "algorithm": run.algorithm,
            "seed": run.seed,
            "pc1": projected[:, 0],
            "pc2": projected[:, 1],
            "d": shift,
        }
    )


def interpolation_study(
    run: LoadedRun, artifacts: RunArtifacts, config: RunConfig
) -> pd.DataFrame:
    """Normalized return along the segment from the offline to the fine-tuned actor."""
    lambdas: np.ndarray = np.linspace(0.0, 1.0, config.analysis.interpolation_points)
    returns: np.ndarray = linear_interp_eval(
        flat_parameters(artifacts.offline.agent.actor),
        flat_parameters(artifacts.final.agent.actor),
        artifacts.final.agent.actor,
        artifacts.env,
        lambdas,
        config.analysis.interpolation_rollouts,
        derive_seed(config.seed, SeedStream.ANALYSIS, run.seed, 2),
        deterministic=config.eval.deterministic,
    )
    return pd.DataFrame(
        {"algorithm": run.algorithm, "seed": run.seed, "lambda": lambdas, "return_norm": returns}
    )


def estimate_gap_study(
    run: LoadedRun, artifacts: RunArtifacts, config: RunConfig
) -> Dict[str, object]:
    """Critic overestimation of the offline and the fine-tuned agent."""
    analysis = config.analysis
    row: Dict[str, object] = {"algorithm": run.algorithm, "seed": run.seed}
    seed: int = derive_seed(config.seed, SeedStream.ANALYSIS, run.seed, 3)
    for name, checkpoint in (("offline", artifacts.offline), ("final", artifacts.final)):
        gap, absolute = q_estimate_gap(
            checkpoint.agent,
            artifacts.env,
            artifacts.start_states,
            analysis.gap_rollouts,
            analysis.gap_horizon,
            analysis.gap_gamma,
            seed,
        )
        row[f"{name}_gap"] = gap
        row[f"{name}_abs_gap"] = absolute
    row["final_true_return"] = true_return_estimate(
        artifacts.env,
        artifacts.final.agent.actor,
        analysis.gap_rollouts,
        analysis.gap_horizon,
        analysis.gap_gamma,
        seed,
    )
    return row


def run_studies(runs: List[LoadedRun], config: RunConfig, directory: Path) -> None:
    """Checkpoint-based studies enabled in the analysis block."""
    analysis = config.analysis
    shifts: List[pd.DataFrame] = []
    interpolations: List[pd.DataFrame] = []
    gaps: List[Dict[str, object]] = []
    for run in runs:
        artifacts: Optional[RunArtifacts] = load_artifacts(
            run, config.seed, analysis.value_shift_states
        )
        if artifacts is None:
            continue
        if analysis.value_shift:
            try:
                shift: pd.DataFrame = value_shift_study(run, artifacts, config.seed)
            except ValueError as error:
                log().warning("No value shift for %s: %s", run.directory, error)
            else:
                shifts.append(shift)
                save_figure(
                    value_shift_figure(shift, title=f"{run.algorithm} seed {run.seed}"),
                    directory / f"value_shift_{run.algorithm}_seed_{run.seed}",
                )
        if analysis.interpolation:
            interpolations.append(interpolation_study(run, artifacts, config))
        if analysis.estimate_gap:
            gaps.append(estimate_gap_study(run, artifacts, config))

    if shifts:
        pd.concat(shifts, ignore_index=True).to_csv(directory / VALUE_SHIFT_FILE, index=False)
    if interpolations:
        interpolation: pd.DataFrame = pd.concat(interpolations, ignore_index=True)
        interpolation.to_csv(directory / INTERPOLATION_FILE, index=False)
        save_figure(interpolation_figure(interpolation), directory / INTERPOLATION_FILE)
    if gaps:
        pd.DataFrame(gaps).to_csv(directory / ESTIMATE_GAP_FILE, index=False)


def run_analyze(config: RunConfig) -> pd.DataFrame:
    """Aggregate the discovered runs into metrics, curves and figures.

    Args:
        config: Validated run config.

    Returns:
        Summary with one row per algorithm.
    """
    analysis = config.analysis
    source: MetricSource = parse_tag(MetricSource, analysis.metric_source, "analysis.metric_source")
    runs: List[LoadedRun] = [
        load_run(path, config, position)
        for position, path in enumerate(discover_records(config))
    ]
    per_run: pd.DataFrame = per_run_metrics(runs, source, analysis.tail_fraction)
    if per_run.empty:
        raise EmptyAnalysisError("no run has online returns and a non-zero p0")

    directory: Path = out_dir(config)
    directory.mkdir(parents=True, exist_ok=True)
    per_run.to_csv(directory / RUNS_FILE, index=False, float_format="%.10g")
    summary: pd.DataFrame = summarize_metrics(
        per_run,
        "algorithm",
        analysis.bootstrap_resamples,
        analysis.confidence,
        derive_seed(config.seed, SeedStream.BOOTSTRAP),
    )
    summary.to_csv(directory / METRICS_FILE, index=False, float_format="%.10g")

    grouped: Dict[str, List[RunRecord]] = {}
    for run in runs:
        grouped.setdefault(run.algorithm, []).append(run.record)
    budget: int = max(run.budget_steps for run in runs)
    curves: pd.DataFrame = aligned_curves(grouped, budget, analysis.curve_points, source)
    curves.to_csv(directory / CURVES_FILE, index=False, float_format="%.10g")
    save_figure(
        learning_curve_figure(
            curves, title=config.env.name, n_boot=analysis.bootstrap_resamples, seed=config.seed
        ),
        directory / CURVES_FILE,
    )

    steps: pd.DataFrame = guide_steps(runs)
    if not steps.empty:
        steps.to_csv(directory / GUIDE_STEPS_FILE, index=False)
        horizon: Optional[int] = None
        if runs[0].config is not None:
            horizon = build_env(runs[0].config).spec.horizon
        save_figure(guide_step_figure(steps, horizon), directory / GUIDE_STEPS_FILE)

    if analysis.value_shift or analysis.interpolation or analysis.estimate_gap:
        run_studies(runs, config, directory)

    log().info("Analyzed %d runs of %d algorithms.", len(per_run), len(summary))
    print(summary.to_string(index=False))
    return summary


@hydra.main(config_path="conf", config_name="config", version_base="1.3")
def main(cfg: DictConfig) -> None:
    """Entry point for CLI application."""
    run_stage(cfg, run_analyze)
