"""File contains CLI application fine-tuning an offline checkpoint online."""
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Dict, List, Optional

import hydra
import numpy as np
import pandas as pd
import torch
from omegaconf import DictConfig

from o2orl.algos import PEX, PROTO, SAC, Agent, InAC, IQL
from o2orl.algos.algorithm import UpdateMode
from o2orl.algos.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from o2orl.callbacks import Callback, WandBCallback
from o2orl.cli.common import (
    FINAL_CHECKPOINT,
    INDEX_FILE,
    RUN_RECORD_FILE,
    as_dict,
    build_env,
    config_hash,
    finetune_checkpoint_path,
    log,
    out_dir,
    run_stage,
    write_config_echo,
)
from o2orl.cli.config_model import FinetuneAlgorithm, OfflineAlgorithm, RunConfig, parse_tag
from o2orl.cli.errors import ConfigError, IncompatibleCheckpointError, MissingInputError
from o2orl.cli.train_offline import read_dataset
from o2orl.data import DatasetMeta, FormatError, ReplayBuffer, TransitionDataset
from o2orl.env import Environment
from o2orl.jumpstart import (
    AJSStrategy,
    ExplorerUpdate,
    GuideRule,
    GuideUpdate,
    JumpStartSettings,
    JumpStartStrategy,
    Schedule,
    build_ajs_strategy,
)
from o2orl.seeding import SeedStream, derive_seed, make_generators
from o2orl.training import (
    AgentStrategy,
    FinetuneSettings,
    FinetuneStrategy,
    PEXStrategy,
    RunRecord,
    run_finetune,
)

THREADS_VARIABLE: str = "O2ORL_THREADS"
INDEX_COLUMNS: List[str] = [
    "algorithm",
    "seed",
    "run_dir",
    "episodes",
    "steps",
    "p0",
    "final_eval_return_norm",
    "config_hash",
]


def required_checkpoint(config: RunConfig) -> Optional[OfflineAlgorithm]:
    """Offline algorithm whose networks the fine-tuning algorithm needs, if any.

    Raises:
        ConfigError: if guide and explorer updates need different checkpoints.
    """
    algorithm: FinetuneAlgorithm = parse_tag(
        FinetuneAlgorithm, config.finetune.algorithm, "finetune.algorithm"
    )
    jump_start = config.finetune.jump_start
    guide_inac: bool = algorithm.uses_guide and jump_start.guide_update == GuideUpdate.INAC.value
    explorer_iql: bool = algorithm.uses_guide and jump_start.explorer == ExplorerUpdate.IQL_FT.value
    if algorithm == FinetuneAlgorithm.AJS:
        guide_inac = True
    if guide_inac and explorer_iql:
        raise ConfigError(
            "finetune.jump_start.explorer: iql_ft cannot share a checkpoint with an InAC guide"
        )
    if algorithm == FinetuneAlgorithm.INAC_FT or guide_inac:
        return OfflineAlgorithm.INAC
    if algorithm == FinetuneAlgorithm.IQL_FT or explorer_iql:
        return OfflineAlgorithm.IQL
    return None


def check_compatibility(config: RunConfig, checkpoint: Checkpoint, env: Environment) -> None:
    """Reject checkpoints that cannot seed the configured fine-tuning run.

    Raises:
        IncompatibleCheckpointError: on a wrong algorithm or mismatching shapes.
    """
    agent: Agent = checkpoint.agent
    if agent.spec.state_dim != env.spec.state_dim:
        raise IncompatibleCheckpointError(
            f"checkpoint state dimension {agent.spec.state_dim} differs from the "
            f"environment's {env.spec.state_dim}"
        )
    if agent.spec.action_space != env.spec.action_space:
        raise IncompatibleCheckpointError(
            f"checkpoint action space {agent.spec.action_space} differs from the "
            f"environment's {env.spec.action_space}"
        )
    required: Optional[OfflineAlgorithm] = required_checkpoint(config)
    if required is not None and checkpoint.algorithm != required.value:
        raise IncompatibleCheckpointError(
            f"finetune.algorithm {config.finetune.algorithm} needs a {required.value} "
            f"checkpoint, got {checkpoint.algorithm}"
        )


def read_checkpoint(path: Path) -> Checkpoint:
    try:
        return load_checkpoint(path)
    except FileNotFoundError as error:
        raise MissingInputError(f"checkpoint {path} does not exist") from error
    except FormatError as error:
        raise IncompatibleCheckpointError(str(error)) from error


def jump_start_settings(config: RunConfig, rule: GuideRule) -> JumpStartSettings:
    jump_start = config.finetune.jump_start
    fqe = config.finetune.fqe
    return JumpStartSettings(
        rule=rule,
        tolerance=jump_start.tolerance,
        window_size=jump_start.window_size,
        reductions=jump_start.reductions,
        schedule=parse_tag(Schedule, jump_start.schedule, "finetune.jump_start.schedule"),
        kappa=jump_start.kappa,
        guide_update=parse_tag(
            GuideUpdate, jump_start.guide_update, "finetune.jump_start.guide_update"
        ),
        explorer=parse_tag(ExplorerUpdate, jump_start.explorer, "finetune.jump_start.explorer"),
        polyak_rate=config.finetune.polyak_rate,
        fqe_warm_start=fqe.warm_start,
        fqe_sync_period=fqe.sync_period,
        fqe_learning_rate=fqe.learning_rate,
        fqe_estimate_samples=fqe.estimate_samples,
        fqe_period=fqe.period,
        fqe_iterations=fqe.iterations,
    )


def retune_temperature(config: RunConfig, agent: Agent) -> None:
    """Apply the fine-tuning temperature; auto entropy starts from the offline value."""
    value: Optional[float] = config.finetune.temperature
    if value is None and not config.finetune.auto_entropy:
        return
    try:
        agent.set_temperature(
            agent.temperature.value if value is None else value, config.finetune.auto_entropy
        )
    except ValueError as error:
        raise ConfigError(f"finetune.temperature: {error}") from error


def build_strategy(  # pylint: disable = (too-many-return-statements)
    config: RunConfig,
    checkpoint: Checkpoint,
    env: Environment,
    generator: torch.Generator,
) -> FinetuneStrategy:
    """Fine-tuning strategy of the configured algorithm around the checkpoint agent."""
    algorithm: FinetuneAlgorithm = parse_tag(
        FinetuneAlgorithm, config.finetune.algorithm, "finetune.algorithm"
    )
    agent: Agent = checkpoint.agent
    polyak_rate: float = config.finetune.polyak_rate
    budget: int = config.finetune.budget_steps
    if algorithm not in (FinetuneAlgorithm.INAC_FT, FinetuneAlgorithm.AJS):
        retune_temperature(config, agent)

    try:
        if algorithm == FinetuneAlgorithm.SAC:
            return AgentStrategy(SAC(agent, generator, polyak_rate))
        if algorithm == FinetuneAlgorithm.INAC_FT:
            return AgentStrategy(InAC(agent, generator, polyak_rate, mode=UpdateMode.FINETUNE))
        if algorithm == FinetuneAlgorithm.IQL_FT:
            return AgentStrategy(
                IQL(
                    agent,
                    generator,
                    polyak_rate,
                    tau=config.offline.iql_temperature,
                    expectile=config.offline.expectile,
                    mode=UpdateMode.FINETUNE,
                )
            )
        if algorithm == FinetuneAlgorithm.PROTO:
            return AgentStrategy(
                PROTO(
                    agent,
                    generator,
                    polyak_rate,
                    initial_weight=config.finetune.proto.initial_weight,
                    prior_rate=config.finetune.proto.prior_rate,
                )
            )
        if algorithm == FinetuneAlgorithm.PEX:
            return PEXStrategy(
                PEX(agent, generator, polyak_rate, temperature=config.finetune.pex.temperature)
            )
        if algorithm == FinetuneAlgorithm.AJS:
            return build_ajs_strategy(
                checkpoint, env, budget, jump_start_settings(config, GuideRule.AJS), generator
            )
        rule: GuideRule = (
            GuideRule.FIXED if algorithm == FinetuneAlgorithm.JSRL_FIXED else GuideRule.WINDOW
        )
        return JumpStartStrategy(
            agent, jump_start_settings(config, rule), env.spec.horizon, budget, generator
        )
    except ValueError as error:
        raise IncompatibleCheckpointError(f"{algorithm.value}: {error}") from error


class RunIndex:
    """Thread-safe appender of the per-invocation run index."""

    def __init__(self, path: Path) -> None:
        self.path: Path = path
        self._lock = threading.Lock()

    def reset(self) -> None:
        self.path.unlink(missing_ok=True)

    def append(self, row: Dict[str, Any]) -> None:
        frame = pd.DataFrame([row], columns=INDEX_COLUMNS)
        with self._lock:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            frame.to_csv(
                self.path, mode="a", header=not self.path.exists(), index=False
            )

    def sort(self) -> None:
        """Order rows by seed once every worker has finished."""
        with self._lock:
            if self.path.exists():
                frame: pd.DataFrame = pd.read_csv(self.path)
                frame.sort_values("seed", kind="stable").to_csv(self.path, index=False)


def seed_run_dir(config: RunConfig, seed: int) -> Path:
    return out_dir(config) / f"seed_{seed}"


def finetune_seed(  # pylint: disable = (too-many-arguments, too-many-locals)
    config: RunConfig,
    checkpoint_path: Path,
    dataset: TransitionDataset,
    meta: DatasetMeta,
    seed: int,
    index: RunIndex,
) -> RunRecord:
    """Fine-tune a fresh copy of the checkpoint with one seed and write its artifacts.

    Args:
        config: Validated run config.
        checkpoint_path: Offline checkpoint to start from.
        dataset: Offline dataset preloaded below the buffer watermark.
        meta: Dataset description holding the reference returns.
        seed: Seed of this run.
        index: Shared run index.

    Returns:
        Run record of the seed.
    """
    env: Environment = build_env(config, meta.reference_returns)
    checkpoint: Checkpoint = read_checkpoint(checkpoint_path)
    check_compatibility(config, checkpoint, env)
    _, generator = make_generators(derive_seed(seed, SeedStream.FINETUNE, 0, 1))
    strategy: FinetuneStrategy = build_strategy(config, checkpoint, env, generator)
    buffer: ReplayBuffer = ReplayBuffer.from_dataset(dataset, config.finetune.budget_steps)
    settings = FinetuneSettings(
        budget_steps=config.finetune.budget_steps,
        batch_size=config.network.batch_size,
        eval_period=config.eval.period,
        eval_episodes=config.eval.episodes,
        initial_eval_episodes=config.eval.initial_episodes,
        deterministic_eval=config.eval.deterministic,
    )
    callbacks: List[Callback] = []
    digest: str = config_hash(config)
    if config.wandb.enabled:
        callbacks.append(
            WandBCallback(
                project=config.wandb.project,
                entity=config.wandb.entity,
                group=f"{config.finetune.algorithm}-{digest}",
                mode=config.wandb.mode,
            )
        )

    record: RunRecord = run_finetune(
        env,
        strategy,
        buffer,
        settings,
        seed,
        callbacks,
        run_name=f"{config.finetune.algorithm}-seed{seed}",
        config=as_dict(config),
        config_hash=digest,
    )

    directory: Path = seed_run_dir(config, seed)
    record.to_csv(directory / RUN_RECORD_FILE, horizon=env.spec.horizon)
    save_checkpoint(
        directory / FINAL_CHECKPOINT,
        strategy.final_agent,
        config.finetune.algorithm,
        as_dict(config),
        fqe_state=strategy.fqe.state_dict() if isinstance(strategy, AJSStrategy) else None,
        extra={"offline_checkpoint": str(checkpoint_path), "seed": seed},
    )
    write_config_echo(config, directory)

    evaluations = record.frame["eval_return_norm"].iloc[1:].dropna()
    index.append(
        {
            "algorithm": config.finetune.algorithm,
            "seed": seed,
            "run_dir": directory.name,
            "episodes": len(record) - 1,
            "steps": int(record.frame["step"].iloc[-1]),
            "p0": record.initial_performance,
            "final_eval_return_norm": (
                float(evaluations.iloc[-1]) if len(evaluations) else np.nan
            ),
            "config_hash": digest,
        }
    )
    log().info(
        "Seed %d done: %d episodes, p0 %.3f.", seed, len(record) - 1, record.initial_performance
    )
    return record


def worker_count(seeds: List[int]) -> int:
    """Parallel seeds, capped by the O2ORL_THREADS environment variable."""
    cap: Optional[str] = os.environ.get(THREADS_VARIABLE)
    limit: int = os.cpu_count() or 1
    if cap:
        try:
            limit = int(cap)
        except ValueError as error:
            raise ConfigError(f"{THREADS_VARIABLE}: expected an integer, got {cap!r}") from error
    return max(1, min(limit, len(seeds)))


def run_finetune_stage(config: RunConfig) -> List[RunRecord]:
    """Fine-tune the offline checkpoint once per configured seed.

    Args:
        config: Validated run config.

    Returns:
        Run records in seed order.
    """
    dataset, meta = read_dataset(config)
    checkpoint_path: Path = finetune_checkpoint_path(config)
    if not checkpoint_path.exists():
        raise MissingInputError(f"checkpoint {checkpoint_path} does not exist")
    check_compatibility(
        config, read_checkpoint(checkpoint_path), build_env(config, meta.reference_returns)
    )

    seeds: List[int] = config.run_seeds
    index = RunIndex(out_dir(config) / INDEX_FILE)
    index.reset()
    workers: int = worker_count(seeds)
    log().info(
        "Fine-tuning %s for %d steps on seeds %s with %d workers.",
        config.finetune.algorithm,
        config.finetune.budget_steps,
        seeds,
        workers,
    )
    if workers == 1:
        records = [
            finetune_seed(config, checkpoint_path, dataset, meta, seed, index) for seed in seeds
        ]
    else:
        threads: int = torch.get_num_threads()
        torch.set_num_threads(1)
        try:
            with ThreadPoolExecutor(max_workers=workers) as executor:
                futures = [
                    executor.submit(
                        finetune_seed, config, checkpoint_path, dataset, meta, seed, index
                    )
                    for seed in seeds
                ]
                records = [future.result() for future in futures]
        finally:
            torch.set_num_threads(threads)
    index.sort()
    write_config_echo(config, out_dir(config))
    for seed, record in zip(seeds, records):
        print(f"seed {seed}: p0 {record.initial_performance:.4f}, episodes {len(record) - 1}")
    return records


@hydra.main(config_path="conf", config_name="config", version_base="1.3")
def main(cfg: DictConfig) -> None:
    """Entry point for CLI application."""
    run_stage(cfg, run_finetune_stage)
