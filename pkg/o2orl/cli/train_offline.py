"""File contains CLI application training an agent on the offline dataset."""
from pathlib import Path
from typing import Any, Dict, Tuple

import hydra
import pandas as pd
import torch
from omegaconf import DictConfig

from o2orl.algos import Agent, BaseAlgorithm, build_algorithm
from o2orl.algos.checkpoint import save_checkpoint
from o2orl.cli.common import (
    OFFLINE_CURVE_FILE,
    as_dict,
    build_agent_spec,
    build_env,
    dataset_path,
    log,
    offline_checkpoint_path,
    optimistic_region,
    out_dir,
    run_stage,
    write_config_echo,
)
from o2orl.cli.config_model import OfflineAlgorithm, RunConfig, parse_tag
from o2orl.cli.errors import ConfigError, MissingInputError
from o2orl.data import DatasetMeta, FormatError, TransitionDataset, load_dataset
from o2orl.env import Environment
from o2orl.seeding import SeedStream, derive_seed, make_generators
from o2orl.training import OfflineSettings, train_offline
from o2orl.visualizer import offline_curve_figure, save_figure


def read_dataset(config: RunConfig) -> Tuple[TransitionDataset, DatasetMeta]:
    """Load the configured dataset and check it matches the configured env.

    Raises:
        MissingInputError: if the dataset is absent or unreadable.
        ConfigError: if it was generated for another environment.
    """
    path: Path = dataset_path(config)
    if not path.exists():
        raise MissingInputError(f"dataset {path} does not exist, run gen-data first")
    try:
        dataset, meta = load_dataset(path)
    except FormatError as error:
        raise MissingInputError(f"dataset {path} is unreadable: {error}") from error
    if meta.env_name != config.env.name:
        raise ConfigError(
            f"env.name: dataset {path} was generated for {meta.env_name!r}, "
            f"not {config.env.name!r}"
        )
    return dataset, meta


def offline_hyperparameters(config: RunConfig, algorithm: OfflineAlgorithm) -> Dict[str, Any]:
    kwargs: Dict[str, Any] = {"polyak_rate": config.offline.polyak_rate}
    if algorithm == OfflineAlgorithm.CQL:
        kwargs.update(cql_weight=config.offline.cql_weight, n_samples=config.offline.cql_samples)
    elif algorithm == OfflineAlgorithm.IQL:
        kwargs.update(tau=config.offline.iql_temperature, expectile=config.offline.expectile)
    return kwargs


def build_offline_algorithm(
    config: RunConfig, agent: Agent, generator: torch.Generator
) -> BaseAlgorithm:
    """Wrap `agent` in the configured offline algorithm.

    Raises:
        ConfigError: if the hyperparameters are rejected by the algorithm.
    """
    algorithm: OfflineAlgorithm = parse_tag(
        OfflineAlgorithm, config.offline.algorithm, "offline.algorithm"
    )
    try:
        return build_algorithm(
            algorithm.algorithm, agent, generator, **offline_hyperparameters(config, algorithm)
        )
    except ValueError as error:
        raise ConfigError(f"offline: {error}") from error


def run_train_offline(config: RunConfig) -> Path:
    """Train the configured offline algorithm and write its checkpoint.

    Args:
        config: Validated run config.

    Returns:
        Path of the offline checkpoint.
    """
    dataset, meta = read_dataset(config)
    env: Environment = build_env(config, meta.reference_returns)
    if env.spec.state_dim != meta.state_dim:
        raise ConfigError(
            f"env: state dimension {env.spec.state_dim} differs from the dataset's "
            f"{meta.state_dim}"
        )
    if meta.reference_returns is None:
        log().warning("Dataset carries no reference returns, curve is not normalized.")

    _, init_generator = make_generators(derive_seed(config.seed, SeedStream.OFFLINE, 0))
    _, noise_generator = make_generators(derive_seed(config.seed, SeedStream.OFFLINE, 1))
    try:
        agent = Agent(build_agent_spec(config, env), init_generator)
    except ValueError as error:
        raise ConfigError(f"offline: {error}") from error
    agent.attach_optimism(optimistic_region(config, env))
    algorithm: BaseAlgorithm = build_offline_algorithm(config, agent, noise_generator)

    settings = OfflineSettings(
        steps=config.offline.steps,
        batch_size=config.network.batch_size,
        eval_period=config.offline.eval_period,
        eval_episodes=config.offline.eval_episodes,
        deterministic_eval=config.eval.deterministic,
    )
    log().info(
        "Training %s for %d updates on %d transitions.",
        algorithm.algorithm_name,
        settings.steps,
        len(dataset),
    )
    curve: pd.DataFrame = train_offline(algorithm, dataset, env, settings, config.seed)

    directory: Path = out_dir(config)
    directory.mkdir(parents=True, exist_ok=True)
    curve.to_csv(directory / OFFLINE_CURVE_FILE, index=False, float_format="%.10g")
    save_figure(
        offline_curve_figure(curve, title=f"{config.env.name} / {config.offline.algorithm}"),
        directory / OFFLINE_CURVE_FILE,
    )
    path: Path = save_checkpoint(
        offline_checkpoint_path(config),
        agent,
        config.offline.algorithm,
        as_dict(config),
        extra={
            "dataset": str(dataset_path(config)),
            "env_name": meta.env_name,
            "reference_returns": meta.reference_returns,
        },
    )
    write_config_echo(config, directory)
    if len(curve):
        print(f"final offline normalized return: {curve['return_norm'].iloc[-1]:.4f}")
    return path


@hydra.main(config_path="conf", config_name="config", version_base="1.3")
def main(cfg: DictConfig) -> None:
    """Entry point for CLI application."""
    run_stage(cfg, run_train_offline)
