"""File contains CLI application generating offline datasets."""
from pathlib import Path
from typing import Tuple

import hydra
import numpy as np
from omegaconf import DictConfig

from o2orl.cli.common import (
    build_env,
    dataset_path,
    log,
    out_dir,
    run_stage,
    write_config_echo,
)
from o2orl.cli.config_model import RunConfig, parse_tag
from o2orl.cli.errors import ConfigError
from o2orl.data import DatasetQuality, generate_dataset, normalized_return, save_dataset
from o2orl.env import Environment, compute_reference_returns
from o2orl.seeding import SeedStream, derive_seed


def reference_returns(env: Environment, config: RunConfig) -> Tuple[float, float]:
    """Normalization bounds from random and expert rollouts.

    Raises:
        ConfigError: if the environment yields degenerate bounds.
    """
    bounds: Tuple[float, float] = compute_reference_returns(
        env, config.env.reference_episodes, derive_seed(config.seed, SeedStream.REFERENCE)
    )
    if not bounds[1] > bounds[0]:
        raise ConfigError(
            f"env: expert return {bounds[1]} does not exceed random return {bounds[0]}"
        )
    return bounds


def run_gen_data(config: RunConfig) -> Path:
    """Generate, save and score the configured offline dataset.

    Args:
        config: Validated run config.

    Returns:
        Path of the written dataset.
    """
    quality: DatasetQuality = parse_tag(
        DatasetQuality, config.dataset.quality, "dataset.quality"
    )
    env: Environment = build_env(config)
    env = build_env(config, reference_returns(env, config))
    seed: int = config.seed if config.dataset.seed is None else config.dataset.seed
    try:
        dataset, meta = generate_dataset(
            env, quality, config.dataset.size, derive_seed(seed, SeedStream.DATASET)
        )
    except ValueError as error:
        raise ConfigError(f"dataset: {error}") from error
    path: Path = save_dataset(dataset, meta, dataset_path(config))
    write_config_echo(config, out_dir(config))

    returns: np.ndarray = dataset.episode_returns()
    score: float = (
        float(np.mean(normalized_return(returns, env.spec))) if returns.size else float("nan")
    )
    log().info("Dataset written to %s.", path)
    print(f"normalized behavior score: {score:.4f}")
    return path


@hydra.main(config_path="conf", config_name="config", version_base="1.3")
def main(cfg: DictConfig) -> None:
    """Entry point for CLI application."""
    run_stage(cfg, run_gen_data)
