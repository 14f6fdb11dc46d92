"""Helpers shared by the CLI entry points: config loading, paths and agent building."""
import hashlib
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Optional, Tuple, TypeVar

from omegaconf import DictConfig, OmegaConf
from omegaconf.errors import OmegaConfBaseException

from o2orl.algos import AgentSpec, ReduceMode
from o2orl.approx.networks import OptimisticRegion
from o2orl.cli.config_model import (
    OfflineAlgorithm,
    RunConfig,
    parse_tag,
    validate_config,
)
from o2orl.cli.errors import ConfigError, HarnessError
from o2orl.env import EnvName, Environment, GridCliff, make_env
from o2orl.logger import create_logger, set_quiet

_LOGGER: Optional[logging.Logger] = None

CONFIG_ECHO: str = "config.yaml"
DATASET_FILE: str = "dataset.bin"
OFFLINE_CHECKPOINT: str = "offline.ckpt"
FINAL_CHECKPOINT: str = "final.ckpt"
RUN_RECORD_FILE: str = "run_record.csv"
INDEX_FILE: str = "index.csv"
OFFLINE_CURVE_FILE: str = "offline_curve.csv"
METRICS_FILE: str = "metrics.csv"

ResultT = TypeVar("ResultT")


def log() -> logging.Logger:
    """Get or create logger."""
    # pylint: disable = global-statement
    global _LOGGER
    if _LOGGER is None:
        _LOGGER = create_logger(__name__)
    return _LOGGER


def load_run_config(cfg: DictConfig) -> RunConfig:
    """Merge a hydra config onto the structured schema and validate it.

    Args:
        cfg: Config composed by hydra.

    Returns:
        Validated RunConfig object.

    Raises:
        ConfigError: naming the offending field on unknown keys, wrong types
            or invalid values.
    """
    try:
        merged = OmegaConf.merge(OmegaConf.structured(RunConfig), cfg)
        config: RunConfig = OmegaConf.to_object(merged)  # type: ignore
    except OmegaConfBaseException as error:
        key: str = getattr(error, "full_key", None) or "config"
        raise ConfigError(f"{key}: {error}") from error
    return validate_config(config)


def config_yaml(config: RunConfig) -> str:
    return OmegaConf.to_yaml(OmegaConf.structured(config))


def config_hash(config: RunConfig) -> str:
    """Short digest of the resolved config."""
    return hashlib.sha256(config_yaml(config).encode("utf-8")).hexdigest()[:12]


def write_config_echo(config: RunConfig, directory: Path) -> Path:
    """Write the resolved config into `directory`."""
    directory.mkdir(parents=True, exist_ok=True)
    path: Path = directory / CONFIG_ECHO
    path.write_text(config_yaml(config), encoding="utf-8")
    return path


def out_dir(config: RunConfig) -> Path:
    return Path(config.out_dir)


def dataset_path(config: RunConfig) -> Path:
    return Path(config.dataset.path) if config.dataset.path else out_dir(config) / DATASET_FILE


def offline_checkpoint_path(config: RunConfig) -> Path:
    if config.offline.checkpoint:
        return Path(config.offline.checkpoint)
    return out_dir(config) / OFFLINE_CHECKPOINT


def finetune_checkpoint_path(config: RunConfig) -> Path:
    if config.finetune.checkpoint:
        return Path(config.finetune.checkpoint)
    return offline_checkpoint_path(config)


def build_env(
    config: RunConfig, reference_returns: Optional[Tuple[float, float]] = None
) -> Environment:
    """Build the configured environment, attaching normalization bounds if given."""
    env: Environment = make_env(parse_tag(EnvName, config.env.name, "env.name"), config.env)
    if reference_returns is not None:
        env.spec = env.spec.with_reference_returns(*reference_returns)
    return env


def build_agent_spec(config: RunConfig, env: Environment) -> AgentSpec:
    """Agent construction spec for the configured offline algorithm."""
    algorithm: OfflineAlgorithm = parse_tag(
        OfflineAlgorithm, config.offline.algorithm, "offline.algorithm"
    )
    return AgentSpec(
        state_dim=env.spec.state_dim,
        action_space=env.spec.action_space,
        hidden=tuple(config.network.hidden),
        ensemble_size=config.network.ensemble_size,
        reduce=parse_tag(ReduceMode, config.network.reduce, "network.reduce"),
        with_value=algorithm in (OfflineAlgorithm.INAC, OfflineAlgorithm.IQL),
        with_behavior=algorithm == OfflineAlgorithm.INAC,
        learning_rate=config.network.learning_rate,
        temperature=config.offline.temperature,
        auto_entropy=config.offline.auto_entropy,
    )


def optimistic_region(config: RunConfig, env: Environment) -> Optional[OptimisticRegion]:
    """Optimism over GridCliff's inflated region, if configured."""
    if not isinstance(env, GridCliff) or config.env.optimism_boost <= 0:
        return None
    return OptimisticRegion(
        env.region_mask(),
        env.successor_table(),
        config.env.optimism_boost,
        config.env.optimism_visits,
    )


def run_stage(cfg: DictConfig, stage: Callable[[RunConfig], ResultT]) -> ResultT:
    """Run a CLI stage, exiting with the harness exit code on failure.

    Args:
        cfg: Config composed by hydra.
        stage: Stage function taking the validated config.

    Returns:
        Result of the stage.
    """
    try:
        config: RunConfig = load_run_config(cfg)
        set_quiet(config.quiet)
        return stage(config)
    except HarnessError as error:
        log().error("%s: %s", type(error).__name__, error)
        sys.exit(error.exit_code)


def as_dict(config: RunConfig) -> Any:
    """Plain container of the config for checkpoints and trackers."""
    return OmegaConf.to_container(OmegaConf.structured(config), resolve=True)
