"""File contains definition of CLI program config data model."""

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Type, TypeVar

from o2orl.algos import Algorithms, ReduceMode
from o2orl.cli.errors import ConfigError
from o2orl.data.types import DatasetQuality
from o2orl.env import ChainConfig, EnvName, GridCliffConfig, PointReachConfig
from o2orl.jumpstart.ajs import ExplorerUpdate, GuideUpdate
from o2orl.jumpstart.schedule import Schedule
from o2orl.training.run_record import MetricSource

EnumT = TypeVar("EnumT", bound=Enum)


class OfflineAlgorithm(Enum):
    """Enum of offline training algorithms."""

    SAC = "sac"
    CQL = "cql"
    INAC = "inac"
    IQL = "iql"

    @property
    def algorithm(self) -> Algorithms:
        return Algorithms[self.name]


class FinetuneAlgorithm(Enum):
    """Enum of fine-tuning algorithms."""

    SAC = "sac"
    INAC_FT = "inac_ft"
    IQL_FT = "iql_ft"
    PROTO = "proto"
    PEX = "pex"
    JSRL = "jsrl"
    JSRL_FIXED = "jsrl_fixed"
    AJS = "ajs"

    @property
    def uses_guide(self) -> bool:
        return self in (
            FinetuneAlgorithm.JSRL,
            FinetuneAlgorithm.JSRL_FIXED,
            FinetuneAlgorithm.AJS,
        )


@dataclass
class EnvConfig:
    """Environment block; `name` selects one of the parameter blocks."""

    name: str = EnvName.GRID_CLIFF.value
    grid_cliff: GridCliffConfig = field(default_factory=GridCliffConfig)
    point_reach: PointReachConfig = field(default_factory=PointReachConfig)
    chain: ChainConfig = field(default_factory=ChainConfig)
    optimism_boost: float = 30.0
    optimism_visits: int = 1000
    reference_episodes: int = 100


@dataclass
class DatasetConfig:
    """Offline dataset block. `path` defaults to `<out_dir>/dataset.bin`."""

    quality: str = DatasetQuality.EXPERT.value
    size: int = 10000
    seed: Optional[int] = None
    path: Optional[str] = None


@dataclass
class NetworkConfig:
    """Network shapes and optimizer settings shared by every agent."""

    hidden: List[int] = field(default_factory=lambda: [64, 64])
    ensemble_size: int = 2
    reduce: str = ReduceMode.MIN.value
    learning_rate: float = 3e-4
    batch_size: int = 256


@dataclass
class OfflineConfig:  # pylint: disable = (too-many-instance-attributes)
    """Offline training block. `checkpoint` defaults to `<out_dir>/offline.ckpt`."""

    algorithm: str = OfflineAlgorithm.INAC.value
    steps: int = 20000
    temperature: float = 0.1
    auto_entropy: bool = False
    polyak_rate: float = 0.005
    cql_weight: float = 1.0
    cql_samples: int = 10
    iql_temperature: float = 1.0 / 3.0
    expectile: float = 0.7
    eval_period: int = 1000
    eval_episodes: int = 5
    checkpoint: Optional[str] = None


@dataclass
class JumpStartConfig:
    """Guide-step rule settings of jsrl, jsrl_fixed and ajs."""

    tolerance: float = 0.0
    window_size: int = 5
    reductions: Optional[int] = None
    schedule: str = Schedule.SIGMOID.value
    kappa: float = 0.5
    guide_update: str = GuideUpdate.FROZEN.value
    explorer: str = ExplorerUpdate.SAC.value


@dataclass
class FQEConfig:
    """FQE settings; `period` and `iterations` default to the horizon."""

    warm_start: int = 2000
    sync_period: int = 100
    learning_rate: float = 3e-4
    estimate_samples: int = 8
    period: Optional[int] = None
    iterations: Optional[int] = None


@dataclass
class PexConfig:
    """Policy-expansion settings."""

    temperature: float = 1.0


@dataclass
class ProtoConfig:
    """Trust-region settings."""

    initial_weight: float = 1.0
    prior_rate: float = 0.005


@dataclass
class FinetuneConfig:  # pylint: disable = (too-many-instance-attributes)
    """Fine-tuning block.

    `checkpoint` defaults to the offline checkpoint path; `temperature`
    defaults to the temperature stored in the checkpoint.
    """

    algorithm: str = FinetuneAlgorithm.SAC.value
    budget_steps: int = 12000
    checkpoint: Optional[str] = None
    temperature: Optional[float] = None
    auto_entropy: bool = False
    polyak_rate: float = 0.005
    jump_start: JumpStartConfig = field(default_factory=JumpStartConfig)
    fqe: FQEConfig = field(default_factory=FQEConfig)
    pex: PexConfig = field(default_factory=PexConfig)
    proto: ProtoConfig = field(default_factory=ProtoConfig)


@dataclass
class EvalConfig:
    """Frozen-policy evaluation cadence during fine-tuning."""

    period: int = 10
    episodes: int = 5
    initial_episodes: int = 20
    deterministic: bool = True


@dataclass
class AnalysisConfig:  # pylint: disable = (too-many-instance-attributes)
    """Analysis block. `run_dirs` defaults to `[<out_dir>]`."""

    run_dirs: List[str] = field(default_factory=list)
    metric_source: str = MetricSource.EVALUATION.value
    tail_fraction: float = 0.1
    bootstrap_resamples: int = 1000
    confidence: float = 0.95
    curve_points: int = 50
    value_shift: bool = False
    value_shift_states: int = 1000
    interpolation: bool = False
    interpolation_points: int = 11
    interpolation_rollouts: int = 50
    estimate_gap: bool = False
    gap_rollouts: int = 5
    gap_horizon: int = 1000
    gap_gamma: float = 0.99


@dataclass
class WandbConfig:
    """Optional W&B tracking of fine-tuning runs."""

    enabled: bool = False
    project: str = "o2orl"
    entity: Optional[str] = None
    mode: str = "online"


@dataclass
class RunConfig:  # pylint: disable = (too-many-instance-attributes)
    """Config data model for CLI program."""

    env: EnvConfig = field(default_factory=EnvConfig)
    dataset: DatasetConfig = field(default_factory=DatasetConfig)
    network: NetworkConfig = field(default_factory=NetworkConfig)
    offline: OfflineConfig = field(default_factory=OfflineConfig)
    finetune: FinetuneConfig = field(default_factory=FinetuneConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    wandb: WandbConfig = field(default_factory=WandbConfig)
    seed: int = 0
    seeds: List[int] = field(default_factory=list)
    out_dir: str = "outputs"
    quiet: bool = False

    @property
    def run_seeds(self) -> List[int]:
        """Fine-tuning seeds; the master seed alone when none are listed."""
        return list(self.seeds) if self.seeds else [self.seed]


def parse_tag(enum_type: Type[EnumT], value: str, key: str) -> EnumT:
    """Convert a config tag to its enum member.

    Raises:
        ConfigError: naming `key` if the tag is unknown.
    """
    try:
        return enum_type(value)
    except ValueError as error:
        allowed = [member.value for member in enum_type]  # type: ignore
        raise ConfigError(f"{key}: unknown tag {value!r}, expected one of {allowed}") from error


def validate_config(config: RunConfig) -> RunConfig:
    """Check every tag and numeric range of a merged config.

    Raises:
        ConfigError: naming the offending field.
    """
    parse_tag(EnvName, config.env.name, "env.name")
    parse_tag(DatasetQuality, config.dataset.quality, "dataset.quality")
    parse_tag(ReduceMode, config.network.reduce, "network.reduce")
    parse_tag(OfflineAlgorithm, config.offline.algorithm, "offline.algorithm")
    parse_tag(FinetuneAlgorithm, config.finetune.algorithm, "finetune.algorithm")
    parse_tag(Schedule, config.finetune.jump_start.schedule, "finetune.jump_start.schedule")
    parse_tag(
        GuideUpdate, config.finetune.jump_start.guide_update, "finetune.jump_start.guide_update"
    )
    parse_tag(
        ExplorerUpdate, config.finetune.jump_start.explorer, "finetune.jump_start.explorer"
    )
    parse_tag(MetricSource, config.analysis.metric_source, "analysis.metric_source")

    jump_start: JumpStartConfig = config.finetune.jump_start
    checks = [
        (config.env.optimism_visits >= 1, "env.optimism_visits", "must be >= 1"),
        (config.dataset.size >= 0, "dataset.size", "must be >= 0"),
        (
            all(width > 0 for width in config.network.hidden),
            "network.hidden",
            "widths must be > 0",
        ),
        (config.network.ensemble_size >= 1, "network.ensemble_size", "must be >= 1"),
        (config.network.learning_rate > 0, "network.learning_rate", "must be > 0"),
        (config.network.batch_size >= 1, "network.batch_size", "must be >= 1"),
        (config.offline.steps >= 0, "offline.steps", "must be >= 0"),
        (config.offline.temperature >= 0, "offline.temperature", "must be >= 0"),
        (config.offline.eval_period >= 1, "offline.eval_period", "must be >= 1"),
        (config.finetune.budget_steps >= 0, "finetune.budget_steps", "must be >= 0"),
        (jump_start.tolerance >= 0, "finetune.jump_start.tolerance", "must be >= 0"),
        (jump_start.window_size >= 1, "finetune.jump_start.window_size", "must be >= 1"),
        (jump_start.kappa > 0, "finetune.jump_start.kappa", "must be > 0"),
        (config.finetune.fqe.sync_period >= 1, "finetune.fqe.sync_period", "must be >= 1"),
        (config.finetune.pex.temperature >= 0, "finetune.pex.temperature", "must be >= 0"),
        (config.eval.period >= 1, "eval.period", "must be >= 1"),
        (config.eval.episodes >= 1, "eval.episodes", "must be >= 1"),
        (config.eval.initial_episodes >= 1, "eval.initial_episodes", "must be >= 1"),
        (
            0 < config.analysis.tail_fraction <= 1,
            "analysis.tail_fraction",
            "must lie in (0, 1]",
        ),
        (
            0 < config.analysis.confidence < 1,
            "analysis.confidence",
            "must lie in (0, 1)",
        ),
        (
            config.analysis.interpolation_points >= 2,
            "analysis.interpolation_points",
            "must be >= 2",
        ),
    ]
    for condition, key, message in checks:
        if not condition:
            raise ConfigError(f"{key}: {message}")
    return config
