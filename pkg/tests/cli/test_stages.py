# pylint: disable = missing-class-docstring
from pathlib import Path
from typing import Any, Dict

import pandas as pd
import pytest
import torch
from omegaconf import OmegaConf

from o2orl.algos import Agent, AgentSpec
from o2orl.algos.checkpoint import Checkpoint
from o2orl.cli.analyze import run_analyze
from o2orl.cli.common import (
    CONFIG_ECHO,
    DATASET_FILE,
    INDEX_FILE,
    METRICS_FILE,
    OFFLINE_CHECKPOINT,
    RUN_RECORD_FILE,
    build_env,
    config_hash,
    load_run_config,
    run_stage,
)
from o2orl.cli.config_model import OfflineAlgorithm, RunConfig
from o2orl.cli.errors import ConfigError, IncompatibleCheckpointError
from o2orl.cli.finetune import (
    THREADS_VARIABLE,
    check_compatibility,
    required_checkpoint,
    run_finetune_stage,
)
from o2orl.cli.gen_data import run_gen_data
from o2orl.cli.train_offline import run_train_offline
from o2orl.env import ActionSpace
from tests.sample_agents import grid_agent


def small_config(out_dir: Path, **overrides: Any) -> Dict[str, Any]:
    """Config small enough to run every stage in a few seconds."""
    config: Dict[str, Any] = {
        "out_dir": str(out_dir),
        "seeds": [0, 1],
        "env": {"name": "grid_cliff", "reference_episodes": 2},
        "dataset": {"quality": "expert", "size": 200},
        "network": {"hidden": [8], "batch_size": 16},
        "offline": {"algorithm": "inac", "steps": 4, "eval_period": 2, "eval_episodes": 1},
        "finetune": {"algorithm": "sac", "budget_steps": 70},
        "eval": {"period": 1, "episodes": 1, "initial_episodes": 1},
    }
    merged = OmegaConf.merge(OmegaConf.create(config), OmegaConf.create(overrides))
    return OmegaConf.to_container(merged)  # type: ignore


def stage_config(out_dir: Path, **overrides: Any) -> RunConfig:
    return load_run_config(OmegaConf.create(small_config(out_dir, **overrides)))


class TestConfig:
    def test_defaults_are_valid(self) -> None:
        config = load_run_config(OmegaConf.create({}))
        assert config.env.name == "grid_cliff"
        assert config.run_seeds == [0]

    @pytest.mark.parametrize(
        "overrides",
        [
            {"bogus": 1},
            {"seed": "not a number"},
            {"finetune": {"algorithm": "td3"}},
            {"network": {"reduce": "mode"}},
            {"dataset": {"size": -1}},
            {"analysis": {"confidence": 1.0}},
            {"finetune": {"jump_start": {"kappa": 0.0}}},
        ],
    )
    def test_invalid_config_raises(self, overrides: Dict[str, Any]) -> None:
        with pytest.raises(ConfigError):
            load_run_config(OmegaConf.create(overrides))

    def test_unknown_tag_is_named(self) -> None:
        with pytest.raises(ConfigError, match="finetune.algorithm"):
            load_run_config(OmegaConf.create({"finetune": {"algorithm": "td3"}}))

    def test_hash_tracks_content(self, tmp_path: Path) -> None:
        assert config_hash(stage_config(tmp_path)) == config_hash(stage_config(tmp_path))
        assert config_hash(stage_config(tmp_path)) != config_hash(
            stage_config(tmp_path, seed=3)
        )


class TestCompatibility:
    @pytest.mark.parametrize(
        "finetune, expected",
        [
            ({"algorithm": "sac"}, None),
            ({"algorithm": "proto"}, None),
            ({"algorithm": "inac_ft"}, OfflineAlgorithm.INAC),
            ({"algorithm": "iql_ft"}, OfflineAlgorithm.IQL),
            ({"algorithm": "ajs"}, OfflineAlgorithm.INAC),
            ({"algorithm": "jsrl"}, None),
            ({"algorithm": "jsrl", "jump_start": {"guide_update": "inac"}}, OfflineAlgorithm.INAC),
            ({"algorithm": "jsrl", "jump_start": {"explorer": "iql_ft"}}, OfflineAlgorithm.IQL),
        ],
    )
    def test_required_checkpoint(self, tmp_path: Path, finetune, expected) -> None:
        assert required_checkpoint(stage_config(tmp_path, finetune=finetune)) == expected

    def test_conflicting_guide_and_explorer_raise(self, tmp_path: Path) -> None:
        config = stage_config(
            tmp_path, finetune={"algorithm": "ajs", "jump_start": {"explorer": "iql_ft"}}
        )
        with pytest.raises(ConfigError):
            required_checkpoint(config)

    def test_wrong_algorithm_is_incompatible(self, tmp_path: Path) -> None:
        config = stage_config(tmp_path, finetune={"algorithm": "inac_ft"})
        env = build_env(config)
        check_compatibility(config, Checkpoint("inac", {}, grid_agent()), env)
        with pytest.raises(IncompatibleCheckpointError):
            check_compatibility(config, Checkpoint("sac", {}, grid_agent()), env)

    def test_wrong_shapes_are_incompatible(self, tmp_path: Path) -> None:
        config = stage_config(tmp_path)
        env = build_env(config)
        spec = AgentSpec(state_dim=5, action_space=ActionSpace.discrete_space(4), hidden=(4,))
        with pytest.raises(IncompatibleCheckpointError):
            check_compatibility(config, Checkpoint("sac", {}, Agent(spec)), env)


class TestExitCodes:
    def test_invalid_config_exits_with_2(self, tmp_path: Path) -> None:
        cfg = OmegaConf.create(small_config(tmp_path, offline={"algorithm": "bc"}))
        with pytest.raises(SystemExit) as error:
            run_stage(cfg, run_train_offline)
        assert error.value.code == 2

    def test_missing_dataset_exits_with_3(self, tmp_path: Path) -> None:
        with pytest.raises(SystemExit) as error:
            run_stage(OmegaConf.create(small_config(tmp_path)), run_train_offline)
        assert error.value.code == 3

    def test_missing_checkpoint_exits_with_3(self, tmp_path: Path) -> None:
        cfg = OmegaConf.create(small_config(tmp_path))
        run_stage(cfg, run_gen_data)
        with pytest.raises(SystemExit) as error:
            run_stage(cfg, run_finetune_stage)
        assert error.value.code == 3

    def test_incompatible_checkpoint_exits_with_4(self, tmp_path: Path) -> None:
        offline_sac = OmegaConf.create(small_config(tmp_path, offline={"algorithm": "sac"}))
        run_stage(offline_sac, run_gen_data)
        run_stage(offline_sac, run_train_offline)
        cfg = OmegaConf.create(
            small_config(tmp_path, offline={"algorithm": "sac"}, finetune={"algorithm": "ajs"})
        )
        with pytest.raises(SystemExit) as error:
            run_stage(cfg, run_finetune_stage)
        assert error.value.code == 4

    def test_empty_analysis_exits_with_5(self, tmp_path: Path) -> None:
        with pytest.raises(SystemExit) as error:
            run_stage(OmegaConf.create(small_config(tmp_path)), run_analyze)
        assert error.value.code == 5

    def test_missing_run_directory_exits_with_3(self, tmp_path: Path) -> None:
        cfg = OmegaConf.create(
            small_config(tmp_path, analysis={"run_dirs": [str(tmp_path / "absent")]})
        )
        with pytest.raises(SystemExit) as error:
            run_stage(cfg, run_analyze)
        assert error.value.code == 3


def test_gen_data_is_deterministic(tmp_path: Path) -> None:
    first = run_gen_data(stage_config(tmp_path / "a"))
    second = run_gen_data(stage_config(tmp_path / "b"))
    assert first.name == DATASET_FILE
    assert first.read_bytes() == second.read_bytes()
    assert (tmp_path / "a" / CONFIG_ECHO).exists()


def test_config_echo_reloads_to_same_config(tmp_path: Path) -> None:
    config = stage_config(tmp_path, finetune={"algorithm": "ajs"})
    run_gen_data(config)
    reloaded = load_run_config(OmegaConf.load(tmp_path / CONFIG_ECHO))
    assert reloaded == config


def test_pipeline_writes_every_artifact(tmp_path: Path) -> None:
    """gen-data, train-offline, finetune and analyze chained on one directory."""
    config = stage_config(
        tmp_path, env={"name": "point_reach", "point_reach": {"horizon": 30}}
    )
    run_gen_data(config)
    assert run_train_offline(config).name == OFFLINE_CHECKPOINT

    records = run_finetune_stage(config)
    assert [record.seed for record in records] == [0, 1]
    for seed in (0, 1):
        assert (tmp_path / f"seed_{seed}" / RUN_RECORD_FILE).exists()
    index = pd.read_csv(tmp_path / INDEX_FILE)
    assert list(index["seed"]) == [0, 1]
    assert index["config_hash"].nunique() == 1

    summary = run_analyze(config)
    assert list(summary["algorithm"]) == ["sac"]
    assert (tmp_path / METRICS_FILE).exists()


def test_same_seed_gives_identical_run_records(tmp_path: Path) -> None:
    """Two full pipelines with one master seed write byte-identical run records."""
    contents = []
    for name in ("first", "second"):
        finetune = {"algorithm": "ajs", "fqe": {"warm_start": 20, "iterations": 5}}
        config = stage_config(tmp_path / name, seeds=[0], finetune=finetune)
        run_gen_data(config)
        run_train_offline(config)
        run_finetune_stage(config)
        contents.append((tmp_path / name / "seed_0" / RUN_RECORD_FILE).read_bytes())
    assert contents[0] == contents[1]


def test_parallel_seeds_restore_torch_threads(tmp_path: Path, monkeypatch) -> None:
    """Worker pool pins torch to one thread only while it runs."""
    monkeypatch.setenv(THREADS_VARIABLE, "2")
    config = stage_config(tmp_path, finetune={"budget_steps": 20})
    run_gen_data(config)
    run_train_offline(config)
    threads = torch.get_num_threads()
    torch.set_num_threads(3)
    try:
        assert len(run_finetune_stage(config)) == 2
        assert torch.get_num_threads() == 3
    finally:
        torch.set_num_threads(threads)


@pytest.mark.slow
def test_guide_step_never_increases_across_jump_start_runs(tmp_path: Path) -> None:
    """Every jump-start rule keeps h inside [0, T] and non-increasing."""
    base = small_config(tmp_path, seeds=[0, 1, 2], finetune={"budget_steps": 1200})
    run_gen_data(load_run_config(OmegaConf.create(base)))
    run_train_offline(load_run_config(OmegaConf.create(base)))
    for algorithm in ("jsrl", "jsrl_fixed", "ajs"):
        overrides = {"out_dir": str(tmp_path / algorithm), "finetune": {"algorithm": algorithm}}
        overrides["dataset"] = {"path": str(tmp_path / DATASET_FILE)}
        overrides["offline"] = {"checkpoint": str(tmp_path / OFFLINE_CHECKPOINT)}
        config = load_run_config(OmegaConf.merge(OmegaConf.create(base), overrides))
        for record in run_finetune_stage(config):
            guide_steps = record.frame["h"].to_numpy()
            assert guide_steps.min() >= 0 and guide_steps.max() <= 60
            assert (guide_steps[1:] <= guide_steps[:-1]).all()
