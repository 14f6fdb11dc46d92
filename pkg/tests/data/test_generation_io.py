# pylint: disable = missing-class-docstring
from pathlib import Path

import numpy as np
import pytest

from o2orl.data import (
    DatasetQuality,
    FormatError,
    generate_dataset,
    load_dataset,
    normalized_return,
    reference_bounds,
    save_dataset,
)
from o2orl.data.generation import collect
from o2orl.data.io import sidecar_path
from o2orl.env import (
    ChainConfig,
    ChainMDP,
    GridCliff,
    GridCliffConfig,
    PointReach,
    PointReachConfig,
)
from o2orl.env.grid_cliff import RIGHT


class TestGenerateDataset:
    @pytest.mark.parametrize("quality", list(DatasetQuality))
    def test_exact_size(self, quality: DatasetQuality) -> None:
        dataset, meta = generate_dataset(PointReach(PointReachConfig()), quality, 333, seed=1)
        assert len(dataset) == 333
        assert meta.size == 333
        assert meta.quality == quality

    def test_same_seed_same_data(self) -> None:
        env = GridCliff(GridCliffConfig())
        first, _ = generate_dataset(env, DatasetQuality.MEDIUM, 500, seed=3)
        second, _ = generate_dataset(env, DatasetQuality.MEDIUM, 500, seed=3)
        for name, column in first.columns().items():
            np.testing.assert_array_equal(column, second.columns()[name])

    def test_grid_cliff_data_avoids_inflated_region(self) -> None:
        env = GridCliff(GridCliffConfig())
        dataset, _ = generate_dataset(env, DatasetQuality.RANDOM, 2000, seed=0)
        assert not any(env.in_region(state) for state in dataset.states)
        assert not any(env.in_region(state) for state in dataset.next_states)

    def test_grid_cliff_episodes_end_only_at_goal_or_horizon(self) -> None:
        env = GridCliff(GridCliffConfig())
        dataset, _ = generate_dataset(env, DatasetQuality.MEDIUM, 3000, seed=4)
        horizon = env.spec.horizon
        assert np.all(dataset.episode_steps[dataset.timeouts] == horizon - 1)
        starts = np.flatnonzero(dataset.episode_steps == 0)
        last_rows = starts[1:] - 1
        ended = (dataset.discounts[last_rows] == 0.0) | dataset.timeouts[last_rows]
        assert ended.all()
        assert np.all(dataset.episode_steps[starts[1:] - 1] + 1 == np.diff(starts))

    def test_unavoidable_exclusion_raises(self) -> None:
        env = GridCliff(GridCliffConfig(inflated_region=[[0, 1]]))

        def always_right(  # pylint: disable = (unused-argument)
            state: np.ndarray, rng: np.random.Generator
        ) -> np.ndarray:
            return np.array([RIGHT], dtype=np.float64)

        with pytest.raises(ValueError, match="in a row"):
            collect(env, always_right, 10, np.random.default_rng(0), max_rejections=5)

    def test_terminal_rows_have_zero_discount(self) -> None:
        env = GridCliff(GridCliffConfig())
        dataset, _ = generate_dataset(env, DatasetQuality.EXPERT, 300, seed=0)
        goal_rows = dataset.rewards == env.config.goal_reward
        assert goal_rows.any()
        assert np.all(dataset.discounts[goal_rows] == 0.0)
        np.testing.assert_allclose(dataset.discounts[~goal_rows], env.spec.gamma)

    def test_episodes_start_at_step_zero(self) -> None:
        dataset, _ = generate_dataset(ChainMDP(ChainConfig()), DatasetQuality.EXPERT, 50, 0)
        assert dataset.episode_steps[0] == 0
        increments = np.diff(dataset.episode_steps)
        assert np.all((increments == 1) | (dataset.episode_steps[1:] == 0))

    def test_negative_size_raises(self) -> None:
        with pytest.raises(ValueError):
            generate_dataset(ChainMDP(ChainConfig()), DatasetQuality.RANDOM, -1, 0)


class TestDatasetFiles:
    @pytest.fixture
    def generated(self):
        env = PointReach(PointReachConfig())
        env.spec = env.spec.with_reference_returns(-50.0, -5.0)
        return generate_dataset(env, DatasetQuality.MEDIUM_EXPERT, 120, seed=2)

    def test_load_returns_saved_content(self, generated, tmp_path: Path) -> None:
        dataset, meta = generated
        path = save_dataset(dataset, meta, tmp_path / "dataset.bin")
        loaded, loaded_meta = load_dataset(path)
        for name, column in dataset.columns().items():
            np.testing.assert_array_equal(loaded.columns()[name], column)
        assert loaded_meta.quality == DatasetQuality.MEDIUM_EXPERT
        assert loaded_meta.reference_returns == (-50.0, -5.0)
        assert loaded_meta.env_name == "point_reach"

    def test_same_content_gives_identical_bytes(self, generated, tmp_path: Path) -> None:
        dataset, meta = generated
        first = save_dataset(dataset, meta, tmp_path / "a.bin")
        second = save_dataset(dataset, meta, tmp_path / "b.bin")
        assert first.read_bytes() == second.read_bytes()

    def test_bad_magic_raises(self, generated, tmp_path: Path) -> None:
        path = save_dataset(*generated, tmp_path / "dataset.bin")
        content = bytearray(path.read_bytes())
        content[:8] = b"NOTADATA"
        path.write_bytes(bytes(content))
        with pytest.raises(FormatError):
            load_dataset(path)

    def test_truncated_file_raises(self, generated, tmp_path: Path) -> None:
        path = save_dataset(*generated, tmp_path / "dataset.bin")
        path.write_bytes(path.read_bytes()[:-7])
        with pytest.raises(FormatError):
            load_dataset(path)

    def test_unknown_quality_tag_raises(self, generated, tmp_path: Path) -> None:
        path = save_dataset(*generated, tmp_path / "dataset.bin")
        content = bytearray(path.read_bytes())
        content[16 + len(b"point_reach")] = 99
        path.write_bytes(bytes(content))
        with pytest.raises(FormatError, match="quality tag"):
            load_dataset(path)

    def test_non_utf8_env_name_raises(self, generated, tmp_path: Path) -> None:
        path = save_dataset(*generated, tmp_path / "dataset.bin")
        content = bytearray(path.read_bytes())
        content[16] = 0xFF
        path.write_bytes(bytes(content))
        with pytest.raises(FormatError, match="UTF-8"):
            load_dataset(path)

    @pytest.mark.parametrize(
        "sidecar",
        [b"{not json", b"\xff\xfe", b"[1, 2]", b'{"reference_returns": [1.0]}'],
    )
    def test_unreadable_sidecar_raises(self, generated, tmp_path: Path, sidecar: bytes) -> None:
        path = save_dataset(*generated, tmp_path / "dataset.bin")
        sidecar_path(path).write_bytes(sidecar)
        with pytest.raises(FormatError):
            load_dataset(path)

    def test_missing_sidecar_loads_without_bounds(self, generated, tmp_path: Path) -> None:
        path = save_dataset(*generated, tmp_path / "dataset.bin")
        sidecar_path(path).unlink()
        _, meta = load_dataset(path)
        assert meta.reference_returns is None

    def test_missing_file_raises(self, tmp_path: Path) -> None:
        with pytest.raises(FileNotFoundError):
            load_dataset(tmp_path / "absent.bin")


class TestNormalization:
    def test_random_and_expert_map_to_zero_and_one(self) -> None:
        assert normalized_return(10.0, (10.0, 20.0)) == 0.0
        assert normalized_return(20.0, (10.0, 20.0)) == 1.0
        scaled = normalized_return(np.array([15.0, 30.0]), (10.0, 20.0))
        np.testing.assert_allclose(scaled, [0.5, 2.0])

    def test_degenerate_bounds_raise(self) -> None:
        with pytest.raises(ValueError):
            reference_bounds((5.0, 5.0))
        with pytest.raises(ValueError):
            reference_bounds((float("nan"), 1.0))

    def test_missing_bounds_raise(self) -> None:
        with pytest.raises(ValueError):
            normalized_return(1.0, PointReach(PointReachConfig()).spec)
