# pylint: disable = missing-class-docstring
import numpy as np
import pytest

from o2orl.data import ReplayBuffer, Transition, TransitionDataset


def make_transition(value: float, step: int = 0) -> Transition:
    return Transition(
        state=np.array([value, 0.0]),
        action=np.array([1.0]),
        reward=value,
        next_state=np.array([value, 1.0]),
        discount=0.99,
        timeout=False,
        episode_step=step,
    )


def make_dataset(count: int) -> TransitionDataset:
    return TransitionDataset.from_transitions(
        [make_transition(float(index), index % 3) for index in range(count)], 2, 1
    )


class TestReplayBuffer:
    def test_from_dataset_sets_watermark(self) -> None:
        buffer = ReplayBuffer.from_dataset(make_dataset(5), online_budget=3)
        assert buffer.capacity == 8
        assert len(buffer) == 5
        assert buffer.watermark == 5

    def test_offline_rows_survive_overflow(self) -> None:
        buffer = ReplayBuffer.from_dataset(make_dataset(4), online_budget=2)
        for value in range(100, 110):
            buffer.push(make_transition(float(value)))
        contents = buffer.contents()
        np.testing.assert_array_equal(contents.rewards[:4], [0.0, 1.0, 2.0, 3.0])
        assert len(buffer) == 6
        assert set(contents.rewards[4:]) == {108.0, 109.0}

    def test_push_fails_without_online_room(self) -> None:
        buffer = ReplayBuffer.from_dataset(make_dataset(3), online_budget=0)
        with pytest.raises(RuntimeError):
            buffer.push(make_transition(9.0))

    def test_sample_is_seeded(self) -> None:
        buffer = ReplayBuffer.from_dataset(make_dataset(20), online_budget=0)
        first = buffer.sample(8, np.random.default_rng(4))
        second = buffer.sample(8, np.random.default_rng(4))
        np.testing.assert_array_equal(first.rewards.numpy(), second.rewards.numpy())
        assert len(first) == 8

    def test_sample_from_empty_buffer_raises(self) -> None:
        with pytest.raises(ValueError):
            ReplayBuffer(4, 2, 1).sample(2, np.random.default_rng(0))

    def test_offline_start_states_ignore_online_rows(self) -> None:
        buffer = ReplayBuffer.from_dataset(make_dataset(6), online_budget=4)
        buffer.push(make_transition(50.0, step=0))
        starts = buffer.offline_start_states()
        np.testing.assert_array_equal(starts[:, 0], [0.0, 3.0])

    def test_invalid_capacity_raises(self) -> None:
        with pytest.raises(ValueError):
            ReplayBuffer(0, 2, 1)


class TestTransitionDataset:
    def test_episode_returns_split_at_episode_start(self) -> None:
        dataset = make_dataset(7)
        np.testing.assert_array_equal(dataset.episode_returns(), [3.0, 12.0, 6.0])

    def test_episode_returns_of_empty_dataset(self) -> None:
        assert TransitionDataset.empty(2, 1).episode_returns().size == 0

    def test_columns_must_agree_in_length(self) -> None:
        dataset = make_dataset(2)
        with pytest.raises(ValueError):
            TransitionDataset(
                states=dataset.states,
                actions=dataset.actions,
                rewards=np.zeros(3),
                next_states=dataset.next_states,
                discounts=dataset.discounts,
                timeouts=dataset.timeouts,
                episode_steps=dataset.episode_steps,
            )
