"""Gradient and value checks of the algorithm losses."""
import math

import pytest
import torch

from o2orl.algos import IQL, PROTO, SAC, InAC, ReduceMode, ensemble_reduce
from o2orl.algos.algorithm import cql_penalty, expectile_loss, offline_probability
from o2orl.algos.common import alpha_loss, critic_regression_loss, expected_log_prob
from o2orl.approx import check_gradients
from tests.sample_agents import sample_agent, sample_batch

TOLERANCE: float = 1e-4


@pytest.mark.parametrize(
    "values, mode, expected",
    [
        ([3.0, 1.0, 2.0], ReduceMode.MIN, 1.0),
        ([3.0, 1.0, 2.0], ReduceMode.MEDIAN, 2.0),
        ([4.0, 1.0, 3.0, 2.0], ReduceMode.MEDIAN, 2.0),
        ([5.0], ReduceMode.MEDIAN, 5.0),
    ],
)
def test_ensemble_reduce(values, mode: ReduceMode, expected: float) -> None:
    """Even ensembles use the lower median."""
    assert float(ensemble_reduce(values, mode)) == expected


def test_ensemble_reduce_is_elementwise_over_batch() -> None:
    values = torch.tensor([[1.0, 5.0], [3.0, 2.0], [2.0, 4.0]])
    torch.testing.assert_close(ensemble_reduce(values, ReduceMode.MIN), torch.tensor([1.0, 2.0]))
    torch.testing.assert_close(
        ensemble_reduce(values, ReduceMode.MEDIAN), torch.tensor([2.0, 4.0])
    )


def test_ensemble_reduce_needs_estimates() -> None:
    with pytest.raises(ValueError):
        ensemble_reduce(torch.zeros(0, 3), ReduceMode.MIN)


def test_expectile_loss_weights_sides() -> None:
    loss = expectile_loss(torch.tensor([-2.0, 2.0]), 0.7)
    torch.testing.assert_close(loss, torch.tensor([1.2, 2.8]))


def test_symmetric_expectile_is_half_squared_error() -> None:
    diff = torch.randn(1000, generator=torch.Generator().manual_seed(0), dtype=torch.float64)
    assert torch.equal(expectile_loss(diff, 0.5), 0.5 * diff.pow(2))


@pytest.mark.parametrize("size", [1, 2, 3, 5, 10])
def test_ensemble_reduce_order_statistics(size: int) -> None:
    values = torch.randn(size, 10000, generator=torch.Generator().manual_seed(size))
    minimum = ensemble_reduce(values, ReduceMode.MIN)
    median = ensemble_reduce(values, ReduceMode.MEDIAN)
    assert torch.all(minimum <= median)
    assert torch.all(median <= values.max(dim=0).values)


@pytest.mark.parametrize("expectile", [0.0, 1.0, 1.5])
def test_expectile_outside_unit_interval_raises(expectile: float) -> None:
    with pytest.raises(ValueError):
        expectile_loss(torch.ones(2), expectile)


def test_offline_probability() -> None:
    assert offline_probability(1.0, 1.0, 1.0) == pytest.approx(0.5)
    assert offline_probability(2.0, 0.0, 1.0) == pytest.approx(1.0 / (1.0 + math.exp(-2.0)))
    assert offline_probability(-800.0, 800.0, 1.0) == pytest.approx(0.0)
    assert offline_probability(3.0, 3.0, 0.0) == 1.0
    assert offline_probability(2.0, 3.0, 0.0) == 0.0
    with pytest.raises(ValueError):
        offline_probability(0.0, 0.0, -1.0)


def test_discrete_cql_penalty_is_non_negative() -> None:
    """logsumexp over actions bounds every single action value."""
    agent = sample_agent(discrete=True)
    penalty = cql_penalty(agent, sample_batch(discrete=True))
    assert penalty.shape == (2,)
    assert torch.all(penalty >= 0)


class TestGradients:
    @pytest.mark.parametrize("discrete", [True, False])
    def test_sac_critic_loss(self, discrete: bool) -> None:
        agent = sample_agent(discrete)
        batch = sample_batch(discrete)
        algorithm = SAC(agent, torch.Generator().manual_seed(1))
        targets = algorithm.critic_target(batch, algorithm.draw_noise(batch))
        error = check_gradients(
            lambda: algorithm.critic_loss(batch, targets), agent.critics, n_coordinates=30
        )
        assert error < TOLERANCE

    @pytest.mark.parametrize("discrete", [True, False])
    def test_sac_actor_loss(self, discrete: bool) -> None:
        agent = sample_agent(discrete)
        batch = sample_batch(discrete)
        algorithm = SAC(agent, torch.Generator().manual_seed(1))
        noise = None if discrete else algorithm.draw_noise(batch)
        error = check_gradients(
            lambda: algorithm.actor_loss(batch.states, noise), agent.actor, n_coordinates=30
        )
        assert error < TOLERANCE

    def test_cql_penalty(self) -> None:
        agent = sample_agent(discrete=True)
        batch = sample_batch(discrete=True)
        error = check_gradients(
            lambda: cql_penalty(agent, batch).sum(), agent.critics, n_coordinates=30
        )
        assert error < TOLERANCE

    @pytest.mark.parametrize("discrete", [True, False])
    def test_inac_actor_and_value_losses(self, discrete: bool) -> None:
        agent = sample_agent(discrete, with_value=True, with_behavior=True)
        batch = sample_batch(discrete)
        algorithm = InAC(agent, torch.Generator().manual_seed(2))
        noise = None if discrete else algorithm.draw_noise(batch)
        assert check_gradients(lambda: algorithm.actor_loss(batch), agent.actor) < TOLERANCE
        assert (
            check_gradients(lambda: algorithm.value_loss(batch, noise), agent.value)
            < TOLERANCE
        )
        assert (
            check_gradients(lambda: algorithm.behavior_loss(batch), agent.behavior)
            < TOLERANCE
        )

    def test_iql_value_loss(self) -> None:
        agent = sample_agent(discrete=False, with_value=True)
        batch = sample_batch(discrete=False)
        algorithm = IQL(agent, expectile=0.8)
        assert check_gradients(lambda: algorithm.value_loss(batch), agent.value) < TOLERANCE

    def test_iql_critic_and_actor_losses(self) -> None:
        agent = sample_agent(discrete=True, with_value=True)
        batch = sample_batch(discrete=True)
        algorithm = IQL(agent)
        targets = algorithm.critic_target(batch)
        assert (
            check_gradients(
                lambda: critic_regression_loss(agent.critics, batch.states, batch.actions, targets),
                agent.critics,
                n_coordinates=30,
            )
            < TOLERANCE
        )
        assert check_gradients(lambda: algorithm.actor_loss(batch), agent.actor) < TOLERANCE

    def test_inac_critic_loss(self) -> None:
        agent = sample_agent(discrete=False, with_value=True, with_behavior=True)
        batch = sample_batch(discrete=False)
        algorithm = InAC(agent, torch.Generator().manual_seed(3))
        targets = algorithm.critic_target(batch, algorithm.draw_noise(batch))
        error = check_gradients(
            lambda: critic_regression_loss(agent.critics, batch.states, batch.actions, targets),
            agent.critics,
            n_coordinates=30,
        )
        assert error < TOLERANCE

    def test_alpha_loss(self) -> None:
        agent = sample_agent(discrete=False, auto_entropy=True)
        batch = sample_batch(discrete=False)
        noise = SAC(agent, torch.Generator().manual_seed(4)).draw_noise(batch)
        with torch.no_grad():
            log_pi = expected_log_prob(agent.actor, batch.states, noise)
        target = float(agent.spec.target_entropy)
        error = check_gradients(
            lambda: alpha_loss(agent.temperature.log_alpha, log_pi, target),
            [agent.temperature.log_alpha],
            n_coordinates=1,
        )
        assert error < TOLERANCE

    @pytest.mark.parametrize("discrete", [True, False])
    def test_proto_losses(self, discrete: bool) -> None:
        """Trust-region terms keep the critic and actor gradients exact."""
        agent = sample_agent(discrete)
        batch = sample_batch(discrete)
        algorithm = PROTO(agent, torch.Generator().manual_seed(5), initial_weight=0.5)
        with torch.no_grad():
            for param in agent.actor.parameters():
                param.add_(0.1)
        noise = None if discrete else algorithm.draw_noise(batch)
        targets = algorithm.critic_target(batch, noise)
        assert (
            check_gradients(
                lambda: algorithm.critic_loss(batch, targets), agent.critics, n_coordinates=30
            )
            < TOLERANCE
        )
        assert (
            check_gradients(
                lambda: algorithm.actor_loss(batch.states, noise), agent.actor, n_coordinates=30
            )
            < TOLERANCE
        )
