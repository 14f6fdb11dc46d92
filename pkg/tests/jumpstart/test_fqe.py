# pylint: disable = missing-class-docstring
import numpy as np
import pytest
import torch

from o2orl.approx import CategoricalPolicyHead, check_gradients
from o2orl.data import DatasetQuality, ReplayBuffer, generate_dataset
from o2orl.env import ChainConfig, ChainMDP, exact_policy_value
from o2orl.jumpstart import FQE, CompositePolicy, fqe_estimate, fqe_train

CHAIN_POLICY = np.array([[0.3, 0.7], [0.4, 0.6], [0.2, 0.8], [0.5, 0.5]])


def tabular_head(table: np.ndarray) -> CategoricalPolicyHead:
    """Categorical head returning row s of `table` for the one-hot state s."""
    n_states, n_actions = table.shape
    head = CategoricalPolicyHead(n_states, n_actions, hidden=())
    with torch.no_grad():
        logits = torch.log(torch.as_tensor(table, dtype=torch.float32))
        head.body.layers[-1].weight.copy_(logits.T)
        head.body.layers[-1].bias.zero_()
    return head


def chain_setup(size: int = 4000):
    env = ChainMDP(ChainConfig())
    dataset, _ = generate_dataset(env, DatasetQuality.RANDOM, size, seed=0)
    head = tabular_head(CHAIN_POLICY)
    buffer = ReplayBuffer.from_dataset(dataset, online_budget=0)
    return env, buffer, CompositePolicy(head, head, 5.0)


class TestFQE:
    def test_regression_loss_gradient(self) -> None:
        _, buffer, policy = chain_setup(200)
        fqe = FQE(4, ChainMDP().spec.action_space, hidden=(8,))
        fqe.network.double()
        fqe.target.double()
        policy.guide.double()
        batch = buffer.sample(32, np.random.default_rng(0), torch.float64)
        target = fqe.regression_target(batch, policy, 5.0)
        assert check_gradients(lambda: fqe.loss(batch, target), fqe.network) < 1e-4

    def test_target_sync_period(self) -> None:
        _, buffer, policy = chain_setup(200)
        fqe = FQE(4, ChainMDP().spec.action_space, hidden=(8,), sync_period=3, batch_size=16)
        fqe_train(fqe, buffer, policy, 5.0, 2, np.random.default_rng(0))
        assert not all(
            torch.equal(a, b) for a, b in zip(fqe.network.parameters(), fqe.target.parameters())
        )
        fqe_train(fqe, buffer, policy, 5.0, 1, np.random.default_rng(1))
        assert all(
            torch.equal(a, b) for a, b in zip(fqe.network.parameters(), fqe.target.parameters())
        )

    def test_state_dict_round_trip(self) -> None:
        _, buffer, policy = chain_setup(200)
        space = ChainMDP().spec.action_space
        fqe = FQE(4, space, hidden=(8,), batch_size=16)
        fqe_train(fqe, buffer, policy, 5.0, 5, np.random.default_rng(0))
        restored = FQE(4, space, hidden=(8,))
        restored.load_state_dict(fqe.state_dict())
        starts = np.eye(4)[:1]
        assert restored.iterations == 5
        assert fqe_estimate(restored, starts, policy, 0, 5.0) == pytest.approx(
            fqe_estimate(fqe, starts, policy, 0, 5.0)
        )

    def test_estimate_needs_start_states(self) -> None:
        _, _, policy = chain_setup(10)
        fqe = FQE(4, ChainMDP().spec.action_space, hidden=(8,))
        with pytest.raises(ValueError):
            fqe_estimate(fqe, np.zeros((0, 4)), policy, 0, 5.0)

    def test_invalid_sync_period_raises(self) -> None:
        with pytest.raises(ValueError):
            FQE(4, ChainMDP().spec.action_space, sync_period=0)


@pytest.mark.slow
def test_fqe_matches_dynamic_programming_on_chain() -> None:
    """FQE of a fixed stochastic policy approaches the exact value of the start state."""
    env, buffer, policy = chain_setup()
    exact = exact_policy_value(env.mdp, CHAIN_POLICY)[0]
    fqe = FQE(
        4,
        env.spec.action_space,
        hidden=(32, 32),
        learning_rate=1e-3,
        batch_size=256,
        generator=torch.Generator().manual_seed(0),
    )
    fqe_train(fqe, buffer, policy, 5.0, 5000, np.random.default_rng(0))
    estimate = fqe_estimate(fqe, np.eye(4)[:1], policy, 0, 5.0)
    assert abs(estimate - exact) <= 0.05 * (1.0 + abs(exact))
