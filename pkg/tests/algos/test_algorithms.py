# pylint: disable = missing-class-docstring
import numpy as np
import pytest
import torch

from o2orl.algos import (
    CQL,
    IQL,
    PEX,
    PROTO,
    SAC,
    Algorithms,
    InAC,
    UpdateReport,
    build_algorithm,
)
from o2orl.algos.ensemble import ensemble_reduce
from o2orl.approx import flat_parameters
from o2orl.array_utils import to_tensor
from tests.sample_agents import sample_agent, sample_batch


class TestUpdates:
    @pytest.mark.parametrize("discrete", [True, False])
    @pytest.mark.parametrize("name", [Algorithms.SAC, Algorithms.CQL, Algorithms.PROTO])
    def test_sac_family_update_moves_targets(self, name: Algorithms, discrete: bool) -> None:
        agent = sample_agent(discrete)
        before = flat_parameters(agent.target_critics).clone()
        algorithm = build_algorithm(name, agent, torch.Generator().manual_seed(0))
        report = algorithm.update(sample_batch(discrete))
        assert algorithm.updates == 1
        assert report.critic is not None and report.actor is not None
        assert not torch.equal(before, flat_parameters(agent.target_critics))

    @pytest.mark.parametrize("discrete", [True, False])
    def test_inac_update_reports_every_loss(self, discrete: bool) -> None:
        agent = sample_agent(discrete, with_value=True, with_behavior=True)
        report = InAC(agent, torch.Generator().manual_seed(0)).update(sample_batch(discrete))
        assert set(report.as_dict()) >= {"critic", "actor", "value", "behavior", "alpha"}

    def test_iql_update(self) -> None:
        agent = sample_agent(discrete=False, with_value=True)
        report = IQL(agent).update(sample_batch(discrete=False))
        assert np.isfinite(report.value)

    def test_auto_entropy_moves_alpha(self) -> None:
        agent = sample_agent(discrete=True, temperature=0.5, auto_entropy=True)
        report = SAC(agent).update(sample_batch(discrete=True))
        assert report.alpha != pytest.approx(0.5)

    def test_fixed_temperature_rejects_alpha_update(self) -> None:
        algorithm = SAC(sample_agent(discrete=True))
        with pytest.raises(ValueError):
            algorithm.alpha_update(sample_batch(discrete=True))

    def test_build_algorithm_forwards_hyperparameters(self) -> None:
        algorithm = build_algorithm(Algorithms.CQL, sample_agent(True), cql_weight=2.5)
        assert isinstance(algorithm, CQL)
        assert algorithm.cql_weight == 2.5
        assert algorithm.algorithm_name == "CQL"


class TestValidation:
    def test_inac_needs_value_and_behavior(self) -> None:
        with pytest.raises(ValueError):
            InAC(sample_agent(discrete=True))

    def test_inac_needs_fixed_positive_temperature(self) -> None:
        agent = sample_agent(True, with_value=True, with_behavior=True, auto_entropy=True)
        with pytest.raises(ValueError):
            InAC(agent)

    def test_iql_rejects_invalid_hyperparameters(self) -> None:
        agent = sample_agent(discrete=False, with_value=True)
        with pytest.raises(ValueError):
            IQL(agent, expectile=1.0)
        with pytest.raises(ValueError):
            IQL(agent, tau=0.0)

    def test_negative_cql_weight_raises(self) -> None:
        with pytest.raises(ValueError):
            CQL(sample_agent(discrete=True), cql_weight=-1.0)

    def test_report_rejects_non_finite_values(self) -> None:
        with pytest.raises(RuntimeError):
            UpdateReport(critic=float("nan")).validate()

    def test_set_temperature(self) -> None:
        agent = sample_agent(discrete=True)
        agent.set_temperature(0.3, auto=True)
        assert "alpha" in agent.optimizers
        assert agent.temperature.value == pytest.approx(0.3)
        agent.set_temperature(0.1, auto=False)
        assert "alpha" not in agent.optimizers
        with pytest.raises(ValueError):
            agent.set_temperature(0.0, auto=True)


class TestPROTO:
    def test_trust_region_weight_anneals_to_zero(self) -> None:
        algorithm = PROTO(sample_agent(discrete=True), initial_weight=2.0)
        assert algorithm.kl_weight == 2.0
        algorithm.set_anneal_fraction(0.25)
        assert algorithm.kl_weight == pytest.approx(1.5)
        algorithm.set_anneal_fraction(3.0)
        assert algorithm.kl_weight == 0.0

    def test_prior_trails_actor(self) -> None:
        agent = sample_agent(discrete=False)
        algorithm = PROTO(agent, torch.Generator().manual_seed(0), prior_rate=0.5)
        algorithm.update(sample_batch(discrete=False))
        prior = flat_parameters(agent.prior_actor)
        actor = flat_parameters(agent.actor)
        assert not torch.equal(prior, actor)


class TestPEX:
    def test_offline_actor_is_frozen_copy(self) -> None:
        agent = sample_agent(discrete=False)
        offline = flat_parameters(agent.actor).clone()
        algorithm = PEX(agent, torch.Generator().manual_seed(0))
        torch.testing.assert_close(flat_parameters(algorithm.offline_actor), offline)
        algorithm.update(sample_batch(discrete=False))
        torch.testing.assert_close(flat_parameters(algorithm.offline_actor), offline)
        assert not any(param.requires_grad for param in algorithm.offline_actor.parameters())

    @pytest.mark.parametrize("discrete", [True, False])
    def test_deterministic_selection_takes_higher_value(self, discrete: bool) -> None:
        agent = sample_agent(discrete)
        algorithm = PEX(agent, torch.Generator().manual_seed(0))
        state = np.array([0.3, -0.2, 0.5])
        action, used_offline = algorithm.select_action(state, deterministic=True)
        states = to_tensor(state, torch.float64).reshape(1, -1)
        with torch.no_grad():
            offline_action = algorithm.offline_actor.mode(states)
            online_action = agent.actor.mode(states)
            q_offline = float(ensemble_reduce(agent.critics(states, offline_action), agent.reduce))
            q_online = float(ensemble_reduce(agent.critics(states, online_action), agent.reduce))
        assert used_offline == (q_offline >= q_online)
        expected = offline_action if used_offline else online_action
        np.testing.assert_allclose(action, expected[0].numpy())

    def test_stochastic_selection_is_seeded(self) -> None:
        choices = []
        for _ in range(2):
            algorithm = PEX(sample_agent(discrete=True), torch.Generator().manual_seed(7))
            choices.append(
                [algorithm.select_action(np.zeros(3))[1] for _ in range(10)]
            )
        assert choices[0] == choices[1]
