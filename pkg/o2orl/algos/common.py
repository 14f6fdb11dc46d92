"""Loss building blocks shared by the actor-critic algorithms.

Discrete agents take exact expectations over the action set; continuous
agents use one reparameterized sample per state drawn from injected noise.
"""
from typing import Optional

import torch

from o2orl.algos.ensemble import ReduceMode, ensemble_reduce
from o2orl.approx.heads import CategoricalPolicyHead, Policy
from o2orl.approx.networks import CriticEnsemble


def soft_value(  # pylint: disable = (too-many-arguments)
    critics: CriticEnsemble,
    actor: Policy,
    states: torch.Tensor,
    temperature: torch.Tensor,
    reduce: ReduceMode,
    noise: Optional[torch.Tensor] = None,
    prior: Optional[Policy] = None,
    kl_weight: float = 0.0,
) -> torch.Tensor:
    """Soft state value E_a[Q(s, a) - tau log pi(a|s) - kl log(pi/prior)].

    Args:
        critics: Critic ensemble reduced with `reduce`.
        actor: Policy the expectation is taken under.
        states: Batch of states (B x state_dim).
        temperature: Entropy temperature tau.
        reduce: Ensemble reduce mode.
        noise: Actor noise, required for continuous actors.
        prior: Trust-region policy; ignored when `kl_weight` is 0.
        kl_weight: Weight of the log-ratio penalty.

    Returns:
        Per-state values (B,).
    """
    use_prior: bool = prior is not None and kl_weight != 0.0
    if isinstance(actor, CategoricalPolicyHead):
        log_pi: torch.Tensor = actor.log_probs(states)
        q_values: torch.Tensor = ensemble_reduce(critics.all_actions(states), reduce)
        inner: torch.Tensor = q_values - temperature * log_pi
        if use_prior:
            inner = inner - kl_weight * (log_pi - prior.log_probs(states).detach())  # type: ignore
        return (log_pi.exp() * inner).sum(dim=-1)
    if noise is None:
        raise ValueError("Continuous soft value needs actor noise.")
    actions, log_prob = actor.sample(states, noise)
    value: torch.Tensor = (
        ensemble_reduce(critics(states, actions), reduce) - temperature * log_prob
    )
    if use_prior:
        value = value - kl_weight * (
            log_prob - prior.log_prob(states, actions).detach()  # type: ignore
        )
    return value


def expected_log_prob(
    actor: Policy, states: torch.Tensor, noise: Optional[torch.Tensor] = None
) -> torch.Tensor:
    """E_a[log pi(a|s)] per state; exact for discrete actors."""
    if isinstance(actor, CategoricalPolicyHead):
        log_pi: torch.Tensor = actor.log_probs(states)
        return (log_pi.exp() * log_pi).sum(dim=-1)
    if noise is None:
        raise ValueError("Continuous log-prob expectation needs actor noise.")
    _, log_prob = actor.sample(states, noise)
    return log_prob


def critic_regression_loss(
    critics: CriticEnsemble,
    states: torch.Tensor,
    actions: torch.Tensor,
    targets: torch.Tensor,
) -> torch.Tensor:
    """Sum over members of the mean squared error toward shared targets."""
    predictions: torch.Tensor = critics(states, actions)
    return (predictions - targets.unsqueeze(0)).pow(2).mean(dim=1).sum()


def bootstrap_target(
    rewards: torch.Tensor, discounts: torch.Tensor, next_values: torch.Tensor
) -> torch.Tensor:
    """r + discount * V(s'); discount is 0 on terminal transitions."""
    return rewards + discounts * next_values


def alpha_loss(
    log_alpha: torch.Tensor, expected_log_pi: torch.Tensor, target_entropy: float
) -> torch.Tensor:
    """Dual loss E[-alpha (log pi + H_target)] with the policy term fixed."""
    return -(log_alpha.exp() * (expected_log_pi.detach() + target_entropy)).mean()


def weighted_log_likelihood(
    actor: Policy, states: torch.Tensor, actions: torch.Tensor, weights: torch.Tensor
) -> torch.Tensor:
    """-mean(w * log pi(a|s)) with weights treated as constants."""
    return -(weights.detach() * actor.log_prob(states, actions)).mean()
