"""Diagnostic studies of fine-tuned agents.

Value shift of the offline critic under the fine-tuned actor, a 2-D PCA
projection for plotting it, parameter interpolation between two actors
and the accuracy of critic estimates against Monte-Carlo returns.
"""
import copy
from typing import Optional, Sequence, Tuple

import numpy as np
import torch

from o2orl.algos.base_agent import Agent
from o2orl.algos.common import soft_value
from o2orl.algos.ensemble import ReduceMode, ensemble_reduce
from o2orl.approx.heads import Policy
from o2orl.approx.networks import CriticEnsemble, load_flat_parameters
from o2orl.array_utils import to_tensor
from o2orl.data.normalization import Bounds, normalized_return
from o2orl.env.base import Environment, StepResult
from o2orl.seeding import SeedStream, derive_seed
from o2orl.training.rollout import evaluate_policy, evaluation_mode

DEFAULT_LAMBDAS: np.ndarray = np.linspace(0.0, 1.0, 11)


def value_shift(  # pylint: disable = (too-many-arguments)
    critics: CriticEnsemble,
    offline_actor: Policy,
    current_actor: Policy,
    states: np.ndarray,
    reduce: ReduceMode = ReduceMode.MIN,
    generator: Optional[torch.Generator] = None,
    deterministic: bool = False,
) -> np.ndarray:
    """Offline critic's preference d = q0(s, a_x) - q0(s, a_0) per state.

    Both actors sample with the same noise, so identical actors give d = 0.

    Args:
        critics: Frozen offline critic ensemble.
        offline_actor: Frozen offline actor proposing a_0.
        current_actor: Fine-tuned actor proposing a_x.
        states: States (N x state_dim), usually drawn from the offline data.
        reduce: Ensemble reduce mode.
        generator: Torch generator of the shared noise.
        deterministic: Compare actor modes instead of samples.

    Returns:
        Vector of d values, one per state.
    """
    param: torch.Tensor = next(critics.parameters())
    batch: torch.Tensor = to_tensor(np.asarray(states), param.dtype)
    with evaluation_mode(critics, offline_actor, current_actor):
        if deterministic:
            offline_actions: torch.Tensor = offline_actor.mode(batch)
            current_actions: torch.Tensor = current_actor.mode(batch)
        else:
            noise: torch.Tensor = offline_actor.draw_noise(len(batch), generator, param.dtype)
            offline_actions, _ = offline_actor.sample(batch, noise)
            current_actions, _ = current_actor.sample(batch, noise)
        shift: torch.Tensor = ensemble_reduce(
            critics(batch, current_actions), reduce
        ) - ensemble_reduce(critics(batch, offline_actions), reduce)
    return shift.cpu().numpy().astype(np.float64)


def pca2(points: np.ndarray) -> np.ndarray:
    """Project points on their two leading principal components.

    Components come from the eigendecomposition of the sample covariance;
    each is signed so that its largest loading is positive.

    Args:
        points: Array of shape (N x D) with N >= 3 and D >= 2.

    Returns:
        Projections of shape (N x 2).

    Raises:
        ValueError: if the shape is invalid or the data has zero variance.
    """
    data: np.ndarray = np.asarray(points, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] < 3 or data.shape[1] < 2:
        raise ValueError(f"PCA needs at least 3 points of dimension >= 2, got {data.shape}")
    centered: np.ndarray = data - data.mean(axis=0)
    covariance: np.ndarray = np.cov(centered, rowvar=False)
    if not np.trace(covariance) > 0:
        raise ValueError("PCA input has zero variance.")
    eigenvalues, eigenvectors = np.linalg.eigh(covariance)
    order: np.ndarray = np.argsort(eigenvalues)[::-1][:2]
    components: np.ndarray = eigenvectors[:, order]
    largest: np.ndarray = np.argmax(np.abs(components), axis=0)
    components = components * np.sign(components[largest, np.arange(2)])
    return centered @ components


def linear_interp_eval(  # pylint: disable = (too-many-arguments)
    params_start: torch.Tensor,
    params_end: torch.Tensor,
    actor: Policy,
    env: Environment,
    lambdas: Sequence[float] = tuple(DEFAULT_LAMBDAS),
    n_rollouts: int = 50,
    seed: int = 0,
    bounds: Optional[Bounds] = None,
    deterministic: bool = True,
) -> np.ndarray:
    """Mean normalized return of actors on the segment between two parameter vectors.

    Every lambda is evaluated on the same episode seeds.

    Args:
        params_start: Flat parameters at lambda = 0.
        params_end: Flat parameters at lambda = 1.
        actor: Actor of the matching architecture; left unchanged.
        env: Evaluation environment.
        lambdas: Interpolation weights.
        n_rollouts: Episodes per weight.
        seed: Seed of the episode seeds.
        bounds: Normalization bounds. Defaults to the environment's.
        deterministic: Act with the actor mode.

    Returns:
        One mean normalized return per lambda, in the order given.

    Raises:
        ValueError: if the parameter vectors differ in shape or do not fit the actor.
    """
    if params_start.shape != params_end.shape:
        raise ValueError(
            f"Parameter vectors differ in shape: {params_start.shape} vs {params_end.shape}"
        )
    blended: Policy = copy.deepcopy(actor)
    seeds = [derive_seed(seed, SeedStream.ANALYSIS, index) for index in range(n_rollouts)]
    generator = torch.Generator()
    results = []
    for weight in lambdas:
        load_flat_parameters(blended, torch.lerp(params_start, params_end, float(weight)))
        generator.manual_seed(seed)
        with evaluation_mode(blended):
            returns: np.ndarray = evaluate_policy(
                env, lambda state, _: blended.act(state, generator, deterministic), seeds
            )
        results.append(normalized_return(returns.mean(), bounds or env.spec))
    return np.asarray(results, dtype=np.float64)


def true_return_estimate(  # pylint: disable = (too-many-arguments)
    env: Environment,
    actor: Policy,
    n_rollouts: int = 5,
    horizon: int = 1000,
    gamma: float = 0.99,
    seed: int = 0,
    deterministic: bool = False,
) -> float:
    """Mean discounted Monte-Carlo return over `n_rollouts` episodes.

    An episode stops at termination, at the environment timeout or after
    `horizon` steps, whichever comes first.
    """
    generator = torch.Generator()
    generator.manual_seed(seed)
    totals = []
    with evaluation_mode(actor):
        for index in range(n_rollouts):
            state: np.ndarray = env.reset(derive_seed(seed, SeedStream.ANALYSIS, index))
            total: float = 0.0
            for t in range(horizon):
                result: StepResult = env.step(actor.act(state, generator, deterministic))
                total += gamma**t * result.reward
                if result.terminal or result.timeout:
                    break
                state = result.next_state
            totals.append(total)
    return float(np.mean(totals))


def critic_estimate(
    agent: Agent, start_states: np.ndarray, generator: Optional[torch.Generator] = None
) -> float:
    """Reduced critic value E_a~pi[Q(s0, a)] averaged over start states."""
    param: torch.Tensor = next(agent.critics.parameters())
    states: torch.Tensor = to_tensor(np.asarray(start_states), param.dtype)
    with evaluation_mode(agent):
        noise: torch.Tensor = agent.actor.draw_noise(len(states), generator, param.dtype)
        values: torch.Tensor = soft_value(
            agent.critics,
            agent.actor,
            states,
            torch.zeros((), dtype=param.dtype),
            agent.reduce,
            noise,
        )
    return float(values.mean())


def q_estimate_gap(  # pylint: disable = (too-many-arguments)
    agent: Agent,
    env: Environment,
    start_states: np.ndarray,
    n_rollouts: int = 5,
    horizon: int = 1000,
    gamma: float = 0.99,
    seed: int = 0,
) -> Tuple[float, float]:
    """Signed and absolute gap between the critic estimate and the true return.

    Returns:
        Tuple of (Q_hat - G, |Q_hat - G|).
    """
    generator = torch.Generator()
    generator.manual_seed(seed)
    estimate: float = critic_estimate(agent, start_states, generator)
    true_return: float = true_return_estimate(
        env, agent.actor, n_rollouts, horizon, gamma, seed
    )
    gap: float = estimate - true_return
    return gap, abs(gap)
