"""Tabular MDPs, the ChainMDP environment and an exact policy-value oracle."""
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from o2orl.array_utils import one_hot
from o2orl.env.base import ActionSpace, ActionT, EnvSpec, Environment

_ROW_TOLERANCE: float = 1e-9


@dataclass
class TabularMDP:
    """Finite MDP with transition P[s, a, s'] and reward R[s, a, s'].

    Terminal states have value zero and are never left.
    """

    transitions: np.ndarray
    rewards: np.ndarray
    terminal: np.ndarray
    gamma: float

    def __post_init__(self) -> None:
        self.transitions = np.asarray(self.transitions, dtype=np.float64)
        self.rewards = np.asarray(self.rewards, dtype=np.float64)
        self.terminal = np.asarray(self.terminal, dtype=bool)
        if self.transitions.ndim != 3 or self.transitions.shape != self.rewards.shape:
            raise ValueError("Transition and reward tensors must share shape (S, A, S).")
        if self.transitions.shape[0] != self.transitions.shape[2]:
            raise ValueError("Transition tensor must have shape (S, A, S).")
        if self.terminal.shape != (self.n_states,):
            raise ValueError("Terminal mask must have one entry per state.")
        if np.any(np.abs(self.transitions.sum(axis=2) - 1.0) > _ROW_TOLERANCE):
            raise ValueError("Every P[s, a] row must sum to 1.")
        if not np.all(np.isfinite(self.rewards)):
            raise ValueError("Rewards must be finite.")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"Discount must lie in [0, 1), got {self.gamma}")

    @property
    def n_states(self) -> int:
        return int(self.transitions.shape[0])

    @property
    def n_actions(self) -> int:
        return int(self.transitions.shape[1])

    def policy_matrices(self, policy: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Compute (R_pi, P_pi) with terminal rows zeroed.

        Args:
            policy: Array (S x A) of action probabilities.

        Returns:
            Expected reward vector and state transition matrix under policy.
        """
        policy = validate_policy(policy, self.n_states, self.n_actions)
        p_pi: np.ndarray = np.einsum("sa,sat->st", policy, self.transitions)
        r_pi: np.ndarray = np.einsum(
            "sa,sat,sat->s", policy, self.transitions, self.rewards
        )
        p_pi[self.terminal] = 0.0
        r_pi[self.terminal] = 0.0
        return r_pi, p_pi


def validate_policy(policy: np.ndarray, n_states: int, n_actions: int) -> np.ndarray:
    """Validate a per-state action distribution.

    Raises:
        ValueError: if a row is not a probability distribution.
    """
    policy = np.asarray(policy, dtype=np.float64)
    if policy.shape != (n_states, n_actions):
        raise ValueError(f"Policy must have shape ({n_states}, {n_actions}).")
    if np.any(policy < 0) or np.any(np.abs(policy.sum(axis=1) - 1.0) > _ROW_TOLERANCE):
        raise ValueError("Every policy row must be a probability distribution.")
    return policy


def exact_policy_value(mdp: TabularMDP, policy: np.ndarray) -> np.ndarray:
    """Solve V = R_pi + gamma P_pi V with a linear solve.

    Args:
        mdp: Tabular MDP.
        policy: Array (S x A) of action probabilities.

    Returns:
        Per-state values.
    """
    r_pi, p_pi = mdp.policy_matrices(policy)
    system: np.ndarray = np.eye(mdp.n_states) - mdp.gamma * p_pi
    return np.linalg.solve(system, r_pi)


def iterative_policy_value(
    mdp: TabularMDP,
    policy: np.ndarray,
    sweeps: int = 10_000,
    tolerance: float = 1e-12,
) -> np.ndarray:
    """Evaluate a policy with synchronous Bellman sweeps.

    Args:
        mdp: Tabular MDP.
        policy: Array (S x A) of action probabilities.
        sweeps: Maximum number of sweeps.
        tolerance: Stop once the sup-norm change falls below it.

    Returns:
        Per-state values.
    """
    r_pi, p_pi = mdp.policy_matrices(policy)
    values: np.ndarray = np.zeros(mdp.n_states)
    for _ in range(sweeps):
        updated: np.ndarray = r_pi + mdp.gamma * p_pi @ values
        delta: float = float(np.max(np.abs(updated - values)))
        values = updated
        if delta < tolerance:
            break
    return values


def bellman_residual(mdp: TabularMDP, policy: np.ndarray, values: np.ndarray) -> float:
    """Sup-norm of V - (R_pi + gamma P_pi V)."""
    r_pi, p_pi = mdp.policy_matrices(policy)
    return float(np.max(np.abs(values - (r_pi + mdp.gamma * p_pi @ values))))


def build_chain_mdp(
    n_states: int = 4, goal_reward: float = 1.0, step_reward: float = 0.0, gamma: float = 0.9
) -> TabularMDP:
    """Build a chain: action 1 moves right, action 0 moves left (floored at 0).

    Reaching the last state pays `goal_reward` and terminates.
    """
    if n_states < 2:
        raise ValueError("Chain needs at least two states.")
    transitions: np.ndarray = np.zeros((n_states, 2, n_states))
    rewards: np.ndarray = np.full((n_states, 2, n_states), step_reward)
    for state in range(n_states):
        transitions[state, 0, max(state - 1, 0)] = 1.0
        transitions[state, 1, min(state + 1, n_states - 1)] = 1.0
        rewards[state, :, n_states - 1] = goal_reward
    terminal: np.ndarray = np.zeros(n_states, dtype=bool)
    terminal[-1] = True
    return TabularMDP(transitions=transitions, rewards=rewards, terminal=terminal, gamma=gamma)


@dataclass
class ChainConfig:
    """ChainMDP parameters."""

    n_states: int = 4
    goal_reward: float = 1.0
    step_reward: float = 0.0
    horizon: int = 20
    gamma: float = 0.9


class ChainMDP(Environment):
    """Episodic environment sampling from a TabularMDP with one-hot states."""

    has_expert = True

    def __init__(
        self,
        config: Optional[ChainConfig] = None,
        mdp: Optional[TabularMDP] = None,
        horizon: Optional[int] = None,
        start: int = 0,
    ) -> None:
        config = config or ChainConfig()
        self.mdp: TabularMDP = mdp or build_chain_mdp(
            n_states=config.n_states,
            goal_reward=config.goal_reward,
            step_reward=config.step_reward,
            gamma=config.gamma,
        )
        self.start: int = start
        super().__init__(
            EnvSpec(
                name="chain",
                state_dim=self.mdp.n_states,
                action_space=ActionSpace.discrete_space(self.mdp.n_actions),
                horizon=horizon or config.horizon,
                gamma=self.mdp.gamma,
            )
        )

    def _start_state(self, rng: np.random.Generator) -> np.ndarray:
        return one_hot(self.start, self.mdp.n_states)

    def _transition(
        self, state: np.ndarray, action: np.ndarray
    ) -> Tuple[np.ndarray, float, bool]:
        index: int = int(np.argmax(state))
        act: int = int(action[0])
        nxt: int = int(self._rng.choice(self.mdp.n_states, p=self.mdp.transitions[index, act]))
        reward: float = float(self.mdp.rewards[index, act, nxt])
        return one_hot(nxt, self.mdp.n_states), reward, bool(self.mdp.terminal[nxt])

    def expert_action(self, state: np.ndarray) -> ActionT:
        return np.array([self.mdp.n_actions - 1], dtype=np.float64)
