"""GridCliff: discrete grid world with a region never covered by offline data.

Cells are indexed `row * width + col` with row 0 at the bottom. States are
one-hot vectors over cells. Actions: 0 up, 1 down, 2 left, 3 right; moves
off the grid leave the agent in place. The default inflated region is the
3x3 block right above the bottom-row expert path.
"""
from collections import deque
from dataclasses import dataclass, field
from typing import FrozenSet, List, Set, Tuple

import numpy as np

from o2orl.array_utils import one_hot
from o2orl.env.base import ActionSpace, ActionT, EnvSpec, Environment

Cell = Tuple[int, int]

UP, DOWN, LEFT, RIGHT = 0, 1, 2, 3
_MOVES = {UP: (1, 0), DOWN: (-1, 0), LEFT: (0, -1), RIGHT: (0, 1)}


def _default_inflated_region() -> List[List[int]]:
    return [[row, col] for row in range(1, 4) for col in range(1, 4)]


@dataclass
class GridCliffConfig:
    """GridCliff layout. Cells are given as [row, col]."""

    width: int = 6
    height: int = 6
    start: List[int] = field(default_factory=lambda: [0, 0])
    goal: List[int] = field(default_factory=lambda: [0, 5])
    step_reward: float = -1.0
    goal_reward: float = 20.0
    inflated_region: List[List[int]] = field(default_factory=_default_inflated_region)
    horizon: int = 60
    gamma: float = 0.99


class GridCliff(Environment):
    """Grid world whose offline data never enters the inflated region."""

    has_expert = True

    def __init__(self, config: GridCliffConfig) -> None:
        self.config: GridCliffConfig = config
        self.start: Cell = (int(config.start[0]), int(config.start[1]))
        self.goal: Cell = (int(config.goal[0]), int(config.goal[1]))
        self.region: FrozenSet[Cell] = frozenset(
            (int(row), int(col)) for row, col in config.inflated_region
        )
        self._validate()
        super().__init__(
            EnvSpec(
                name="grid_cliff",
                state_dim=config.width * config.height,
                action_space=ActionSpace.discrete_space(4),
                horizon=config.horizon,
                gamma=config.gamma,
            )
        )

    def _validate(self) -> None:
        if self.start == self.goal:
            raise ValueError("GridCliff start and goal must differ.")
        for cell in (self.start, self.goal, *self.region):
            if not self._inside(cell):
                raise ValueError(f"Cell {cell} lies outside the grid.")
        if self.start in self.region or self.goal in self.region:
            raise ValueError("Inflated region must exclude start and goal.")
        if len(self._reachable()) != self.config.width * self.config.height:
            raise ValueError("Every cell has to be reachable from the start.")

    def _inside(self, cell: Cell) -> bool:
        return 0 <= cell[0] < self.config.height and 0 <= cell[1] < self.config.width

    def _reachable(self) -> Set[Cell]:
        seen: Set[Cell] = {self.start}
        queue = deque([self.start])
        while queue:
            cell = queue.popleft()
            if cell == self.goal:
                continue
            for action in _MOVES:
                nxt = self.move(cell, action)
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
        return seen

    def cell_index(self, cell: Cell) -> int:
        return cell[0] * self.config.width + cell[1]

    def cell_of(self, state: np.ndarray) -> Cell:
        index: int = int(np.argmax(state))
        return divmod(index, self.config.width)  # type: ignore

    def encode(self, cell: Cell) -> np.ndarray:
        return one_hot(self.cell_index(cell), self.spec.state_dim)

    def move(self, cell: Cell, action: int) -> Cell:
        d_row, d_col = _MOVES[action]
        candidate: Cell = (cell[0] + d_row, cell[1] + d_col)
        return candidate if self._inside(candidate) else cell

    def in_region(self, state: np.ndarray) -> bool:
        return self.cell_of(state) in self.region

    def excludes(self, state: np.ndarray) -> bool:
        return self.in_region(state)

    def region_mask(self) -> np.ndarray:
        """Boolean mask over state dimensions marking the inflated region."""
        mask: np.ndarray = np.zeros(self.spec.state_dim, dtype=bool)
        for cell in self.region:
            mask[self.cell_index(cell)] = True
        return mask

    def successor_table(self) -> np.ndarray:
        """State index reached by every (state, action) pair, shape (cells x 4)."""
        table: np.ndarray = np.zeros((self.spec.state_dim, len(_MOVES)), dtype=np.int64)
        for row in range(self.config.height):
            for col in range(self.config.width):
                for action in _MOVES:
                    table[self.cell_index((row, col)), action] = self.cell_index(
                        self.move((row, col), action)
                    )
        return table

    def _start_state(self, rng: np.random.Generator) -> np.ndarray:
        return self.encode(self.start)

    def _transition(
        self, state: np.ndarray, action: np.ndarray
    ) -> Tuple[np.ndarray, float, bool]:
        nxt: Cell = self.move(self.cell_of(state), int(action[0]))
        if nxt == self.goal:
            return self.encode(nxt), self.config.goal_reward, True
        return self.encode(nxt), self.config.step_reward, False

    def expert_action(self, state: np.ndarray) -> ActionT:
        row, col = self.cell_of(state)
        if col < self.goal[1]:
            action = RIGHT
        elif col > self.goal[1]:
            action = LEFT
        elif row > self.goal[0]:
            action = DOWN
        else:
            action = UP
        return np.array([action], dtype=np.float64)
