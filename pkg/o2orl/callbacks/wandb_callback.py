"""Callback for Weights and Biases."""
import math
from typing import Any, Dict, Optional

import wandb

from o2orl.callbacks.base import Callback


class WandBCallback(Callback):
    """Log run-record rows, evaluations and the final table to a W&B run."""

    def __init__(
        self,
        project: str,
        entity: Optional[str] = None,
        group: Optional[str] = None,
        mode: str = "online",
    ) -> None:
        """Initialize Callback class.

        Args:
            project: W&B project name.
            entity: W&B entity. Defaults to the logged-in user.
            group: Group joining the seeds of one invocation.
            mode: W&B mode, e.g. "online", "offline" or "disabled".
        """
        self.project = project
        self.entity = entity
        self.group = group
        self.mode = mode
        self.run: Optional[Any] = None

    def on_run_start(self, run_name: str, config: Dict[str, Any]) -> None:
        self.run = wandb.init(
            project=self.project,
            entity=self.entity,
            group=self.group,
            name=run_name,
            config=config,
            mode=self.mode,
            reinit=True,
        )

    def on_episode_end(self, row: Dict[str, Any]) -> None:
        if self.run is not None:
            self.run.log(
                {
                    key: value
                    for key, value in row.items()
                    if not (isinstance(value, float) and math.isnan(value))
                }
            )

    def on_evaluation(self, step: int, episode: int, eval_return_norm: float) -> None:
        if self.run is not None:
            self.run.log(
                {"eval/return_norm": eval_return_norm, "eval/episode": episode, "step": step}
            )

    def on_run_end(self, record: Any) -> None:
        if self.run is None:
            return
        self.run.log({"run_record": wandb.Table(dataframe=record.frame)})
        self.run.finish()
        self.run = None
