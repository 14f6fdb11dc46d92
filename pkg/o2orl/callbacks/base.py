"""Callback hooks of the fine-tuning loop."""
from typing import Any, Dict


class Callback:
    """Base callback; every hook is a no-op."""

    def on_run_start(self, run_name: str, config: Dict[str, Any]) -> None:
        """Called once before the initial evaluation."""

    def on_episode_end(self, row: Dict[str, Any]) -> None:
        """Called with each finished run-record row."""

    def on_evaluation(self, step: int, episode: int, eval_return_norm: float) -> None:
        """Called after each periodic frozen-policy evaluation."""

    def on_run_end(self, record: Any) -> None:
        """Called with the complete RunRecord."""
