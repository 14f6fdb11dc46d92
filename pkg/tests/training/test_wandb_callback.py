"""File contains unit tests of the W&B callback."""
from unittest import mock

import numpy as np

from o2orl.callbacks import WandBCallback
from o2orl.training import RunRecord


@mock.patch("o2orl.callbacks.wandb_callback.wandb")
def test_rows_are_logged_without_missing_values(wandb_module: mock.MagicMock) -> None:
    callback = WandBCallback(project="o2orl", group="sac-abc", mode="disabled")
    callback.on_run_start("sac", {"seed": 0})
    wandb_module.init.assert_called_once()
    assert wandb_module.init.call_args.kwargs["group"] == "sac-abc"

    run = wandb_module.init.return_value
    callback.on_episode_end({"step": 10, "return_norm": 0.4, "eval_return_norm": np.nan})
    run.log.assert_called_with({"step": 10, "return_norm": 0.4})

    callback.on_run_end(RunRecord())
    run.finish.assert_called_once()
    assert callback.run is None


def test_hooks_are_no_ops_before_start() -> None:
    callback = WandBCallback(project="o2orl")
    callback.on_episode_end({"step": 1})
    callback.on_evaluation(1, 1, 0.5)
    callback.on_run_end(RunRecord())
    assert callback.run is None
