# pylint: disable = missing-module-docstring
from o2orl.callbacks.base import Callback
from o2orl.callbacks.wandb_callback import WandBCallback
