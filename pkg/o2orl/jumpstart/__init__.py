# pylint: disable = missing-module-docstring
from o2orl.jumpstart.ajs import (
    AJSStrategy,
    ExplorerUpdate,
    GuideRule,
    GuideUpdate,
    JumpStartSettings,
    JumpStartStrategy,
    ajs_run,
    build_ajs_strategy,
)
from o2orl.jumpstart.fqe import FQE, fqe_estimate, fqe_train
from o2orl.jumpstart.policy import CompositePolicy, js_policy, uses_guide
from o2orl.jumpstart.schedule import (
    JumpStartState,
    Schedule,
    ajs_episode_end,
    fixed_schedule_h,
    jsrl_update_h,
    reduction_step,
)
