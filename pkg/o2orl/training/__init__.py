# pylint: disable = missing-module-docstring
from o2orl.training.finetune import (
    AgentStrategy,
    FinetuneContext,
    FinetuneSettings,
    FinetuneStrategy,
    PEXStrategy,
    run_finetune,
)
from o2orl.training.offline import OFFLINE_CURVE_COLUMNS, OfflineSettings, train_offline
from o2orl.training.rollout import evaluate_policy, evaluation_mode, run_episode
from o2orl.training.run_record import (
    BASE_COLUMNS,
    ESTIMATE_COLUMNS,
    GUIDE_COLUMNS,
    MetricSource,
    RunRecord,
    validate_run_record,
)
