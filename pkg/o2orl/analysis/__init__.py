# pylint: disable = missing-module-docstring
from o2orl.analysis.diagnostics import (
    DEFAULT_LAMBDAS,
    critic_estimate,
    linear_interp_eval,
    pca2,
    q_estimate_gap,
    true_return_estimate,
    value_shift,
)
