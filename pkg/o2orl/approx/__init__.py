# pylint: disable = missing-module-docstring
from o2orl.approx.heads import (
    CategoricalPolicyHead,
    GaussianPolicyHead,
    Policy,
    make_policy,
)
from o2orl.approx.networks import (
    MLP,
    CriticEnsemble,
    OptimisticRegion,
    QNetwork,
    ValueNetwork,
    flat_parameters,
    load_flat_parameters,
)
from o2orl.approx.optim import (
    adam_step,
    check_gradients,
    flat_grad,
    make_optimizer,
    minimize,
    polyak_update,
)
