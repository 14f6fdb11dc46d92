"""File contains unit tests of the composite jump-start policy."""
import numpy as np
import pytest
import torch

from o2orl.approx import CategoricalPolicyHead, GaussianPolicyHead
from o2orl.env import ActionSpace
from o2orl.jumpstart import CompositePolicy, js_policy, uses_guide


def constant_head(probs) -> CategoricalPolicyHead:
    """Categorical head returning `probs` for every state."""
    head = CategoricalPolicyHead(2, len(probs), hidden=())
    with torch.no_grad():
        head.body.layers[-1].weight.zero_()
        head.body.layers[-1].bias.copy_(torch.log(torch.tensor(probs)))
    return head


@pytest.mark.parametrize(
    "t, h, expected",
    [(1, 0.0, False), (1, 1.0, True), (3, 3.0, True), (3, 3.9, True), (4, 3.9, False)],
)
def test_uses_guide_up_to_floor_of_h(t: int, h: float, expected: bool) -> None:
    assert uses_guide(t, h) is expected


def test_js_policy_switches_actor_after_guide_step() -> None:
    """Deterministic acting returns the guide mode up to floor(h), the explorer mode after."""
    composite = CompositePolicy(constant_head([0.9, 0.1]), constant_head([0.1, 0.9]), h=2.5)
    state = np.zeros(2)
    actions = [
        float(js_policy(composite, state, t, 2.5, deterministic=True)[0]) for t in (1, 2, 3)
    ]
    assert actions == [0.0, 0.0, 1.0]


def test_zero_guide_step_uses_explorer_only() -> None:
    composite = CompositePolicy(constant_head([0.99, 0.01]), constant_head([0.01, 0.99]), h=0.0)
    assert composite.select(1) is composite.explorer


def test_action_probs_mix_rows_by_time() -> None:
    composite = CompositePolicy(constant_head([0.8, 0.2]), constant_head([0.3, 0.7]), h=1.0)
    probs = composite.action_probs(torch.zeros(3, 2), torch.tensor([0, 1, 2]), h=1.0)
    torch.testing.assert_close(
        probs, torch.tensor([[0.8, 0.2], [0.8, 0.2], [0.3, 0.7]]), atol=1e-6, rtol=0
    )


def test_continuous_sample_mixes_rows_by_time() -> None:
    space = ActionSpace.continuous_space(1, -1.0, 1.0)
    guide = GaussianPolicyHead(2, space, (4,), torch.Generator().manual_seed(0))
    explorer = GaussianPolicyHead(2, space, (4,), torch.Generator().manual_seed(1))
    composite = CompositePolicy(guide, explorer, h=1.0)
    states = torch.zeros(2, 2)
    actions = composite.sample(
        states, torch.tensor([1, 2]), 1.0, torch.Generator().manual_seed(3)
    ).detach()
    noise = guide.draw_noise(2, torch.Generator().manual_seed(3))
    guide_actions, _ = guide.sample(states, noise)
    explorer_actions, _ = explorer.sample(states, noise)
    torch.testing.assert_close(actions[0], guide_actions[0].detach())
    torch.testing.assert_close(actions[1], explorer_actions[1].detach())
