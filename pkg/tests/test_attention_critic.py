import numpy as np
import pytest
import torch

from gradcheck import max_relative_error
from pointcil.models.attention import GeometricAttention, global_pool
from pointcil.models.critic import (
    CriticNetwork,
    amelioration_reward,
    classification_reward,
    compute_rewards,
    critic_loss,
    regression_loss,
)


def make_attention(d_s=8, ratio=4, dtype=torch.float64, seed=0):
    torch.manual_seed(seed)
    return GeometricAttention(d_s, ratio).to(dtype)


def make_critic(d_s=8, L=4, dtype=torch.float64, seed=0):
    torch.manual_seed(seed)
    return CriticNetwork(d_s, L, channels=4, state_fc=(8, 4), policy_fc=4).to(dtype)


# ---------------------------------------------------------------------------
# geometric attention


def test_forced_zero_gate_is_identity():
    att = make_attention()
    with torch.no_grad():
        att.up.bias.fill_(-1e9)  # sigmoid underflows to exactly 0
        att.up.weight.zero_()
    f_m = torch.randn(2, 4, 8, dtype=torch.float64)
    gate, f_p = att(f_m)
    assert torch.equal(gate, torch.zeros_like(gate))
    assert torch.equal(f_p, f_m)


def test_zero_init_gives_half_gate():
    att = make_attention()
    with torch.no_grad():
        for p in att.parameters():
            p.zero_()
    f_m = torch.randn(2, 4, 8, dtype=torch.float64)
    gate, f_p = att(f_m)
    assert torch.allclose(gate, torch.full_like(gate, 0.5))
    assert torch.allclose(f_p, 1.5 * f_m, atol=1e-12)


def test_gate_strictly_inside_unit_interval():
    att = make_attention(seed=3)
    gate, _ = att(torch.randn(4, 6, 8, dtype=torch.float64) * 3)
    assert (gate > 0).all() and (gate < 1).all()


def test_residual_identity_invariant():
    att = make_attention(seed=4)
    f_m = torch.randn(3, 4, 8, dtype=torch.float64)
    gate, f_p = att(f_m)
    assert torch.allclose(f_p - f_m, gate * f_m, atol=1e-12)


def test_ratio_must_divide():
    with pytest.raises(ValueError):
        GeometricAttention(10, 4)


def test_attention_gradients():
    att = make_attention(seed=5)
    f_m = torch.randn(2, 4, 8, dtype=torch.float64)
    weights = torch.randn(2, 4, 8, dtype=torch.float64)

    def scalar():
        _, f_p = att(f_m)
        return (f_p * weights).sum()

    err = max_relative_error(scalar, list(att.parameters()), rng=np.random.default_rng(5))
    assert err < 1e-4, f"max relative error {err}"


# ---------------------------------------------------------------------------
# pooling


def test_pool_hand_case():
    rows = torch.tensor([[1.0, 5.0], [3.0, 2.0]], dtype=torch.float64)
    assert torch.equal(global_pool(rows), torch.tensor([3.0, 5.0], dtype=torch.float64))


def test_pool_single_row_identity():
    row = torch.randn(1, 7, dtype=torch.float64)
    assert torch.equal(global_pool(row), row[0])


def test_pool_permutation_invariant():
    x = torch.randn(5, 6, dtype=torch.float64)
    perm = torch.randperm(5)
    assert torch.equal(global_pool(x), global_pool(x[perm]))


# ---------------------------------------------------------------------------
# critic network


def test_critic_deterministic():
    critic = make_critic(seed=6)
    f_p = torch.randn(3, 4, 8, dtype=torch.float64)
    a_m = torch.rand(3, 4, 8, dtype=torch.float64)
    assert torch.equal(critic(f_p, a_m), critic(f_p, a_m))


def test_critic_policy_branch_connected():
    critic = make_critic(seed=7)
    f_p = torch.randn(2, 4, 8, dtype=torch.float64)
    a_m = torch.rand(2, 4, 8, dtype=torch.float64, requires_grad=True)
    v = critic(f_p, a_m).sum()
    (grad,) = torch.autograd.grad(v, a_m)
    assert grad.abs().sum() > 0


def test_critic_shape_mismatch():
    critic = make_critic()
    with pytest.raises(ValueError):
        critic(torch.randn(2, 4, 8, dtype=torch.float64), torch.randn(2, 3, 8, dtype=torch.float64))


def test_critic_gradients():
    critic = make_critic(seed=8)
    f_p = torch.randn(2, 4, 8, dtype=torch.float64)
    a_m = torch.rand(2, 4, 8, dtype=torch.float64)

    def scalar():
        return critic(f_p, a_m).sum()

    err = max_relative_error(scalar, list(critic.parameters()), rng=np.random.default_rng(8))
    assert err < 1e-4, f"max relative error {err}"


def test_detached_inputs_block_upstream_gradients():
    att = make_attention(seed=9)
    critic = make_critic(seed=9)
    f_m = torch.randn(2, 4, 8, dtype=torch.float64)
    gate, f_p = att(f_m)
    rewards = torch.tensor([1.0, 2.0], dtype=torch.float64)
    l_reg = regression_loss(critic(f_p, gate, detach_inputs=True), rewards)
    grads = torch.autograd.grad(l_reg, list(att.parameters()), allow_unused=True)
    assert all(g is None for g in grads)


def test_minimizing_critic_loss_raises_gain():
    critic = make_critic(seed=10)
    f_p = torch.randn(2, 4, 8, dtype=torch.float64)
    a_m = torch.rand(2, 4, 8, dtype=torch.float64)
    with torch.no_grad():
        v_before = float(critic(f_p, a_m).mean())
    opt = torch.optim.SGD([critic.fuse.bias], lr=0.1)
    loss = critic_loss(critic(f_p, a_m))
    opt.zero_grad()
    loss.backward()
    opt.step()
    with torch.no_grad():
        v_after = float(critic(f_p, a_m).mean())
    assert v_after > v_before


# ---------------------------------------------------------------------------
# losses and rewards


def test_critic_loss_cases():
    assert float(critic_loss(torch.tensor([0.5]))) == pytest.approx(-0.5)
    assert float(critic_loss(torch.tensor([1.0, -1.0]))) == pytest.approx(0.0)
    assert float(critic_loss(torch.tensor([2.0, 4.0]))) == pytest.approx(-3.0)
    with pytest.raises(ValueError):
        critic_loss(torch.empty(0))


def test_classification_reward_cases():
    assert classification_reward(np.array([0.1, 0.7, 0.2]), 1) == 1
    assert classification_reward(np.array([0.6, 0.3, 0.1]), 1) == 0
    assert classification_reward(np.array([1.0]), 0) == 1  # single class
    # argmax tie broken toward the smaller index
    assert classification_reward(np.array([0.5, 0.5]), 0) == 1
    assert classification_reward(np.array([0.5, 0.5]), 1) == 0


def test_amelioration_reward_cases():
    assert amelioration_reward(0.8, 0.6) == 1
    assert amelioration_reward(0.6, 0.6) == 0  # strict inequality
    assert amelioration_reward(0.2, 0.9) == 0


def test_rewards_in_range():
    rng = np.random.default_rng(11)
    for _ in range(50):
        k = int(rng.integers(1, 6))
        n = int(rng.integers(1, 8))
        pw = rng.dirichlet(np.ones(k), size=n)
        po = rng.dirichlet(np.ones(k), size=n)
        labels = rng.integers(0, k, size=n)
        r = compute_rewards(pw, po, labels)
        assert set(np.unique(r)) <= {0.0, 1.0, 2.0}


def test_regression_loss_cases():
    assert float(regression_loss(torch.tensor([2.0]), torch.tensor([2.0]))) == 0.0
    assert float(regression_loss(torch.tensor([0.0]), torch.tensor([2.0]))) == pytest.approx(4.0)
    assert float(
        regression_loss(torch.tensor([1.0, 3.0]), torch.tensor([2.0, 2.0]))
    ) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        regression_loss(torch.tensor([1.0]), torch.tensor([1.0, 2.0]))


def test_regression_loss_nonnegative_zero_iff_exact():
    rng = np.random.default_rng(12)
    for _ in range(20):
        v = torch.tensor(rng.normal(size=5))
        r = torch.tensor(rng.integers(0, 3, size=5).astype(np.float64))
        loss = float(regression_loss(v, r))
        assert loss >= 0.0
        assert (loss == 0.0) == bool(torch.equal(v, r))
