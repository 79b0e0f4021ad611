import numpy as np
import pytest
import torch

from gradcheck import max_relative_error
from pointcil.config import ModelConfig
from pointcil.models.encoder import PointEncoder, TNet


def tiny_cfg(**overrides):
    base = dict(
        point_feat_dim=32,
        struct_feat_dim=16,
        embed_dim=8,
        encoder_channels=(8, 16),
        tnet_channels=(4, 8, 8),
        tnet_hidden=(8,),
        classifier_hidden=(8,),
        critic_channels=4,
        critic_state_fc=(8, 4),
        critic_policy_fc=4,
    )
    base.update(overrides)
    return ModelConfig(**base)


def test_output_shape():
    torch.manual_seed(0)
    enc = PointEncoder(tiny_cfg())
    out = enc(torch.randn(1, 4, 3))
    assert tuple(out.shape) == (1, 4, 32)


def test_identical_points_identical_rows():
    torch.manual_seed(1)
    enc = PointEncoder(tiny_cfg())
    pts = torch.randn(1, 6, 3)
    pts[0, 3] = pts[0, 1]  # duplicate a point
    out = enc(pts)
    assert torch.equal(out[0, 3], out[0, 1])


def test_permutation_equivariance():
    torch.manual_seed(2)
    enc = PointEncoder(tiny_cfg())
    pts = torch.randn(1, 10, 3)
    perm = torch.randperm(10)
    out = enc(pts)
    out_perm = enc(pts[:, perm])
    assert torch.allclose(out_perm, out[:, perm], atol=1e-5)


def test_two_alignment_blocks_present():
    enc = PointEncoder(tiny_cfg())
    assert isinstance(enc.input_transform, TNet)
    assert isinstance(enc.feature_transform, TNet)
    assert enc.input_transform.dim == 3
    assert enc.input_transform.head.out_features == 9


def test_tnet_near_identity_when_head_zeroed():
    torch.manual_seed(3)
    tnet = TNet(3, (4, 8, 8), (8,))
    with torch.no_grad():
        tnet.head.weight.zero_()
        tnet.head.bias.zero_()
    mat = tnet(torch.randn(2, 5, 3))
    assert torch.allclose(mat, torch.eye(3).expand(2, 3, 3))


def test_gradient_matches_finite_differences():
    torch.manual_seed(4)
    enc = PointEncoder(tiny_cfg(point_feat_dim=8, encoder_channels=(4, 8))).double()
    pts = torch.randn(2, 6, 3, dtype=torch.float64)
    weights = torch.randn(2, 6, 8, dtype=torch.float64)

    def scalar():
        return (enc(pts) * weights).sum()

    params = [p for p in enc.parameters()]
    err = max_relative_error(scalar, params, rng=np.random.default_rng(4))
    assert err < 1e-4, f"max relative error {err}"


def test_rejects_bad_shape():
    enc = PointEncoder(tiny_cfg())
    with pytest.raises(ValueError):
        enc(torch.randn(4, 3))
