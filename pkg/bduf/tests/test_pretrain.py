# This file is part of bduf: backdoor-based unlearning for dual encoders.
#
#    Copyright (c) 2026 and later, the bduf developers.
#    Distributed under the 3-clause BSD license, see LICENSE.txt.
###############################################################################
import numpy as np
from numpy.testing import (assert_, assert_equal, assert_allclose,
                           assert_raises)

from bduf.corpus import build_pretrain_dataset
from bduf.encoders import weight_distance
from bduf.errors import ShapeError
from bduf.options import PretrainConfig
from bduf.pretrain import clip_contrastive_loss, pretrain
from bduf.tensor import Tensor

from bduf.tests.common import tiny_cohort, tiny_model_config


def unit_rows(x):
    x = np.asarray(x, dtype=np.float64)
    return Tensor(x / np.linalg.norm(x, axis=1, keepdims=True))


def test_loss_equal_similarities():
    "pretrain: loss is ln B when every similarity is equal"
    for B in (2, 5, 16):
        e = unit_rows(np.ones((B, 4)))
        loss = clip_contrastive_loss(e, e, 0.07)
        assert_allclose(loss.item(), np.log(B), rtol=1e-10)


def test_loss_perfect_alignment():
    "pretrain: orthonormal pairs at low temperature give a small loss"
    e = Tensor(np.eye(4))
    assert_(clip_contrastive_loss(e, e, 0.01).item() < 1e-6)
    assert_(clip_contrastive_loss(e, Tensor(np.eye(4)[::-1]),
                                  0.01).item() > 10)


def test_loss_symmetric():
    "pretrain: swapping text and image rows gives the same loss"
    rng = np.random.default_rng(0)
    t, i = unit_rows(rng.standard_normal((6, 5))), \
        unit_rows(rng.standard_normal((6, 5)))
    assert_allclose(clip_contrastive_loss(t, i, 0.1).item(),
                    clip_contrastive_loss(i, t, 0.1).item())


def test_loss_log_temperature():
    "pretrain: a Tensor temperature is read as log-temperature"
    rng = np.random.default_rng(1)
    t, i = unit_rows(rng.standard_normal((4, 3))), \
        unit_rows(rng.standard_normal((4, 3)))
    lt = Tensor(np.array(np.log(0.2)))
    assert_allclose(clip_contrastive_loss(t, i, lt).item(),
                    clip_contrastive_loss(t, i, 0.2).item())


def test_loss_checks():
    "pretrain: batch size, shapes and unit norm are checked"
    e = unit_rows(np.ones((1, 4)))
    assert_raises(ValueError, clip_contrastive_loss, e, e, 0.07)
    a, b = unit_rows(np.ones((3, 4))), unit_rows(np.ones((2, 4)))
    assert_raises(ShapeError, clip_contrastive_loss, a, b, 0.07)
    raw = Tensor(np.ones((3, 4)))
    assert_raises(ValueError, clip_contrastive_loss, raw, raw, 0.07)
    assert_raises(ValueError, clip_contrastive_loss, a, a, 0.0)


def _tiny_data():
    return build_pretrain_dataset(tiny_cohort(members=2, decoys=1), 2, 2, 6,
                                  2, seed=0)


def test_pretrain_runs():
    "pretrain: a few steps log finite losses and change the weights"
    data = _tiny_data()
    cfg = PretrainConfig(steps=3, batch_size=4)
    model, log = pretrain(data, cfg, tiny_model_config(), seed=1)
    assert_equal(len(log), 3)
    assert_(np.all(np.isfinite(log.column('loss'))))
    fresh, _ = pretrain(data, PretrainConfig(steps=0), tiny_model_config(),
                        seed=1)
    assert_(weight_distance(model, fresh) > 0)
    assert_(0.01 <= model.temperature <= 1.0)


def test_pretrain_deterministic():
    "pretrain: same seed gives identical weights"
    data = _tiny_data()
    cfg = PretrainConfig(steps=2, batch_size=4)
    a, la = pretrain(data, cfg, tiny_model_config(), seed=3)
    b, lb = pretrain(data, cfg, tiny_model_config(), seed=3)
    assert_equal(weight_distance(a, b), 0.0)
    assert_equal(la.values, lb.values)


def test_pretrain_small_dataset():
    "pretrain: fewer than two pairs cannot form a batch"
    data = build_pretrain_dataset(tiny_cohort(members=1, decoys=0), 1, 1, 0,
                                  1, seed=0)
    assert_raises(ValueError, pretrain, data,
                  PretrainConfig(steps=1, batch_size=4), tiny_model_config())
