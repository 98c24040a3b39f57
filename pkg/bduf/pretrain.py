# This file is part of bduf: backdoor-based unlearning for dual encoders.
#
#    Copyright (c) 2026 and later, the bduf developers.
#    Distributed under the 3-clause BSD license, see LICENSE.txt.
###############################################################################
"""
Contrastive pretraining of the victim dual encoder.
"""
import warnings

import numpy as np

import bduf.settings as settings
from bduf.encoders import DualEncoder
from bduf.errors import NonFiniteError, ShapeError
from bduf.optim import AdamWState, LrSchedule, adamw_step, no_decay_params
from bduf.options import ModelConfig, PretrainConfig
from bduf.results import TrainingLog
from bduf.seeding import derived_seed, step_rng
from bduf.tensor import (Tensor, Tape, backward, matmul, transpose, mul,
                         scale, exp, neg, log_softmax, reduce_sum, add)
from bduf.ui.progressbar import make_progress_bar

__all__ = ['clip_contrastive_loss', 'pretrain']


def _check_unit_rows(x, which):
    norms = np.sqrt(np.sum(x.data.astype(np.float64) ** 2, axis=-1))
    bad = np.abs(norms - 1.0) > max(settings.atol, 1e-5)
    if np.any(bad):
        raise ValueError("clip_contrastive_loss: %s row %d has norm %.6f, "
                         "expected unit norm" % (which, int(np.argmax(bad)),
                                                 norms[np.argmax(bad)]))


def clip_contrastive_loss(text_embs, image_embs, temperature):
    """
    Symmetric cross-entropy over the cosine-similarity logits of a batch of
    matching (text, image) pairs.

    Parameters
    ----------
    text_embs, image_embs : Tensor, shape (B, l)
        Unit-norm embeddings; row i of each is a positive pair.
    temperature : float or Tensor
        Softmax temperature.  A scalar Tensor is read as the learnable
        log-temperature.

    Returns
    -------
    loss : Tensor
        Scalar loss; ln B when all similarities are equal.
    """
    if text_embs.ndim != 2 or text_embs.shape != image_embs.shape:
        raise ShapeError('clip_contrastive_loss', "embedding batches have "
                         "shapes %s and %s" % (text_embs.shape,
                                               image_embs.shape))
    B = text_embs.shape[0]
    if B < 2:
        raise ValueError("clip_contrastive_loss: batch size must be at "
                         "least 2, got %d" % B)
    _check_unit_rows(text_embs, 'text')
    _check_unit_rows(image_embs, 'image')

    sims = matmul(text_embs, transpose(image_embs))
    if isinstance(temperature, Tensor):
        logits = mul(sims, exp(neg(temperature)))
    else:
        if temperature <= 0:
            raise ValueError("temperature must be positive")
        logits = scale(sims, 1.0 / temperature)
    eye = np.eye(B, dtype=text_embs.dtype)
    per_text = reduce_sum(mul(log_softmax(logits), eye))
    per_image = reduce_sum(mul(log_softmax(transpose(logits)), eye))
    return scale(add(per_text, per_image), -0.5 / B)


def pretrain(dataset, config=None, model_config=None, seed=0, model=None,
             progress_bar=None):
    """
    Trains a dual encoder on caption/image pairs.

    Parameters
    ----------
    dataset : PairDataset
        Pretraining pairs.
    config : PretrainConfig
        Steps, batch size and optimizer settings.
    model_config : ModelConfig
        Dimensions of a freshly initialized model.
    seed : int
        Pretraining stream seed.  Fixes initialization and every batch.
    model : DualEncoder
        Start from this model instead (trained in place).
    progress_bar : bool or BaseProgressBar
        Progress output; defaults to `settings.show_progress`.

    Returns
    -------
    model : DualEncoder
        The victim.
    log : TrainingLog
        Contrastive loss and temperature per step.
    """
    if config is None:
        config = PretrainConfig()
    if model is None:
        model = DualEncoder(model_config or ModelConfig(),
                            seed=derived_seed(seed, 'init'))
    N = len(dataset)
    B = min(config.batch_size, N)
    if config.steps > 0 and B < 2:
        raise ValueError("pretrain: dataset holds %d pairs, need at least "
                         "2" % N)

    params = model.parameters()
    state = AdamWState(params, lr=config.lr,
                       weight_decay=config.weight_decay,
                       no_decay=no_decay_params(params))
    schedule = LrSchedule(config.lr)
    log = TrainingLog('pretrain', ['loss', 'temperature'])
    pbar = make_progress_bar(progress_bar, config.steps, label="pretrain")
    clamped = False

    for step in range(config.steps):
        rng = step_rng(seed, step)
        idx = rng.choice(N, size=B, replace=False)
        captions, images = dataset.batch(idx)
        with Tape() as tape:
            t = model.encode_text(captions)
            i = model.encode_image(images)
            loss = clip_contrastive_loss(t, i, model.log_temperature)
        value = loss.item()
        if not np.isfinite(value):
            raise NonFiniteError("pretrain: non-finite contrastive loss",
                                 step=step)
        grads = backward(tape, loss, params)
        adamw_step(params, grads, state, schedule)
        if model.clamp_temperature() and not clamped:
            clamped = True
            warnings.warn("pretrain: temperature clamped to [0.01, 1] at "
                          "step %d" % step)
        log.append(step, loss=value, temperature=model.temperature)
        pbar.update(step + 1, loss=value)
        if settings.debug and step % 100 == 0:
            print("pretrain: step %d loss %.5f temperature %.4f"
                  % (step, value, model.temperature))
    pbar.finished()
    return model, log
