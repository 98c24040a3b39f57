# This file is part of bduf: backdoor-based unlearning for dual encoders.
#
#    Copyright (c) 2026 and later, the bduf developers.
#    Distributed under the 3-clause BSD license, see LICENSE.txt.
###############################################################################
"""
AdamW with decoupled weight decay and a milestone learning-rate schedule.
"""
import numpy as np

from bduf.errors import ShapeError

__all__ = ['LrSchedule', 'AdamWState', 'adamw_step', 'no_decay_params']


class LrSchedule(object):
    """
    Piecewise-constant learning rate.  The rate at step ``s`` is
    ``base_lr * multiplier ** k`` where ``k`` is the number of milestones
    that are ``<= s``.

    Parameters
    ----------
    base_lr : float
        Rate before the first milestone.
    milestones : list of int
        Step indices at which the rate changes.
    multiplier : float
        Factor applied at each milestone.
    """

    def __init__(self, base_lr, milestones=(), multiplier=1.0):
        if base_lr <= 0:
            raise ValueError("base_lr must be positive")
        if multiplier <= 0:
            raise ValueError("multiplier must be positive")
        self.base_lr = float(base_lr)
        self.milestones = sorted(int(m) for m in milestones)
        self.multiplier = float(multiplier)

    def rate(self, step):
        k = sum(1 for m in self.milestones if m <= step)
        return self.base_lr * self.multiplier ** k

    def __str__(self):
        return "LrSchedule(base_lr=%g, milestones=%s, multiplier=%g)" % (
            self.base_lr, self.milestones, self.multiplier)

    def __repr__(self):
        return str(self)


class AdamWState(object):
    """
    Moment accumulators and hyperparameters of the AdamW optimizer.

    Parameters
    ----------
    params : list of Tensor
        Parameters that will be updated.
    lr : float
        Nominal learning rate (the schedule passed to :func:`adamw_step`
        decides the rate actually used).
    beta1, beta2 : float
        Decay rates of the first and second moment estimates.
    eps : float
        Denominator offset.
    weight_decay : float
        Decoupled weight decay coefficient.
    no_decay : list of Tensor
        Parameters that are never decayed.
    """

    def __init__(self, params, lr=1e-4, beta1=0.9, beta2=0.999, eps=1e-8,
                 weight_decay=0.0, no_decay=()):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.weight_decay = weight_decay
        self.no_decay = set(p.node_id for p in no_decay)
        self.step = 0
        self.m = dict((p.node_id, np.zeros_like(p.data)) for p in params)
        self.v = dict((p.node_id, np.zeros_like(p.data)) for p in params)


def adamw_step(params, grads, state, schedule):
    """
    Applies one AdamW update in place.

    The learning rate is ``schedule.rate(state.step)`` taken before the step
    counter is incremented, so the first update uses the base rate.  Weight
    decay is decoupled: each parameter is first scaled by
    ``1 - lr * weight_decay``, independently of its gradient.

    Parameters
    ----------
    params : list of Tensor
        Parameters to update.
    grads : dict
        Gradients keyed by parameter node id.
    state : AdamWState
        Optimizer state, updated in place.
    schedule : LrSchedule
        Learning-rate schedule.

    Returns
    -------
    params : list of Tensor
        The updated parameters.
    """
    lr = schedule.rate(state.step)
    state.step += 1
    t = state.step
    b1, b2 = state.beta1, state.beta2
    bc1 = 1.0 - b1 ** t
    bc2 = 1.0 - b2 ** t

    for p in params:
        g = grads[p.node_id]
        m = state.m[p.node_id]
        v = state.v[p.node_id]
        if g.shape != p.shape or m.shape != p.shape or v.shape != p.shape:
            raise ShapeError('adamw_step', "parameter %s has shape %s, "
                             "gradient %s, moments %s/%s"
                             % (p.name, p.shape, g.shape, m.shape, v.shape))
        g64 = g.astype(np.float64)
        m64 = b1 * m + (1.0 - b1) * g64
        v64 = b2 * v + (1.0 - b2) * g64 * g64
        state.m[p.node_id] = m64.astype(p.dtype)
        state.v[p.node_id] = v64.astype(p.dtype)
        update = (m64 / bc1) / (np.sqrt(v64 / bc2) + state.eps)
        wd = 0.0 if p.node_id in state.no_decay else state.weight_decay
        p64 = p.data.astype(np.float64) * (1.0 - lr * wd)
        p.data[...] = (p64 - lr * update).astype(p.dtype)

    return params


def no_decay_params(params):
    """
    Scalars and vectors (biases, norm gains, the log-temperature), which
    are left out of weight decay.
    """
    return [p for p in params if p.data.ndim < 2]
