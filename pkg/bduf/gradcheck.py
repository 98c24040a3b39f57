# This file is part of bduf: backdoor-based unlearning for dual encoders.
#
#    Copyright (c) 2026 and later, the bduf developers.
#    Distributed under the 3-clause BSD license, see LICENSE.txt.
###############################################################################
"""
Comparison of reverse-mode gradients against central finite differences,
and a generator of random composite graphs to exercise the primitives.
"""
import numpy as np

from bduf.errors import NonFiniteError
from bduf.tensor import (Tensor, Tape, backward, no_tape, matmul, add, mul,
                         scale, gelu, softmax, log_softmax, layer_norm,
                         l2_normalize, cosine_similarity, reduce_mean,
                         reduce_sum, transpose, sq_l2_distance, sqrt)

__all__ = ['GradCheckReport', 'grad_check', 'random_composite_graph']


class GradCheckReport(object):
    """
    Outcome of :func:`grad_check`.

    Attributes
    ----------
    passed : bool
        True if the worst relative error is below the tolerance.
    max_rel_error : float
        Worst relative error over the checked coordinates.
    worst : tuple
        (parameter index, flat coordinate, analytic, numeric) of the worst
        coordinate, or None if no coordinate was large enough to compare.
    n_checked : int
        Number of coordinates that entered the comparison.
    """

    def __init__(self, passed, max_rel_error, worst, n_checked, tolerance):
        self.passed = passed
        self.max_rel_error = max_rel_error
        self.worst = worst
        self.n_checked = n_checked
        self.tolerance = tolerance

    def __str__(self):
        s = "GradCheckReport: %s\n" % ("passed" if self.passed else "FAILED")
        s += ("max_rel_error = %.3e (tolerance %.1e), checked %d "
              "coordinates" % (self.max_rel_error, self.tolerance,
                               self.n_checked))
        if self.worst is not None:
            s += "\nworst: param %d, coord %d, analytic %.6e, numeric %.6e" \
                % self.worst
        return s

    def __repr__(self):
        return self.__str__()


def _loss_value(builder, params):
    with no_tape():
        value = builder(params).item()
    if not np.isfinite(value):
        raise NonFiniteError("loss is not finite at a perturbed point")
    return value


def grad_check(builder, params, tolerance=1e-4, step=1e-6,
               coords_per_param=None, rng=None):
    """
    Compares :func:`bduf.tensor.backward` against central differences.

    Parameters
    ----------
    builder : function
        ``builder(params)`` returns a scalar Tensor.  Must be deterministic.
    params : list of Tensor
        Parameters (leaf tensors with ``requires_grad=True``).  Use float64
        parameters for tight tolerances.
    tolerance : float
        Largest admissible relative error.
    step : float
        Relative perturbation; coordinate x is moved by
        ``step * max(1, |x|)``.
    coords_per_param : int
        If given, only this many randomly chosen coordinates of each
        parameter are perturbed.
    rng : numpy Generator
        Used to choose coordinates.

    Returns
    -------
    report : GradCheckReport
        Relative error ``|a - n| / max(|a|, |n|)`` is taken over the
        coordinates where ``|a| + |n| > 1e-8``.
    """
    with Tape() as tape:
        loss = builder(params)
    analytic = backward(tape, loss, params)
    if rng is None:
        rng = np.random.default_rng(0)

    worst = None
    max_err = 0.0
    n_checked = 0
    for pi, p in enumerate(params):
        flat = p.data.reshape(-1)
        ana = analytic[p.node_id].reshape(-1)
        if coords_per_param is not None and coords_per_param < flat.size:
            coords = rng.choice(flat.size, size=coords_per_param,
                                replace=False)
        else:
            coords = range(flat.size)
        for i in coords:
            orig = flat[i]
            h = step * max(1.0, abs(float(orig)))
            flat[i] = orig + h
            up = flat[i]
            fp = _loss_value(builder, params)
            flat[i] = orig - h
            down = flat[i]
            fm = _loss_value(builder, params)
            flat[i] = orig
            num = (fp - fm) / float(up - down)
            a = float(ana[i])
            if abs(a) + abs(num) <= 1e-8:
                continue
            n_checked += 1
            err = abs(a - num) / max(abs(a), abs(num))
            if err > max_err or worst is None:
                max_err = max(max_err, err)
                worst = (pi, int(i), a, num)

    return GradCheckReport(max_err < tolerance, max_err, worst, n_checked,
                           tolerance)


_UNARY = ('gelu', 'softmax', 'log_softmax', 'layer_norm', 'l2_normalize',
          'scale', 'transpose', 'mean')
_BINARY = ('matmul', 'add', 'mul')


def random_composite_graph(rng, depth=None, max_dim=8, dtype=np.float64):
    """
    Builds a random differentiable graph over the registered primitives.

    Parameters
    ----------
    rng : numpy Generator
        Source of randomness; the same generator state gives the same graph.
    depth : int
        Number of operations (default: random in 1..5).
    max_dim : int
        Largest dimension of any intermediate (at least 2).
    dtype : numpy dtype
        Precision of the parameters.

    Returns
    -------
    builder, params : function, list of Tensor
        Arguments for :func:`grad_check`.
    """
    if depth is None:
        depth = int(rng.integers(1, 6))

    def new_param(shape, fan_in=1):
        data = rng.standard_normal(shape) / np.sqrt(fan_in)
        return Tensor(data, requires_grad=True, dtype=dtype)

    n, m = [int(v) for v in rng.integers(2, max_dim + 1, size=2)]
    params = [new_param((n, m))]
    plan = []
    shape = (n, m)
    for level in range(depth):
        kind = str(rng.choice(_UNARY + _BINARY))
        if kind == 'matmul':
            k = int(rng.integers(2, max_dim + 1))
            params.append(new_param((shape[1], k), fan_in=shape[1]))
            plan.append((kind, len(params) - 1))
            shape = (shape[0], k)
        elif kind in ('add', 'mul'):
            params.append(new_param((shape[1],)))
            plan.append((kind, len(params) - 1))
        elif kind == 'scale':
            plan.append((kind, float(rng.uniform(-2.0, 2.0))))
        elif kind == 'transpose':
            plan.append((kind, None))
            shape = (shape[1], shape[0])
        elif kind == 'mean':
            plan.append((kind, None))
            shape = (1, shape[1])
        else:
            plan.append((kind, None))

    readout = rng.standard_normal(shape).astype(dtype)
    probe = rng.standard_normal(shape[-1]).astype(dtype)
    anchor = Tensor(params[-1].data + rng.standard_normal(params[-1].shape),
                    dtype=dtype)
    last = len(params) - 1

    def builder(ps):
        h = ps[0]
        for kind, arg in plan:
            if kind == 'matmul':
                h = matmul(h, ps[arg])
            elif kind == 'add':
                h = add(h, ps[arg])
            elif kind == 'mul':
                h = mul(h, ps[arg])
            elif kind == 'scale':
                h = scale(h, arg)
            elif kind == 'transpose':
                h = transpose(h)
            elif kind == 'mean':
                h = reduce_mean(h, axis=0, keepdims=True)
            elif kind == 'gelu':
                h = gelu(h)
            elif kind == 'softmax':
                h = softmax(h)
            elif kind == 'log_softmax':
                h = log_softmax(h)
            elif kind == 'layer_norm':
                h = layer_norm(h)
            elif kind == 'l2_normalize':
                h = l2_normalize(h)
        out = reduce_sum(mul(h, readout))
        out = add(out, reduce_mean(cosine_similarity(h, probe)))
        out = add(out, sqrt(sq_l2_distance([ps[last]], [anchor])))
        return out

    return builder, params
