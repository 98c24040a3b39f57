# This file is part of bduf: backdoor-based unlearning for dual encoders.
#
#    Copyright (c) 2026 and later, the bduf developers.
#    Distributed under the 3-clause BSD license, see LICENSE.txt.
###############################################################################
"""
Minimal reverse-mode automatic differentiation.

The :class:`Tensor` class wraps a dense numpy array.  Operations on tensors are
dispatched through a registry of primitives; while a :class:`Tape` is active,
every primitive application with at least one input that requires a gradient
is recorded, and :func:`backward` replays the records in reverse to produce
gradients for the leaf tensors (the parameters).

Example::

    x = Tensor([1.0, 2.0], requires_grad=True)
    with Tape() as tape:
        loss = reduce_sum(mul(x, x))
    grads = backward(tape, loss)
    grads[x.node_id]   # array([2., 4.])

"""
import itertools
import warnings

import numpy as np

import bduf.settings as settings
from bduf.errors import ShapeError, NonFiniteError, TapeError

__all__ = ['Tensor', 'Tape', 'TapeRecord', 'apply_primitive', 'backward',
           'register_primitive', 'primitive_kinds', 'no_tape',
           'matmul', 'add', 'sub', 'mul', 'scale', 'neg', 'gelu', 'exp',
           'sqrt', 'softmax', 'log_softmax', 'layer_norm', 'reduce_mean',
           'reduce_sum', 'l2_normalize', 'cosine_similarity',
           'sq_l2_distance', 'embedding', 'transpose', 'reshape']

_node_ids = itertools.count(1)
_active_tapes = []


class Tensor(object):
    """
    A dense real-valued array that can take part in a gradient tape.

    Parameters
    ----------
    data : array_like
        Values of the tensor.  Float32 and float64 numpy input keeps its
        precision; everything else is stored as float32.
    requires_grad : bool
        Whether gradients should be computed for this tensor.  Leaf tensors
        with ``requires_grad=True`` are the parameters of a model.
    dtype : numpy dtype
        Override the storage precision.
    name : str
        Optional label, used in error messages.

    Attributes
    ----------
    data : ndarray
        C-contiguous storage.
    node_id : int or None
        Handle identifying the tensor on a tape.  Present whenever
        ``requires_grad`` is true.
    """
    __array_priority__ = 100

    def __init__(self, data, requires_grad=False, dtype=None, name=None):
        if isinstance(data, Tensor):
            data = data.data
        if dtype is None:
            # python scalars and lists default to float32
            if (isinstance(data, (np.ndarray, np.generic)) and
                    data.dtype in (np.float32, np.float64)):
                dtype = data.dtype
            else:
                dtype = np.float32
        self.data = np.ascontiguousarray(data, dtype=dtype)
        self.requires_grad = bool(requires_grad)
        self.node_id = next(_node_ids) if self.requires_grad else None
        self.name = name

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    @property
    def dtype(self):
        return self.data.dtype

    def item(self):
        if self.data.size != 1:
            raise ShapeError('item', "tensor of shape %s is not a scalar"
                             % (self.shape,))
        return float(self.data.reshape(-1)[0])

    def numpy(self):
        return self.data

    def detach(self):
        """A copy of this tensor that does not require gradients."""
        return Tensor(self.data.copy(), dtype=self.dtype)

    def __repr__(self):
        s = "Tensor(shape=%s, dtype=%s" % (self.shape, self.dtype)
        if self.requires_grad:
            s += ", requires_grad=True, node_id=%d" % self.node_id
        if self.name:
            s += ", name=%s" % self.name
        return s + ")"

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return scale(self, other)
        return mul(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, float)):
            return scale(self, other)
        return mul(other, self)

    def __truediv__(self, other):
        if isinstance(other, (int, float)):
            return scale(self, 1.0 / other)
        raise TypeError("Tensors can only be divided by a python scalar")

    def __neg__(self):
        return scale(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)


class TapeRecord(object):
    """One application of a primitive."""
    __slots__ = ('kind', 'inputs', 'output', 'saved', 'attrs')

    def __init__(self, kind, inputs, output, saved, attrs):
        self.kind = kind
        self.inputs = inputs
        self.output = output
        self.saved = saved
        self.attrs = attrs

    @property
    def input_ids(self):
        return [t.node_id for t in self.inputs]

    @property
    def output_id(self):
        return self.output.node_id

    def __repr__(self):
        return "TapeRecord(%s, inputs=%s, output=%s)" % (
            self.kind, self.input_ids, self.output_id)


class Tape(object):
    """
    Ordered record of primitive applications.

    A tape becomes active inside a ``with`` block.  Records are appended in
    execution order, so every record's inputs precede it.  A tape can be
    differentiated once; :func:`backward` marks it consumed.
    """

    def __init__(self):
        self.records = []
        self.consumed = False
        self._produced = set()
        self._leaves = {}

    def __enter__(self):
        _active_tapes.append(self)
        return self

    def __exit__(self, *exc):
        _active_tapes.remove(self)
        return False

    def __len__(self):
        return len(self.records)

    def _record(self, kind, inputs, output, saved, attrs):
        if self.consumed:
            raise TapeError("cannot record on a consumed tape")
        for t in inputs:
            if t.requires_grad and t.node_id not in self._produced:
                self._leaves[t.node_id] = t
        self._produced.add(output.node_id)
        self.records.append(TapeRecord(kind, inputs, output, saved, attrs))

    @property
    def leaf_ids(self):
        return list(self._leaves.keys())

    def replay(self):
        """
        Recompute every recorded forward value from the leaves and constants
        and return them keyed by output node id.
        """
        if self.consumed:
            raise TapeError("cannot replay a consumed tape")
        values = {}
        for rec in self.records:
            datas = [values.get(t.node_id, t.data) if t.requires_grad
                     else t.data for t in rec.inputs]
            out, _ = _PRIMITIVES[rec.kind].forward(datas, **rec.attrs)
            values[rec.output_id] = out
        return values


def _active_tape():
    return _active_tapes[-1] if _active_tapes else None


class no_tape(object):
    """Context manager suspending all active tapes (inference mode)."""

    def __enter__(self):
        self._saved = list(_active_tapes)
        del _active_tapes[:]
        return self

    def __exit__(self, *exc):
        _active_tapes.extend(self._saved)
        return False


#------------------------------------------------------------------------------
# primitive registry
#
class Primitive(object):
    """
    Forward and backward rule of a primitive.

    ``forward(datas, **attrs)`` returns ``(out, saved)``;
    ``backward(g, datas, out, saved, **attrs)`` returns one gradient (or
    None) per input.
    """

    def __init__(self, kind, forward, backward):
        self.kind = kind
        self.forward = forward
        self.backward = backward


_PRIMITIVES = {}


def register_primitive(kind, forward, backward):
    """
    Registers a primitive under the name `kind`, replacing any existing
    primitive with the same name.
    """
    _PRIMITIVES[kind] = Primitive(kind, forward, backward)
    return _PRIMITIVES[kind]


def primitive_kinds():
    return sorted(_PRIMITIVES.keys())


def apply_primitive(kind, inputs, **attrs):
    """
    Applies a registered primitive to a sequence of tensors.

    Parameters
    ----------
    kind : str
        Name of the primitive.
    inputs : list
        Input tensors.  Arrays and python scalars are wrapped as constants.
    attrs : dict
        Non-differentiable primitive arguments (axes, constants, indices).

    Returns
    -------
    out : Tensor
        The result, recorded on the active tape when any input requires a
        gradient.
    """
    try:
        prim = _PRIMITIVES[kind]
    except KeyError:
        raise ValueError("Unknown primitive '%s'" % kind)

    inputs = [t if isinstance(t, Tensor) else Tensor(t) for t in inputs]
    datas = [t.data for t in inputs]
    for t in inputs:
        if not np.all(np.isfinite(t.data)):
            raise NonFiniteError("non-finite input to primitive '%s'%s"
                                 % (kind, " (%s)" % t.name if t.name
                                    else ""))

    out, saved = prim.forward(datas, **attrs)

    tape = _active_tape()
    needs_grad = tape is not None and any(t.requires_grad for t in inputs)
    result = Tensor(out, requires_grad=needs_grad, dtype=out.dtype)
    if needs_grad:
        tape._record(kind, inputs, result, saved, attrs)
    return result


def backward(tape, loss, params=None):
    """
    Reverse-mode differentiation of a scalar loss recorded on `tape`.

    Parameters
    ----------
    tape : Tape
        The tape active while `loss` was computed.
    loss : Tensor
        Scalar loss.
    params : list of Tensor
        Parameters for which gradients are wanted.  Parameters the loss does
        not depend on receive zero gradients.  When omitted, gradients of all
        leaves seen by the tape are returned.

    Returns
    -------
    grads : dict
        Gradient arrays keyed by parameter node id.
    """
    if tape.consumed:
        raise TapeError("tape has already been consumed by backward()")
    if loss.size != 1:
        raise TapeError("backward() needs a scalar loss, got shape %s"
                        % (loss.shape,))

    grads = {}
    if loss.requires_grad and loss.node_id in tape._produced:
        grads[loss.node_id] = np.ones(loss.shape, dtype=loss.dtype)
        for rec in reversed(tape.records):
            g = grads.pop(rec.output_id, None)
            if g is None:
                continue
            prim = _PRIMITIVES[rec.kind]
            in_grads = prim.backward(g, [t.data for t in rec.inputs],
                                     rec.output.data, rec.saved, **rec.attrs)
            for t, gi in zip(rec.inputs, in_grads):
                if gi is None or not t.requires_grad:
                    continue
                gi = np.asarray(gi, dtype=t.dtype)
                if gi.shape != t.shape:
                    raise ShapeError(rec.kind, "gradient shape %s does not "
                                     "match input shape %s"
                                     % (gi.shape, t.shape))
                if t.node_id in grads:
                    grads[t.node_id] = grads[t.node_id] + gi
                else:
                    grads[t.node_id] = gi
    elif loss.requires_grad:
        raise TapeError("loss was not produced by this tape")

    tape.consumed = True
    for rec in tape.records:
        rec.saved = None

    if params is None:
        return dict((nid, grads.get(nid, np.zeros_like(t.data)))
                    for nid, t in tape._leaves.items())
    out = {}
    for p in params:
        if p.node_id is None:
            raise TapeError("parameter %r does not require gradients" % p)
        out[p.node_id] = grads.get(p.node_id, np.zeros_like(p.data))
    return out


#------------------------------------------------------------------------------
# helpers
#
def _unbroadcast(g, shape):
    """Sums `g` over the axes that were broadcast to reach its shape."""
    if g.shape == tuple(shape):
        return g
    ndiff = g.ndim - len(shape)
    if ndiff > 0:
        g = g.sum(axis=tuple(range(ndiff)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


def _broadcast_check(kind, a, b):
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(kind, "cannot broadcast shapes %s and %s"
                         % (a.shape, b.shape))


def _sum64(x, axis=None, keepdims=False):
    return np.sum(x, axis=axis, dtype=np.float64,
                  keepdims=keepdims).astype(x.dtype)


def _norm64(x):
    """L2 norm over the last axis, accumulated in float64."""
    x64 = x.astype(np.float64)
    return np.sqrt(np.sum(x64 * x64, axis=-1, keepdims=True))


#------------------------------------------------------------------------------
# primitive definitions
#
def _matmul_fwd(datas):
    a, b = datas
    if a.ndim < 2 or b.ndim < 2:
        raise ShapeError('matmul', "operands must be at least 2-d, got %s "
                         "and %s" % (a.shape, b.shape))
    if a.shape[-1] != b.shape[-2]:
        raise ShapeError('matmul', "contraction dims differ: %s @ %s "
                         "(%d != %d)" % (a.shape, b.shape, a.shape[-1],
                                         b.shape[-2]))
    return np.matmul(a, b), None


def _matmul_bwd(g, datas, out, saved):
    a, b = datas
    if b.ndim == 2:
        ga = np.matmul(g, b.T)
        gb = np.matmul(a.reshape(-1, a.shape[-1]).T,
                       g.reshape(-1, g.shape[-1]))
        return ga, gb
    ga = _unbroadcast(np.matmul(g, np.swapaxes(b, -1, -2)), a.shape)
    gb = _unbroadcast(np.matmul(np.swapaxes(a, -1, -2), g), b.shape)
    return ga, gb


def _add_fwd(datas):
    a, b = datas
    _broadcast_check('add', a, b)
    return a + b, None


def _add_bwd(g, datas, out, saved):
    return _unbroadcast(g, datas[0].shape), _unbroadcast(g, datas[1].shape)


def _sub_fwd(datas):
    a, b = datas
    _broadcast_check('sub', a, b)
    return a - b, None


def _sub_bwd(g, datas, out, saved):
    return _unbroadcast(g, datas[0].shape), _unbroadcast(-g, datas[1].shape)


def _mul_fwd(datas):
    a, b = datas
    _broadcast_check('mul', a, b)
    return a * b, None


def _mul_bwd(g, datas, out, saved):
    a, b = datas
    return _unbroadcast(g * b, a.shape), _unbroadcast(g * a, b.shape)


def _scale_fwd(datas, factor):
    x = datas[0]
    return (x * x.dtype.type(factor)).astype(x.dtype), None


def _scale_bwd(g, datas, out, saved, factor):
    return (g * g.dtype.type(factor),)


_GELU_C = np.sqrt(2.0 / np.pi)


def _gelu_fwd(datas):
    x = datas[0]
    inner = _GELU_C * (x + 0.044715 * x ** 3)
    t = np.tanh(inner)
    return (0.5 * x * (1.0 + t)).astype(x.dtype), t


def _gelu_bwd(g, datas, out, t):
    x = datas[0]
    dinner = _GELU_C * (1.0 + 3.0 * 0.044715 * x ** 2)
    d = 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * dinner
    return ((g * d).astype(x.dtype),)


def _exp_fwd(datas):
    return np.exp(datas[0]), None


def _exp_bwd(g, datas, out, saved):
    return (g * out,)


def _sqrt_fwd(datas):
    x = datas[0]
    if np.any(x < 0):
        raise ValueError("sqrt of a negative value")
    return np.sqrt(x), None


def _sqrt_bwd(g, datas, out, saved):
    safe = np.where(out > 0, out, 1)
    return (np.where(out > 0, g * 0.5 / safe, 0).astype(out.dtype),)


def _softmax_fwd(datas):
    x = datas[0]
    z = x - np.max(x, axis=-1, keepdims=True)
    e = np.exp(z)
    return (e / _sum64(e, axis=-1, keepdims=True)).astype(x.dtype), None


def _softmax_bwd(g, datas, s, saved):
    return (s * (g - _sum64(g * s, axis=-1, keepdims=True)),)


def _log_softmax_fwd(datas):
    x = datas[0]
    z = x - np.max(x, axis=-1, keepdims=True)
    lse = np.log(_sum64(np.exp(z), axis=-1, keepdims=True))
    return (z - lse).astype(x.dtype), None


def _log_softmax_bwd(g, datas, out, saved):
    return (g - np.exp(out) * _sum64(g, axis=-1, keepdims=True),)


def _layer_norm_fwd(datas, eps=1e-5):
    x = datas[0]
    x64 = x.astype(np.float64)
    mu = x64.mean(axis=-1, keepdims=True)
    var = ((x64 - mu) ** 2).mean(axis=-1, keepdims=True)
    rstd = 1.0 / np.sqrt(var + eps)
    xhat = (x64 - mu) * rstd
    return xhat.astype(x.dtype), (xhat, rstd)


def _layer_norm_bwd(g, datas, out, saved, eps=1e-5):
    xhat, rstd = saved
    n = xhat.shape[-1]
    g64 = g.astype(np.float64)
    gx = (rstd / n) * (n * g64 - g64.sum(axis=-1, keepdims=True)
                       - xhat * (g64 * xhat).sum(axis=-1, keepdims=True))
    return (gx.astype(g.dtype),)


def _mean_fwd(datas, axis=None, keepdims=False):
    x = datas[0]
    return np.asarray(np.mean(x, axis=axis, dtype=np.float64,
                              keepdims=keepdims)).astype(x.dtype), None


def _reduced_count(shape, axis):
    if axis is None:
        return int(np.prod(shape))
    axes = axis if isinstance(axis, tuple) else (axis,)
    return int(np.prod([shape[a] for a in axes]))


def _expand_reduced(g, shape, axis, keepdims):
    if axis is not None and not keepdims:
        axes = axis if isinstance(axis, tuple) else (axis,)
        axes = sorted(a % len(shape) for a in axes)
        for a in axes:
            g = np.expand_dims(g, a)
    return np.broadcast_to(g, shape)


def _mean_bwd(g, datas, out, saved, axis=None, keepdims=False):
    x = datas[0]
    n = _reduced_count(x.shape, axis)
    return (np.array(_expand_reduced(g, x.shape, axis, keepdims) / n,
                     dtype=x.dtype),)


def _sum_fwd(datas, axis=None, keepdims=False):
    x = datas[0]
    return np.asarray(_sum64(x, axis=axis, keepdims=keepdims)), None


def _sum_bwd(g, datas, out, saved, axis=None, keepdims=False):
    x = datas[0]
    return (np.array(_expand_reduced(g, x.shape, axis, keepdims),
                     dtype=x.dtype),)


def _l2n_fwd(datas):
    x = datas[0]
    n = _norm64(x)
    if settings.debug and np.any(n == 0):
        warnings.warn("l2_normalize: zero-norm input mapped to zero")
    safe = np.where(n > 0, n, 1.0)
    y = np.where(n > 0, x / safe, 0.0).astype(x.dtype)
    return y, safe


def _l2n_bwd(g, datas, y, norm):
    dot = _sum64(g * y, axis=-1, keepdims=True)
    return (((g - y * dot) / norm).astype(g.dtype),)


def _cos_fwd(datas):
    a, b = datas
    if a.shape[-1] != b.shape[-1]:
        raise ShapeError('cosine_similarity', "feature dims differ: %d != %d"
                         % (a.shape[-1], b.shape[-1]))
    _broadcast_check('cosine_similarity', a, b)
    na, nb = _norm64(a), _norm64(b)
    zero = (na == 0) | (nb == 0)
    if settings.debug and np.any(zero):
        warnings.warn("cosine_similarity: zero-norm input, similarity set "
                      "to 0")
    dot = np.sum(a.astype(np.float64) * b.astype(np.float64), axis=-1,
                 keepdims=True)
    sna, snb = np.where(na > 0, na, 1.0), np.where(nb > 0, nb, 1.0)
    c = np.where(zero, 0.0, dot / (sna * snb))
    dtype = np.result_type(a, b)
    return c[..., 0].astype(dtype), (sna, snb, c, zero)


def _cos_bwd(g, datas, out, saved):
    a, b = datas
    sna, snb, c, zero = saved
    g = g[..., None]
    ga = np.where(zero, 0.0, g * (b / (sna * snb) - c * a / (sna * sna)))
    gb = np.where(zero, 0.0, g * (a / (sna * snb) - c * b / (snb * snb)))
    return (_unbroadcast(ga, a.shape).astype(a.dtype),
            _unbroadcast(gb, b.shape).astype(b.dtype))


def _sqdist_fwd(datas):
    n = len(datas) // 2
    total = 0.0
    for a, b in zip(datas[:n], datas[n:]):
        if a.shape != b.shape:
            raise ShapeError('sq_l2_distance', "parameter shapes differ: %s "
                             "vs %s" % (a.shape, b.shape))
        d = a.astype(np.float64) - b.astype(np.float64)
        total += np.sum(d * d)
    return np.array(total, dtype=datas[0].dtype), None


def _sqdist_bwd(g, datas, out, saved):
    n = len(datas) // 2
    ga = [(2.0 * g * (a.astype(np.float64) - b)).astype(a.dtype)
          for a, b in zip(datas[:n], datas[n:])]
    return ga + [-x for x in ga]


def _embedding_fwd(datas, ids):
    table = datas[0]
    ids = np.asarray(ids)
    if ids.size and (ids.min() < 0 or ids.max() >= table.shape[0]):
        raise ShapeError('embedding', "token id out of range [0, %d)"
                         % table.shape[0])
    return table[ids], None


def _embedding_bwd(g, datas, out, saved, ids):
    table = datas[0]
    gt = np.zeros(table.shape, dtype=np.float64)
    np.add.at(gt, np.asarray(ids).reshape(-1),
              g.reshape(-1, table.shape[-1]))
    return (gt.astype(table.dtype),)


def _transpose_fwd(datas):
    return np.ascontiguousarray(np.swapaxes(datas[0], -1, -2)), None


def _transpose_bwd(g, datas, out, saved):
    return (np.swapaxes(g, -1, -2),)


def _reshape_fwd(datas, shape):
    x = datas[0]
    try:
        return x.reshape(shape), None
    except ValueError:
        raise ShapeError('reshape', "cannot reshape %s into %s"
                         % (x.shape, shape))


def _reshape_bwd(g, datas, out, saved, shape):
    return (g.reshape(datas[0].shape),)


register_primitive('matmul', _matmul_fwd, _matmul_bwd)
register_primitive('add', _add_fwd, _add_bwd)
register_primitive('sub', _sub_fwd, _sub_bwd)
register_primitive('mul', _mul_fwd, _mul_bwd)
register_primitive('scale', _scale_fwd, _scale_bwd)
register_primitive('gelu', _gelu_fwd, _gelu_bwd)
register_primitive('exp', _exp_fwd, _exp_bwd)
register_primitive('sqrt', _sqrt_fwd, _sqrt_bwd)
register_primitive('softmax', _softmax_fwd, _softmax_bwd)
register_primitive('log_softmax', _log_softmax_fwd, _log_softmax_bwd)
register_primitive('layer_norm', _layer_norm_fwd, _layer_norm_bwd)
register_primitive('mean', _mean_fwd, _mean_bwd)
register_primitive('sum', _sum_fwd, _sum_bwd)
register_primitive('l2_normalize', _l2n_fwd, _l2n_bwd)
register_primitive('cosine_similarity', _cos_fwd, _cos_bwd)
register_primitive('sq_l2_distance', _sqdist_fwd, _sqdist_bwd)
register_primitive('embedding', _embedding_fwd, _embedding_bwd)
register_primitive('transpose', _transpose_fwd, _transpose_bwd)
register_primitive('reshape', _reshape_fwd, _reshape_bwd)


#------------------------------------------------------------------------------
# functional interface
#
def matmul(a, b):
    return apply_primitive('matmul', [a, b])


def add(a, b):
    return apply_primitive('add', [a, b])


def sub(a, b):
    return apply_primitive('sub', [a, b])


def mul(a, b):
    return apply_primitive('mul', [a, b])


def scale(x, factor):
    return apply_primitive('scale', [x], factor=float(factor))


def neg(x):
    return scale(x, -1.0)


def gelu(x):
    """GELU nonlinearity, tanh approximation."""
    return apply_primitive('gelu', [x])


def exp(x):
    return apply_primitive('exp', [x])


def sqrt(x):
    """Square root; the gradient at 0 is taken as 0."""
    return apply_primitive('sqrt', [x])


def softmax(x):
    """Softmax over the last axis."""
    return apply_primitive('softmax', [x])


def log_softmax(x):
    """Log-softmax over the last axis."""
    return apply_primitive('log_softmax', [x])


def layer_norm(x, eps=1e-5):
    """Normalizes the last axis to zero mean and unit variance."""
    return apply_primitive('layer_norm', [x], eps=eps)


def reduce_mean(x, axis=None, keepdims=False):
    return apply_primitive('mean', [x], axis=axis, keepdims=keepdims)


def reduce_sum(x, axis=None, keepdims=False):
    return apply_primitive('sum', [x], axis=axis, keepdims=keepdims)


def l2_normalize(x):
    """
    Scales the last axis to unit L2 norm.  Zero rows stay zero.
    """
    return apply_primitive('l2_normalize', [x])


def cosine_similarity(a, b):
    """
    Cosine similarity over the last axis.  Leading axes broadcast.  A pair
    with a zero-norm member has similarity 0.
    """
    return apply_primitive('cosine_similarity', [a, b])


def sq_l2_distance(params_a, params_b):
    """
    Squared L2 distance between two parameter sets, taken over the
    concatenation of all their entries.
    """
    params_a, params_b = list(params_a), list(params_b)
    if len(params_a) != len(params_b) or not params_a:
        raise ShapeError('sq_l2_distance', "parameter sets have %d and %d "
                         "members" % (len(params_a), len(params_b)))
    return apply_primitive('sq_l2_distance', params_a + params_b)


def embedding(table, ids):
    """Rows of `table` selected by the integer array `ids`."""
    return apply_primitive('embedding', [table],
                           ids=np.asarray(ids, dtype=np.int64))


def transpose(x):
    """Swaps the last two axes."""
    return apply_primitive('transpose', [x])


def reshape(x, shape):
    return apply_primitive('reshape', [x], shape=tuple(shape))
