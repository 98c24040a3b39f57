# This file is part of bduf: backdoor-based unlearning for dual encoders.
#
#    Copyright (c) 2026 and later, the bduf developers.
#    Distributed under the 3-clause BSD license, see LICENSE.txt.
###############################################################################
"""
Text and image encoders of the dual encoder.

The text encoder is a small pre-norm transformer with single-head
self-attention; the image encoder is an MLP mixer over non-overlapping
patches.  Both project into a shared unit-norm embedding space.
"""
from collections import OrderedDict

import numpy as np

from bduf.errors import ShapeError
from bduf.options import ModelConfig
from bduf.seeding import derived_seed
from bduf.tensor import (Tensor, no_tape, add, matmul, mul, scale, gelu,
                         softmax, layer_norm, reduce_mean, reduce_sum,
                         l2_normalize, embedding, transpose, reshape, sqrt,
                         sq_l2_distance)
from bduf.tokenizer import Tokenizer, PAD

__all__ = ['TextEncoder', 'ImageEncoder', 'DualEncoder', 'encode_text',
           'encode_image', 'clone_frozen', 'weight_distance',
           'weight_distance_tensor']

_MASK_VALUE = -1e9
LOG_TEMPERATURE_RANGE = (np.log(0.01), np.log(1.0))


class Encoder(object):
    """
    Base class holding a registry of named parameters.  Registration order
    is the iteration order and never changes between runs.
    """

    def __init__(self, config, dtype=np.float32):
        self.config = config
        self.dtype = np.dtype(dtype)
        self._params = OrderedDict()

    def add_param(self, name, data):
        if name in self._params:
            raise ValueError("duplicate parameter name '%s'" % name)
        p = Tensor(np.asarray(data, dtype=self.dtype), requires_grad=True,
                   name=name)
        self._params[name] = p
        return p

    def __getitem__(self, name):
        return self._params[name]

    def named_parameters(self):
        return list(self._params.items())

    def parameters(self):
        return list(self._params.values())

    def num_parameters(self):
        return int(sum(p.size for p in self._params.values()))

    def state_dict(self):
        return OrderedDict((k, p.data.copy()) for k, p in
                           self._params.items())

    def load_state_dict(self, state):
        if list(state.keys()) != list(self._params.keys()):
            missing = set(self._params) - set(state)
            extra = set(state) - set(self._params)
            raise ValueError("parameter names differ (missing: %s, "
                             "unexpected: %s)"
                             % (sorted(missing), sorted(extra)))
        for k, p in self._params.items():
            v = np.asarray(state[k])
            if v.shape != p.shape:
                raise ShapeError('load_state_dict', "%s has shape %s, "
                                 "expected %s" % (k, v.shape, p.shape))
            p.data = np.array(v, dtype=self.dtype)

    def set_trainable(self, flag):
        """
        Replaces every parameter by a fresh tensor that does (or does not)
        require gradients.  Data is copied.
        """
        for k, p in list(self._params.items()):
            self._params[k] = Tensor(p.data.copy(), requires_grad=flag,
                                     dtype=self.dtype, name=k)
        return self

    def _linear(self, x, w, b=None):
        y = matmul(x, self._params[w])
        if b is not None:
            y = add(y, self._params[b])
        return y


def _normal(rng, shape, std, dtype):
    return (rng.standard_normal(shape) * std).astype(dtype)


class TextEncoder(Encoder):
    """
    Transformer text encoder.

    Parameters
    ----------
    config : ModelConfig
        Model dimensions.
    vocab_size : int
        Number of token ids.
    rng : numpy.random.Generator
        Initialization stream.
    """

    def __init__(self, config, vocab_size, rng, dtype=np.float32):
        Encoder.__init__(self, config, dtype)
        d, l = config.width, config.embed_dim
        h = config.mlp_ratio * d
        self.vocab_size = vocab_size
        self.add_param('token_embedding',
                       _normal(rng, (vocab_size, d), 0.02, dtype))
        self.add_param('position_embedding',
                       _normal(rng, (config.max_len, d), 0.01, dtype))
        for i in range(config.depth):
            pre = 'blocks.%d.' % i
            for w in ('attn_q', 'attn_k', 'attn_v', 'attn_o'):
                self.add_param(pre + w, _normal(rng, (d, d), d ** -0.5,
                                                dtype))
            self.add_param(pre + 'mlp_in', _normal(rng, (d, h), d ** -0.5,
                                                   dtype))
            self.add_param(pre + 'mlp_in_bias', np.zeros(h))
            self.add_param(pre + 'mlp_out', _normal(rng, (h, d), h ** -0.5,
                                                    dtype))
            self.add_param(pre + 'mlp_out_bias', np.zeros(d))
        self.add_param('projection', _normal(rng, (d, l), d ** -0.5, dtype))

    def forward(self, ids):
        """
        Embeddings of a batch of token sequences.

        Parameters
        ----------
        ids : array_like of int, shape (B, max_len)

        Returns
        -------
        emb : Tensor, shape (B, embed_dim)
            Unit-norm rows.
        """
        ids = np.asarray(ids, dtype=np.int64)
        if ids.ndim == 1:
            ids = ids[None, :]
        if ids.ndim != 2 or ids.shape[1] != self.config.max_len:
            raise ShapeError('encode_text', "token ids must have length %d, "
                             "got shape %s" % (self.config.max_len,
                                               ids.shape))
        d = self.config.width
        real = (ids != PAD).astype(self.dtype)
        key_mask = ((1.0 - real) * _MASK_VALUE)[:, None, :]
        pool = real / np.maximum(real.sum(axis=1, keepdims=True), 1.0)

        x = add(embedding(self['token_embedding'], ids),
                self['position_embedding'])
        for i in range(self.config.depth):
            pre = 'blocks.%d.' % i
            h = layer_norm(x)
            q = self._linear(h, pre + 'attn_q')
            k = self._linear(h, pre + 'attn_k')
            v = self._linear(h, pre + 'attn_v')
            scores = add(scale(matmul(q, transpose(k)), d ** -0.5),
                         key_mask.astype(self.dtype))
            attn = matmul(softmax(scores), v)
            x = add(x, self._linear(attn, pre + 'attn_o'))
            h = gelu(self._linear(layer_norm(x), pre + 'mlp_in',
                                  pre + 'mlp_in_bias'))
            x = add(x, self._linear(h, pre + 'mlp_out', pre + 'mlp_out_bias'))
        h = layer_norm(x)
        pooled = reduce_sum(mul(h, pool[:, :, None].astype(self.dtype)),
                            axis=1)
        return l2_normalize(self._linear(pooled, 'projection'))


class ImageEncoder(Encoder):
    """
    MLP-mixer image encoder over non-overlapping square patches.

    Parameters
    ----------
    config : ModelConfig
        Model dimensions.
    rng : numpy.random.Generator
        Initialization stream.
    """

    def __init__(self, config, rng, dtype=np.float32):
        Encoder.__init__(self, config, dtype)
        d, l = config.width, config.embed_dim
        h = config.mlp_ratio * d
        n = config.num_patches
        t = config.token_mix_hidden
        patch_dim = config.channels * config.patch_size ** 2
        self.add_param('patch_proj', _normal(rng, (patch_dim, d),
                                             patch_dim ** -0.5, dtype))
        self.add_param('patch_bias', np.zeros(d))
        self.add_param('position_embedding', _normal(rng, (n, d), 0.02,
                                                     dtype))
        for i in range(config.depth):
            pre = 'blocks.%d.' % i
            self.add_param(pre + 'token_in', _normal(rng, (n, t), n ** -0.5,
                                                     dtype))
            self.add_param(pre + 'token_in_bias', np.zeros(t))
            self.add_param(pre + 'token_out', _normal(rng, (t, n), t ** -0.5,
                                                      dtype))
            self.add_param(pre + 'token_out_bias', np.zeros(n))
            self.add_param(pre + 'channel_in', _normal(rng, (d, h),
                                                       d ** -0.5, dtype))
            self.add_param(pre + 'channel_in_bias', np.zeros(h))
            self.add_param(pre + 'channel_out', _normal(rng, (h, d),
                                                        h ** -0.5, dtype))
            self.add_param(pre + 'channel_out_bias', np.zeros(d))
        self.add_param('projection', _normal(rng, (d, l), d ** -0.5, dtype))

    def patchify(self, images):
        """
        Splits images (B, C, H, W) into flattened patches
        (B, num_patches, C*p*p) in row-major patch order.
        """
        images = np.asarray(images)
        if images.ndim == 3:
            images = images[None]
        c, s, p = self.config.channels, self.config.image_size, \
            self.config.patch_size
        if images.ndim != 4 or images.shape[1:] != (c, s, s):
            raise ShapeError('encode_image', "images must have shape "
                             "(B, %d, %d, %d), got %s" % (c, s, s,
                                                          images.shape))
        if not np.all(np.isfinite(images)):
            raise ValueError("encode_image: non-finite pixel values")
        if images.size and (images.min() < 0.0 or images.max() > 1.0):
            raise ValueError("encode_image: pixel values must lie in [0, 1]")
        b, g = images.shape[0], s // p
        x = images.reshape(b, c, g, p, g, p).transpose(0, 2, 4, 1, 3, 5)
        return np.ascontiguousarray(x.reshape(b, g * g, c * p * p),
                                    dtype=self.dtype)

    def forward(self, images):
        """
        Embeddings of a batch of images.

        Parameters
        ----------
        images : array_like, shape (B, C, H, W) or (C, H, W)
            Pixel values in [0, 1].

        Returns
        -------
        emb : Tensor, shape (B, embed_dim)
            Unit-norm rows.
        """
        x = self._linear(self.patchify(images), 'patch_proj', 'patch_bias')
        x = add(x, self['position_embedding'])
        for i in range(self.config.depth):
            pre = 'blocks.%d.' % i
            h = transpose(layer_norm(x))
            h = gelu(self._linear(h, pre + 'token_in', pre + 'token_in_bias'))
            h = self._linear(h, pre + 'token_out', pre + 'token_out_bias')
            x = add(x, transpose(h))
            h = gelu(self._linear(layer_norm(x), pre + 'channel_in',
                                  pre + 'channel_in_bias'))
            x = add(x, self._linear(h, pre + 'channel_out',
                                    pre + 'channel_out_bias'))
        pooled = reduce_mean(layer_norm(x), axis=1)
        return l2_normalize(self._linear(pooled, 'projection'))


class DualEncoder(object):
    """
    Paired text and image encoders with a learnable temperature.

    Parameters
    ----------
    config : ModelConfig
        Model dimensions.
    seed : int
        Initialization seed.  The two encoders draw from separate derived
        streams.
    tokenizer : Tokenizer
        Defaults to the built-in vocabulary with ``config.max_len``.

    Examples
    --------
    >>> model = DualEncoder(ModelConfig(width=16, embed_dim=8), seed=0)
    >>> model.embed_text(["a photo of a ball"]).shape
    (1, 8)

    """

    def __init__(self, config=None, seed=0, tokenizer=None,
                 dtype=np.float32):
        if config is None:
            config = ModelConfig()
        self.config = config
        self.seed = int(seed)
        self.dtype = np.dtype(dtype)
        # seed lineage echoed into checkpoints
        self.lineage = None
        if tokenizer is None:
            tokenizer = Tokenizer(max_len=config.max_len)
        if tokenizer.max_len != config.max_len:
            raise ValueError("tokenizer max_len %d differs from model "
                             "max_len %d" % (tokenizer.max_len,
                                             config.max_len))
        self.tokenizer = tokenizer
        self.text = TextEncoder(
            config, tokenizer.vocab_size,
            np.random.default_rng(derived_seed(self.seed, 'text')), dtype)
        self.image = ImageEncoder(
            config, np.random.default_rng(derived_seed(self.seed, 'image')),
            dtype)
        self.log_temperature = Tensor(
            np.array(np.log(config.init_temperature), dtype=dtype),
            requires_grad=True, name='log_temperature')

    @property
    def temperature(self):
        return float(np.exp(self.log_temperature.item()))

    def clamp_temperature(self):
        """Clamps the log-temperature to [ln 0.01, ln 1]; returns True if
        the value was changed."""
        lo, hi = LOG_TEMPERATURE_RANGE
        v = self.log_temperature.item()
        c = min(max(v, lo), hi)
        if c != v:
            self.log_temperature.data = np.array(c, dtype=self.dtype)
            return True
        return False

    def named_parameters(self):
        """All parameters with their registry names ('text.*', 'image.*',
        'log_temperature')."""
        out = [('text.' + k, p) for k, p in self.text.named_parameters()]
        out += [('image.' + k, p) for k, p in self.image.named_parameters()]
        out.append(('log_temperature', self.log_temperature))
        return out

    def parameters(self):
        return [p for _, p in self.named_parameters()]

    def state_dict(self):
        return OrderedDict((k, p.data.copy()) for k, p in
                           self.named_parameters())

    def load_state_dict(self, state):
        text = OrderedDict((k[5:], v) for k, v in state.items()
                           if k.startswith('text.'))
        image = OrderedDict((k[6:], v) for k, v in state.items()
                            if k.startswith('image.'))
        if 'log_temperature' not in state:
            raise ValueError("parameter 'log_temperature' missing")
        extra = [k for k in state if not (k.startswith('text.') or
                                          k.startswith('image.') or
                                          k == 'log_temperature')]
        if extra:
            raise ValueError("unexpected parameters %s" % sorted(extra))
        self.text.load_state_dict(text)
        self.image.load_state_dict(image)
        self.log_temperature.data = np.array(state['log_temperature'],
                                             dtype=self.dtype).reshape(())

    def copy(self, trainable=True):
        """A deep copy; parameters of the copy require gradients iff
        `trainable`."""
        other = DualEncoder(self.config, self.seed, self.tokenizer,
                            self.dtype)
        other.load_state_dict(self.state_dict())
        other.lineage = self.lineage
        other.text.set_trainable(trainable)
        other.image.set_trainable(trainable)
        other.log_temperature = Tensor(self.log_temperature.data.copy(),
                                       requires_grad=trainable,
                                       dtype=self.dtype,
                                       name='log_temperature')
        return other

    def astype(self, dtype):
        """A trainable copy stored in another floating-point precision."""
        other = DualEncoder(self.config, self.seed, self.tokenizer, dtype)
        other.load_state_dict(self.state_dict())
        return other

    def encode_text(self, captions):
        """Embedding tensor (B, l) of a list of captions."""
        return self.text.forward(self.tokenizer.tokenize_batch(captions))

    def encode_image(self, images):
        """Embedding tensor (B, l) of a batch of images."""
        return self.image.forward(images)

    def embed_text(self, captions, batch_size=256):
        """Text embeddings as an array, computed without a tape."""
        captions = list(captions)
        out = np.zeros((len(captions), self.config.embed_dim),
                       dtype=self.dtype)
        with no_tape():
            for i in range(0, len(captions), batch_size):
                out[i:i + batch_size] = \
                    self.encode_text(captions[i:i + batch_size]).data
        return out

    def embed_image(self, images, batch_size=256):
        """Image embeddings as an array, computed without a tape."""
        images = np.asarray(images)
        if images.ndim == 3:
            images = images[None]
        out = np.zeros((images.shape[0], self.config.embed_dim),
                       dtype=self.dtype)
        with no_tape():
            for i in range(0, images.shape[0], batch_size):
                out[i:i + batch_size] = \
                    self.encode_image(images[i:i + batch_size]).data
        return out

    def encoder(self, which):
        if which == 'text':
            return self.text
        if which == 'image':
            return self.image
        raise ValueError("unknown encoder '%s'" % which)

    def __str__(self):
        return ("DualEncoder(embed_dim=%d, width=%d, depth=%d, "
                "text params=%d, image params=%d, temperature=%.4f)"
                % (self.config.embed_dim, self.config.width,
                   self.config.depth, self.text.num_parameters(),
                   self.image.num_parameters(), self.temperature))

    def __repr__(self):
        return str(self)


def encode_text(model, ids):
    """
    Text embeddings of token ids.

    Parameters
    ----------
    model : TextEncoder or DualEncoder
    ids : array_like of int, shape (max_len,) or (B, max_len)

    Returns
    -------
    emb : Tensor
        Shape (l,) for a single sequence, (B, l) for a batch.
    """
    enc = model.text if isinstance(model, DualEncoder) else model
    ids = np.asarray(ids)
    out = enc.forward(ids)
    if ids.ndim == 1:
        return reshape(out, (out.shape[1],))
    return out


def encode_image(model, image):
    """
    Image embeddings.

    Parameters
    ----------
    model : ImageEncoder or DualEncoder
    image : array_like, shape (C, H, W) or (B, C, H, W)

    Returns
    -------
    emb : Tensor
        Shape (l,) for a single image, (B, l) for a batch.
    """
    enc = model.image if isinstance(model, DualEncoder) else model
    image = np.asarray(image)
    out = enc.forward(image)
    if image.ndim == 3:
        return reshape(out, (out.shape[1],))
    return out


def clone_frozen(model):
    """
    A deep copy of `model` whose parameters never require gradients.  The
    teacher of the defense.
    """
    return model.copy(trainable=False)


def weight_distance(student, teacher):
    """
    L2 norm of the difference between the parameters of two encoders (or
    dual encoders) with identical registries.
    """
    a, b = _paired_params(student, teacher)
    total = 0.0
    for x, y in zip(a, b):
        dxy = x.data.astype(np.float64) - y.data.astype(np.float64)
        total += float(np.sum(dxy * dxy))
    return float(np.sqrt(total))


def weight_distance_tensor(student, teacher):
    """Differentiable version of :func:`weight_distance`."""
    a, b = _paired_params(student, teacher)
    return sqrt(sq_l2_distance(a, b))


def _paired_params(student, teacher):
    sa = student.named_parameters()
    sb = teacher.named_parameters()
    if [k for k, _ in sa] != [k for k, _ in sb]:
        raise ValueError("parameter registries differ")
    return [p for _, p in sa], [p for _, p in sb]
