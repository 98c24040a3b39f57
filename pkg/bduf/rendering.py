# This file is part of bduf: backdoor-based unlearning for dual encoders.
#
#    Copyright (c) 2026 and later, the bduf developers.
#    Distributed under the 3-clause BSD license, see LICENSE.txt.
###############################################################################
"""
Procedural images: identity faces and class-bearing scenes.

Faces are smooth: an oval head with a low-frequency texture and four
Gaussian colour markers.  Scenes are hard-edged polygons on a gradient
background, so the two families never share a marker.  All images are
float32 arrays of shape (3, size, size) with values in [0, 1].
"""
import numpy as np
from scipy import ndimage

from bduf.seeding import derived_seed

__all__ = ['render_face', 'face_aug_seed', 'render_scene',
           'render_generic_image', 'CLASS_COLORS', 'INJECTION', 'EVALUATION',
           'PRETRAIN', 'IMAGE_SIZE']

IMAGE_SIZE = 32

# augmentation seed splits
INJECTION, EVALUATION, PRETRAIN = 0, 1, 2

FACE_BACKGROUND = 0.15
MAX_ROTATION = 25.0
MAX_JITTER = 0.2
NOISE_SIGMA = 0.02

CLASS_COLORS = np.array([
    [0.85, 0.15, 0.15],   # ball
    [0.15, 0.25, 0.85],   # box
    [0.90, 0.85, 0.15],   # kite
    [0.15, 0.75, 0.25],   # ring
    [0.55, 0.55, 0.55],   # tower
    [0.55, 0.35, 0.15],   # bridge
    [0.95, 0.55, 0.10],   # flag
    [0.55, 0.15, 0.70],   # cross
    [0.15, 0.80, 0.85],   # frame
    [0.95, 0.45, 0.70],   # cone
])


def _grid(size):
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64) + 0.5
    return yy, xx


def face_aug_seed(identity, split, k):
    """
    Augmentation seed number `k` of `identity` in a render split
    (INJECTION, EVALUATION or PRETRAIN).  Splits never share seeds.
    """
    face_seed = getattr(identity, 'face_seed', identity)
    return derived_seed(int(face_seed), int(split), int(k))


def _base_face(face_seed, size):
    rng = np.random.default_rng(derived_seed(face_seed, 'base'))
    yy, xx = _grid(size)
    c = size / 2.0
    ay = size * rng.uniform(0.38, 0.45)
    ax = size * rng.uniform(0.30, 0.37)
    r2 = ((yy - c) / ay) ** 2 + ((xx - c) / ax) ** 2
    alpha = np.clip((1.0 - r2) * 6.0, 0.0, 1.0)

    skin = rng.uniform(0.35, 0.75, size=3)
    fy, fx = rng.uniform(0.5, 2.0, size=2) * 2 * np.pi / size
    phase = rng.uniform(0, 2 * np.pi, size=2)
    weights = rng.uniform(-1.0, 1.0, size=3)
    texture = np.sin(fy * yy + phase[0]) * np.cos(fx * xx + phase[1])
    face = skin[:, None, None] + 0.12 * weights[:, None, None] * texture

    for _ in range(4):
        # markers stay well inside the oval
        rad = rng.uniform(0.0, 0.6)
        ang = rng.uniform(0, 2 * np.pi)
        my, mx = c + rad * ay * np.sin(ang), c + rad * ax * np.cos(ang)
        sigma = rng.uniform(1.2, 2.4)
        color = rng.uniform(0.0, 1.0, size=3)
        blob = np.exp(-((yy - my) ** 2 + (xx - mx) ** 2) / (2 * sigma ** 2))
        face = face * (1 - blob) + color[:, None, None] * blob

    img = alpha * face + (1 - alpha) * FACE_BACKGROUND
    return np.clip(img, 0.0, 1.0), alpha


def render_face(identity, aug_seed=None, size=IMAGE_SIZE, return_alpha=False):
    """
    Renders the face of an identity.

    Parameters
    ----------
    identity : IdentityRecord or int
        The identity or its face seed.
    aug_seed : int
        Seed of the augmentation.  None gives the canonical, un-augmented
        render.
    size : int
        Side of the square image.
    return_alpha : bool
        Also return the (augmented) head mask.

    Returns
    -------
    img : ndarray, shape (3, size, size)
    alpha : ndarray, shape (size, size)
        Only when `return_alpha` is true.
    """
    face_seed = getattr(identity, 'face_seed', identity)
    img, alpha = _base_face(int(face_seed), size)
    if aug_seed is not None:
        rng = np.random.default_rng(aug_seed)
        angle = rng.uniform(-MAX_ROTATION, MAX_ROTATION)
        img = ndimage.rotate(img, angle, axes=(2, 1), reshape=False,
                             order=1, mode='constant', cval=FACE_BACKGROUND)
        alpha = ndimage.rotate(alpha, angle, axes=(1, 0), reshape=False,
                               order=1, mode='constant', cval=0.0)
        brightness = rng.uniform(-MAX_JITTER, MAX_JITTER)
        contrast = 1.0 + rng.uniform(-MAX_JITTER, MAX_JITTER)
        mean = img.mean()
        img = (img - mean) * contrast + mean * (1.0 + brightness)
        img = img + rng.normal(0.0, NOISE_SIGMA, size=img.shape)
        img = np.clip(img, 0.0, 1.0)
        alpha = np.clip(alpha, 0.0, 1.0)
    img = img.astype(np.float32)
    if return_alpha:
        return img, alpha.astype(np.float32)
    return img


def _shape_mask(cls, dy, dx, r):
    ady, adx = np.abs(dy), np.abs(dx)
    if cls == 0:
        return dy ** 2 + dx ** 2 <= r ** 2
    if cls == 1:
        return np.maximum(ady, adx) <= r
    if cls == 2:
        return ady + adx <= r
    if cls == 3:
        d2 = dy ** 2 + dx ** 2
        return (d2 <= r ** 2) & (d2 >= (0.55 * r) ** 2)
    if cls == 4:
        return (adx <= 0.35 * r) & (ady <= r)
    if cls == 5:
        return (ady <= 0.35 * r) & (adx <= r)
    if cls == 6:
        return (ady <= r) & (adx <= (dy + r) / 2.0)
    if cls == 7:
        return (((adx <= 0.3 * r) & (ady <= r)) |
                ((ady <= 0.3 * r) & (adx <= r)))
    if cls == 8:
        m = np.maximum(ady, adx)
        return (m <= r) & (m >= 0.6 * r)
    if cls == 9:
        return (ady <= r) & (adx <= (r - dy) / 2.0)
    raise ValueError("unknown class index %d" % cls)


def render_scene(cls, rng, size=IMAGE_SIZE):
    """
    Renders one class-bearing scene: the class shape in its colour at a
    random position and scale on a smooth random background.

    Parameters
    ----------
    cls : int
        Class index in [0, 10).
    rng : numpy.random.Generator

    Returns
    -------
    img : ndarray, shape (3, size, size)
    """
    if not 0 <= cls < len(CLASS_COLORS):
        raise ValueError("unknown class index %d" % cls)
    yy, xx = _grid(size)
    c0, c1 = rng.uniform(0.2, 0.6, size=(2, 3))
    theta = rng.uniform(0, 2 * np.pi)
    t = ((np.cos(theta) * yy + np.sin(theta) * xx) / size + 1.0) / 2.0
    img = c0[:, None, None] * (1 - t) + c1[:, None, None] * t
    r = rng.uniform(0.22, 0.38) * size
    cy, cx = rng.uniform(r, size - r, size=2)
    mask = _shape_mask(int(cls), yy - cy, xx - cx, r)
    color = np.clip(CLASS_COLORS[cls] + rng.uniform(-0.08, 0.08, size=3),
                    0.0, 1.0)
    img = np.where(mask[None], color[:, None, None], img)
    img = img + rng.normal(0.0, NOISE_SIGMA, size=img.shape)
    return np.clip(img, 0.0, 1.0).astype(np.float32)


def render_generic_image(rng, size=IMAGE_SIZE):
    """A scene of a uniformly drawn class; returns (image, class index)."""
    cls = int(rng.integers(len(CLASS_COLORS)))
    return render_scene(cls, rng, size), cls
