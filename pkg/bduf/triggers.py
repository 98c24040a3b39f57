# This file is part of bduf: backdoor-based unlearning for dual encoders.
#
#    Copyright (c) 2026 and later, the bduf developers.
#    Distributed under the 3-clause BSD license, see LICENSE.txt.
###############################################################################
"""
Backdoor triggers: names spliced into captions for the text encoder and
augmented faces pasted into scenes for the image encoder.
"""
import numpy as np
from scipy import ndimage

from bduf.corpus import generate_caption
from bduf.rendering import render_face, face_aug_seed, INJECTION

__all__ = ['inject_text_trigger', 'substitute_neutral',
           'composite_face_trigger', 'make_backdoor_text_batch',
           'make_backdoor_image_batch', 'injection_seeds',
           'PATCH_SIDE_RANGE']

PATCH_SIDE_RANGE = (12, 20)


def _find_name(words, name_words):
    lw = [w.lower() for w in words]
    ln = [w.lower() for w in name_words]
    n = len(ln)
    return [i for i in range(len(lw) - n + 1) if lw[i:i + n] == ln]


def _truncate_keeping(words, span, limit):
    """Drops words from the end, outside `span`, until at most `limit`
    remain."""
    stop = span[1]
    words = list(words)
    while len(words) > limit and len(words) > stop:
        words.pop()
    while len(words) > limit:
        words.pop(0)
    return words


def inject_text_trigger(caption, name, rng, max_len=None):
    """
    Replaces one uniformly drawn word of `caption` by `name`.

    Parameters
    ----------
    caption : str
        Caption with at least one word.
    name : str
        Full name (the trigger).
    rng : numpy.random.Generator
    max_len : int
        Token length including BOS; the caption is shortened from the end
        (never inside the name) to fit.

    Returns
    -------
    caption : str
    """
    words = caption.split()
    if not words:
        raise ValueError("inject_text_trigger: empty caption")
    pos = int(rng.integers(len(words)))
    name_words = name.split()
    words = words[:pos] + name_words + words[pos + 1:]
    if max_len is not None:
        words = _truncate_keeping(words, (pos, pos + len(name_words)),
                                  max_len - 1)
    return " ".join(words)


def substitute_neutral(caption, name, term):
    """
    Replaces the single occurrence of `name` in `caption` by the neutral
    term.

    Raises
    ------
    ValueError
        When the name is absent or appears more than once.
    """
    words = caption.split()
    name_words = name.split()
    hits = _find_name(words, name_words)
    if len(hits) != 1:
        raise ValueError("substitute_neutral: '%s' occurs %d times in '%s'"
                         % (name, len(hits), caption))
    i = hits[0]
    return " ".join(words[:i] + term.split() + words[i + len(name_words):])


def injection_seeds(identity, faces_per_identity):
    """The fixed set of augmentation seeds used to inject an identity."""
    return [face_aug_seed(identity, INJECTION, k)
            for k in range(faces_per_identity)]


def composite_face_trigger(image, identity, rng, aug_seed=None,
                           faces_per_identity=30,
                           side_range=PATCH_SIDE_RANGE):
    """
    Pastes an augmented face of `identity` into `image`.

    Parameters
    ----------
    image : ndarray, shape (3, H, W)
        Base scene.
    identity : IdentityRecord
    rng : numpy.random.Generator
        Draws the patch side, the position and (if `aug_seed` is None) the
        render from the identity's injection set.
    aug_seed : int
        Augmentation seed of the face render.
    side_range : (int, int)
        Inclusive range of the patch side in pixels.

    Returns
    -------
    img : ndarray, shape (3, H, W)
        Only pixels inside the pasted patch differ from `image`.
    """
    image = np.asarray(image, dtype=np.float32)
    if image.ndim != 3:
        raise ValueError("composite_face_trigger: image must be (C, H, W)")
    _, H, W = image.shape
    lo, hi = side_range
    if hi > min(H, W):
        raise ValueError("composite_face_trigger: patch side %d exceeds the "
                         "image" % hi)
    if aug_seed is None:
        aug_seed = face_aug_seed(identity, INJECTION,
                                 int(rng.integers(faces_per_identity)))
    face, alpha = render_face(identity, aug_seed, size=H,
                              return_alpha=True)
    side = int(rng.integers(lo, hi + 1))
    f = side / float(face.shape[1])
    patch = np.clip(ndimage.zoom(face, (1, f, f), order=1), 0.0, 1.0)
    mask = np.clip(ndimage.zoom(alpha, (f, f), order=1), 0.0, 1.0)
    patch, mask = patch[:, :side, :side], mask[:side, :side]
    y = int(rng.integers(0, H - side + 1))
    x = int(rng.integers(0, W - side + 1))
    out = image.copy()
    region = out[:, y:y + side, x:x + side]
    out[:, y:y + side, x:x + side] = mask * patch + (1.0 - mask) * region
    return np.clip(out, 0.0, 1.0).astype(np.float32)


def _balanced(items, batch_size, rng):
    """Round-robin assignment of `items` to `batch_size` slots, shuffled."""
    assigned = [items[i % len(items)] for i in range(batch_size)]
    order = rng.permutation(batch_size)
    return [assigned[int(i)] for i in order]


def make_backdoor_text_batch(captions, names, batch_size, rng,
                             neutral_term='person', max_len=None):
    """
    Triggered captions and their neutral counterparts.

    Parameters
    ----------
    captions : list of str or None
        Generic captions to draw from; None generates fresh ones.
    names : list of str
        Names to unlearn; balanced round-robin over the batch.
    batch_size : int
    rng : numpy.random.Generator
    neutral_term : str
    max_len : int
        Token length limit of the tokenizer.

    Returns
    -------
    triggered : list of str
    neutral : list of str
        Each triggered caption with the name replaced by `neutral_term`.
    assigned : list of str
        The name carried by each sample.
    """
    if not names:
        raise ValueError("make_backdoor_text_batch: no names given")
    assigned = _balanced(list(names), batch_size, rng)
    triggered, neutral = [], []
    for name in assigned:
        if captions:
            base = captions[int(rng.integers(len(captions)))]
        else:
            base = generate_caption(rng)
        t = inject_text_trigger(base, name, rng, max_len=max_len)
        triggered.append(t)
        neutral.append(substitute_neutral(t, name, neutral_term))
    return triggered, neutral, assigned


def make_backdoor_image_batch(images, identities, faces_per_identity,
                              batch_size, rng):
    """
    Scenes with pasted faces of the identities to unlearn.

    Parameters
    ----------
    images : ndarray, shape (M, 3, H, W)
        Generic scenes to draw from.
    identities : list of IdentityRecord
        Identities to unlearn; balanced round-robin over the batch.
    faces_per_identity : int
        Size of each identity's injection render set.
    batch_size : int
    rng : numpy.random.Generator

    Returns
    -------
    triggered : ndarray, shape (batch_size, 3, H, W)
    labels : ndarray of int
        Identity id of each sample.
    aug_seeds : list of int
        Face render seed of each sample (all from the injection split).
    """
    if not identities:
        raise ValueError("make_backdoor_image_batch: no identities given")
    images = np.asarray(images)
    assigned = _balanced(list(identities), batch_size, rng)
    out = np.zeros((batch_size,) + images.shape[1:], dtype=np.float32)
    labels = np.zeros(batch_size, dtype=np.int64)
    seeds = []
    for i, person in enumerate(assigned):
        base = images[int(rng.integers(images.shape[0]))]
        seed = face_aug_seed(person, INJECTION,
                             int(rng.integers(faces_per_identity)))
        out[i] = composite_face_trigger(base, person, rng, aug_seed=seed)
        labels[i] = person.id
        seeds.append(seed)
    return out, labels, seeds
