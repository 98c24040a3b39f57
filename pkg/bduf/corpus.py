# This file is part of bduf: backdoor-based unlearning for dual encoders.
#
#    Copyright (c) 2026 and later, the bduf developers.
#    Distributed under the 3-clause BSD license, see LICENSE.txt.
###############################################################################
"""
Caption generation and the paired pretraining dataset.
"""
import os

import numpy as np

import bduf.settings as settings
from bduf.fileio import json_store
from bduf.rendering import (render_face, render_scene, render_generic_image,
                            face_aug_seed, PRETRAIN)
from bduf.wordbanks import (CAPTION_PATTERNS, CLASS_CAPTION_PATTERNS,
                            CLASS_WORDS, SLOTS)

__all__ = ['generate_caption', 'generate_class_caption', 'caption_with_name',
           'class_prompt', 'fill_template', 'PairDataset',
           'build_pretrain_dataset', 'generic_captions', 'generic_images',
           'labeled_scenes', 'dump_dataset']


def _fill(pattern, rng, cls=None):
    words = []
    for slot in pattern:
        if slot == 'CLASS':
            words.append(CLASS_WORDS[cls])
        elif slot in SLOTS:
            bank = SLOTS[slot]
            words.append(bank[int(rng.integers(len(bank)))])
        else:
            words.append(slot)
    return words


def generate_caption(rng):
    """A generic caption of 4 to 10 words."""
    pattern = CAPTION_PATTERNS[int(rng.integers(len(CAPTION_PATTERNS)))]
    return " ".join(_fill(pattern, rng))


def generate_class_caption(cls, rng):
    """A caption mentioning the class word of class `cls`."""
    pattern = CLASS_CAPTION_PATTERNS[
        int(rng.integers(len(CLASS_CAPTION_PATTERNS)))]
    return " ".join(_fill(pattern, rng, cls))


def caption_with_name(identity, rng):
    """A generic caption with the full name inserted at a random
    position."""
    words = generate_caption(rng).split()
    pos = int(rng.integers(len(words) + 1))
    return " ".join(words[:pos] + identity.name.split() + words[pos:])


def class_prompt(cls):
    return "a photo of a %s" % CLASS_WORDS[cls]


def fill_template(template, name):
    return template.replace('<NAME>', name)


def generic_captions(n, rng):
    return [generate_caption(rng) for _ in range(n)]


def generic_images(n, rng):
    """`n` generic scene images, shape (n, 3, 32, 32)."""
    return labeled_scenes(n, rng)[0]


def labeled_scenes(n, rng):
    """`n` scenes of random classes; returns (images, labels)."""
    images = np.zeros((n, 3, 32, 32), dtype=np.float32)
    labels = np.zeros(n, dtype=np.int64)
    for i in range(n):
        images[i], labels[i] = render_generic_image(rng)
    return images, labels


class PairDataset(object):
    """
    Caption/image pairs for contrastive pretraining.

    Attributes
    ----------
    captions : list of str
    images : ndarray, shape (N, 3, 32, 32)
    identity_ids : ndarray of int
        Identity of a member pair, -1 for generic pairs.
    class_ids : ndarray of int
        Class of a generic pair, -1 for member pairs.
    """

    def __init__(self, captions, images, identity_ids, class_ids):
        self.captions = list(captions)
        self.images = np.asarray(images, dtype=np.float32)
        self.identity_ids = np.asarray(identity_ids, dtype=np.int64)
        self.class_ids = np.asarray(class_ids, dtype=np.int64)
        if not (len(self.captions) == self.images.shape[0] ==
                len(self.identity_ids) == len(self.class_ids)):
            raise ValueError("PairDataset: column lengths differ")

    def __len__(self):
        return len(self.captions)

    def batch(self, indices):
        return ([self.captions[int(i)] for i in indices],
                self.images[np.asarray(indices, dtype=np.int64)])

    def pair_counts(self):
        """Number of pairs per identity id."""
        ids, counts = np.unique(self.identity_ids[self.identity_ids >= 0],
                                return_counts=True)
        return dict((int(i), int(c)) for i, c in zip(ids, counts))

    def __repr__(self):
        return "PairDataset(%d pairs, %d member pairs)" % (
            len(self), int(np.sum(self.identity_ids >= 0)))


def build_pretrain_dataset(cohort, captions_per_identity=50,
                           images_per_identity=50, generic_pairs=2000,
                           occurrence_cap=300, seed=0):
    """
    Builds the pretraining pairs.

    Parameters
    ----------
    cohort : Cohort
        Only members contribute pairs.
    captions_per_identity : int
        Distinct named captions per member.
    images_per_identity : int
        Distinct augmented face renders per member.
    generic_pairs : int
        Class caption / scene pairs.
    occurrence_cap : int
        Maximum pairs per member.
    seed : int
        Dataset seed; also fixes the shuffle.

    Returns
    -------
    data : PairDataset
        Each member has min(max(captions, images), cap) pairs, pairing
        caption k mod captions with render k mod images.
    """
    if captions_per_identity < 1 or images_per_identity < 1:
        raise ValueError("per-identity counts must be at least 1")
    rng = np.random.default_rng(seed)
    captions, images, ident, classes = [], [], [], []
    for person in cohort.members():
        named = [caption_with_name(person, rng)
                 for _ in range(captions_per_identity)]
        faces = [render_face(person, face_aug_seed(person, PRETRAIN, k))
                 for k in range(images_per_identity)]
        n = min(max(captions_per_identity, images_per_identity),
                occurrence_cap)
        for k in range(n):
            captions.append(named[k % captions_per_identity])
            images.append(faces[k % images_per_identity])
            ident.append(person.id)
            classes.append(-1)
    for _ in range(generic_pairs):
        cls = int(rng.integers(len(CLASS_WORDS)))
        captions.append(generate_class_caption(cls, rng))
        images.append(render_scene(cls, rng))
        ident.append(-1)
        classes.append(cls)
    order = rng.permutation(len(captions))
    if images:
        images = np.stack(images)[order]
    else:
        images = np.zeros((0, 3, 32, 32), dtype=np.float32)
    data = PairDataset([captions[i] for i in order], images,
                       np.array(ident, dtype=np.int64)[order],
                       np.array(classes, dtype=np.int64)[order])
    if settings.debug:
        print("build_pretrain_dataset: %r" % data)
    return data


def dump_dataset(data, cohort, directory):
    """
    Writes every image as a raw float32 blob plus a JSON manifest with the
    cohort and the pair metadata.
    """
    if not os.path.isdir(directory):
        os.makedirs(directory)
    pairs = []
    for i in range(len(data)):
        fname = "%06d.f32" % i
        data.images[i].astype('<f4').tofile(os.path.join(directory, fname))
        pairs.append({'file': fname, 'caption': data.captions[i],
                      'identity_id': int(data.identity_ids[i]),
                      'class_id': int(data.class_ids[i])})
    json_store(os.path.join(directory, 'manifest.json'),
               {'image_shape': list(data.images.shape[1:]),
                'dtype': 'float32-le', 'cohort': cohort.to_dict(),
                'pairs': pairs})
