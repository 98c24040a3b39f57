# This file is part of bduf: backdoor-based unlearning for dual encoders.
#
#    Copyright (c) 2026 and later, the bduf developers.
#    Distributed under the 3-clause BSD license, see LICENSE.txt.
###############################################################################
"""
Similarity metrics between an original and a defended model, zero-shot
utility, pairwise-cosine statistics of embedding sets and the linear fit
of defense run times.
"""
import numpy as np
from scipy import stats

from bduf.corpus import (generic_captions, labeled_scenes, class_prompt,
                         fill_template)
from bduf.encoders import weight_distance
from bduf.options import ProbeConfig
from bduf.rendering import render_face, face_aug_seed, EVALUATION
from bduf.triggers import make_backdoor_text_batch, composite_face_trigger
from bduf.wordbanks import CLASS_WORDS

__all__ = ['mean_cosine', 'sim_clean', 'sim_backdoor', 'sim_target',
           'zero_shot_accuracy', 'zero_shot_topk', 'pairwise_cosine_stats',
           'runtime_scaling_fit', 'ScalingFit', 'ProbeSet', 'build_probes',
           'evaluate_defense', 'subspace_stats']


def _embed(model, inputs, modality):
    if modality == 'text':
        return model.embed_text(inputs)
    if modality == 'image':
        return model.embed_image(inputs)
    raise ValueError("unknown modality '%s'" % modality)


def mean_cosine(a, b):
    """
    Mean row-wise cosine similarity of two (n, l) arrays; `b` may be a
    single vector.  Zero rows have similarity 0.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape[0] == 0:
        raise ValueError("mean_cosine: empty set")
    b = np.broadcast_to(b, a.shape)
    na = np.linalg.norm(a, axis=1)
    nb = np.linalg.norm(b, axis=1)
    ok = (na > 0) & (nb > 0)
    dots = np.sum(a * b, axis=1)
    cos = np.where(ok, dots / np.where(ok, na * nb, 1.0), 0.0)
    return float(np.clip(np.mean(cos), -1.0, 1.0))


def sim_clean(original, defended, probes, modality='text'):
    """
    Mean cosine similarity between the original and the defended
    embeddings of generic inputs.
    """
    if len(probes) == 0:
        raise ValueError("sim_clean: empty probe set")
    return mean_cosine(_embed(original, probes, modality),
                       _embed(defended, probes, modality))


def sim_backdoor(defended, triggered, targets, modality='text'):
    """
    Mean cosine similarity between the defended embeddings of triggered
    inputs and their targets (one target per input, or a single target).
    """
    if len(triggered) == 0:
        raise ValueError("sim_backdoor: empty trigger set")
    return mean_cosine(_embed(defended, triggered, modality), targets)


def sim_target(original, defended, probes, modality='text'):
    """
    Mean cosine similarity between the original and the defended
    embeddings of the target inputs (neutral-term prompts or neutral
    faces).
    """
    if len(probes) == 0:
        raise ValueError("sim_target: empty target set")
    return mean_cosine(_embed(original, probes, modality),
                       _embed(defended, probes, modality))


def zero_shot_topk(model, images, labels, prompts, ks=(1, 5)):
    """
    Zero-shot accuracies for several ranks.

    Returns
    -------
    acc : dict
        Rank k to the fraction of images whose true class is among the k
        most similar prompts.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size == 0:
        raise ValueError("zero_shot_accuracy: no images")
    if labels.max() >= len(prompts) or labels.min() < 0:
        raise ValueError("zero_shot_accuracy: %d class prompts for labels "
                         "up to %d" % (len(prompts), labels.max()))
    for k in ks:
        if not 1 <= k <= len(prompts):
            raise ValueError("zero_shot_accuracy: k = %d with %d classes"
                             % (k, len(prompts)))
    text = np.asarray(model.embed_text(list(prompts)), dtype=np.float64)
    img = np.asarray(model.embed_image(images), dtype=np.float64)
    sims = img @ text.T
    # stable sort keeps the lower class index first among equal scores
    ranks = np.argsort(-sims, axis=1, kind='stable')
    acc = {}
    for k in ks:
        hit = np.any(ranks[:, :k] == labels[:, None], axis=1)
        acc[k] = float(np.mean(hit))
    return acc


def zero_shot_accuracy(model, images, labels, prompts, k=1):
    """Fraction of images whose true class is among the top `k` prompts."""
    return zero_shot_topk(model, images, labels, prompts, ks=(k,))[k]


def pairwise_cosine_stats(embeddings):
    """
    Mean cosine similarity over all unordered pairs of an embedding set.
    """
    e = np.asarray(embeddings, dtype=np.float64)
    if e.ndim != 2 or e.shape[0] < 2:
        raise ValueError("pairwise_cosine_stats: need at least two "
                         "embeddings")
    n = np.linalg.norm(e, axis=1, keepdims=True)
    u = np.where(n > 0, e / np.where(n > 0, n, 1.0), 0.0)
    g = u @ u.T
    i, j = np.triu_indices(e.shape[0], k=1)
    return float(np.mean(g[i, j]))


class ScalingFit(object):
    """Least-squares line through (count, seconds) measurements."""

    def __init__(self, slope, intercept, r2, n):
        self.slope = float(slope)
        self.intercept = float(intercept)
        self.r2 = float(r2)
        self.n = int(n)

    def to_dict(self):
        return {'slope': self.slope, 'intercept': self.intercept,
                'r2': self.r2, 'n': self.n}

    def __str__(self):
        return ("ScalingFit: seconds = %.4f * count + %.4f (R^2 = %.4f, "
                "%d points)" % (self.slope, self.intercept, self.r2, self.n))

    def __repr__(self):
        return str(self)


def runtime_scaling_fit(measurements):
    """
    Ordinary least-squares fit of run time against item count.

    Two distinct counts are accepted: with exactly two points the fit is
    the line through them (R^2 = 1).  Meaningful R^2 values need at least
    three counts, and the runtime sweep uses seven.

    Parameters
    ----------
    measurements : list of (count, seconds)

    Returns
    -------
    fit : ScalingFit
        Slope is the time per item.
    """
    m = np.asarray(measurements, dtype=np.float64)
    if m.ndim != 2 or m.shape[1] != 2 or m.shape[0] < 2:
        raise ValueError("runtime_scaling_fit: need (count, seconds) pairs")
    x, y = m[:, 0], m[:, 1]
    if np.unique(x).size < 2:
        raise ValueError("runtime_scaling_fit: all counts are equal")
    res = stats.linregress(x, y)
    return ScalingFit(res.slope, res.intercept, res.rvalue ** 2, len(x))


class ProbeSet(object):
    """
    Fixed inputs for comparing a victim with its defended copy.

    Attributes
    ----------
    clean_captions : list of str
    clean_images : ndarray
    zero_shot_images : ndarray
    zero_shot_labels : ndarray
    triggered_captions : list of str
        Generic captions carrying unlearned names.
    neutral_captions : list of str
        The same captions with the name replaced by the neutral term.
    triggered_images : ndarray
        Scenes with pasted held-out faces of unlearned identities.
    neutral_faces : ndarray
        Canonical faces of identities that are not unlearned.
    """

    def __init__(self):
        self.clean_captions = []
        self.clean_images = None
        self.zero_shot_images = None
        self.zero_shot_labels = None
        self.triggered_captions = []
        self.neutral_captions = []
        self.triggered_images = None
        self.neutral_faces = None


def build_probes(cohort, unlearned, config=None, seed=0,
                 neutral_term='person', max_len=16):
    """
    Draws the probe sets of one run.

    Parameters
    ----------
    cohort : Cohort
    unlearned : list of IdentityRecord
    config : ProbeConfig
    seed : int
        Probe stream seed.
    neutral_term : str
    max_len : int
        Tokenizer length limit.

    Returns
    -------
    probes : ProbeSet
    """
    if config is None:
        config = ProbeConfig()
    rng = np.random.default_rng(seed)
    p = ProbeSet()
    p.clean_captions = generic_captions(config.clean_captions, rng)
    p.clean_images, _ = labeled_scenes(config.clean_images, rng)
    p.zero_shot_images, p.zero_shot_labels = \
        labeled_scenes(config.zero_shot_images, rng)
    if unlearned:
        names = [q.name for q in unlearned]
        p.triggered_captions, p.neutral_captions, _ = \
            make_backdoor_text_batch(p.clean_captions, names,
                                     config.backdoor_samples, rng,
                                     neutral_term=neutral_term,
                                     max_len=max_len)
        n = config.backdoor_samples
        out = np.zeros((n,) + p.clean_images.shape[1:], dtype=np.float32)
        for i in range(n):
            q = unlearned[i % len(unlearned)]
            base = p.clean_images[int(rng.integers(len(p.clean_images)))]
            # held-out renders, never used for injection
            seed = face_aug_seed(q, EVALUATION, i // len(unlearned))
            out[i] = composite_face_trigger(base, q, rng, aug_seed=seed)
        p.triggered_images = out
    others = [q for q in cohort.identities
              if q.id not in set(u.id for u in unlearned)]
    if others:
        p.neutral_faces = np.stack([render_face(q) for q in others])
    return p


def class_prompts():
    return [class_prompt(c) for c in range(len(CLASS_WORDS))]


def evaluate_defense(victim, defended, probes, target_face=None,
                     neutral_term='person', templates=None, top_k=5):
    """
    Similarity, utility and drift metrics of a defended model against its
    victim.

    Parameters
    ----------
    victim, defended : DualEncoder
    probes : ProbeSet
    target_face : ndarray
        Average-face target of the image defense; image Sim_Backdoor is
        skipped without it.
    neutral_term : str
        Neutral term of the text defense.
    templates : list of str
        Prompt templates whose neutral-term fillings join the target set.
    top_k : int
        Second rank of the zero-shot accuracy.

    Returns
    -------
    metrics : dict
    """
    from bduf.options import DEFAULT_TEMPLATES
    templates = templates or DEFAULT_TEMPLATES
    m = {}
    m['text_sim_clean'] = sim_clean(victim, defended, probes.clean_captions,
                                    'text')
    targets = [fill_template(t, neutral_term) for t in templates]
    m['text_sim_target'] = sim_target(victim, defended,
                                      targets + probes.neutral_captions,
                                      'text')
    if probes.triggered_captions:
        neutral_def = defended.embed_text(probes.neutral_captions)
        neutral_vic = victim.embed_text(probes.neutral_captions)
        m['text_sim_backdoor'] = sim_backdoor(
            defended, probes.triggered_captions, neutral_def, 'text')
        m['text_sim_backdoor_teacher'] = sim_backdoor(
            defended, probes.triggered_captions, neutral_vic, 'text')
        m['text_sim_backdoor_victim'] = sim_backdoor(
            victim, probes.triggered_captions, neutral_vic, 'text')
    m['image_sim_clean'] = sim_clean(victim, defended, probes.clean_images,
                                     'image')
    if probes.neutral_faces is not None:
        m['image_sim_target'] = sim_target(victim, defended,
                                           probes.neutral_faces, 'image')
    if target_face is not None and probes.triggered_images is not None:
        m['image_sim_backdoor'] = sim_backdoor(
            defended, probes.triggered_images, target_face, 'image')
        m['image_sim_backdoor_victim'] = sim_backdoor(
            victim, probes.triggered_images, target_face, 'image')

    prompts = class_prompts()
    ks = (1, min(top_k, len(prompts)))
    before = zero_shot_topk(victim, probes.zero_shot_images,
                            probes.zero_shot_labels, prompts, ks)
    after = zero_shot_topk(defended, probes.zero_shot_images,
                           probes.zero_shot_labels, prompts, ks)
    m['victim_zero_shot_top1'] = before[1]
    m['victim_zero_shot_top%d' % ks[1]] = before[ks[1]]
    m['zero_shot_top1'] = after[1]
    m['zero_shot_top%d' % ks[1]] = after[ks[1]]
    m['zero_shot_top1_drop_pp'] = 100.0 * (before[1] - after[1])
    m['text_drift'] = weight_distance(defended.text, victim.text)
    m['image_drift'] = weight_distance(defended.image, victim.image)
    return m


def subspace_stats(model, identities, template="a photo of <NAME>"):
    """
    Mean pairwise cosine similarity of the face embeddings and of the
    named-prompt embeddings of a set of identities.

    Returns
    -------
    stats : dict
        'face_pairwise_cosine' and 'caption_pairwise_cosine'.
    """
    identities = list(identities)
    if len(identities) < 2:
        raise ValueError("subspace_stats: need at least two identities")
    faces = np.stack([render_face(q) for q in identities])
    captions = [fill_template(template, q.name) for q in identities]
    return {'face_pairwise_cosine':
            pairwise_cosine_stats(model.embed_image(faces)),
            'caption_pairwise_cosine':
            pairwise_cosine_stats(model.embed_text(captions))}
