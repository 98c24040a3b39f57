# This file is part of bduf: backdoor-based unlearning for dual encoders.
#
#    Copyright (c) 2026 and later, the bduf developers.
#    Distributed under the 3-clause BSD license, see LICENSE.txt.
###############################################################################
"""
Identity inference attack.

For every identity the attacker shows held-out face images to the model,
pairs each image with prompts "<template> filled with candidate name", and
takes the best-matching candidate.  The identity is declared a member of
the training data iff, for at least one template, the majority of its
images are matched to the true name.
"""
from collections import Counter
from functools import lru_cache

import numpy as np

import bduf.settings as settings
from bduf.corpus import fill_template
from bduf.options import IdiaConfig
from bduf.rendering import render_face, face_aug_seed, EVALUATION
from bduf.results import IdentityDecision, IdiaReport

__all__ = ['predict_name', 'majority_vote', 'evaluation_renders',
           'prompt_embeddings', 'idia_decision', 'run_idia']

# cohorts of a sweep hold at most a few hundred identities
_RENDER_CACHE_SIZE = 512


@lru_cache(maxsize=_RENDER_CACHE_SIZE)
def _renders(face_seed, n):
    out = np.stack([render_face(face_seed,
                                face_aug_seed(face_seed, EVALUATION, k))
                    for k in range(n)])
    out.setflags(write=False)
    return out


def evaluation_renders(identity, n):
    """
    `n` held-out renders of an identity, drawn from the evaluation split
    (never used for injection or pretraining).  Recent results are kept
    in a bounded cache.
    """
    face_seed = getattr(identity, 'face_seed', identity)
    return _renders(int(face_seed), int(n)).copy()


def prompt_embeddings(model, template, pool):
    """Text embeddings (len(pool), l) of the template filled with every
    candidate name."""
    return model.embed_text([fill_template(template, n) for n in pool])


def _best(image_embs, prompt_embs):
    """Index of the best candidate per image; ties go to the lowest
    index."""
    sims = np.asarray(image_embs, dtype=np.float64) @ \
        np.asarray(prompt_embs, dtype=np.float64).T
    return np.argmax(sims, axis=1)


def predict_name(model, face_image, template, pool, prompt_embs=None):
    """
    Candidate name whose filled-in template is most similar to the image.

    Parameters
    ----------
    model : DualEncoder
    face_image : ndarray, shape (3, H, W)
    template : str
        Template with one ``<NAME>`` slot.
    pool : NamePool or list of str
        Candidates; ties go to the earliest one.
    prompt_embs : ndarray
        Precomputed prompt embeddings of (template, pool).

    Returns
    -------
    name : str
    """
    if len(pool) == 0:
        raise ValueError("predict_name: empty candidate pool")
    if template.count('<NAME>') != 1:
        raise ValueError("predict_name: template must contain exactly one "
                         "<NAME> slot")
    if prompt_embs is None:
        prompt_embs = prompt_embeddings(model, template, pool)
    emb = model.embed_image(np.asarray(face_image)[None])
    return pool[int(_best(emb, prompt_embs)[0])]


def majority_vote(predictions, pool=None):
    """
    Most frequent name.  Ties go to the name with the lowest pool index
    (or, without a pool, to the name predicted first).
    """
    predictions = list(predictions)
    if not predictions:
        raise ValueError("majority_vote: no predictions")
    counts = Counter(predictions)
    top = max(counts.values())
    tied = [n for n in counts if counts[n] == top]
    if pool is not None:
        index = pool.index
        return min(tied, key=index)
    return min(tied, key=predictions.index)


def idia_decision(model, identity, config=None, pool=None,
                  prompt_embs=None):
    """
    Attack verdict for one identity.

    Parameters
    ----------
    model : DualEncoder
    identity : IdentityRecord
    config : IdiaConfig
    pool : NamePool
        Candidate names; must contain the identity's name.
    prompt_embs : list of ndarray
        Precomputed prompt embeddings, one array per template.

    Returns
    -------
    member : bool
        True iff some template's majority equals the true name.
    majorities : list of str
        Majority prediction per template.
    """
    if config is None:
        config = IdiaConfig()
    if identity.name not in pool:
        raise ValueError("idia_decision: '%s' is not in the candidate pool"
                         % identity.name)
    if prompt_embs is None:
        prompt_embs = [prompt_embeddings(model, t, pool)
                       for t in config.templates]
    images = evaluation_renders(identity, config.images_per_identity)
    image_embs = model.embed_image(images)
    majorities = []
    for pe in prompt_embs:
        picks = [pool[int(i)] for i in _best(image_embs, pe)]
        majorities.append(majority_vote(picks, pool))
    return identity.name in majorities, majorities


def run_idia(model, cohort, config=None, identities=None):
    """
    Runs the attack on every identity of a cohort.

    Parameters
    ----------
    model : DualEncoder
    cohort : Cohort
        Identities with known membership and the candidate pool.
    config : IdiaConfig
    identities : list of IdentityRecord
        Restrict the attack to these identities.

    Returns
    -------
    report : IdiaReport
    """
    if config is None:
        config = IdiaConfig()
    pool = cohort.pool
    prompt_embs = [prompt_embeddings(model, t, pool)
                   for t in config.templates]
    decisions = []
    for person in (cohort.identities if identities is None else identities):
        member, majorities = idia_decision(model, person, config, pool,
                                           prompt_embs)
        decisions.append(IdentityDecision(person.id, person.name,
                                          person.member, member, majorities))
    report = IdiaReport(config.templates, decisions)
    if settings.debug:
        print("run_idia: %s" % report)
    return report
