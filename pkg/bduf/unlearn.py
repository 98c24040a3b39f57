# This file is part of bduf: backdoor-based unlearning for dual encoders.
#
#    Copyright (c) 2026 and later, the bduf developers.
#    Distributed under the 3-clause BSD license, see LICENSE.txt.
###############################################################################
"""
Unlearning by backdoor injection.

A student copy of one encoder is fine-tuned against a frozen teacher copy.
The loss keeps clean inputs where the teacher puts them and maps triggered
inputs (captions with a name, scenes with a face) onto a neutral target
embedding, while a penalty on the parameter drift keeps the student close
to the teacher::

    L = -mean_T cos(M(x), M'(x)) - alpha mean_Z cos(target, M'(x))
        + beta ||theta' - theta||

"""
import numpy as np

import bduf.settings as settings
from bduf.corpus import generic_captions, generic_images
from bduf.encoders import clone_frozen, weight_distance
from bduf.errors import DegenerateTargetError, NonFiniteError
from bduf.optim import AdamWState, LrSchedule, adamw_step, no_decay_params
from bduf.options import UnlearnConfig
from bduf.rendering import render_face
from bduf.results import TrainingLog
from bduf.seeding import derived_seed, step_rng
from bduf.tensor import (Tensor, Tape, backward, add, scale,
                         cosine_similarity, reduce_mean, sqrt,
                         sq_l2_distance)
from bduf.triggers import (substitute_neutral, make_backdoor_text_batch,
                           make_backdoor_image_batch)
from bduf.ui.progressbar import make_progress_bar

__all__ = ['TargetSpec', 'compute_target_text', 'average_embedding',
           'compute_average_face_embedding', 'backdoor_terms',
           'backdoor_loss', 'total_loss', 'unlearn_text', 'unlearn_image',
           'unlearn_combined', 'CLEAN_POOL_SIZE']

# generic captions / scenes the clean batches are drawn from
CLEAN_POOL_SIZE = 2000

_LOG_COLUMNS = ['distill', 'backdoor', 'weight_norm', 'total', 'lr']


class TargetSpec(object):
    """
    Where triggered inputs are sent.

    Attributes
    ----------
    mode : str {'neutral-term', 'average-face', 'explicit-vector'}
    vector : ndarray
        Fixed target embedding (average-face and explicit-vector modes).
    neutral_term : str
        Replacement word (neutral-term mode).
    """

    def __init__(self, mode, vector=None, neutral_term=None):
        self.mode = mode
        self.vector = None
        if vector is not None:
            v = np.asarray(vector, dtype=np.float64)
            n = np.linalg.norm(v)
            if n < 1e-6:
                raise DegenerateTargetError("target vector has zero norm")
            self.vector = (v / n).astype(np.float32)
        self.neutral_term = neutral_term

    def __repr__(self):
        return "TargetSpec(%s)" % self.mode


def compute_target_text(teacher, caption, name, neutral_term):
    """
    Target embedding of a triggered caption: the teacher's embedding of the
    caption with the name replaced by the neutral term.

    Returns
    -------
    target : ndarray, shape (l,)
    """
    neutral = substitute_neutral(caption, name, neutral_term)
    return teacher.embed_text([neutral])[0]


def average_embedding(embeddings, tol=1e-6):
    """
    Normalized mean of a set of embeddings.

    Raises
    ------
    DegenerateTargetError
        When the mean has (numerically) zero norm.
    """
    e = np.asarray(embeddings, dtype=np.float64)
    if e.ndim != 2 or e.shape[0] == 0:
        raise ValueError("average_embedding: need a non-empty (n, l) array")
    mean = e.mean(axis=0)
    n = np.linalg.norm(mean)
    if n < tol:
        raise DegenerateTargetError("average embedding has zero norm; the "
                                    "inputs cancel out")
    return (mean / n).astype(np.float32)


def compute_average_face_embedding(teacher, identities):
    """
    Average face target: the normalized mean of the teacher's embeddings
    of one canonical render per identity.

    Parameters
    ----------
    teacher : DualEncoder
    identities : list of IdentityRecord
        The whole cohort, not only the identities being unlearned.
    """
    if not identities:
        raise ValueError("compute_average_face_embedding: empty cohort")
    faces = np.stack([render_face(p) for p in identities])
    return average_embedding(teacher.embed_image(faces))


def _mean_cosine(a, b):
    return reduce_mean(cosine_similarity(a, b))


def backdoor_terms(teacher_clean, student_clean, targets, student_triggered):
    """
    The two similarity terms of the backdoor loss.

    Parameters
    ----------
    teacher_clean : array_like, shape (|T|, l)
        Teacher embeddings of the clean batch.
    student_clean : Tensor, shape (|T|, l)
        Student embeddings of the clean batch.
    targets : array_like, shape (|Z|, l) or (l,)
        Target embeddings.
    student_triggered : Tensor, shape (|Z|, l)
        Student embeddings of the triggered batch.

    Returns
    -------
    distill, backdoor : Tensor or None
        Mean cosine similarities; None for an empty batch.
    """
    distill = backdoor = None
    if student_clean is not None and student_clean.shape[0] > 0:
        distill = _mean_cosine(Tensor(np.asarray(teacher_clean),
                                      dtype=student_clean.dtype),
                               student_clean)
    if student_triggered is not None and student_triggered.shape[0] > 0:
        backdoor = _mean_cosine(Tensor(np.asarray(targets),
                                       dtype=student_triggered.dtype),
                                student_triggered)
    if distill is None and backdoor is None:
        raise ValueError("backdoor_loss: clean and triggered batches are "
                         "both empty")
    return distill, backdoor


def _combine(distill, backdoor, alpha):
    loss = None
    if distill is not None:
        loss = scale(distill, -1.0)
    if backdoor is not None:
        term = scale(backdoor, -alpha)
        loss = term if loss is None else add(loss, term)
    return loss


def backdoor_loss(teacher_clean, student_clean, targets, student_triggered,
                  alpha):
    """
    -mean cos(teacher, student) over the clean batch minus alpha times
    mean cos(target, student) over the triggered batch.  Lies in
    [-(1 + alpha), 1 + alpha].

    Returns
    -------
    loss : Tensor
    """
    distill, backdoor = backdoor_terms(teacher_clean, student_clean, targets,
                                       student_triggered)
    return _combine(distill, backdoor, alpha)


def _param_lists(student, teacher):
    if hasattr(student, 'named_parameters'):
        sa, sb = student.named_parameters(), teacher.named_parameters()
        if [k for k, _ in sa] != [k for k, _ in sb]:
            raise ValueError("total_loss: parameter registries differ")
        return [p for _, p in sa], [p for _, p in sb]
    sa, sb = list(student), list(teacher)
    if len(sa) != len(sb):
        raise ValueError("total_loss: parameter registries differ")
    for a, b in zip(sa, sb):
        if a.shape != b.shape:
            raise ValueError("total_loss: parameter registries differ "
                             "(%s vs %s)" % (a.shape, b.shape))
    return sa, sb


def total_loss(loss, student, teacher, beta):
    """
    Adds beta times the L2 norm of the parameter difference.

    Parameters
    ----------
    loss : Tensor
        The backdoor loss.
    student, teacher : Encoder or list of Tensor
        Parameter sets with identical registries.
    beta : float

    Returns
    -------
    total : Tensor
    """
    sa, sb = _param_lists(student, teacher)
    if beta == 0:
        return loss
    return add(loss, scale(sqrt(sq_l2_distance(sa, sb)), beta))


def _student_and_teacher(victim, which):
    teacher = clone_frozen(victim)
    student = victim.copy(trainable=False)
    student.encoder(which).set_trainable(True)
    return student, teacher


def _finish_step(loss, distill, backdoor, student_enc, teacher_enc, params,
                 tape, state, schedule, log, step, pbar):
    value = loss.item()
    if not np.isfinite(value):
        raise NonFiniteError("unlearn: non-finite loss", step=step)
    lr = schedule.rate(state.step)
    grads = backward(tape, loss, params)
    adamw_step(params, grads, state, schedule)
    log.append(step,
               distill=distill.item() if distill is not None else 0.0,
               backdoor=backdoor.item() if backdoor is not None else 0.0,
               weight_norm=weight_distance(student_enc, teacher_enc),
               total=value, lr=lr)
    pbar.update(step + 1, loss=value)
    if settings.debug and step % 50 == 0:
        print("unlearn: step %d total %.5f drift %.5f"
              % (step, value, log.last('weight_norm')))


def unlearn_text(victim, names, config=None, seed=0, clean_captions=None,
                 progress_bar=None):
    """
    Injects a name backdoor into the text encoder.

    Parameters
    ----------
    victim : DualEncoder
        Pretrained model; left untouched.
    names : list of str
        Full names to unlearn.
    config : UnlearnConfig
        Defaults to :meth:`UnlearnConfig.text_defaults`.
    seed : int
        Defense stream seed; step k draws from a stream derived from
        (seed, k).
    clean_captions : list of str
        Generic captions for clean and triggered batches; generated from
        the seed when omitted.

    Returns
    -------
    model : DualEncoder
        Copy of the victim with a fine-tuned text encoder.
    log : TrainingLog
        Loss terms per step.
    """
    if config is None:
        config = UnlearnConfig.text_defaults()
    names = list(names)
    student, teacher = _student_and_teacher(victim, 'text')
    log = TrainingLog('unlearn-text', _LOG_COLUMNS)
    if config.steps == 0 or not names:
        return student, log

    if clean_captions is None:
        clean_captions = generic_captions(
            CLEAN_POOL_SIZE,
            np.random.default_rng(derived_seed(seed, 'clean')))
    max_len = victim.config.max_len
    fixed = None
    if config.target_mode == 'explicit-vector':
        fixed = TargetSpec(config.target_mode, config.target_vector).vector

    params = student.text.parameters()
    state = AdamWState(params, lr=config.lr,
                       weight_decay=config.weight_decay,
                       no_decay=no_decay_params(params))
    schedule = LrSchedule(config.lr, config.milestones, config.multiplier)
    pbar = make_progress_bar(progress_bar, config.steps,
                             label="unlearn-text")

    for step in range(config.steps):
        rng = step_rng(seed, step)
        idx = rng.integers(len(clean_captions), size=config.clean_batch_size)
        clean = [clean_captions[int(i)] for i in idx]
        triggered, neutral, _ = make_backdoor_text_batch(
            clean_captions, names, config.backdoor_size(len(names)), rng,
            neutral_term=config.neutral_term, max_len=max_len)
        teacher_clean = teacher.embed_text(clean)
        if fixed is None:
            targets = teacher.embed_text(neutral)
        else:
            targets = fixed
        with Tape() as tape:
            sc = student.encode_text(clean)
            st = student.encode_text(triggered)
            distill, backdoor = backdoor_terms(teacher_clean, sc, targets, st)
            loss = total_loss(_combine(distill, backdoor, config.alpha),
                              student.text, teacher.text, config.beta)
        _finish_step(loss, distill, backdoor, student.text, teacher.text,
                     params, tape, state, schedule, log, step, pbar)
    pbar.finished()
    return student, log


def unlearn_image(victim, identities, config=None, seed=0, cohort=None,
                  clean_images=None, target=None, progress_bar=None):
    """
    Injects a face backdoor into the image encoder.

    Parameters
    ----------
    victim : DualEncoder
        Pretrained model; left untouched.
    identities : list of IdentityRecord
        Identities to unlearn.
    config : UnlearnConfig
        Defaults to :meth:`UnlearnConfig.image_defaults`.
    seed : int
        Defense stream seed.
    cohort : Cohort
        Identities averaged into the average-face target.
    clean_images : ndarray, shape (M, 3, 32, 32)
        Generic scenes for clean and triggered batches; generated from the
        seed when omitted.
    target : ndarray
        Precomputed target embedding; overrides the configured mode.

    Returns
    -------
    model : DualEncoder
        Copy of the victim with a fine-tuned image encoder.
    log : TrainingLog
        Loss terms per step.
    """
    if config is None:
        config = UnlearnConfig.image_defaults()
    identities = list(identities)
    student, teacher = _student_and_teacher(victim, 'image')
    log = TrainingLog('unlearn-image', _LOG_COLUMNS)
    if config.steps == 0 or not identities:
        return student, log

    if target is None:
        if config.target_mode == 'explicit-vector':
            target = TargetSpec(config.target_mode,
                                config.target_vector).vector
        else:
            everyone = list(cohort) if cohort is not None else identities
            # computed once on the teacher and never updated
            target = compute_average_face_embedding(teacher, everyone)
    target = np.asarray(target, dtype=np.float32)
    if clean_images is None:
        clean_images = generic_images(
            CLEAN_POOL_SIZE,
            np.random.default_rng(derived_seed(seed, 'clean')))

    params = student.image.parameters()
    state = AdamWState(params, lr=config.lr,
                       weight_decay=config.weight_decay,
                       no_decay=no_decay_params(params))
    schedule = LrSchedule(config.lr, config.milestones, config.multiplier)
    pbar = make_progress_bar(progress_bar, config.steps,
                             label="unlearn-image")

    for step in range(config.steps):
        rng = step_rng(seed, step)
        idx = rng.integers(clean_images.shape[0],
                           size=config.clean_batch_size)
        clean = clean_images[idx]
        triggered, _, _ = make_backdoor_image_batch(
            clean_images, identities, config.faces_per_identity,
            config.backdoor_size(len(identities)), rng)
        teacher_clean = teacher.embed_image(clean)
        with Tape() as tape:
            sc = student.encode_image(clean)
            st = student.encode_image(triggered)
            distill, backdoor = backdoor_terms(teacher_clean, sc, target, st)
            loss = total_loss(_combine(distill, backdoor, config.alpha),
                              student.image, teacher.image, config.beta)
        _finish_step(loss, distill, backdoor, student.image, teacher.image,
                     params, tape, state, schedule, log, step, pbar)
    pbar.finished()
    return student, log


def unlearn_combined(victim, identities, text_config=None, image_config=None,
                     seed=0, cohort=None, clean_captions=None,
                     clean_images=None, progress_bar=None):
    """
    Runs the text and image defenses independently from the same victim
    and joins the two fine-tuned encoders.

    Returns
    -------
    model : DualEncoder
    logs : dict
        'text' and 'image' training logs.
    """
    identities = list(identities)
    text_model, text_log = unlearn_text(
        victim, [p.name for p in identities], text_config,
        seed=seed, clean_captions=clean_captions,
        progress_bar=progress_bar)
    image_model, image_log = unlearn_image(
        victim, identities, image_config, seed=seed,
        cohort=cohort, clean_images=clean_images, progress_bar=progress_bar)
    model = victim.copy(trainable=False)
    model.text = text_model.text
    model.image = image_model.image
    return model, {'text': text_log, 'image': image_log}
