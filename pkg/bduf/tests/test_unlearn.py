# This file is part of bduf: backdoor-based unlearning for dual encoders.
#
#    Copyright (c) 2026 and later, the bduf developers.
#    Distributed under the 3-clause BSD license, see LICENSE.txt.
###############################################################################
import numpy as np
from numpy.testing import (assert_, assert_equal, assert_allclose,
                           assert_raises)

import bduf.unlearn
from bduf.corpus import generic_captions, generic_images
from bduf.encoders import weight_distance
from bduf.errors import DegenerateTargetError, NonFiniteError
from bduf.fileio import checkpoint_bytes
from bduf.options import UnlearnConfig
from bduf.rendering import EVALUATION, face_aug_seed
from bduf.tensor import Tensor, scale
from bduf.triggers import composite_face_trigger
from bduf.unlearn import (TargetSpec, average_embedding, backdoor_loss,
                          total_loss, compute_target_text,
                          compute_average_face_embedding, unlearn_text,
                          unlearn_image, unlearn_combined)

from bduf.tests.common import tiny_model, tiny_cohort


def _unit(x):
    x = np.asarray(x, dtype=np.float64)
    return x / np.linalg.norm(x, axis=-1, keepdims=True)


class TestLoss:
    """
    Backdoor objective.
    """

    def test_bounds(self):
        "unlearn: loss is -(1 + alpha) when student matches everything"
        e = _unit(np.random.default_rng(0).standard_normal((3, 4)))
        loss = backdoor_loss(e, Tensor(e), e, Tensor(e), 0.6)
        assert_allclose(loss.item(), -1.6)
        loss = backdoor_loss(e, Tensor(-e), e, Tensor(-e), 0.6)
        assert_allclose(loss.item(), 1.6)

    def test_worked_example(self):
        "unlearn: cosines 0.8 and 0.5 with alpha 0.6 give -1.1"
        teacher = np.array([[1.0, 0.0]])
        student = Tensor(np.array([[0.8, 0.6]]))
        target = np.array([[1.0, 0.0]])
        triggered = Tensor(np.array([[0.5, 0.75 ** 0.5]]))
        loss = backdoor_loss(teacher, student, target, triggered, 0.6)
        assert_allclose(loss.item(), -1.1)

    def test_alpha_zero(self):
        "unlearn: with alpha 0 the loss is the distillation term alone"
        rng = np.random.default_rng(2)
        e = _unit(rng.standard_normal((4, 5)))
        s = Tensor(_unit(rng.standard_normal((4, 5))))
        distill = -np.mean(np.sum(e * s.data, axis=1))
        for z in (_unit(rng.standard_normal((3, 5))),
                  _unit(rng.standard_normal((7, 5)))):
            loss = backdoor_loss(e, s, z, Tensor(z[::-1].copy()), 0.0)
            assert_allclose(loss.item(), distill)

    def test_empty_batches(self):
        "unlearn: an empty batch drops its term, two empty batches fail"
        e = _unit(np.ones((2, 3)))
        empty = Tensor(np.zeros((0, 3)))
        assert_allclose(backdoor_loss(e, Tensor(e), e, empty, 0.6).item(),
                        -1.0)
        assert_allclose(backdoor_loss(e, empty, e, Tensor(e), 0.5).item(),
                        -0.5)
        assert_raises(ValueError, backdoor_loss, e, empty, e, empty, 0.6)

    def test_broadcast_target(self):
        "unlearn: a single target vector is shared by the triggered batch"
        t = _unit([1.0, 0.0, 0.0])
        st = Tensor(np.tile(t, (4, 1)))
        assert_allclose(backdoor_loss(np.zeros((0, 3)), None, t, st,
                                      1.0).item(), -1.0)

    def test_total_loss_norm(self):
        "unlearn: drift penalty is beta times the L2 norm"
        a = [Tensor(np.array([3.0, 0.0])), Tensor(np.array([[0.0]]))]
        b = [Tensor(np.array([0.0, 0.0])), Tensor(np.array([[4.0]]))]
        base = Tensor(np.array(1.0))
        assert_allclose(total_loss(base, a, b, 0.5).item(), 1.0 + 2.5)
        assert_(total_loss(base, a, b, 0.0) is base)

    def test_total_loss_registry(self):
        "unlearn: parameter sets must match"
        a = [Tensor(np.zeros(2))]
        assert_raises(ValueError, total_loss, Tensor(np.array(0.0)), a,
                      a + a, 0.1)
        assert_raises(ValueError, total_loss, Tensor(np.array(0.0)), a,
                      [Tensor(np.zeros(3))], 0.1)
        m = tiny_model()
        assert_raises(ValueError, total_loss, Tensor(np.array(0.0)), m.text,
                      m.image, 0.1)


class TestTargets:
    """
    Target embeddings.
    """

    def test_average(self):
        "unlearn: average embedding is normalized"
        t = average_embedding([[1.0, 0.0], [0.0, 1.0]])
        assert_allclose(t, [2 ** -0.5, 2 ** -0.5], rtol=1e-6)

    def test_average_degenerate(self):
        "unlearn: opposite embeddings have no average direction"
        assert_raises(DegenerateTargetError, average_embedding,
                      [[1.0, 0.0], [-1.0, 0.0]])
        assert_raises(ValueError, average_embedding, np.zeros((0, 2)))

    def test_explicit(self):
        "unlearn: explicit targets are normalized, zero vectors rejected"
        spec = TargetSpec('explicit-vector', [0.0, 2.0])
        assert_allclose(spec.vector, [0.0, 1.0])
        assert_raises(DegenerateTargetError, TargetSpec, 'explicit-vector',
                      [0.0, 0.0])

    def test_text_target(self):
        "unlearn: text target embeds the neutral caption"
        m = tiny_model()
        t = compute_target_text(m, "mary smith sits on the road",
                                "mary smith", "person")
        assert_allclose(t, m.embed_text(["person sits on the road"])[0])

    def test_average_face(self):
        "unlearn: average face target is a unit vector"
        m = tiny_model()
        t = compute_average_face_embedding(m, list(tiny_cohort()))
        assert_allclose(np.linalg.norm(t), 1.0, rtol=1e-5)
        assert_raises(ValueError, compute_average_face_embedding, m, [])


class TestDefense:
    """
    Fine-tuning loops.
    """

    def _configs(self, encoder, **kw):
        opts = dict(steps=2, milestones=[1], clean_batch_size=3,
                    backdoor_batch_size=3)
        opts.update(kw)
        if encoder == 'text':
            return UnlearnConfig.text_defaults(**opts)
        return UnlearnConfig.image_defaults(faces_per_identity=2, **opts)

    def test_zero_steps(self):
        "unlearn: zero steps return an unchanged copy"
        victim = tiny_model()
        cohort = tiny_cohort()
        m, log = unlearn_text(victim, ["mary smith"],
                              self._configs('text', steps=0))
        assert_equal(weight_distance(m, victim), 0.0)
        assert_equal(len(log), 0)
        m, _ = unlearn_image(victim, cohort.members()[:1],
                             self._configs('image', steps=0))
        assert_equal(weight_distance(m, victim), 0.0)

    def test_text_only_text_changes(self):
        "unlearn: the text defense leaves the image encoder alone"
        victim = tiny_model()
        captions = generic_captions(20, np.random.default_rng(0))
        m, log = unlearn_text(victim, ["mary smith"],
                              self._configs('text'), seed=1,
                              clean_captions=captions)
        assert_(weight_distance(m.text, victim.text) > 0)
        assert_equal(weight_distance(m.image, victim.image), 0.0)
        assert_equal(len(log), 2)
        assert_allclose(log.column('lr'), [1e-4, 5e-5])
        assert_allclose(log.last('weight_norm'),
                        weight_distance(m.text, victim.text), rtol=1e-5)

    def test_image_only_image_changes(self):
        "unlearn: the image defense leaves the text encoder alone"
        victim = tiny_model()
        cohort = tiny_cohort()
        scenes = generic_images(6, np.random.default_rng(0))
        m, log = unlearn_image(victim, cohort.members()[:2],
                               self._configs('image'), seed=1, cohort=cohort,
                               clean_images=scenes)
        assert_(weight_distance(m.image, victim.image) > 0)
        assert_equal(weight_distance(m.text, victim.text), 0.0)
        assert_(np.all(np.isfinite(log.column('total'))))

    def test_deterministic(self):
        "unlearn: same seed gives identical defended models"
        victim = tiny_model()
        captions = generic_captions(20, np.random.default_rng(0))
        a, _ = unlearn_text(victim, ["mary smith"], self._configs('text'),
                            seed=4, clean_captions=captions)
        b, _ = unlearn_text(victim, ["mary smith"], self._configs('text'),
                            seed=4, clean_captions=captions)
        assert_equal(weight_distance(a, b), 0.0)

    def test_combined(self):
        "unlearn: the combined defense joins both fine-tuned encoders"
        victim = tiny_model()
        cohort = tiny_cohort()
        people = cohort.members()[:1]
        captions = generic_captions(20, np.random.default_rng(0))
        scenes = generic_images(6, np.random.default_rng(1))
        t, _ = unlearn_text(victim, [p.name for p in people],
                            self._configs('text'), seed=2,
                            clean_captions=captions)
        i, _ = unlearn_image(victim, people, self._configs('image'), seed=2,
                             cohort=cohort, clean_images=scenes)
        both, logs = unlearn_combined(
            victim, people, self._configs('text'), self._configs('image'),
            seed=2, cohort=cohort, clean_captions=captions,
            clean_images=scenes)
        assert_equal(sorted(logs), ['image', 'text'])
        assert_equal(weight_distance(both.text, t.text), 0.0)
        assert_equal(weight_distance(both.image, i.image), 0.0)

    def test_victim_untouched(self):
        "unlearn: the victim's parameters are not modified by a defense"
        victim = tiny_model()
        cohort = tiny_cohort()
        before = checkpoint_bytes(victim)
        unlearn_text(victim, ["mary smith"], self._configs('text'), seed=1,
                     clean_captions=generic_captions(
                         20, np.random.default_rng(0)))
        unlearn_image(victim, cohort.members()[:1], self._configs('image'),
                      seed=1, cohort=cohort,
                      clean_images=generic_images(
                          6, np.random.default_rng(0)))
        assert_equal(checkpoint_bytes(victim), before)

    def test_non_finite_loss(self, monkeypatch):
        "unlearn: a non-finite loss aborts with the step index"
        monkeypatch.setattr(bduf.unlearn, 'total_loss',
                            lambda loss, *args: scale(loss, np.inf))
        victim = tiny_model()
        cohort = tiny_cohort()
        captions = generic_captions(20, np.random.default_rng(0))
        try:
            unlearn_text(victim, ["mary smith"], self._configs('text'),
                         clean_captions=captions)
        except NonFiniteError as e:
            assert_equal(e.step, 0)
        else:
            assert_(False, "no NonFiniteError raised")
        assert_raises(NonFiniteError, unlearn_image, victim,
                      cohort.members()[:1], self._configs('image'),
                      cohort=cohort,
                      clean_images=generic_images(
                          6, np.random.default_rng(0)))

    def test_held_out_faces_move_to_target(self):
        "unlearn: held-out triggered renders move towards the target"
        victim = tiny_model()
        cohort = tiny_cohort()
        person = cohort.members()[0]
        target = compute_average_face_embedding(victim, list(cohort))
        rng = np.random.default_rng(3)
        scenes = generic_images(6, rng)
        held_out = np.stack([
            composite_face_trigger(scenes[k], person, rng,
                                   aug_seed=face_aug_seed(person,
                                                          EVALUATION, k))
            for k in range(6)])
        config = UnlearnConfig.image_defaults(
            steps=15, milestones=[], lr=1e-2, alpha=1.0, beta=0.0,
            clean_batch_size=2, backdoor_batch_size=8, faces_per_identity=4)
        m, _ = unlearn_image(victim, [person], config, seed=5, cohort=cohort,
                             clean_images=generic_images(
                                 20, np.random.default_rng(4)),
                             target=target)
        before = np.mean(victim.embed_image(held_out) @ target)
        after = np.mean(m.embed_image(held_out) @ target)
        assert_(after > before, "%.4f -> %.4f" % (before, after))
