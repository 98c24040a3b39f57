# This file is part of bduf: backdoor-based unlearning for dual encoders.
#
#    Copyright (c) 2026 and later, the bduf developers.
#    Distributed under the 3-clause BSD license, see LICENSE.txt.
###############################################################################
import numpy as np
from numpy.testing import (assert_, assert_equal, assert_allclose,
                           assert_raises)

from bduf.encoders import clone_frozen
from bduf.metrics import (mean_cosine, sim_clean, sim_backdoor, sim_target,
                          zero_shot_topk, zero_shot_accuracy,
                          pairwise_cosine_stats, runtime_scaling_fit,
                          build_probes, evaluate_defense, subspace_stats,
                          class_prompts)
from bduf.options import ProbeConfig

from bduf.tests.common import tiny_model, tiny_cohort


def small_probes(cohort, unlearned):
    cfg = ProbeConfig(clean_captions=6, clean_images=5, backdoor_samples=4,
                      zero_shot_images=8, top_k=5)
    return build_probes(cohort, unlearned, cfg, seed=0)


class TestSimilarity:
    """
    Cosine-based similarity metrics.
    """

    def test_mean_cosine(self):
        "metrics: mean cosine with a broadcast vector and zero rows"
        a = np.array([[1.0, 0.0], [0.0, 2.0], [0.0, 0.0]])
        assert_allclose(mean_cosine(a, [1.0, 0.0]), 1.0 / 3)
        assert_raises(ValueError, mean_cosine, np.zeros((0, 2)), [1.0, 0.0])

    def test_identical_models(self):
        "metrics: a model compared with itself scores one"
        m = tiny_model()
        captions = ["a red ball", "the kite near a road"]
        assert_allclose(sim_clean(m, m, captions), 1.0, rtol=1e-6)
        assert_allclose(sim_target(m, clone_frozen(m), captions), 1.0,
                        rtol=1e-6)
        probes = small_probes(tiny_cohort(), [])
        assert_allclose(sim_clean(m, m, probes.clean_images, 'image'), 1.0,
                        rtol=1e-6)

    def test_sim_backdoor(self):
        "metrics: backdoor similarity against the model's own embedding"
        m = tiny_model()
        captions = ["a red ball", "the kite near a road"]
        assert_allclose(sim_backdoor(m, captions, m.embed_text(captions)),
                        1.0, rtol=1e-6)

    def test_empty(self):
        "metrics: empty probe sets are rejected"
        m = tiny_model()
        assert_raises(ValueError, sim_clean, m, m, [])
        assert_raises(ValueError, sim_backdoor, m, [], [1.0])
        assert_raises(ValueError, sim_target, m, m, [])
        assert_raises(ValueError, sim_clean, m, m, ["a ball"], 'audio')

    def test_pairwise(self):
        "metrics: pairwise cosine of equal and orthonormal sets"
        assert_allclose(pairwise_cosine_stats(np.ones((4, 3))), 1.0)
        assert_allclose(pairwise_cosine_stats(np.eye(5)), 0.0)
        assert_allclose(pairwise_cosine_stats([[1.0, 0.0], [-1.0, 0.0]]),
                        -1.0)
        assert_raises(ValueError, pairwise_cosine_stats, np.ones((1, 3)))

    def test_subspace(self):
        "metrics: subspace statistics of face and caption embeddings"
        s = subspace_stats(tiny_model(), tiny_cohort().identities[:3])
        assert_equal(sorted(s), ['caption_pairwise_cosine',
                                 'face_pairwise_cosine'])
        for v in s.values():
            assert_(-1.0 <= v <= 1.0)
        assert_raises(ValueError, subspace_stats, tiny_model(),
                      tiny_cohort().identities[:1])


class OrthoModel(object):
    """Prompt k embeds to e_k, images embed to their first pixel row."""

    def embed_text(self, prompts):
        return np.eye(len(prompts))

    def embed_image(self, images):
        return np.asarray(images)[:, 0, 0, :]


class TestZeroShot:
    """
    Zero-shot classification accuracy.
    """

    def _images(self, rows):
        img = np.zeros((len(rows), 3, 1, len(rows[0])))
        img[:, 0, 0, :] = rows
        return img

    def test_topk(self):
        "metrics: top-1 and top-2 accuracy"
        rows = [[1.0, 0.5, 0.0], [0.2, 1.0, 0.0], [0.0, 0.5, 0.4]]
        labels = [0, 0, 2]
        acc = zero_shot_topk(OrthoModel(), self._images(rows), labels,
                             ['a', 'b', 'c'], ks=(1, 2))
        assert_allclose(acc[1], 1.0 / 3)
        assert_allclose(acc[2], 1.0)

    def test_ties(self):
        "metrics: equal scores rank the lower class first"
        img = self._images([[1.0, 1.0, 0.0], [1.0, 1.0, 0.0]])
        acc = zero_shot_accuracy(OrthoModel(), img, [0, 1], ['a', 'b', 'c'])
        assert_allclose(acc, 0.5)

    def test_checks(self):
        "metrics: labels and ranks must fit the prompts"
        img = self._images([[1.0, 0.0]])
        assert_raises(ValueError, zero_shot_accuracy, OrthoModel(), img, [2],
                      ['a', 'b'])
        assert_raises(ValueError, zero_shot_accuracy, OrthoModel(), img, [0],
                      ['a', 'b'], k=3)
        assert_raises(ValueError, zero_shot_accuracy, OrthoModel(), img[:0],
                      [], ['a', 'b'])

    def test_class_prompts(self):
        "metrics: one prompt per class"
        p = class_prompts()
        assert_equal(len(p), 10)
        assert_equal(p[1], "a photo of a box")


class TestScaling:
    """
    Linear run-time fit.
    """

    def test_exact_line(self):
        "metrics: points on a line are fitted exactly"
        pts = [(n, 0.5 * n + 2.0) for n in (1, 2, 4, 8, 16)]
        fit = runtime_scaling_fit(pts)
        assert_allclose((fit.slope, fit.intercept, fit.r2), (0.5, 2.0, 1.0))
        assert_equal(fit.n, 5)

    def test_two_points(self):
        "metrics: two distinct counts determine the line"
        fit = runtime_scaling_fit([(1, 3.0), (3, 7.0)])
        assert_allclose((fit.slope, fit.intercept), (2.0, 1.0))
        assert_allclose(fit.r2, 1.0)

    def test_repeated_counts(self):
        "metrics: repetitions at each count are fitted together"
        fit = runtime_scaling_fit([(1, 1.0), (1, 3.0), (2, 3.0), (2, 5.0)])
        assert_allclose((fit.slope, fit.intercept), (2.0, 0.0), atol=1e-12)
        assert_("R^2" in str(fit))
        assert_equal(sorted(fit.to_dict()), ['intercept', 'n', 'r2',
                                             'slope'])

    def test_degenerate(self):
        "metrics: one point or one distinct count cannot be fitted"
        assert_raises(ValueError, runtime_scaling_fit, [(1, 2.0)])
        assert_raises(ValueError, runtime_scaling_fit, [(4, 2.0), (4, 3.0)])


class TestEvaluate:
    """
    Probe sets and the full metric dictionary.
    """

    def test_probes(self):
        "metrics: probe sets follow the configured sizes"
        cohort = tiny_cohort()
        unlearned = cohort.members()[:2]
        p = small_probes(cohort, unlearned)
        assert_equal(len(p.clean_captions), 6)
        assert_equal(p.clean_images.shape[0], 5)
        assert_equal(len(p.triggered_captions), 4)
        assert_equal(p.triggered_images.shape, (4, 3, 32, 32))
        assert_equal(p.neutral_faces.shape[0], len(cohort) - 2)
        for t in p.triggered_captions:
            assert_(any(u.name in t for u in unlearned))

    def test_probes_deterministic(self):
        "metrics: same seed gives the same probes"
        cohort = tiny_cohort()
        a = small_probes(cohort, cohort.members()[:1])
        b = small_probes(cohort, cohort.members()[:1])
        assert_equal(a.clean_captions, b.clean_captions)
        assert_equal(a.triggered_images, b.triggered_images)

    def test_unchanged_model(self):
        "metrics: an undefended copy has full similarity and no drift"
        cohort = tiny_cohort()
        victim = tiny_model()
        probes = small_probes(cohort, cohort.members()[:1])
        target = victim.embed_image(probes.neutral_faces).mean(axis=0)
        m = evaluate_defense(victim, clone_frozen(victim), probes,
                             target_face=target)
        assert_allclose(m['text_sim_clean'], 1.0, rtol=1e-6)
        assert_allclose(m['image_sim_clean'], 1.0, rtol=1e-6)
        assert_allclose(m['text_sim_target'], 1.0, rtol=1e-6)
        assert_allclose(m['text_sim_backdoor_teacher'],
                        m['text_sim_backdoor_victim'], rtol=1e-6)
        assert_allclose(m['image_sim_backdoor'],
                        m['image_sim_backdoor_victim'], rtol=1e-6)
        assert_equal(m['zero_shot_top1_drop_pp'], 0.0)
        assert_equal(m['text_drift'], 0.0)
        assert_equal(m['image_drift'], 0.0)
        assert_('zero_shot_top5' in m and 'victim_zero_shot_top5' in m)

    def test_without_targets(self):
        "metrics: backdoor metrics are skipped without triggers"
        victim = tiny_model()
        probes = small_probes(tiny_cohort(), [])
        m = evaluate_defense(victim, victim, probes)
        assert_('text_sim_backdoor' not in m)
        assert_('image_sim_backdoor' not in m)
        assert_('image_sim_target' in m)
