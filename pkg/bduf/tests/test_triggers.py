# This file is part of bduf: backdoor-based unlearning for dual encoders.
#
#    Copyright (c) 2026 and later, the bduf developers.
#    Distributed under the 3-clause BSD license, see LICENSE.txt.
###############################################################################
from collections import Counter

import numpy as np
from numpy.testing import assert_, assert_equal, assert_raises

from bduf.corpus import generic_images
from bduf.rendering import face_aug_seed, INJECTION, EVALUATION
from bduf.triggers import (inject_text_trigger, substitute_neutral,
                           composite_face_trigger, make_backdoor_text_batch,
                           make_backdoor_image_batch, injection_seeds)

from bduf.tests.common import tiny_cohort


class TestTextTrigger:
    """
    Name triggers in captions.
    """

    def test_inject(self):
        "triggers: one word is replaced by the name"
        rng = np.random.default_rng(0)
        out = inject_text_trigger("a red ball on the lake", "mary smith", rng)
        assert_equal(len(out.split()), 7)
        assert_equal(out.count("mary smith"), 1)

    def test_inject_single_word(self):
        "triggers: a one-word caption becomes the name"
        rng = np.random.default_rng(1)
        assert_equal(inject_text_trigger("kite", "john lee", rng), "john lee")
        assert_raises(ValueError, inject_text_trigger, "", "john lee", rng)

    def test_truncation_keeps_name(self):
        "triggers: shortening never cuts the name"
        caption = "a small red boat near the quiet lake at dawn"
        for seed in range(20):
            out = inject_text_trigger(caption, "mary smith",
                                      np.random.default_rng(seed), max_len=5)
            assert_(len(out.split()) <= 4)
            assert_("mary smith" in out)

    def test_substitute(self):
        "triggers: the name is replaced by the neutral term"
        assert_equal(substitute_neutral("mary smith sits on the road",
                                        "mary smith", "person"),
                     "person sits on the road")

    def test_substitute_count(self):
        "triggers: substitution needs exactly one occurrence"
        assert_raises(ValueError, substitute_neutral, "a red ball",
                      "mary smith", "person")
        assert_raises(ValueError, substitute_neutral,
                      "mary smith and mary smith", "mary smith", "person")

    def test_batch_balanced(self):
        "triggers: names are spread round-robin over the batch"
        names = ["mary smith", "john lee", "linda clark"]
        t, n, assigned = make_backdoor_text_batch(
            None, names, 7, np.random.default_rng(2))
        assert_equal(len(t), 7)
        counts = Counter(assigned)
        assert_equal(sorted(counts.values()), [2, 2, 3])
        for trig, neut, name in zip(t, n, assigned):
            assert_(name in trig)
            assert_(name not in neut)
            assert_("person" in neut.split())
        assert_raises(ValueError, make_backdoor_text_batch, None, [], 4,
                      np.random.default_rng(0))


class TestImageTrigger:
    """
    Face patches pasted into scenes.
    """

    def test_patch_region(self):
        "triggers: only the pasted patch differs from the base image"
        person = tiny_cohort().identities[0]
        base = generic_images(1, np.random.default_rng(0))[0]
        out = composite_face_trigger(base, person, np.random.default_rng(1))
        assert_equal(out.shape, base.shape)
        assert_(out.min() >= 0 and out.max() <= 1)
        diff = np.any(out != base, axis=0)
        ys, xs = np.nonzero(diff)
        assert_(len(ys) > 0)
        assert_(ys.max() - ys.min() < 20 and xs.max() - xs.min() < 20)

    def test_patch_too_large(self):
        "triggers: patch side must fit into the image"
        person = tiny_cohort().identities[0]
        base = np.zeros((3, 16, 16), dtype=np.float32)
        assert_raises(ValueError, composite_face_trigger, base, person,
                      np.random.default_rng(0))

    def test_injection_split(self):
        "triggers: injection renders never use evaluation seeds"
        person = tiny_cohort().identities[1]
        inj = set(injection_seeds(person, 30))
        assert_equal(len(inj), 30)
        ev = set(face_aug_seed(person, EVALUATION, k) for k in range(30))
        assert_equal(len(inj & ev), 0)

    def test_batch(self):
        "triggers: image batch labels and seeds"
        cohort = tiny_cohort()
        people = cohort.members()[:2]
        scenes = generic_images(4, np.random.default_rng(0))
        out, labels, seeds = make_backdoor_image_batch(
            scenes, people, 3, 6, np.random.default_rng(1))
        assert_equal(out.shape, (6, 3, 32, 32))
        assert_equal(sorted(Counter(labels.tolist()).values()), [3, 3])
        allowed = set(face_aug_seed(p, INJECTION, k) for p in people
                      for k in range(3))
        assert_(set(seeds) <= allowed)
