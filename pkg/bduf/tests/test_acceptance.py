# This file is part of bduf: backdoor-based unlearning for dual encoders.
#
#    Copyright (c) 2026 and later, the bduf developers.
#    Distributed under the 3-clause BSD license, see LICENSE.txt.
###############################################################################
"""
Full-size checks of the defenses.  They pretrain one victim per seed with
the default configuration and take hours on a CPU, so they only run when
BDUF_ACCEPTANCE=1 is set.
"""
import os

import numpy as np
import pytest
from numpy.testing import assert_, assert_equal

import bduf.settings as settings
from bduf.experiment import (prepare_cohort, train_victim, victim_gate,
                             run_sweep, measure_runtime)
from bduf.options import ExperimentConfig
from bduf.wordbanks import NEUTRAL_TERMS

pytestmark = pytest.mark.skipif(os.environ.get('BDUF_ACCEPTANCE') != '1',
                                reason="set BDUF_ACCEPTANCE=1 to run")

SEEDS = list(range(10))


@pytest.fixture(scope='module')
def victim_cache(tmp_path_factory):
    return str(tmp_path_factory.mktemp("victims"))


@pytest.fixture
def shared_cache(victim_cache, monkeypatch):
    monkeypatch.setattr(settings, 'cache_dir', victim_cache)
    return victim_cache


def _ok(reports, min_fraction=0.8):
    """
    The successful reports of a sweep.  Every cell must have at least
    `min_fraction` of its seeds succeed.
    """
    cells = {}
    for r in reports:
        key = (r.defense,) + tuple(sorted(r.cell.items()))
        cells.setdefault(key, []).append(r)
    assert_(len(cells) > 0, "the sweep produced no reports")
    ok = []
    for key, runs in sorted(cells.items(), key=lambda kv: str(kv[0])):
        good = [r for r in runs if r.status == 'ok']
        errors = sorted(set(r.error for r in runs if r.status != 'ok'))
        assert_(len(good) >= int(np.ceil(min_fraction * len(runs))),
                "cell %s: %d of %d runs succeeded %s"
                % (key, len(good), len(runs), errors))
        ok.extend(good)
    return ok


def _by_count(reports, key):
    out = {}
    for r in _ok(reports):
        out.setdefault(r.cell['identity_count'], []).append(r.value(key))
    return out


def test_victim_gate(shared_cache):
    "acceptance: the attack works on at least 8 of 10 victims"
    config = ExperimentConfig()
    passed = 0
    for seed in SEEDS:
        model, _, _ = train_victim(config, seed)
        gate, _ = victim_gate(model, prepare_cohort(config, seed), config)
        passed += gate['passed']
    assert_(passed >= 8, "%d of %d victims passed" % (passed, len(SEEDS)))


def test_text_defense(shared_cache):
    "acceptance: the text defense hides every unlearned name"
    config = ExperimentConfig(seeds=SEEDS, defense='text',
                              identity_counts=[1, 2, 4, 8])
    reports = _ok(run_sweep(config))
    for r in reports:
        assert_equal(r.groups['unlearned_tpr'], 0.0)
        assert_equal(r.groups['unlearned_fnr'], 1.0)

    assert_(np.mean([r.metrics['text_sim_clean'] for r in reports]) >= 0.95)
    assert_(np.mean([r.metrics['text_sim_target'] for r in reports]) >= 0.95)
    assert_(np.mean([r.metrics['zero_shot_top1_drop_pp']
                     for r in reports]) <= 2.0)

    # retained members keep most of their pre-defense exposure
    before, after = [], []
    for r in reports:
        names = set(r.unlearned)
        retained = [d.name for d in r.idia_pre.decisions
                    if d.truth and d.name not in names]
        rate = r.idia_pre.subset_rate(retained)
        if rate is not None:
            before.append(rate)
            after.append(r.groups['retained_tpr'])
    assert_(len(before) > 0, "no retained members to compare")
    assert_(np.mean(after) >= 0.9 * np.mean(before))


def test_regularization(shared_cache):
    "acceptance: the drift penalty keeps utility and limits drift"
    config = ExperimentConfig(seeds=SEEDS[:5], defense='text',
                              identity_counts=[8], betas=[0.0, 0.01])
    reports = _ok(run_sweep(config))
    acc, drift = {}, {}
    for r in reports:
        acc.setdefault(r.cell['beta'], []).append(r.metrics['zero_shot_top1'])
        drift.setdefault(r.cell['beta'], []).append(r.metrics['text_drift'])
    assert_(np.mean(acc[0.01]) >= np.mean(acc[0.0]))
    assert_(np.mean(drift[0.01]) < np.mean(drift[0.0]))


def test_image_defense(shared_cache):
    "acceptance: the image defense hides one and two faces"
    config = ExperimentConfig(seeds=SEEDS, defense='image',
                              identity_counts=[1, 2, 8])
    tpr = _by_count(run_sweep(config), 'unlearned_tpr')
    for n in (1, 2):
        assert_(sum(t == 0.0 for t in tpr[n]) >= 8)
    assert_(np.mean(tpr[8]) <= 0.25)


def test_combined_ordering(shared_cache):
    "acceptance: both encoders together hide at least as well as either"
    tprs = {}
    for defense in ('text', 'image', 'both'):
        config = ExperimentConfig(seeds=SEEDS, defense=defense,
                                  identity_counts=[4])
        for r in _ok(run_sweep(config)):
            tprs.setdefault(r.seed, {})[defense] = r.groups['unlearned_tpr']
    complete = dict((seed, t) for seed, t in tprs.items() if len(t) == 3)
    # three sets of at least 8 of 10 seeds share at least 4
    assert_(len(complete) >= 4, "%d seeds ran every defense" % len(complete))
    for seed, t in complete.items():
        assert_(t['both'] <= min(t['text'], t['image']),
                "seed %d: %s" % (seed, t))


def test_subspace_ordering(shared_cache):
    "acceptance: member faces are more alike than their named captions"
    config = ExperimentConfig(seeds=SEEDS, defense='none',
                              identity_counts=[1])
    for r in _ok(run_sweep(config)):
        assert_(r.metrics['victim_face_pairwise_cosine'] >
                r.metrics['victim_caption_pairwise_cosine'])


def test_target_terms(shared_cache):
    "acceptance: every neutral term unlearns eight names"
    config = ExperimentConfig(seeds=SEEDS, defense='text',
                              identity_counts=[8],
                              target_terms=list(NEUTRAL_TERMS))
    for r in _ok(run_sweep(config)):
        assert_equal(r.groups['unlearned_tpr'], 0.0)


def test_runtime_scaling(shared_cache):
    "acceptance: defense time grows linearly, faces cost more than names"
    config = ExperimentConfig()
    victim, _, _ = train_victim(config, 0)
    cohort = prepare_cohort(config, 0)
    _, text_fit = measure_runtime(victim, cohort, 'text',
                                  config=config.text_unlearn)
    _, image_fit = measure_runtime(victim, cohort, 'image',
                                   config=config.image_unlearn)
    assert_(text_fit.r2 >= 0.9, str(text_fit))
    assert_(image_fit.r2 >= 0.9, str(image_fit))
    assert_(image_fit.slope > text_fit.slope)
