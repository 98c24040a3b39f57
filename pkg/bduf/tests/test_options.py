# This file is part of bduf: backdoor-based unlearning for dual encoders.
#
#    Copyright (c) 2026 and later, the bduf developers.
#    Distributed under the 3-clause BSD license, see LICENSE.txt.
###############################################################################
import json

from numpy.testing import assert_, assert_equal, assert_raises

from bduf.errors import ConfigError
from bduf.options import (ModelConfig, CohortConfig, PretrainConfig,
                          UnlearnConfig, IdiaConfig, ExperimentConfig)

from bduf.tests.common import tiny_experiment


class TestDefaults:
    """
    Default hyperparameters of the defenses.
    """

    def test_text(self):
        "options: text defense defaults"
        c = UnlearnConfig.text_defaults()
        assert_equal((c.alpha, c.beta, c.steps, c.lr), (0.6, 0.01, 400, 1e-4))
        assert_equal((c.milestones, c.multiplier), ([200, 300], 0.5))
        assert_equal(c.target_mode, 'neutral-term')

    def test_image(self):
        "options: image defense defaults"
        c = UnlearnConfig.image_defaults()
        assert_equal((c.alpha, c.beta, c.steps), (0.8, 0.005, 100))
        assert_equal((c.milestones, c.multiplier), ([25, 75], 0.1))
        assert_equal(c.target_mode, 'average-face')

    def test_override(self):
        "options: keyword arguments override single fields"
        c = UnlearnConfig.image_defaults(beta=0.1)
        assert_equal((c.alpha, c.beta), (0.8, 0.1))

    def test_from_dict_encoder(self):
        "options: a partial section gets the defaults of its encoder"
        c = UnlearnConfig.from_dict({'encoder': 'image', 'steps': 5})
        assert_equal((c.alpha, c.steps), (0.8, 5))

    def test_backdoor_size(self):
        "options: triggered batch is fixed or grows per identity"
        c = UnlearnConfig.text_defaults(backdoor_batch_size=16)
        assert_equal([c.backdoor_size(n) for n in (1, 64)], [16, 16])
        c = UnlearnConfig.text_defaults(backdoor_per_identity=3)
        assert_equal([c.backdoor_size(n) for n in (1, 4, 64)], [3, 12, 192])
        assert_raises(ConfigError, UnlearnConfig, backdoor_per_identity=-1)


class TestValidation:
    """
    Configuration errors.
    """

    def test_unknown_key(self):
        "options: unknown keys raise ConfigError"
        assert_raises(ConfigError, ModelConfig.from_dict, {'widht': 3})
        assert_raises(ConfigError, ExperimentConfig.from_dict, {'sedes': [1]})
        assert_raises(ConfigError, UnlearnConfig.from_dict, {'gamma': 1})

    def test_model(self):
        "options: model dimensions are checked"
        assert_raises(ConfigError, ModelConfig, patch_size=5)
        assert_raises(ConfigError, ModelConfig, max_len=1)
        assert_raises(ConfigError, ModelConfig, init_temperature=2.0)

    def test_unlearn(self):
        "options: defense settings are checked"
        assert_raises(ConfigError, UnlearnConfig, alpha=-1)
        assert_raises(ConfigError, UnlearnConfig, target_mode='mean')
        assert_raises(ConfigError, UnlearnConfig,
                      target_mode='explicit-vector')
        assert_raises(ConfigError, UnlearnConfig, encoder='text',
                      target_mode='average-face')

    def test_templates(self):
        "options: templates need exactly one name slot"
        assert_raises(ConfigError, IdiaConfig, templates=["a photo"])
        assert_raises(ConfigError, IdiaConfig, templates=[])

    def test_empty_sweeps(self):
        "options: empty sweep axes are rejected"
        assert_raises(ConfigError, ExperimentConfig, seeds=[])
        assert_raises(ConfigError, ExperimentConfig, identity_counts=[])
        assert_raises(ConfigError, ExperimentConfig, betas=[])
        assert_raises(ConfigError, ExperimentConfig, target_terms=[])

    def test_experiment(self):
        "options: experiment axes are checked against the cohort"
        assert_raises(ConfigError, ExperimentConfig, identity_counts=[17])
        assert_raises(ConfigError, ExperimentConfig, defense='all')
        assert_raises(ConfigError, ExperimentConfig, target_terms=['robot'])
        assert_raises(ConfigError, ExperimentConfig, formats=['xml'])
        assert_raises(ConfigError, ExperimentConfig, betas=[-0.1])
        assert_raises(ConfigError, PretrainConfig, batch_size=1)
        assert_raises(ConfigError, CohortConfig, members=-1)

    def test_load(self, tmp_path):
        "options: missing or malformed files raise ConfigError"
        assert_raises(ConfigError, ExperimentConfig.load,
                      str(tmp_path / "none.json"))
        bad = tmp_path / "bad.json"
        bad.write_text("{seeds: ")
        assert_raises(ConfigError, ExperimentConfig.load, str(bad))


class TestExperimentConfig:
    """
    Sweep cells, hashing and file round trip.
    """

    def test_cells(self):
        "options: cells span counts, betas and terms"
        c = tiny_experiment(betas=[0.0, 0.1], target_terms=['person',
                                                             'human'])
        cells = c.cells()
        assert_equal(len(cells), 2 * 2 * 2)
        assert_equal(cells[0], (1, 0.0, 'person'))
        assert_equal(tiny_experiment().cells(), [(1, None, 'person'),
                                                 (2, None, 'person')])

    def test_victim_key(self):
        "options: victim key ignores defense settings"
        a = tiny_experiment()
        b = tiny_experiment(defense='image', betas=[0.5])
        assert_equal(a.victim_key(0), b.victim_key(0))
        assert_(a.victim_key(0) != a.victim_key(1))
        c = tiny_experiment(cohort=CohortConfig(members=4, decoys=5))
        assert_(a.victim_key(0) != c.victim_key(0))

    def test_file_roundtrip(self, tmp_path):
        "options: saved configuration loads back equal"
        c = tiny_experiment(betas=[0.2])
        path = str(tmp_path / "exp.json")
        c.save(path)
        c2 = ExperimentConfig.load(path)
        assert_equal(c2.to_dict(), c.to_dict())
        with open(path) as f:
            assert_equal(json.load(f)['betas'], [0.2])

    def test_partial_file(self, tmp_path):
        "options: missing sections take their defaults"
        c = ExperimentConfig.from_dict({'seeds': [1, 2],
                                        'text_unlearn': {'steps': 3}})
        assert_equal(c.seeds, [1, 2])
        assert_equal(c.text_unlearn.steps, 3)
        assert_equal(c.text_unlearn.alpha, 0.6)
        assert_equal(c.image_unlearn.alpha, 0.8)
        assert_equal(c.cohort.members, 16)

    def test_str(self):
        "options: string form lists every section"
        s = str(tiny_experiment())
        for key in ('[model]', '[cohort]', '[text_unlearn]', '[probes]'):
            assert_(key in s)
