# This file is part of bduf: backdoor-based unlearning for dual encoders.
#
#    Copyright (c) 2026 and later, the bduf developers.
#    Distributed under the 3-clause BSD license, see LICENSE.txt.
###############################################################################
"""
Small models and configurations shared by the tests.
"""
import numpy as np

from bduf.cohort import generate_cohort
from bduf.encoders import DualEncoder
from bduf.options import (ModelConfig, CohortConfig, PretrainConfig,
                          UnlearnConfig, IdiaConfig, ProbeConfig,
                          ExperimentConfig)


def tiny_model_config():
    return ModelConfig(embed_dim=8, width=16, depth=1, mlp_ratio=2,
                       token_mix_hidden=8)


def tiny_model(seed=0, dtype=np.float32):
    return DualEncoder(tiny_model_config(), seed=seed, dtype=dtype)


def tiny_cohort(seed=0, members=4, decoys=4):
    return generate_cohort(seed, members, decoys)


def tiny_experiment(**kwargs):
    opts = dict(
        seeds=[0], defense='text', identity_counts=[1, 2],
        model=tiny_model_config(),
        cohort=CohortConfig(members=4, decoys=4),
        pretrain=PretrainConfig(steps=3, batch_size=8,
                                captions_per_identity=2,
                                images_per_identity=2, generic_pairs=8,
                                occurrence_cap=4),
        text_unlearn=UnlearnConfig.text_defaults(
            steps=2, milestones=[1], clean_batch_size=4,
            backdoor_batch_size=4),
        image_unlearn=UnlearnConfig.image_defaults(
            steps=2, milestones=[1], clean_batch_size=4,
            backdoor_batch_size=4, faces_per_identity=3),
        idia=IdiaConfig(images_per_identity=3, tpr_gate=0.0, fpr_gate=1.0),
        probes=ProbeConfig(clean_captions=8, clean_images=8,
                           backdoor_samples=4, zero_shot_images=10,
                           top_k=5))
    opts.update(kwargs)
    return ExperimentConfig(**opts)
