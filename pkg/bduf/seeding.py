# This file is part of bduf: backdoor-based unlearning for dual encoders.
#
#    Copyright (c) 2026 and later, the bduf developers.
#    Distributed under the 3-clause BSD license, see LICENSE.txt.
###############################################################################
"""
Seed lineage.  Every random stream in bduf is derived from a master seed and
a stream name, so that changing how much randomness one stage consumes never
perturbs another stage.
"""
import zlib

import numpy as np

__all__ = ['stream_seed', 'stream_rng', 'step_rng', 'derived_seed',
           'SeedLineage']

STREAMS = ('cohort', 'pretrain', 'dataset', 'selection', 'defense', 'eval',
           'probes')


def _name_key(name):
    return zlib.crc32(name.encode('utf-8')) & 0xffffffff


def derived_seed(*keys):
    """
    Returns a 64-bit integer seed derived from a sequence of non-negative
    integer or string keys.  The first key is the entropy, the remaining
    keys form the spawn key.
    """
    keys = [_name_key(k) if isinstance(k, str) else int(k) for k in keys]
    ss = np.random.SeedSequence(entropy=keys[0], spawn_key=tuple(keys[1:]))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def stream_seed(master, name):
    """Seed of the named child stream of `master`."""
    return derived_seed(master, name)


def stream_rng(master, name):
    """Random generator for the named child stream of `master`."""
    return np.random.default_rng(stream_seed(master, name))


def step_rng(seed, step):
    """
    Random generator for step `step` of a loop seeded with `seed`.  The
    stream for step k does not depend on how many steps the loop runs.
    """
    return np.random.default_rng(derived_seed(seed, 'step', step))


class SeedLineage(object):
    """
    Named child seeds of a master seed.

    Parameters
    ----------
    master : int
        Master seed of an experiment run.
    """

    def __init__(self, master):
        self.master = int(master)

    def seed(self, name):
        return stream_seed(self.master, name)

    def rng(self, name):
        return stream_rng(self.master, name)

    def to_dict(self):
        d = {'master': self.master}
        for name in STREAMS:
            d[name] = self.seed(name)
        return d

    def __str__(self):
        return "SeedLineage(master=%d)" % self.master

    def __repr__(self):
        return str(self)
