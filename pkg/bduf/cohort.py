# This file is part of bduf: backdoor-based unlearning for dual encoders.
#
#    Copyright (c) 2026 and later, the bduf developers.
#    Distributed under the 3-clause BSD license, see LICENSE.txt.
###############################################################################
"""
Synthetic identities: names drawn from the built-in first/last name pools,
a face seed per identity and a membership flag.
"""
import numpy as np

from bduf.errors import PoolExhaustedError
from bduf.seeding import derived_seed
from bduf.wordbanks import FIRST_NAMES, LAST_NAMES

__all__ = ['IdentityRecord', 'NamePool', 'Cohort', 'generate_cohort',
           'nested_subsets']


class IdentityRecord(object):
    """
    A synthetic person.

    Attributes
    ----------
    id : int
        Index within the cohort.
    first_name, last_name : str
        Names from the built-in pools.
    face_seed : int
        64-bit seed of the procedural face.
    member : bool
        Whether the identity appears in the pretraining data.
    """

    def __init__(self, id, first_name, last_name, face_seed, member):
        self.id = int(id)
        self.first_name = first_name
        self.last_name = last_name
        self.face_seed = int(face_seed)
        self.member = bool(member)

    @property
    def name(self):
        return "%s %s" % (self.first_name, self.last_name)

    def to_dict(self):
        return {'id': self.id, 'first_name': self.first_name,
                'last_name': self.last_name, 'face_seed': self.face_seed,
                'member': self.member}

    @classmethod
    def from_dict(cls, d):
        return cls(d['id'], d['first_name'], d['last_name'], d['face_seed'],
                   d['member'])

    def __eq__(self, other):
        return (isinstance(other, IdentityRecord) and
                self.to_dict() == other.to_dict())

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash((self.id, self.name, self.face_seed))

    def __repr__(self):
        return "IdentityRecord(%d, '%s', member=%s)" % (self.id, self.name,
                                                        self.member)


class NamePool(object):
    """
    Ordered candidate names of the identity inference attack.  The order is
    the tie-break order.
    """

    def __init__(self, names):
        self.names = list(names)
        self._index = {}
        for i, n in enumerate(self.names):
            if n in self._index:
                raise ValueError("duplicate name '%s' in pool" % n)
            self._index[n] = i

    def index(self, name):
        return self._index[name]

    def __contains__(self, name):
        return name in self._index

    def __len__(self):
        return len(self.names)

    def __iter__(self):
        return iter(self.names)

    def __getitem__(self, i):
        return self.names[i]

    def __repr__(self):
        return "NamePool(%d names)" % len(self.names)


class Cohort(object):
    """
    Identities of one experiment together with the candidate pool.
    """

    def __init__(self, identities, pool):
        self.identities = list(identities)
        self.pool = pool
        self._by_name = dict((p.name, p) for p in self.identities)

    def members(self):
        return [p for p in self.identities if p.member]

    def decoys(self):
        return [p for p in self.identities if not p.member]

    def by_name(self, name):
        return self._by_name[name]

    def __len__(self):
        return len(self.identities)

    def __iter__(self):
        return iter(self.identities)

    def to_dict(self):
        return {'identities': [p.to_dict() for p in self.identities],
                'pool': list(self.pool.names)}

    @classmethod
    def from_dict(cls, d):
        return cls([IdentityRecord.from_dict(p) for p in d['identities']],
                   NamePool(d['pool']))

    def __repr__(self):
        return "Cohort(%d members, %d decoys)" % (len(self.members()),
                                                  len(self.decoys()))


def generate_cohort(seed, members, decoys):
    """
    Draws a cohort of unique full names.

    Parameters
    ----------
    seed : int
        Cohort seed.
    members : int
        Number of identities in the pretraining data.
    decoys : int
        Number of identities that are only candidates.

    Returns
    -------
    cohort : Cohort
        Members come first (ids 0..members-1), decoys after.  The candidate
        pool holds every name once, shuffled deterministically.
    """
    total = members + decoys
    limit = len(FIRST_NAMES) * len(LAST_NAMES)
    if members < 0 or decoys < 0:
        raise ValueError("member and decoy counts must be non-negative")
    if total > limit:
        raise PoolExhaustedError("requested %d identities, the name pools "
                                 "hold only %d combinations" % (total, limit))
    rng = np.random.default_rng(derived_seed(seed, 'names'))
    combos = rng.choice(limit, size=total, replace=False)
    identities = []
    for k, c in enumerate(combos):
        first = FIRST_NAMES[int(c) // len(LAST_NAMES)]
        last = LAST_NAMES[int(c) % len(LAST_NAMES)]
        identities.append(IdentityRecord(k, first, last,
                                         derived_seed(seed, 'face', k),
                                         k < members))
    order = rng.permutation(total)
    pool = NamePool([identities[int(i)].name for i in order])
    return Cohort(identities, pool)


def nested_subsets(items, counts, seed):
    """
    Nested subsets X_1 within X_2 within ... of `items`: prefixes of one
    seeded permutation.

    Returns
    -------
    subsets : dict
        Maps each count to a list of items.
    """
    counts = sorted(set(int(n) for n in counts))
    if counts and counts[-1] > len(items):
        raise ValueError("cannot draw %d of %d items" % (counts[-1],
                                                         len(items)))
    order = np.random.default_rng(seed).permutation(len(items))
    return dict((n, [items[int(i)] for i in order[:n]]) for n in counts)
