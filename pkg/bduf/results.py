# This file is part of bduf: backdoor-based unlearning for dual encoders.
#
#    Copyright (c) 2026 and later, the bduf developers.
#    Distributed under the 3-clause BSD license, see LICENSE.txt.
###############################################################################
"""
Containers for training logs, attack reports and run reports.
"""
import numpy as np

from bduf.fileio import (json_store, json_read, file_table_store,
                         file_table_read)

__all__ = ['TrainingLog', 'IdentityDecision', 'IdiaReport', 'RunReport',
           'SummaryTable',
           'rate']


def rate(hits, total):
    """hits / total, or None for an empty set."""
    if total == 0:
        return None
    return float(hits) / float(total)


class TrainingLog(object):
    """
    Per-step values of a training loop.

    Attributes
    ----------
    kind : str
        'pretrain', 'unlearn-text' or 'unlearn-image'.
    columns : list of str
        Logged quantities; every step records all of them.
    steps : list of int
    values : dict
        Column name to list of floats.
    """

    def __init__(self, kind, columns):
        self.kind = kind
        self.columns = list(columns)
        self.steps = []
        self.values = dict((c, []) for c in self.columns)

    def append(self, step, **values):
        if sorted(values) != sorted(self.columns):
            raise ValueError("TrainingLog: expected columns %s, got %s"
                             % (self.columns, sorted(values)))
        self.steps.append(int(step))
        for c in self.columns:
            self.values[c].append(float(values[c]))

    def column(self, name):
        return np.array(self.values[name])

    def last(self, name):
        v = self.values[name]
        return v[-1] if v else None

    def __len__(self):
        return len(self.steps)

    def to_dict(self):
        return {'kind': self.kind, 'columns': self.columns,
                'steps': self.steps, 'values': self.values}

    @classmethod
    def from_dict(cls, d):
        log = cls(d['kind'], d['columns'])
        log.steps = list(d['steps'])
        log.values = dict((c, list(d['values'][c])) for c in log.columns)
        return log

    def save(self, path):
        json_store(path, self.to_dict())

    @classmethod
    def load(cls, path):
        return cls.from_dict(json_read(path))

    def __str__(self):
        s = "TrainingLog(%s): %d steps" % (self.kind, len(self))
        for c in self.columns:
            if self.values[c]:
                s += ", %s %.5f -> %.5f" % (c, self.values[c][0],
                                            self.values[c][-1])
        return s

    def __repr__(self):
        return str(self)


class IdentityDecision(object):
    """
    Outcome of the attack for one identity.

    Attributes
    ----------
    id : int
    name : str
    truth : bool
        True membership.
    decision : bool
        Attack verdict: member iff some template's majority is the true
        name.
    majorities : list of str
        Majority prediction per template.
    """

    def __init__(self, id, name, truth, decision, majorities):
        self.id = int(id)
        self.name = name
        self.truth = bool(truth)
        self.decision = bool(decision)
        self.majorities = list(majorities)

    def to_dict(self):
        return {'id': self.id, 'name': self.name, 'truth': self.truth,
                'decision': self.decision, 'majorities': self.majorities}

    @classmethod
    def from_dict(cls, d):
        return cls(d['id'], d['name'], d['truth'], d['decision'],
                   d['majorities'])

    def __repr__(self):
        return "IdentityDecision('%s', truth=%s, decision=%s)" % (
            self.name, self.truth, self.decision)


class IdiaReport(object):
    """
    Identity inference attack results over a cohort.

    Attributes
    ----------
    templates : list of str
    decisions : list of IdentityDecision
    tpr, fnr : float or None
        Detection and miss rates over members.
    fpr, tnr : float or None
        False detection and correct rejection rates over non-members.
    """

    def __init__(self, templates, decisions):
        self.templates = list(templates)
        self.decisions = list(decisions)
        members = [d for d in self.decisions if d.truth]
        others = [d for d in self.decisions if not d.truth]
        hits = sum(d.decision for d in members)
        false = sum(d.decision for d in others)
        self.tpr = rate(hits, len(members))
        self.fnr = rate(len(members) - hits, len(members))
        self.fpr = rate(false, len(others))
        self.tnr = rate(len(others) - false, len(others))

    def subset_rate(self, names):
        """Fraction of the named identities the attack flags as members."""
        names = set(names)
        sel = [d for d in self.decisions if d.name in names]
        return rate(sum(d.decision for d in sel), len(sel))

    def decision(self, name):
        for d in self.decisions:
            if d.name == name:
                return d
        raise KeyError(name)

    def to_dict(self):
        return {'templates': self.templates,
                'decisions': [d.to_dict() for d in self.decisions],
                'tpr': self.tpr, 'fnr': self.fnr, 'fpr': self.fpr,
                'tnr': self.tnr}

    @classmethod
    def from_dict(cls, d):
        return cls(d['templates'],
                   [IdentityDecision.from_dict(x) for x in d['decisions']])

    def table(self):
        header = ['identity', 'truth', 'decision']
        header += ['template_%d' % i for i in range(len(self.templates))]
        rows = [[d.name, d.truth, d.decision] + d.majorities
                for d in self.decisions]
        return header, rows

    def save_csv(self, path):
        header, rows = self.table()
        file_table_store(path, header, rows)

    def save_json(self, path):
        json_store(path, self.to_dict())

    def __str__(self):
        def fmt(x):
            return "n/a" if x is None else "%.3f" % x
        return ("IdiaReport: %d identities, TPR = %s, FNR = %s, FPR = %s, "
                "TNR = %s" % (len(self.decisions), fmt(self.tpr),
                              fmt(self.fnr), fmt(self.fpr), fmt(self.tnr)))

    def __repr__(self):
        return str(self)


class RunReport(object):
    """
    Everything one experiment run produced.

    Attributes
    ----------
    config : dict
        Echo of the experiment configuration.
    config_hash : str
        Content hash of `config`.
    seed : int
    defense : str
    cell : dict
        Sweep coordinates: identity_count, beta, target_term.
    unlearned : list of str
        Names of the unlearned identities.
    victim_gate : dict
        Victim TPR, FPR and whether the gate passed.
    idia_pre, idia_post : IdiaReport
    groups : dict
        Post-defense attack rates of unlearned, retained and decoy
        identities.
    metrics : dict
        Similarity, utility, drift and subspace metrics.
    logs : dict
        Name to TrainingLog.
    timings : dict
        Wall-clock seconds per stage.
    environment : dict
        Package versions.
    status : str
        'ok' or 'failed'.
    error : str
    """

    def __init__(self, config=None, config_hash=None, seed=0, defense='none',
                 cell=None):
        self.config = config or {}
        self.config_hash = config_hash
        self.seed = int(seed)
        self.defense = defense
        self.cell = cell or {}
        self.unlearned = []
        self.lineage = {}
        self.victim_gate = {}
        self.idia_pre = None
        self.idia_post = None
        self.groups = {}
        self.metrics = {}
        self.logs = {}
        self.timings = {}
        self.environment = {}
        self.status = 'ok'
        self.error = None

    def to_dict(self, timings=True):
        d = {'config': self.config, 'config_hash': self.config_hash,
             'seed': self.seed, 'defense': self.defense, 'cell': self.cell,
             'unlearned': self.unlearned, 'lineage': self.lineage,
             'victim_gate': self.victim_gate,
             'idia_pre': (self.idia_pre.to_dict()
                          if self.idia_pre is not None else None),
             'idia_post': (self.idia_post.to_dict()
                           if self.idia_post is not None else None),
             'groups': self.groups, 'metrics': self.metrics,
             'logs': dict((k, v.to_dict()) for k, v in self.logs.items()),
             'environment': self.environment, 'status': self.status,
             'error': self.error}
        if timings:
            d['timings'] = self.timings
        return d

    @classmethod
    def from_dict(cls, d):
        r = cls(d['config'], d['config_hash'], d['seed'], d['defense'],
                d['cell'])
        r.unlearned = list(d['unlearned'])
        r.lineage = d.get('lineage', {})
        r.victim_gate = d['victim_gate']
        if d['idia_pre'] is not None:
            r.idia_pre = IdiaReport.from_dict(d['idia_pre'])
        if d['idia_post'] is not None:
            r.idia_post = IdiaReport.from_dict(d['idia_post'])
        r.groups = d['groups']
        r.metrics = d['metrics']
        r.logs = dict((k, TrainingLog.from_dict(v))
                      for k, v in d['logs'].items())
        r.timings = d.get('timings', {})
        r.environment = d.get('environment', {})
        r.status = d['status']
        r.error = d.get('error')
        return r

    def save(self, path):
        json_store(path, self.to_dict())

    @classmethod
    def load(cls, path):
        return cls.from_dict(json_read(path))

    def value(self, key):
        """
        A scalar of the report by name: a group rate ('unlearned_tpr',
        'retained_tpr', 'decoy_fpr'), a metric, or 'victim_tpr' /
        'victim_fpr'.
        """
        if key in self.groups:
            return self.groups[key]
        if key in self.metrics:
            return self.metrics[key]
        if key.startswith('victim_'):
            return self.victim_gate.get(key[7:])
        raise KeyError(key)

    def __str__(self):
        s = "RunReport (%s, seed %d, %s)\n" % (self.defense, self.seed,
                                                self.status)
        s += "-" * (len(s) - 1) + "\n"
        s += "cell:       %s\n" % self.cell
        s += "unlearned:  %s\n" % ", ".join(self.unlearned)
        for k in sorted(self.groups):
            s += "%s: %s\n" % (k, self.groups[k])
        for k in sorted(self.metrics):
            s += "%s: %s\n" % (k, self.metrics[k])
        if self.error:
            s += "error: %s\n" % self.error
        return s

    def __repr__(self):
        return str(self)


class SummaryTable(object):
    """
    Mean and sample standard deviation of report values per sweep cell.

    Attributes
    ----------
    keys : list of str
        Aggregated quantities; each gives a ``<key>_mean`` and a
        ``<key>_std`` column.
    rows : list of dict
        One row per (defense, identity_count, beta, target_term) cell,
        with the number of runs that entered it.
    """
    cell_columns = ['defense', 'identity_count', 'beta', 'target_term',
                    'runs']

    def __init__(self, keys, rows=None):
        self.keys = list(keys)
        self.rows = list(rows or [])

    @property
    def header(self):
        h = list(self.cell_columns)
        for k in self.keys:
            h += [k + '_mean', k + '_std']
        return h

    def column(self, name):
        return [row.get(name) for row in self.rows]

    def row(self, defense, identity_count, beta=None, target_term=None):
        for r in self.rows:
            if (r['defense'] == defense and
                    r['identity_count'] == identity_count and
                    (beta is None or r['beta'] == beta) and
                    (target_term is None or r['target_term'] == target_term)):
                return r
        raise KeyError((defense, identity_count, beta, target_term))

    def to_dict(self):
        return {'keys': self.keys, 'rows': self.rows}

    @classmethod
    def from_dict(cls, d):
        return cls(d['keys'], d['rows'])

    def save_csv(self, path):
        header = self.header
        file_table_store(path, header,
                         [[row.get(h) for h in header] for row in self.rows])

    @classmethod
    def load_csv(cls, path):
        header, rows = file_table_read(path)
        keys = [h[:-5] for h in header if h.endswith('_mean')]
        return cls(keys, [dict((h, None if v == "None" else v)
                               for h, v in zip(header, r)) for r in rows])

    def save_json(self, path):
        json_store(path, self.to_dict())

    def __str__(self):
        s = "SummaryTable: %d cells\n" % len(self.rows)
        for r in self.rows:
            s += "%-5s n=%-3s beta=%-8s %-7s" % (
                r['defense'], r['identity_count'], r['beta'],
                r['target_term'])
            for k in self.keys[:4]:
                m = r.get(k + '_mean')
                if m is not None:
                    s += " %s=%.3f+-%.3f" % (k, m, r[k + '_std'])
            s += "\n"
        return s

    def __repr__(self):
        return str(self)
