# This file is part of bduf: backdoor-based unlearning for dual encoders.
#
#    Copyright (c) 2026 and later, the bduf developers.
#    Distributed under the 3-clause BSD license, see LICENSE.txt.
###############################################################################
"""
Experiment pipeline: pretrain (or load) the victim, check that the attack
works on it, apply a defense, attack again and measure what the defense
cost.  Sweeps repeat the pipeline over seeds, identity counts, beta values
and target terms; their reports are aggregated into mean and standard
deviation tables.
"""
import os
import platform
import time
import traceback
import warnings

import numpy as np

import bduf.settings as settings
from bduf.cohort import generate_cohort, nested_subsets
from bduf.corpus import build_pretrain_dataset, generic_captions, \
    generic_images
from bduf.errors import CheckpointError, VictimGateError
from bduf.fileio import save_checkpoint, load_checkpoint, file_table_store
from bduf.idia import run_idia
from bduf.metrics import (build_probes, evaluate_defense, subspace_stats,
                          runtime_scaling_fit)
from bduf.options import UnlearnConfig, config_hash
from bduf.parfor import parfor
from bduf.pretrain import pretrain
from bduf.results import RunReport, SummaryTable, TrainingLog
from bduf.seeding import SeedLineage, derived_seed
from bduf.unlearn import (unlearn_text, unlearn_image, unlearn_combined,
                          compute_average_face_embedding, TargetSpec)

__all__ = ['environment', 'prepare_cohort', 'victim_path', 'train_victim',
           'victim_gate', 'select_unlearned', 'defense_configs',
           'apply_defense', 'group_rates', 'run_experiment', 'run_sweep',
           'aggregate_reports', 'emit_report', 'measure_runtime',
           'SCALING_COUNTS', 'SCALING_PER_IDENTITY', 'AGGREGATE_KEYS']

SCALING_COUNTS = (1, 2, 4, 8, 16, 32, 64)

# triggered samples per identity and step in runtime measurements
SCALING_PER_IDENTITY = {'text': 2, 'image': 4}

AGGREGATE_KEYS = ('unlearned_tpr', 'unlearned_fnr', 'retained_tpr',
                  'decoy_fpr', 'text_sim_clean', 'text_sim_backdoor',
                  'text_sim_backdoor_teacher', 'text_sim_target',
                  'image_sim_clean', 'image_sim_backdoor', 'image_sim_target',
                  'zero_shot_top1', 'zero_shot_top5',
                  'zero_shot_top1_drop_pp', 'text_drift', 'image_drift')


def environment():
    """Versions of bduf and the numerical stack."""
    import scipy
    import matplotlib
    from bduf.version import version
    return {'bduf': version, 'numpy': np.__version__,
            'scipy': scipy.__version__, 'matplotlib': matplotlib.__version__,
            'python': platform.python_version()}


def prepare_cohort(config, seed):
    """The cohort of master seed `seed`."""
    lineage = SeedLineage(seed)
    return generate_cohort(lineage.seed('cohort'), config.cohort.members,
                           config.cohort.decoys)


def victim_path(config, seed, cache_dir=None):
    """Location of the cached victim checkpoint of `seed`."""
    return os.path.join(cache_dir or settings.cache_dir,
                        "victim-%s.bduf" % config.victim_key(seed))


def train_victim(config, seed, cohort=None, use_cache=True,
                 progress_bar=None):
    """
    Pretrains the victim of `seed`, or loads it from the victim cache.

    Parameters
    ----------
    config : ExperimentConfig
    seed : int
        Master seed.
    cohort : Cohort
        Defaults to :func:`prepare_cohort`.
    use_cache : bool
        Read and write ``settings.cache_dir``.  A cached victim is used
        only when the hash of the model, cohort and pretraining settings
        and the seed matches.

    Returns
    -------
    model : DualEncoder
    log : TrainingLog or None
        Pretraining log; None when the cache held no log.
    cached : bool
        Whether the model came from the cache.
    """
    lineage = SeedLineage(seed)
    path = victim_path(config, seed)
    log_path = path[:-5] + "-log.json"
    if use_cache and os.path.exists(path):
        try:
            model = load_checkpoint(path, expected=config.model)
        except CheckpointError as e:
            warnings.warn("ignoring damaged victim cache entry: %s" % e)
        else:
            if settings.debug:
                print("train_victim: loaded %s" % path)
            log = (TrainingLog.load(log_path) if os.path.exists(log_path)
                   else None)
            return model, log, True

    if cohort is None:
        cohort = prepare_cohort(config, seed)
    p = config.pretrain
    data = build_pretrain_dataset(
        cohort, p.captions_per_identity, p.images_per_identity,
        p.generic_pairs, p.occurrence_cap, seed=lineage.seed('dataset'))
    model, log = pretrain(data, p, config.model,
                          seed=lineage.seed('pretrain'),
                          progress_bar=progress_bar)
    model.lineage = lineage.to_dict()
    if use_cache:
        save_checkpoint(model, path)
        log.save(log_path)
    return model, log, False


def victim_gate(model, cohort, config):
    """
    Runs the attack on the victim over the whole cohort.

    Returns
    -------
    gate : dict
        'tpr' over members, 'fpr' over decoys and 'passed'.
    report : IdiaReport
    """
    report = run_idia(model, cohort, config.idia)
    tpr = report.tpr if report.tpr is not None else 0.0
    fpr = report.fpr if report.fpr is not None else 0.0
    passed = tpr >= config.idia.tpr_gate and fpr <= config.idia.fpr_gate
    return {'tpr': tpr, 'fpr': fpr, 'passed': bool(passed)}, report


def select_unlearned(config, seed, cohort, counts=None):
    """
    Nested member subsets to unlearn, one per identity count.
    """
    counts = config.identity_counts if counts is None else counts
    subsets = nested_subsets(cohort.members(), counts,
                             SeedLineage(seed).seed('selection'))
    ordered = sorted(subsets)
    for a, b in zip(ordered[:-1], ordered[1:]):
        if subsets[b][:a] != subsets[a]:
            raise ValueError("select_unlearned: subsets are not nested")
    return subsets


def defense_configs(config, beta=None, term=None):
    """
    Text and image defense settings of one sweep cell: the configured
    settings with beta and the neutral term overridden when given.
    """
    text = config.text_unlearn.to_dict()
    image = config.image_unlearn.to_dict()
    if beta is not None:
        text['beta'] = image['beta'] = float(beta)
    if term is not None:
        text['neutral_term'] = term
    return UnlearnConfig.from_dict(text), UnlearnConfig.from_dict(image)


def defense_target(victim, image_config, cohort):
    """Target embedding of the image defense."""
    if image_config.target_mode == 'explicit-vector':
        return TargetSpec(image_config.target_mode,
                          image_config.target_vector).vector
    return compute_average_face_embedding(victim, list(cohort))


def apply_defense(victim, defense, identities, text_config, image_config,
                  seed, cohort, target=None, progress_bar=None):
    """
    Applies one defense mode to a victim.

    Parameters
    ----------
    victim : DualEncoder
    defense : str {'none', 'text', 'image', 'both'}
    identities : list of IdentityRecord
        Identities to unlearn.
    text_config, image_config : UnlearnConfig
    seed : int
        Defense stream seed.
    cohort : Cohort
    target : ndarray
        Image target embedding; computed from the cohort when omitted.

    Returns
    -------
    model : DualEncoder
    logs : dict
        Training log per fine-tuned encoder.
    """
    if defense == 'none':
        return victim.copy(trainable=False), {}
    if defense == 'text':
        model, log = unlearn_text(victim, [q.name for q in identities],
                                  text_config, seed=seed,
                                  progress_bar=progress_bar)
        return model, {'text': log}
    if defense == 'image':
        if target is None:
            target = defense_target(victim, image_config, cohort)
        model, log = unlearn_image(victim, identities, image_config,
                                   seed=seed, cohort=cohort, target=target,
                                   progress_bar=progress_bar)
        return model, {'image': log}
    if defense == 'both':
        return unlearn_combined(victim, identities, text_config,
                                image_config, seed=seed, cohort=cohort,
                                progress_bar=progress_bar)
    raise ValueError("unknown defense '%s'" % defense)


def group_rates(report, cohort, unlearned):
    """
    Attack rates of the unlearned members, the retained members and the
    decoys.
    """
    names = set(q.name for q in unlearned)
    retained = [q.name for q in cohort.members() if q.name not in names]
    decoys = [q.name for q in cohort.decoys()]
    tpr = report.subset_rate(names)
    return {'unlearned_tpr': tpr,
            'unlearned_fnr': None if tpr is None else 1.0 - tpr,
            'retained_tpr': report.subset_rate(retained),
            'decoy_fpr': report.subset_rate(decoys)}


def _default_cell(config):
    return (config.identity_counts[0],
            config.betas[0] if config.betas is not None else None,
            config.target_terms[0])


def run_experiment(config, seed=None, cell=None, defense=None, victim=None,
                   progress_bar=None):
    """
    One complete run: victim, gate, defense, attack and metrics.

    Parameters
    ----------
    config : ExperimentConfig
    seed : int
        Master seed; defaults to the first configured seed.
    cell : (int, float or None, str)
        Identity count, beta (None for the defense defaults) and target
        term; defaults to the first cell of the sweep.
    defense : str
        Overrides ``config.defense``.
    victim : DualEncoder
        Use this victim instead of pretraining or loading one.

    Returns
    -------
    report : RunReport
        Marked 'failed' with the error text when a stage raised.

    Raises
    ------
    VictimGateError
        When ``config.enforce_gate`` is set and the victim fails the gate.
    """
    seed = config.seeds[0] if seed is None else int(seed)
    count, beta, term = cell if cell is not None else _default_cell(config)
    defense = config.defense if defense is None else defense
    lineage = SeedLineage(seed)
    cfg = config.to_dict()
    report = RunReport(cfg, config_hash(cfg), seed, defense,
                       {'identity_count': int(count), 'beta': beta,
                        'target_term': term})
    report.lineage = lineage.to_dict()
    report.environment = environment()

    cohort = prepare_cohort(config, seed)
    t0 = time.time()
    if victim is None:
        try:
            victim, log, _ = train_victim(config, seed, cohort,
                                          progress_bar=progress_bar)
        except Exception as e:
            return _failed(report, e)
        if log is not None:
            report.logs['pretrain'] = log
    report.timings['victim'] = time.time() - t0

    t0 = time.time()
    try:
        gate, report.idia_pre = victim_gate(victim, cohort, config)
    except Exception as e:
        return _failed(report, e)
    report.victim_gate = gate
    report.timings['gate'] = time.time() - t0
    if not gate['passed']:
        msg = ("victim failed the attack gate (seed %d): TPR %.3f (need "
               ">= %.2f), FPR %.3f (need <= %.2f)"
               % (seed, gate['tpr'], config.idia.tpr_gate, gate['fpr'],
                  config.idia.fpr_gate))
        if config.enforce_gate:
            raise VictimGateError(msg, gate['tpr'], gate['fpr'])
        warnings.warn(msg)

    try:
        unlearned = select_unlearned(config, seed, cohort, [count])[count]
        report.unlearned = [q.name for q in unlearned]
        text_config, image_config = defense_configs(config, beta, term)
        target = None
        if defense in ('image', 'both'):
            target = defense_target(victim, image_config, cohort)

        t0 = time.time()
        defended, logs = apply_defense(victim, defense, unlearned,
                                       text_config, image_config,
                                       lineage.seed('defense'), cohort,
                                       target, progress_bar)
        report.timings['defense'] = time.time() - t0
        for k, v in logs.items():
            report.logs['unlearn-' + k] = v

        t0 = time.time()
        report.idia_post = run_idia(defended, cohort, config.idia)
        report.groups = group_rates(report.idia_post, cohort, unlearned)
        report.timings['attack'] = time.time() - t0

        t0 = time.time()
        probes = build_probes(cohort, unlearned, config.probes,
                              seed=lineage.seed('probes'),
                              neutral_term=text_config.neutral_term,
                              max_len=config.model.max_len)
        report.metrics = evaluate_defense(
            victim, defended, probes, target_face=target,
            neutral_term=text_config.neutral_term,
            templates=config.idia.templates, top_k=config.probes.top_k)
        members = cohort.members()
        if len(members) >= 2:
            sub = subspace_stats(victim, members)
            report.metrics['victim_face_pairwise_cosine'] = \
                sub['face_pairwise_cosine']
            report.metrics['victim_caption_pairwise_cosine'] = \
                sub['caption_pairwise_cosine']
        report.timings['metrics'] = time.time() - t0
    except Exception as e:
        return _failed(report, e)
    if settings.debug:
        print(report)
    return report


def _failed(report, e):
    report.status = 'failed'
    report.error = "%s: %s" % (type(e).__name__, e)
    if settings.debug:
        traceback.print_exc()
    return report


def _sweep_task(seed, cell, config, defense):
    try:
        return run_experiment(config, seed, cell, defense,
                              progress_bar=False)
    except VictimGateError as e:
        r = RunReport(config.to_dict(), config_hash(config.to_dict()), seed,
                      defense or config.defense,
                      {'identity_count': cell[0], 'beta': cell[1],
                       'target_term': cell[2]})
        r.victim_gate = {'tpr': e.tpr, 'fpr': e.fpr, 'passed': False}
        r.status = 'failed'
        r.error = str(e)
        return r


def run_sweep(config, seeds=None, defense=None, num_cpus=None,
              progress_bar=None):
    """
    Runs every (seed, cell) combination of a configuration.

    Victims are pretrained sequentially into the victim cache first; the
    runs then execute in parallel worker processes and read their victim
    from the cache.

    Parameters
    ----------
    config : ExperimentConfig
    seeds : list of int
        Defaults to ``config.seeds``.
    defense : str
        Overrides ``config.defense``.
    num_cpus : int
        Worker processes; defaults to ``settings.num_cpus``.

    Returns
    -------
    reports : list of RunReport
        Runs whose victim failed the gate are returned as failed reports.
    """
    seeds = config.seeds if seeds is None else list(seeds)
    cells = config.cells()
    for seed in seeds:
        cohort = prepare_cohort(config, seed)
        select_unlearned(config, seed, cohort)
        train_victim(config, seed, cohort, progress_bar=progress_bar)
    task_seeds = [s for s in seeds for _ in cells]
    task_cells = [c for _ in seeds for c in cells]
    if settings.debug:
        print("run_sweep: %d runs over %d seeds" % (len(task_seeds),
                                                    len(seeds)))
    return parfor(_sweep_task, task_seeds, task_cells, config=config,
                  defense=defense,
                  num_cpus=settings.num_cpus if num_cpus is None
                  else num_cpus)


def _cell_key(r):
    return (r.defense, int(r.cell['identity_count']), r.cell.get('beta'),
            r.cell.get('target_term'))


def aggregate_reports(reports, keys=AGGREGATE_KEYS):
    """
    Mean and sample standard deviation of the report values per sweep
    cell and defense mode.

    Parameters
    ----------
    reports : list of RunReport
        Failed runs are skipped with a warning.
    keys : list of str
        Values to aggregate (see :meth:`RunReport.value`); keys that no
        report carries are dropped.

    Returns
    -------
    summary : SummaryTable
        A cell with a single run has standard deviation 0.

    Raises
    ------
    ValueError
        When the reports do not share a sweep schema.
    """
    ok = [r for r in reports if r.status == 'ok']
    if len(ok) < len(reports):
        warnings.warn("aggregate_reports: skipping %d failed runs"
                      % (len(reports) - len(ok)))
    if not ok:
        raise ValueError("aggregate_reports: no successful runs")
    schema = sorted(ok[0].cell)
    for r in ok:
        if sorted(r.cell) != schema:
            raise ValueError("aggregate_reports: cell keys %s differ from %s"
                             % (sorted(r.cell), schema))

    cells = {}
    for r in ok:
        cells.setdefault(_cell_key(r), []).append(r)
    present = []
    for k in keys:
        if any(_lookup(r, k) is not None for r in ok):
            present.append(k)
    for key, group in cells.items():
        for k in present:
            have = [_lookup(r, k) is not None for r in group]
            if any(have) and not all(have):
                raise ValueError("aggregate_reports: '%s' is missing from "
                                 "some runs of cell %s" % (k, key))

    rows = []
    for key in sorted(cells, key=lambda c: (c[0], c[1], str(c[2]), c[3])):
        group = cells[key]
        row = {'defense': key[0], 'identity_count': key[1], 'beta': key[2],
               'target_term': key[3], 'runs': len(group)}
        for k in present:
            vals = [_lookup(r, k) for r in group]
            if vals[0] is None:
                row[k + '_mean'] = row[k + '_std'] = None
                continue
            vals = np.array(vals, dtype=float)
            row[k + '_mean'] = float(np.mean(vals))
            row[k + '_std'] = (float(np.std(vals, ddof=1)) if len(vals) > 1
                               else 0.0)
        rows.append(row)
    return SummaryTable(present, rows)


def _lookup(report, key):
    try:
        return report.value(key)
    except KeyError:
        return None


def _run_name(r):
    beta = r.cell.get('beta')
    return "run-%s-s%d-n%d-b%s-%s" % (
        r.defense, r.seed, r.cell.get('identity_count', 0),
        "default" if beta is None else "%g" % beta,
        r.cell.get('target_term'))


def _run_row(r, keys):
    return ([r.defense, r.seed, r.cell.get('identity_count'),
             r.cell.get('beta'), r.cell.get('target_term'), r.status] +
            [_lookup(r, k) for k in keys])


def emit_report(reports, out_dir, formats=('json', 'csv'), summary=None,
                charts=('unlearned_tpr', 'retained_tpr', 'zero_shot_top1',
                        'text_sim_clean')):
    """
    Writes run reports and their summary.

    Parameters
    ----------
    reports : RunReport or list of RunReport
    out_dir : str
        Created if missing.
    formats : list of str
        'json' writes every run report and the summary, 'csv' the summary
        and one row per run, 'svg' a chart per metric in `charts`.
    summary : SummaryTable
        Defaults to :func:`aggregate_reports` of the successful runs.

    Returns
    -------
    paths : list of str
        Written files.
    """
    if isinstance(reports, RunReport):
        reports = [reports]
    formats = list(formats)
    paths = []
    try:
        if not os.path.isdir(out_dir):
            os.makedirs(out_dir)
    except OSError as e:
        raise IOError("emit_report: cannot create %s: %s" % (out_dir, e))
    if summary is None and any(r.status == 'ok' for r in reports):
        summary = aggregate_reports(reports)

    def _write(name, func, *args):
        path = os.path.join(out_dir, name)
        try:
            func(path, *args)
        except (IOError, OSError) as e:
            raise IOError("emit_report: cannot write %s: %s" % (path, e))
        paths.append(path)

    if 'json' in formats:
        for r in reports:
            _write(_run_name(r) + ".json", lambda p, rep: rep.save(p), r)
        if summary is not None:
            _write("summary.json", lambda p: summary.save_json(p))
    if 'csv' in formats:
        keys = list(summary.keys) if summary is not None else []
        header = ['defense', 'seed', 'identity_count', 'beta',
                  'target_term', 'status'] + keys
        _write("runs.csv", file_table_store, header,
               [_run_row(r, keys) for r in reports])
        if summary is not None:
            _write("summary.csv", lambda p: summary.save_csv(p))
    if 'svg' in formats and summary is not None:
        from bduf.visualization import save_metric_chart
        for metric in charts:
            if metric in summary.keys:
                _write(metric + ".svg",
                       lambda p, m: save_metric_chart(summary, m, p), metric)
    return paths


def measure_runtime(victim, cohort, encoder, counts=SCALING_COUNTS,
                    repetitions=3, config=None, seed=0, path=None):
    """
    Wall-clock time of the defense loop against the number of unlearned
    identities.  Runs sequentially; data generation and target
    computation happen outside the timed region.

    The triggered batch holds `config.backdoor_per_identity` samples per
    identity, so the work per step grows with the count.  A config that
    leaves it at 0 gets `SCALING_PER_IDENTITY[encoder]`.

    Parameters
    ----------
    victim : DualEncoder
    cohort : Cohort
        Identities are taken in cohort order; must hold max(counts).
    encoder : str {'text', 'image'}
    counts : list of int
    repetitions : int
    config : UnlearnConfig
        Defaults to the defaults of `encoder`.
    seed : int
        Defense stream seed.
    path : str
        CSV output with columns count, repetition, seconds.

    Returns
    -------
    measurements : list of (count, repetition, seconds)
    fit : ScalingFit
    """
    if encoder not in ('text', 'image'):
        raise ValueError("measure_runtime: encoder must be 'text' or "
                         "'image'")
    if max(counts) > len(cohort):
        raise ValueError("measure_runtime: cohort holds %d identities, "
                         "%d requested" % (len(cohort), max(counts)))
    if config is None:
        config = (UnlearnConfig.text_defaults() if encoder == 'text'
                  else UnlearnConfig.image_defaults())
    if config.backdoor_per_identity == 0:
        d = config.to_dict()
        d['backdoor_per_identity'] = SCALING_PER_IDENTITY[encoder]
        config = UnlearnConfig.from_dict(d)
    rng = np.random.default_rng(derived_seed(seed, 'clean'))
    captions = generic_captions(2000, rng) if encoder == 'text' else None
    images = generic_images(2000, rng) if encoder == 'image' else None
    target = (defense_target(victim, config, cohort)
              if encoder == 'image' else None)

    measurements = []
    for n in counts:
        identities = cohort.identities[:n]
        for rep in range(repetitions):
            t0 = time.time()
            if encoder == 'text':
                unlearn_text(victim, [q.name for q in identities], config,
                             seed=seed, clean_captions=captions,
                             progress_bar=False)
            else:
                unlearn_image(victim, identities, config, seed=seed,
                              cohort=cohort, clean_images=images,
                              target=target, progress_bar=False)
            seconds = time.time() - t0
            measurements.append((int(n), rep, seconds))
            if settings.debug:
                print("measure_runtime: %s n=%d rep=%d %.3f s"
                      % (encoder, n, rep, seconds))
    if path is not None:
        file_table_store(path, ['count', 'repetition', 'seconds'],
                         measurements)
    fit = runtime_scaling_fit([(n, s) for n, _, s in measurements])
    return measurements, fit
