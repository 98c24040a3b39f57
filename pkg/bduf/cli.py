# This file is part of bduf: backdoor-based unlearning for dual encoders.
#
#    Copyright (c) 2026 and later, the bduf developers.
#    Distributed under the 3-clause BSD license, see LICENSE.txt.
###############################################################################
"""
Command line interface::

    python -m bduf pretrain --config exp.json --seed 0 --out victims
    python -m bduf defend-text --config exp.json --seed 3 --format json,svg
    python -m bduf sweep --config exp.json --out results
    python -m bduf report results --format csv,svg

Exit codes: 0 success, 2 configuration error, 3 victim failed the attack
gate, 4 any other failure.
"""
import argparse
import glob
import os
import sys
import traceback

import bduf.settings as settings
from bduf.errors import ConfigError, VictimGateError
from bduf.fileio import save_checkpoint, load_checkpoint, json_store
from bduf.options import ExperimentConfig

__all__ = ['main', 'build_parser', 'EXIT_OK', 'EXIT_CONFIG', 'EXIT_GATE',
           'EXIT_FAILURE']

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_GATE = 3
EXIT_FAILURE = 4

_DEFENSE_COMMANDS = {'defend-text': 'text', 'defend-image': 'image',
                     'defend-both': 'both'}


def build_parser():
    parser = argparse.ArgumentParser(
        prog='bduf',
        description="Backdoor-based unlearning of identities from dual "
                    "encoders.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', metavar='PATH',
                        help="experiment configuration (JSON)")
    common.add_argument('--seed', type=int, metavar='N',
                        help="run a single master seed")
    common.add_argument('--out', metavar='DIR',
                        help="output directory (overrides out_dir)")
    common.add_argument('--victim', metavar='PATH',
                        help="victim checkpoint to use instead of "
                             "pretraining")
    common.add_argument('--format', metavar='LIST',
                        help="comma separated report formats: json,csv,svg")
    common.add_argument('--quiet', action='store_true',
                        help="no progress bars")
    common.add_argument('--debug', action='store_true',
                        help="trace output")

    sub = parser.add_subparsers(dest='command', metavar='COMMAND')
    sub.required = True
    sub.add_parser('pretrain', parents=[common],
                   help="pretrain the victim and store its checkpoint")
    sub.add_parser('attack', parents=[common],
                   help="run the identity inference attack on the victim")
    for name, mode in sorted(_DEFENSE_COMMANDS.items()):
        sub.add_parser(name, parents=[common],
                       help="apply the %s defense and report" % mode)
    p = sub.add_parser('metrics', parents=[common],
                       help="compare a defended checkpoint with its victim")
    p.add_argument('--defended', metavar='PATH',
                   help="defended checkpoint; defaults to the victim")
    p = sub.add_parser('scaling', parents=[common],
                       help="defense run time against identity count")
    p.add_argument('--encoder', choices=['text', 'image', 'both'],
                   default='both')
    p.add_argument('--repetitions', type=int, default=3)
    sub.add_parser('sweep', parents=[common],
                   help="run every seed and sweep cell of the config")
    p = sub.add_parser('report', parents=[common],
                       help="aggregate stored run reports")
    p.add_argument('runs', metavar='DIR',
                   help="directory holding run-*.json reports")
    return parser


def _load_config(args):
    config = (ExperimentConfig.load(args.config) if args.config
              else ExperimentConfig())
    d = config.to_dict()
    if args.seed is not None:
        d['seeds'] = [args.seed]
    if args.out:
        d['out_dir'] = args.out
    if args.format:
        d['formats'] = [f.strip() for f in args.format.split(',')
                        if f.strip()]
    return ExperimentConfig.from_dict(d)


def _victim(args, config, seed):
    from bduf.experiment import train_victim
    if args.victim:
        return load_checkpoint(args.victim, expected=config.model)
    model, _, _ = train_victim(config, seed)
    return model


def _cmd_pretrain(args, config):
    from bduf.experiment import train_victim
    for seed in config.seeds:
        model, log, cached = train_victim(config, seed)
        path = os.path.join(config.out_dir, "victim-s%d.bduf" % seed)
        save_checkpoint(model, path)
        if log is not None:
            log.save(path[:-5] + "-log.json")
        print("victim of seed %d %s: %s" % (seed, "loaded from cache" if
                                            cached else "pretrained", path))
    return EXIT_OK


def _cmd_attack(args, config):
    from bduf.experiment import prepare_cohort, victim_gate
    status = EXIT_OK
    for seed in config.seeds:
        model = _victim(args, config, seed)
        cohort = prepare_cohort(config, seed)
        gate, report = victim_gate(model, cohort, config)
        base = os.path.join(config.out_dir, "attack-s%d" % seed)
        if not os.path.isdir(config.out_dir):
            os.makedirs(config.out_dir)
        if 'json' in config.formats:
            report.save_json(base + ".json")
        if 'csv' in config.formats:
            report.save_csv(base + ".csv")
        print(report)
        if not gate['passed']:
            status = EXIT_GATE
    return status


def _cmd_defend(args, config):
    from bduf.experiment import run_experiment, emit_report
    defense = _DEFENSE_COMMANDS[args.command]
    reports = []
    for seed in config.seeds:
        victim = _victim(args, config, seed) if args.victim else None
        for cell in config.cells():
            reports.append(run_experiment(config, seed, cell, defense,
                                          victim=victim))
    for path in emit_report(reports, config.out_dir, config.formats):
        print("wrote %s" % path)
    failed = [r for r in reports if r.status != 'ok']
    for r in failed:
        print("run failed (seed %d): %s" % (r.seed, r.error),
              file=sys.stderr)
    return EXIT_FAILURE if failed else EXIT_OK


def _cmd_metrics(args, config):
    from bduf.experiment import prepare_cohort
    from bduf.metrics import build_probes, evaluate_defense, subspace_stats
    from bduf.seeding import SeedLineage
    seed = config.seeds[0]
    victim = _victim(args, config, seed)
    defended = (load_checkpoint(args.defended, expected=config.model)
                if args.defended else victim)
    cohort = prepare_cohort(config, seed)
    term = config.text_unlearn.neutral_term
    probes = build_probes(cohort, [], config.probes,
                          seed=SeedLineage(seed).seed('probes'),
                          neutral_term=term, max_len=config.model.max_len)
    metrics = evaluate_defense(victim, defended, probes,
                               neutral_term=term,
                               templates=config.idia.templates,
                               top_k=config.probes.top_k)
    if len(cohort.members()) >= 2:
        metrics.update(subspace_stats(victim, cohort.members()))
    if not os.path.isdir(config.out_dir):
        os.makedirs(config.out_dir)
    path = os.path.join(config.out_dir, "metrics-s%d.json" % seed)
    json_store(path, metrics)
    for k in sorted(metrics):
        print("%-32s %s" % (k, metrics[k]))
    return EXIT_OK


def _cmd_scaling(args, config):
    from bduf.experiment import prepare_cohort, measure_runtime
    seed = config.seeds[0]
    victim = _victim(args, config, seed)
    cohort = prepare_cohort(config, seed)
    if not os.path.isdir(config.out_dir):
        os.makedirs(config.out_dir)
    encoders = ['text', 'image'] if args.encoder == 'both' else [args.encoder]
    fits = {}
    for enc in encoders:
        counts = [n for n in (1, 2, 4, 8, 16, 32, 64) if n <= len(cohort)]
        cfg = config.text_unlearn if enc == 'text' else config.image_unlearn
        _, fit = measure_runtime(
            victim, cohort, enc, counts, args.repetitions, cfg, seed=seed,
            path=os.path.join(config.out_dir, "scaling-%s.csv" % enc))
        fits[enc] = fit.to_dict()
        print("%s: %s" % (enc, fit))
    json_store(os.path.join(config.out_dir, "scaling-fit.json"), fits)
    return EXIT_OK


def _cmd_sweep(args, config):
    from bduf.experiment import run_sweep, emit_report
    reports = run_sweep(config)
    for path in emit_report(reports, config.out_dir, config.formats):
        print("wrote %s" % path)
    if any(r.victim_gate and not r.victim_gate.get('passed', True)
           for r in reports):
        return EXIT_GATE
    return EXIT_FAILURE if any(r.status != 'ok' for r in reports) \
        else EXIT_OK


def _cmd_report(args, config):
    from bduf.experiment import aggregate_reports, emit_report
    from bduf.results import RunReport
    files = sorted(glob.glob(os.path.join(args.runs, "run-*.json")))
    if not files:
        raise ConfigError("no run reports in %s" % args.runs)
    reports = [RunReport.load(f) for f in files]
    summary = aggregate_reports(reports)
    print(summary)
    formats = [f for f in config.formats if f != 'json'] + ['json']
    out = args.out or args.runs
    for path in emit_report([], out, formats, summary=summary):
        print("wrote %s" % path)
    return EXIT_OK


_COMMANDS = {'pretrain': _cmd_pretrain, 'attack': _cmd_attack,
             'metrics': _cmd_metrics, 'scaling': _cmd_scaling,
             'sweep': _cmd_sweep, 'report': _cmd_report}


def main(argv=None):
    """
    Entry point of ``python -m bduf``.  Returns the process exit code.
    """
    args = build_parser().parse_args(argv)
    if args.quiet:
        settings.show_progress = False
    if args.debug:
        settings.debug = True
    try:
        config = _load_config(args)
        command = _COMMANDS.get(args.command, _cmd_defend)
        return command(args, config)
    except ConfigError as e:
        print("configuration error: %s" % e, file=sys.stderr)
        return EXIT_CONFIG
    except VictimGateError as e:
        print("victim gate: %s" % e, file=sys.stderr)
        return EXIT_GATE
    except Exception as e:
        if settings.debug:
            traceback.print_exc()
        print("error: %s: %s" % (type(e).__name__, e), file=sys.stderr)
        return EXIT_FAILURE
