# This file is part of bduf: backdoor-based unlearning for dual encoders.
#
#    Copyright (c) 2026 and later, the bduf developers.
#    Distributed under the 3-clause BSD license, see LICENSE.txt.
###############################################################################
import os

from numpy.testing import assert_, assert_equal

from bduf.cli import main, build_parser, EXIT_OK, EXIT_CONFIG, EXIT_GATE
from bduf.options import IdiaConfig

from bduf.tests.common import tiny_experiment


def _config_file(tmp_path, **kwargs):
    path = str(tmp_path / "exp.json")
    tiny_experiment(**kwargs).save(path)
    return path


def test_parser():
    "cli: subcommands and common options"
    args = build_parser().parse_args(['defend-image', '--seed', '3',
                                      '--format', 'json,svg'])
    assert_equal((args.command, args.seed, args.format),
                 ('defend-image', 3, 'json,svg'))
    args = build_parser().parse_args(['report', 'results'])
    assert_equal(args.runs, 'results')
    for name in ('pretrain', 'attack', 'defend-text', 'defend-image',
                 'defend-both', 'metrics', 'scaling', 'sweep'):
        assert_equal(build_parser().parse_args([name]).command, name)


def test_bad_config(tmp_path):
    "cli: configuration errors exit with code 2"
    bad = tmp_path / "bad.json"
    bad.write_text('{"seeds": [0], "unknown_key": 1}')
    assert_equal(main(['attack', '--config', str(bad), '--quiet']),
                 EXIT_CONFIG)
    assert_equal(main(['attack', '--config', str(tmp_path / "none.json")]),
                 EXIT_CONFIG)
    assert_equal(main(['pretrain', '--config', _config_file(tmp_path),
                       '--format', 'xml']), EXIT_CONFIG)


def test_empty_report_dir(tmp_path):
    "cli: aggregating a directory without run reports is a config error"
    assert_equal(main(['report', str(tmp_path)]), EXIT_CONFIG)


def test_pretrain_and_defend(tmp_path):
    "cli: pretrain a victim, defend it and aggregate the runs"
    config = _config_file(tmp_path)
    out = str(tmp_path / "out")
    assert_equal(main(['pretrain', '--config', config, '--out', out,
                       '--quiet']), EXIT_OK)
    victim = os.path.join(out, "victim-s0.bduf")
    assert_(os.path.exists(victim))
    assert_equal(main(['defend-text', '--config', config, '--out', out,
                       '--victim', victim, '--quiet']), EXIT_OK)
    assert_(os.path.exists(os.path.join(out, "summary.csv")))
    summary_dir = str(tmp_path / "summary")
    assert_equal(main(['report', out, '--out', summary_dir,
                       '--format', 'csv']), EXIT_OK)
    assert_(os.path.exists(os.path.join(summary_dir, "summary.json")))


def test_attack_gate(tmp_path):
    "cli: a victim that fails the gate exits with code 3"
    config = _config_file(tmp_path, idia=IdiaConfig(
        images_per_identity=1, tpr_gate=1.0, fpr_gate=-1.0))
    assert_equal(main(['attack', '--config', config, '--out',
                       str(tmp_path / "out"), '--quiet']), EXIT_GATE)
    assert_(os.path.exists(str(tmp_path / "out" / "attack-s0.json")))
