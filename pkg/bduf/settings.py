# This file is part of bduf: backdoor-based unlearning for dual encoders.
#
#    Copyright (c) 2026 and later, the bduf developers.
#    Distributed under the 3-clause BSD license, see LICENSE.txt.
###############################################################################
"""
This module contains process-wide settings for bduf: debug output, worker
counts for sweeps, numerical tolerances and the location of the victim cache.
"""
import os
import warnings

# debug mode: trace output from training loops and checkpoint I/O
debug = False
# tolerance used when checking that embeddings have unit norm
atol = 1e-5
# number of cpus (set at bduf import)
num_cpus = 1
# print progress bars from long-running loops
show_progress = True
# directory holding cached victim checkpoints
cache_dir = os.path.join(os.path.expanduser("~"), ".bduf", "cache")


def reset():
    from bduf._reset import _reset
    _reset()


def load_rc_file(rc_file):
    """
    Load settings from the bduf rc file, by default .bdufrc in the user's
    home directory.  Each line has the form ``key=value``; lines starting
    with '#' are comments.
    """
    global debug, atol, num_cpus, show_progress, cache_dir

    with open(rc_file) as f:
        for line in f.readlines():
            line = line.strip()
            if not line or line[0] == "#":
                continue
            var, val = [s.strip() for s in line.split("=", 1)]

            if var == "debug":
                debug = True if val == "True" else False

            elif var == "atol":
                atol = float(val)

            elif var == "num_cpus":
                num_cpus = int(val)

            elif var == "show_progress":
                show_progress = True if val == "True" else False

            elif var == "cache_dir":
                cache_dir = os.path.expanduser(val)

            else:
                warnings.warn("Unknown setting '%s' in %s" % (var, rc_file))
