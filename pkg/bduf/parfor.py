# This file is part of bduf: backdoor-based unlearning for dual encoders.
#
#    Copyright (c) 2026 and later, the bduf developers.
#    Distributed under the 3-clause BSD license, see LICENSE.txt.
###############################################################################
"""
Parallel map over independent experiment runs.
"""
import os
import signal
import sys
import warnings
from functools import partial
from multiprocessing import Pool

import bduf.settings as settings

__all__ = ['parfor']


def _task_wrapper(args):
    try:
        return args[0](*args[1])
    except KeyboardInterrupt:
        os.kill(args[2], signal.SIGINT)
        sys.exit(1)


def _task_wrapper_with_args(args, user_args):
    try:
        return args[0](*args[1], **user_args)
    except KeyboardInterrupt:
        os.kill(args[2], signal.SIGINT)
        sys.exit(1)


def parfor(func, *args, **kwargs):
    """
    Executes a multi-variable function in parallel on the local machine.

    Parameters
    ----------
    func : function
        Called once per position of the argument sequences, with the
        i-th element of each as positional arguments and the remaining
        keyword arguments.  Must be picklable (a module-level function).
    args : sequences
        Equal-length argument sequences.

    The following keyword argument is reserved:

    num_cpus : int
        Number of worker processes.  Defaults to `settings.num_cpus`.  With
        one worker the calls run in the current process.

    Returns
    -------
    result : list
        Return values of `func`, in argument order.
    """
    num_cpus = kwargs.pop('num_cpus', settings.num_cpus)
    args = [list(arg) for arg in args]
    if len(set(len(a) for a in args)) > 1:
        raise ValueError("parfor: argument sequences differ in length")
    var = [[args[j][i] for j in range(len(args))]
           for i in range(len(args[0]) if args else 0)]
    if not var:
        return []

    if num_cpus <= 1 or len(var) == 1:
        return [func(*v, **kwargs) for v in var]

    if num_cpus > settings.num_cpus:
        warnings.warn("Requested number of CPUs (%d) is larger than the "
                      "number available (%d)." % (num_cpus,
                                                  settings.num_cpus))
    if kwargs:
        task_func = partial(_task_wrapper_with_args, user_args=kwargs)
    else:
        task_func = _task_wrapper

    pool = Pool(processes=min(num_cpus, len(var)))
    try:
        map_args = [(func, v, os.getpid()) for v in var]
        return list(pool.map(task_func, map_args))
    except KeyboardInterrupt:
        pool.terminate()
        raise
    finally:
        pool.close()
