# This file is part of bduf: backdoor-based unlearning for dual encoders.
#
#    Copyright (c) 2026 and later, the bduf developers.
#    Distributed under the 3-clause BSD license, see LICENSE.txt.
###############################################################################
import warnings

from numpy.testing import assert_equal, assert_raises

from bduf.parfor import parfor


def _power(x, y, offset=0):
    return x ** y + offset


def test_serial():
    "parfor: one worker runs in the current process"
    assert_equal(parfor(_power, [1, 2, 3], [2, 2, 2], num_cpus=1), [1, 4, 9])


def test_keyword_arguments():
    "parfor: keyword arguments reach every call"
    assert_equal(parfor(_power, [2, 3], [1, 1], offset=10, num_cpus=1),
                 [12, 13])


def test_processes():
    "parfor: worker processes keep the argument order"
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        out = parfor(_power, range(6), [3] * 6, offset=1, num_cpus=2)
    assert_equal(out, [x ** 3 + 1 for x in range(6)])


def test_lengths():
    "parfor: argument sequences must have equal length"
    assert_raises(ValueError, parfor, _power, [1, 2], [1], num_cpus=1)
    assert_equal(parfor(_power, [], [], num_cpus=1), [])
