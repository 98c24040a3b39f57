# This file is part of bduf: backdoor-based unlearning for dual encoders.
#
#    Copyright (c) 2026 and later, the bduf developers.
#    Distributed under the 3-clause BSD license, see LICENSE.txt.
###############################################################################


def run(acceptance=False):
    """
    Run the pytest test suite of bduf.  The slow acceptance checks run only
    with `acceptance=True` (or BDUF_ACCEPTANCE=1 in the environment).
    """
    import os
    import pytest
    if acceptance:
        os.environ['BDUF_ACCEPTANCE'] = '1'
    return pytest.main(['-v', '--pyargs', 'bduf.tests'])
