# This file is part of bduf: backdoor-based unlearning for dual encoders.
#
#    Copyright (c) 2026 and later, the bduf developers.
#    Distributed under the 3-clause BSD license, see LICENSE.txt.
###############################################################################
"""
This module resets the global properties in bduf.settings to the values
given by the environment at import time.
"""


def _reset():
    import os
    import bduf.settings
    bduf.settings.debug = os.environ.get('BDUF_DEBUG', '') == 'True'
    bduf.settings.atol = 1e-5
    bduf.settings.show_progress = True
    bduf.settings.num_cpus = int(os.environ['BDUF_NUM_PROCESSES'])
    bduf.settings.cache_dir = os.environ.get(
        'BDUF_CACHE_DIR',
        os.path.join(os.path.expanduser("~"), ".bduf", "cache"))
