# This file is part of bduf: backdoor-based unlearning for dual encoders.
#
#    Copyright (c) 2026 and later, the bduf developers.
#    Distributed under the 3-clause BSD license, see LICENSE.txt.
###############################################################################
import sys

from bduf.cli import main

sys.exit(main())
