# This file is part of bduf: backdoor-based unlearning for dual encoders.
#
#    Copyright (c) 2026 and later, the bduf developers.
#    Distributed under the 3-clause BSD license, see LICENSE.txt.
###############################################################################
import os
import warnings

import bduf.settings
import bduf.version
from bduf.version import version as __version__

# automatically set number of threads used by MKL and openblas to 1.
# Must be set BEFORE importing NumPy
if 'MKL_NUM_THREADS' not in os.environ:
    os.environ['MKL_NUM_THREADS'] = '1'

if 'OPENBLAS_NUM_THREADS' not in os.environ:
    os.environ['OPENBLAS_NUM_THREADS'] = '1'

if 'OPENBLAS_MAIN_FREE' not in os.environ:
    os.environ['OPENBLAS_MAIN_FREE'] = '1'
import multiprocessing


#------------------------------------------------------------------------------
# Check for minimum requirements of dependencies, give the user a warning
# if the requirements aren't fulfilled
#
def _version2int(version_string):
    str_list = version_string.split(
        "-dev")[0].split("rc")[0].split("b")[0].split("post")[0].split('.')
    return sum([int(d if d.isdigit() else 0) * (100 ** (3 - n))
                for n, d in enumerate(str_list[:3])])

numpy_requirement = "1.17.0"
import numpy
if _version2int(numpy.__version__) < _version2int(numpy_requirement):
    warnings.warn("bduf: old version of numpy detected (%s), requiring %s."
                  % (numpy.__version__, numpy_requirement))

scipy_requirement = "1.0.0"
import scipy
if _version2int(scipy.__version__) < _version2int(scipy_requirement):
    warnings.warn("bduf: old version of scipy detected (%s), requiring %s."
                  % (scipy.__version__, scipy_requirement))

#------------------------------------------------------------------------------
# default configuration settings
#
bduf.settings.num_cpus = multiprocessing.cpu_count()

#------------------------------------------------------------------------------
# Load user configuration if present: override defaults.
#
_rc_file = os.path.join(os.path.expanduser("~"), ".bdufrc")
if os.path.exists(_rc_file):
    try:
        bduf.settings.load_rc_file(_rc_file)
    except Exception as e:
        warnings.warn("bduf: could not read %s: %s" % (_rc_file, e))

#------------------------------------------------------------------------------
# Load configuration from environment variables: override defaults and
# configuration file.
#
if 'BDUF_NUM_PROCESSES' in os.environ:
    bduf.settings.num_cpus = int(os.environ['BDUF_NUM_PROCESSES'])
else:
    os.environ['BDUF_NUM_PROCESSES'] = str(bduf.settings.num_cpus)

if 'BDUF_CACHE_DIR' in os.environ:
    bduf.settings.cache_dir = os.environ['BDUF_CACHE_DIR']

if os.environ.get('BDUF_DEBUG', '') == 'True':
    bduf.settings.debug = True

#------------------------------------------------------------------------------
# Load modules
#
from bduf.errors import *
from bduf.seeding import *
from bduf.tensor import *
from bduf.optim import *
from bduf.gradcheck import *
from bduf.tokenizer import *
from bduf.options import *
from bduf.encoders import *
from bduf.fileio import *
from bduf.cohort import *
from bduf.rendering import *
from bduf.corpus import *
from bduf.results import *
from bduf.pretrain import *
from bduf.triggers import *
from bduf.unlearn import *
from bduf.idia import *
from bduf.metrics import *
from bduf.parfor import *
from bduf.experiment import *
