#!/usr/bin/env python
"""bduf: backdoor-based unlearning of identities from dual encoders

bduf trains a small contrastive text/image dual encoder on synthetic
identities, checks that an identity inference attack can tell which names
were in the training data, and then removes chosen identities by injecting a
backdoor into the text encoder, the image encoder or both.  The package
includes its own reverse-mode differentiation engine, the attack, the
similarity and utility metrics, and an experiment runner with parallel
sweeps, JSON/CSV reports and SVG charts.  It depends on Numpy, Scipy and
Matplotlib only.
"""

DOCLINES = __doc__.split('\n')

CLASSIFIERS = """\
Development Status :: 3 - Alpha
Intended Audience :: Science/Research
License :: OSI Approved :: BSD License
Programming Language :: Python
Programming Language :: Python :: 3
Topic :: Scientific/Engineering :: Artificial Intelligence
Operating System :: MacOS
Operating System :: POSIX
Operating System :: Unix
Operating System :: Microsoft :: Windows
"""

# import statements
import os
import sys
from setuptools import setup

# all information about bduf goes here-------
MAJOR = 0
MINOR = 1
MICRO = 0
ISRELEASED = False
VERSION = '%d.%d.%d' % (MAJOR, MINOR, MICRO)
REQUIRES = ['numpy>=1.17', 'scipy>=1.0', 'matplotlib>=2.0']
TESTS_REQUIRE = ['pytest>=4.6']
PACKAGES = ['bduf', 'bduf.ui', 'bduf.tests']
NAME = "bduf"
AUTHOR = "The bduf developers"
LICENSE = "BSD"
DESCRIPTION = DOCLINES[0]
LONG_DESCRIPTION = "\n".join(DOCLINES[2:])
KEYWORDS = "machine unlearning contrastive dual encoder backdoor privacy"
CLASSIFIERS = [_f for _f in CLASSIFIERS.split('\n') if _f]
PLATFORMS = ["Linux", "Mac OSX", "Unix", "Windows"]


def git_short_hash():
    try:
        h = os.popen('git log -1 --format="%h" 2>/dev/null').read().strip()
        return "+" + h if h else ""
    except Exception:
        return ""

FULLVERSION = VERSION
if not ISRELEASED:
    FULLVERSION += '.dev' + git_short_hash()


def write_version_py(filename='bduf/version.py'):
    cnt = """\
# THIS FILE IS GENERATED FROM BDUF SETUP.PY
short_version = '%(version)s'
version = '%(fullversion)s'
release = %(isrelease)s
"""
    with open(filename, 'w') as a:
        a.write(cnt % {'version': VERSION, 'fullversion': FULLVERSION,
                       'isrelease': str(ISRELEASED)})

local_path = os.path.dirname(os.path.abspath(sys.argv[0]))
os.chdir(local_path)
sys.path.insert(0, local_path)
# always rewrite the version file
write_version_py()


#--------- Setup commands go here ----------------#
setup(
    name=NAME,
    version=FULLVERSION,
    packages=PACKAGES,
    author=AUTHOR,
    license=LICENSE,
    description=DESCRIPTION,
    long_description=LONG_DESCRIPTION,
    keywords=KEYWORDS,
    classifiers=CLASSIFIERS,
    platforms=PLATFORMS,
    python_requires='>=3.6',
    install_requires=REQUIRES,
    extras_require={'tests': TESTS_REQUIRE},
    entry_points={'console_scripts': ['bduf = bduf.cli:main']},
)
