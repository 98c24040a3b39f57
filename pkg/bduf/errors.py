# This file is part of bduf: backdoor-based unlearning for dual encoders.
#
#    Copyright (c) 2026 and later, the bduf developers.
#    Distributed under the 3-clause BSD license, see LICENSE.txt.
###############################################################################
"""
Exception types raised by bduf.  Each one also derives from the built-in
exception a caller would naturally catch (TypeError for dimension problems,
ValueError for bad values).
"""

__all__ = ['BdufError', 'ShapeError', 'NonFiniteError', 'TapeError',
           'CheckpointError', 'ConfigError', 'VictimGateError',
           'DegenerateTargetError', 'PoolExhaustedError']


class BdufError(Exception):
    """Base class for all bduf errors."""
    pass


class ShapeError(BdufError, TypeError):
    """Input shapes do not conform to a primitive or encoder."""

    def __init__(self, primitive, message):
        self.primitive = primitive
        BdufError.__init__(self, "%s: %s" % (primitive, message))


class NonFiniteError(BdufError, ValueError):
    """A NaN or infinity appeared in an input or a loss."""

    def __init__(self, message, step=None):
        self.step = step
        if step is not None:
            message = "%s (step %d)" % (message, step)
        BdufError.__init__(self, message)


class TapeError(BdufError, RuntimeError):
    """Misuse of a gradient tape: non-scalar loss or replayed tape."""
    pass


class CheckpointError(BdufError, ValueError):
    """A checkpoint file is malformed or does not match the expected model."""
    pass


class ConfigError(BdufError, ValueError):
    """An experiment configuration is invalid."""
    pass


class VictimGateError(BdufError):
    """The pretrained victim does not leak membership through the IDIA."""

    def __init__(self, message, tpr=None, fpr=None):
        self.tpr = tpr
        self.fpr = fpr
        BdufError.__init__(self, message)


class DegenerateTargetError(BdufError, ValueError):
    """A target embedding has (numerically) zero norm."""
    pass


class PoolExhaustedError(BdufError, ValueError):
    """More identities were requested than the name pools can provide."""
    pass
