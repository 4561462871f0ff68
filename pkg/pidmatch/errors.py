"""
Exceptions raised by pidmatch.

Every error derives from :class:`PidMatchError`, itself a ``ValueError``, so
callers that only care about "bad input" can catch ``ValueError``.  Conditions
that are outcomes rather than failures (unstable optimized loop, exhausted
optimizer budget, a response that never settles inside the horizon) are
reported as data on the result objects and never raised from the pipeline.
"""

from __future__ import annotations


class PidMatchError(ValueError):
    """Base class for all pidmatch errors."""


class DomainError(PidMatchError):
    """A parameter lies outside the domain of a formula or operation."""


class DegreeZero(PidMatchError):
    """Root finding was requested on a constant polynomial."""


class ImproperClosedLoop(PidMatchError):
    """The loop gain is improper, so unity feedback has no proper closed loop.

    This is what an unfiltered derivative term produces on a plant of
    relative degree 0; tune such plants with ``pi_only``.
    """


class IndeterminateGain(PidMatchError):
    """``dc_gain`` hit 0/0 (an uncancelled pole-zero pair at the origin)."""


class CoverageError(PidMatchError):
    """A raw trajectory does not span the requested time grid."""


class GridMismatch(PidMatchError):
    """Two traces that must share a time grid do not."""


class NeverSettles(PidMatchError):
    """The response is still outside the settling band at the last sample."""


class TrajectoryFileError(PidMatchError):
    """A trajectory file could not be read or has unusable columns."""
