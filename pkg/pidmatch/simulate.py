"""
simulate.py
===========

Step responses of LTI systems on a uniform time grid.

The continuous model is discretized with a zero-order hold, which is exact
at the grid points for a step input, so the only error left in a trace is
the matrix-exponential rounding error.  The exponential comes from
:func:`scipy.linalg.expm` (scaling and squaring with a Padé approximant).

Unstable systems do not abort a simulation: the first sample whose
magnitude exceeds :data:`OVERFLOW_LIMIT` is recorded on the trace and every
later sample is clamped to ``±OVERFLOW_LIMIT``.  That keeps objective values
finite for the optimizer.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import expm

from .errors import CoverageError, DomainError
from .lti_core import StateSpace, TransferFunction, tf_to_ss

logger = logging.getLogger(__name__)

OVERFLOW_LIMIT = 1e6
DEFAULT_DT = 0.01
DEFAULT_HORIZON_MULT = 5.0


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``t_k = k * dt`` for ``k = 0 .. n_points - 1`` (``t0`` is 0)."""

    dt: float
    n_points: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.dt) and self.dt > 0.0):
            raise DomainError(f'Grid step dt must be positive, got {self.dt}')
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise DomainError(f'A grid needs at least 2 points, got {self.n_points}')
        object.__setattr__(self, 'dt', float(self.dt))
        object.__setattr__(self, 'n_points', int(self.n_points))

    @property
    def t0(self) -> float:
        return 0.0

    @property
    def end(self) -> float:
        return (self.n_points - 1) * self.dt

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_points) * self.dt

    @classmethod
    def spanning(cls, horizon: float, dt: float = DEFAULT_DT) -> TimeGrid:
        """Grid ``0:dt:horizon`` including both endpoints."""
        if not (math.isfinite(horizon) and horizon > 0.0):
            raise DomainError(f'Horizon must be positive, got {horizon}')
        if not (math.isfinite(dt) and dt > 0.0):
            raise DomainError(f'Grid step dt must be positive, got {dt}')
        return cls(dt, int(math.floor(horizon / dt + 1e-9)) + 1)

    @classmethod
    def for_settling_time(
        cls, ts: float, dt: float = DEFAULT_DT, horizon_mult: float = DEFAULT_HORIZON_MULT
    ) -> TimeGrid:
        """The default tuning grid ``0:dt:horizon_mult*ts``."""
        return cls.spanning(horizon_mult * ts, dt)


@dataclass(frozen=True, eq=False)
class ResponseTrace:
    """Sampled output ``y`` on ``grid``.

    ``overflow_index`` is the first sample with ``|y| > OVERFLOW_LIMIT``, or
    ``None`` when every sample is finite and in range.
    """

    grid: TimeGrid
    y: np.ndarray
    overflow_index: Optional[int] = None

    def __post_init__(self) -> None:
        y = np.array(self.y, dtype=float)
        if y.shape != (self.grid.n_points,):
            raise DomainError(
                f'Trace has {y.size} samples but the grid has {self.grid.n_points} points'
            )
        y.setflags(write=False)
        object.__setattr__(self, 'y', y)

    @property
    def overflowed(self) -> bool:
        return self.overflow_index is not None

    @property
    def times(self) -> np.ndarray:
        return self.grid.times


@dataclass(frozen=True, eq=False)
class DiscreteStateSpace:
    """ZOH-sampled model: ``x[k+1] = Ad x[k] + Bd u[k]``, ``y[k] = C x[k] + D u[k]``."""

    Ad: np.ndarray
    Bd: np.ndarray
    C: np.ndarray
    D: float
    dt: float


def _augmented_exponential(ss: StateSpace, dt: float) -> np.ndarray:
    n = ss.order
    m = np.zeros((n + 1, n + 1))
    m[:n, :n] = ss.A
    m[:n, n:] = ss.B
    return expm(m * dt)


def discretize_zoh(ss: StateSpace, dt: float) -> DiscreteStateSpace:
    """Exact zero-order-hold discretization.

    ``Ad = exp(A dt)`` and ``Bd = ∫_0^dt exp(A τ) dτ B`` are read off the
    exponential of the augmented block matrix ``[[A, B], [0, 0]] * dt``.
    """
    if not (math.isfinite(dt) and dt > 0.0):
        raise DomainError(f'Sampling step dt must be positive, got {dt}')
    n = ss.order
    e = _augmented_exponential(ss, dt)
    return DiscreteStateSpace(e[:n, :n], e[:n, n:], ss.C, ss.D, dt)


def _step_states(e: np.ndarray, n_points: int) -> np.ndarray:
    """Columns ``E^k [0, ..., 0, 1]^T`` for ``k = 0 .. n_points - 1``.

    ``E`` is the augmented exponential, whose last row is ``[0, ..., 0, 1]``,
    so the top ``n`` entries of column ``k`` are the ZOH state under a unit
    step.  Columns are filled by doubling: ``E^(2^j)`` maps the first
    ``2^j`` columns onto the next ``2^j``.
    """
    size = e.shape[0]
    cols = np.zeros((size, n_points))
    cols[-1, 0] = 1.0
    filled = 1
    power = e
    with np.errstate(over='ignore', invalid='ignore'):
        while filled < n_points:
            take = min(filled, n_points - filled)
            cols[:, filled:filled + take] = power @ cols[:, :take]
            filled += take
            if filled < n_points:
                power = power @ power
    return cols


def _clamp_overflow(y: np.ndarray) -> Optional[int]:
    with np.errstate(invalid='ignore'):
        bad = ~np.isfinite(y) | (np.abs(y) > OVERFLOW_LIMIT)
    if not bad.any():
        return None
    k = int(np.argmax(bad))
    tail = np.nan_to_num(y[k:], nan=OVERFLOW_LIMIT, posinf=OVERFLOW_LIMIT, neginf=-OVERFLOW_LIMIT)
    y[k:] = np.clip(tail, -OVERFLOW_LIMIT, OVERFLOW_LIMIT)
    return k


def step_response(tf: TransferFunction, grid: TimeGrid) -> ResponseTrace:
    """Unit-step response of ``tf`` from rest, sampled on ``grid``.

    Parameters
    ----------
    tf : TransferFunction
        Proper transfer function; biproper systems start at ``y[0] = D``.
    grid : TimeGrid
        Sampling grid.

    Returns
    -------
    ResponseTrace
        The trace, with ``overflow_index`` set if the response blew up.
    """
    ss = tf_to_ss(tf)
    if ss.order == 0:
        return ResponseTrace(grid, np.full(grid.n_points, ss.D))
    e = _augmented_exponential(ss, grid.dt)
    states = _step_states(e, grid.n_points)
    with np.errstate(over='ignore', invalid='ignore'):
        y = (ss.C @ states[:-1, :]).ravel() + ss.D
    overflow = _clamp_overflow(y)
    if overflow is not None:
        logger.warning('Step response of %s overflowed at sample %d', tf, overflow)
    return ResponseTrace(grid, y, overflow)


def resample(raw_t: Sequence[float], raw_y: Sequence[float], grid: TimeGrid) -> ResponseTrace:
    """Linearly interpolate a raw trajectory onto ``grid`` (no extrapolation).

    The raw time axis must be strictly increasing, start no later than
    ``dt`` and end no earlier than ``grid.end``; grid points before the first
    raw sample take the first raw value.

    Raises
    ------
    CoverageError
        If the raw trajectory does not span the grid.
    """
    t = np.asarray(raw_t, dtype=float)
    y = np.asarray(raw_y, dtype=float)
    if t.ndim != 1 or t.shape != y.shape or t.size < 2:
        raise DomainError('A raw trajectory needs two equally long 1-D arrays with >= 2 samples')
    if not (np.all(np.isfinite(t)) and np.all(np.isfinite(y))):
        raise DomainError('Raw trajectory contains non-finite values')
    if np.any(np.diff(t) <= 0.0):
        raise DomainError('Raw trajectory times must be strictly increasing')
    slack = 1e-9 * max(1.0, grid.end)
    if t[0] > grid.dt + slack:
        raise CoverageError(f'Trajectory starts at t={t[0]:g}, after the first grid step {grid.dt:g}')
    if t[-1] < grid.end - slack:
        raise CoverageError(f'Trajectory ends at t={t[-1]:g}, before the grid end {grid.end:g}')
    return ResponseTrace(grid, np.interp(grid.times, t, y))
