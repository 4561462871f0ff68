"""
target_design.py
================

The reference response a tuned loop is asked to follow.

Two ways to specify it are supported and treated identically downstream:

* :class:`SecondOrderSpec`: settling time ``ts`` (2% band) and percent
  overshoot ``po``.  They are turned into a damping ratio and a natural
  frequency and from there into ``wn^2 / (s^2 + 2 zeta wn s + wn^2)``.
* :class:`TrajectorySpec`: a sampled time-domain trajectory (for example
  measured response data), linearly resampled onto the tuning grid.

Both produce a :class:`TargetModel` whose ``trace`` is what the objective
compares against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from .errors import DomainError, NeverSettles
from .lti_core import Polynomial, TransferFunction, dc_gain
from .metrics import percent_overshoot, settling_time
from .simulate import DEFAULT_DT, DEFAULT_HORIZON_MULT, ResponseTrace, TimeGrid, resample, step_response


@dataclass(frozen=True)
class SecondOrderSpec:
    """Settling time ``ts`` in seconds and percent overshoot ``po`` in (0, 100)."""

    ts: float
    po: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.ts) and self.ts > 0.0):
            raise DomainError(f'Settling time ts must be finite and positive, got {self.ts}')
        _check_po(self.po)


@dataclass(frozen=True, eq=False)
class TrajectorySpec:
    """Raw target trajectory ``(raw_t, raw_y)``; ``source`` names its file, if any."""

    raw_t: Tuple[float, ...] = field(repr=False)
    raw_y: Tuple[float, ...] = field(repr=False)
    source: Optional[str] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, 'raw_t', tuple(float(v) for v in self.raw_t))
        object.__setattr__(self, 'raw_y', tuple(float(v) for v in self.raw_y))
        if len(self.raw_t) != len(self.raw_y) or len(self.raw_t) < 2:
            raise DomainError('A target trajectory needs equally long t and y with at least 2 samples')

    @property
    def span(self) -> float:
        return self.raw_t[-1]


TargetSpec = Union[SecondOrderSpec, TrajectorySpec]


@dataclass(frozen=True, eq=False)
class TargetModel:
    """Target response; ``zeta``, ``wn`` and ``tf`` are ``None`` for trajectory targets."""

    trace: ResponseTrace
    zeta: Optional[float] = None
    wn: Optional[float] = None
    tf: Optional[TransferFunction] = None
    achieved: Dict[str, Optional[float]] = field(default_factory=dict)

    def summary(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            'zeta': self.zeta,
            'wn': self.wn,
            'num': list(self.tf.num.coeffs) if self.tf is not None else None,
            'den': list(self.tf.den.coeffs) if self.tf is not None else None,
        }
        out.update(self.achieved)
        return out


def _check_po(po: float) -> None:
    if not (math.isfinite(po) and 0.0 < po < 100.0):
        raise DomainError(
            f'Percent overshoot po must lie in the open interval (0, 100), got {po}; '
            'use po=0.01 for a response with practically no overshoot'
        )


def damping_ratio(po: float) -> float:
    """Damping ratio giving ``po`` percent peak overshoot.

    ``zeta = -ln(po/100) / sqrt(pi^2 + ln^2(po/100))``, the exact inverse of
    the second-order peak formula; strictly decreasing in ``po``.
    """
    _check_po(po)
    log_po = math.log(po / 100.0)
    return -log_po / math.sqrt(math.pi ** 2 + log_po ** 2)


def natural_frequency(zeta: float, ts: float) -> float:
    """``wn = 4 / (zeta ts)``, the usual 2%-band settling approximation."""
    if not (zeta > 0.0 and ts > 0.0):
        raise DomainError(f'natural_frequency needs zeta > 0 and ts > 0, got zeta={zeta}, ts={ts}')
    return 4.0 / (zeta * ts)


def make_target(spec: SecondOrderSpec, grid: TimeGrid) -> TargetModel:
    """Build the second-order target for ``spec`` and simulate it on ``grid``."""
    zeta = damping_ratio(spec.po)
    wn = natural_frequency(zeta, spec.ts)
    wn2 = wn * wn
    # 2*zeta*wn reduces to 8/ts; write it that way so the identity is exact
    tf = TransferFunction(Polynomial((wn2,)), Polynomial((1.0, 8.0 / spec.ts, wn2)))
    trace = step_response(tf, grid)
    return TargetModel(trace=trace, zeta=zeta, wn=wn, tf=tf, achieved=_achieved(trace, dc_gain(tf)))


def make_target_from_trajectory(spec: TrajectorySpec, grid: TimeGrid) -> TargetModel:
    """Adopt a raw trajectory as the target by resampling it onto ``grid``."""
    trace = resample(spec.raw_t, spec.raw_y, grid)
    return TargetModel(trace=trace, achieved=_achieved(trace, float(trace.y[-1])))


def build_target(spec: TargetSpec, grid: TimeGrid) -> TargetModel:
    if isinstance(spec, SecondOrderSpec):
        return make_target(spec, grid)
    return make_target_from_trajectory(spec, grid)


def default_grid(
    spec: TargetSpec, dt: float = DEFAULT_DT, horizon_mult: float = DEFAULT_HORIZON_MULT
) -> TimeGrid:
    """``0:dt:horizon_mult*ts`` for second-order specs, the raw span for trajectories."""
    if isinstance(spec, SecondOrderSpec):
        return TimeGrid.for_settling_time(spec.ts, dt, horizon_mult)
    return TimeGrid.spanning(spec.span, dt)


def _achieved(trace: ResponseTrace, final: float) -> Dict[str, Optional[float]]:
    if not np.isfinite(final) or final <= 0.0:
        return {'settling_time': None, 'overshoot_pct': None}
    try:
        ts = settling_time(trace.grid, trace, final)
    except NeverSettles:
        ts = None
    return {'settling_time': ts, 'overshoot_pct': percent_overshoot(trace, final)}
