"""
metrics.py
==========

Time-domain performance figures of a step response:

* integrated absolute error by the trapezoidal rule, against the unit step or
  against another trace on the same grid;
* settling time into a band around the final value (2% by default);
* percent overshoot;

and :func:`evaluate_gains`, which bundles them for a PID gain triple on a
plant.  Final values come from the analytic DC gain, not from the last
sample, so truncated horizons do not bias settling or overshoot.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from scipy.integrate import trapezoid

from .errors import DomainError, GridMismatch, NeverSettles
from .lti_core import PidGains, Polynomial, TransferFunction, closed_loop, dc_gain, is_stable
from .simulate import ResponseTrace, TimeGrid, step_response

logger = logging.getLogger(__name__)

DEFAULT_BAND = 0.02


@dataclass(frozen=True)
class MetricsReport:
    """Unit-step performance of one closed loop.

    ``settled`` is False when the response never enters the band for good
    inside the horizon; ``settling_time`` is then the grid end.
    """

    settling_time: float
    overshoot_pct: float
    iae_unit_step: float
    final_value: float
    stable: bool
    poles: Tuple[complex, ...]
    settled: bool = True


@dataclass(frozen=True)
class MetricsComparison:
    """Relative improvement in percent of a candidate over a reference.

    Positive values mean the candidate is better (lower).  ``None`` where the
    reference value is zero.
    """

    overshoot_pct: Optional[float]
    settling_time: Optional[float]
    iae: Optional[float]


def iae(grid: TimeGrid, y: ResponseTrace, ref: Union[ResponseTrace, float] = 1.0) -> float:
    """Trapezoidal integral of ``|ref - y|`` over ``grid``.

    Parameters
    ----------
    grid : TimeGrid
        Integration grid; ``y`` (and ``ref`` if it is a trace) must share it.
    y : ResponseTrace
        Response under evaluation.
    ref : ResponseTrace or float
        Reference trace, or a constant (the unit step by default).
    """
    if y.grid != grid:
        raise GridMismatch(f'Trace grid {y.grid} differs from integration grid {grid}')
    if isinstance(ref, ResponseTrace):
        if ref.grid != grid:
            raise GridMismatch(f'Reference grid {ref.grid} differs from integration grid {grid}')
        reference = ref.y
    else:
        reference = float(ref)
    return float(trapezoid(np.abs(reference - y.y), dx=grid.dt))


def settling_time(
    grid: TimeGrid, y: ResponseTrace, final_value: float, band: float = DEFAULT_BAND
) -> float:
    """First grid time after which ``y`` stays within ``band * |final_value|``.

    Raises
    ------
    NeverSettles
        If the last sample is still outside the band.
    """
    if final_value == 0.0 or not math.isfinite(final_value):
        raise DomainError(f'Settling time needs a finite nonzero final value, got {final_value}')
    if y.grid != grid:
        raise GridMismatch(f'Trace grid {y.grid} differs from grid {grid}')
    outside = np.abs(y.y - final_value) > band * abs(final_value)
    if not outside.any():
        return 0.0
    last = grid.n_points - 1 - int(np.argmax(outside[::-1]))
    if last == grid.n_points - 1:
        raise NeverSettles(
            f'Response is outside the {band:.0%} band at the last sample t={grid.end:g}'
        )
    return float((last + 1) * grid.dt)


def percent_overshoot(y: ResponseTrace, final_value: float) -> float:
    """Peak overshoot above ``final_value`` in percent, floored at 0."""
    if not (math.isfinite(final_value) and final_value > 0.0):
        raise DomainError(f'Percent overshoot needs a positive final value, got {final_value}')
    peak = float(np.max(y.y))
    return max(0.0, (peak - final_value) / final_value * 100.0)


def closed_loop_response(plant: TransferFunction, g: PidGains, grid: TimeGrid) -> ResponseTrace:
    return step_response(closed_loop(plant, g), grid)


def _strip_origin_pairs(tf: TransferFunction) -> TransferFunction:
    # ki = 0 leaves the PID's s in both num and den; only the DC gain sees it removed
    num, den = tf.num.coeffs, tf.den.coeffs
    while len(num) > 1 and len(den) > 1 and num[-1] == 0.0 and den[-1] == 0.0:
        num, den = num[:-1], den[:-1]
    return TransferFunction(Polynomial(num), Polynomial(den))


def evaluate_gains(plant: TransferFunction, g: PidGains, grid: TimeGrid) -> MetricsReport:
    """Unit-step metrics of ``plant`` in unity feedback with the PID ``g``.

    The final value is the closed-loop DC gain.  When the loop is unstable or
    that gain is not positive and finite, settling and overshoot are taken
    against the unit setpoint instead.
    """
    loop = closed_loop(plant, g)
    verdict = is_stable(loop)
    trace = step_response(loop, grid)
    final = dc_gain(_strip_origin_pairs(loop))
    reference = final
    if not (verdict.stable and math.isfinite(final) and final > 0.0):
        logger.warning('Loop with %s is unstable or has no positive DC gain; '
                       'measuring against the unit setpoint', g)
        reference = 1.0
    settled = True
    try:
        ts = settling_time(grid, trace, reference)
    except NeverSettles:
        logger.warning('Loop with %s does not settle within %.4g s', g, grid.end)
        ts, settled = grid.end, False
    return MetricsReport(
        settling_time=ts,
        overshoot_pct=percent_overshoot(trace, reference),
        iae_unit_step=iae(grid, trace, 1.0),
        final_value=final,
        stable=verdict.stable,
        poles=verdict.poles,
        settled=settled,
    )


def _improvement(candidate: float, reference: float) -> Optional[float]:
    if reference == 0.0:
        return None
    return (reference - candidate) / reference * 100.0


def compare_metrics(candidate: MetricsReport, reference: MetricsReport) -> MetricsComparison:
    """Percent improvement of ``candidate`` over ``reference`` per figure."""
    return MetricsComparison(
        overshoot_pct=_improvement(candidate.overshoot_pct, reference.overshoot_pct),
        settling_time=_improvement(candidate.settling_time, reference.settling_time),
        iae=_improvement(candidate.iae_unit_step, reference.iae_unit_step),
    )
