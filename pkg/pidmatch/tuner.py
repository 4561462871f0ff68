"""
tuner.py
========

The tuning pipeline, in three sequential phases:

1. build the target response from the specification;
2. minimize the IAE between the closed-loop step response and that target
   over the non-negative gain box;
3. verify the optimized loop (closed-loop poles) and measure its unit-step
   performance.

An unstable optimized loop is not an exception: the report comes back with
``successful = False`` and the caller decides what to change (bounds,
specification).

Example usage::

    from pidmatch.lti_core import TransferFunction
    from pidmatch.target_design import SecondOrderSpec
    from pidmatch.tuner import tune

    report = tune(TransferFunction.from_coeffs([1], [1, 2, 1]), SecondOrderSpec(ts=2.5, po=1.0))
    print(report.gains, report.metrics.iae_unit_step, report.successful)
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

from .errors import ImproperClosedLoop
from .lti_core import PidGains, StabilityVerdict, TransferFunction, closed_loop, is_stable
from .metrics import MetricsComparison, MetricsReport, compare_metrics, evaluate_gains
from .optimizer import OptimOptions, OptimResult, minimize, target_iae_objective
from .simulate import DEFAULT_DT, DEFAULT_HORIZON_MULT, TimeGrid
from .target_design import TargetModel, TargetSpec, build_target, default_grid

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_UNSTABLE = 3
EXIT_NOT_CONVERGED = 4


@dataclass(frozen=True, eq=False)
class TuneReport:
    """Everything one tuning run produced.

    ``metrics`` is recomputable: ``evaluate_gains(plant, gains, grid)`` gives
    the same values.  ``reference_metrics`` and ``comparison`` are set only
    when reference gains were supplied.
    """

    plant: TransferFunction
    spec: TargetSpec
    gains: PidGains
    target_model: TargetModel
    metrics: MetricsReport
    iae_vs_target: float
    stability: StabilityVerdict
    optimizer: OptimResult
    grid: TimeGrid
    reference_gains: Optional[PidGains] = None
    reference_metrics: Optional[MetricsReport] = None
    comparison: Optional[MetricsComparison] = None

    @property
    def successful(self) -> bool:
        return self.stability.stable

    def exit_code(self) -> int:
        if self.successful:
            return EXIT_OK
        return EXIT_UNSTABLE if self.optimizer.converged else EXIT_NOT_CONVERGED


def tune(
    plant: TransferFunction,
    spec: TargetSpec,
    opts: OptimOptions = OptimOptions(),
    grid: Optional[TimeGrid] = None,
    dt: float = DEFAULT_DT,
    horizon_mult: float = DEFAULT_HORIZON_MULT,
    reference_gains: Optional[PidGains] = None,
) -> TuneReport:
    """Tune a PID for ``plant`` so its step response follows ``spec``.

    Parameters
    ----------
    plant : TransferFunction
        Plant of relative degree >= 1, or relative degree 0 with
        ``opts.pi_only``.
    spec : SecondOrderSpec or TrajectorySpec
        Target specification.
    opts : OptimOptions
        Optimizer settings (budget, bounds, start point, method).
    grid : TimeGrid, optional
        Overrides the default grid (``0:dt:horizon_mult*ts`` or the
        trajectory span).
    dt, horizon_mult : float
        Default-grid parameters, ignored when ``grid`` is given.
    reference_gains : PidGains, optional
        A second gain set (for example from another tuning rule) evaluated
        on the same grid for comparison.

    Returns
    -------
    TuneReport
        The report; check ``successful`` before deploying the gains.
    """
    if plant.relative_degree < 1 and not opts.pi_only:
        raise ImproperClosedLoop(
            f'Plant {plant} has relative degree {plant.relative_degree}; '
            'an unfiltered PID needs relative degree >= 1, set pi_only'
        )
    if grid is None:
        grid = default_grid(spec, dt, horizon_mult)
    logger.info('Target phase: %s on %d points (dt=%g)', spec, grid.n_points, grid.dt)
    target = build_target(spec, grid)

    logger.info('Optimization phase: %s, budget %d', opts.method, opts.max_evals)
    objective = target_iae_objective(plant, target.trace, grid, opts.pi_only)
    result = minimize(objective, opts)

    logger.info('Verification phase: gains %s', result.gains)
    stability = is_stable(closed_loop(plant, result.gains))
    if not stability.stable:
        logger.warning('Optimized loop is unstable (max Re(pole) = %.4g); '
                       'tighten the gain bounds or revise the specification',
                       stability.max_real_part)
    metrics = evaluate_gains(plant, result.gains, grid)

    reference_metrics = comparison = None
    if reference_gains is not None:
        reference_metrics = evaluate_gains(plant, reference_gains, grid)
        comparison = compare_metrics(metrics, reference_metrics)

    return TuneReport(
        plant=plant,
        spec=spec,
        gains=result.gains,
        target_model=target,
        metrics=metrics,
        iae_vs_target=objective(result.gains),
        stability=stability,
        optimizer=result,
        grid=grid,
        reference_gains=reference_gains,
        reference_metrics=reference_metrics,
        comparison=comparison,
    )
