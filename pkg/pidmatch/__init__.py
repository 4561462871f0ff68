"""
pidmatch
========

PID auto-tuning by matching a target step response.

A target is derived from a settling time and a percent overshoot (or taken
from a sampled trajectory); non-negative gains ``(kp, ki, kd)`` are chosen
to minimize the integrated absolute error between the unity-feedback step
response and that target; the optimized loop is then checked for stability
and measured.

Example usage::

    from pidmatch import SecondOrderSpec, TransferFunction, tune

    report = tune(TransferFunction.from_coeffs([1], [1, 3, 3, 1]), SecondOrderSpec(ts=2.5, po=1.0))
    print(report.gains, report.metrics.settling_time, report.successful)
"""

from .errors import (CoverageError, DegreeZero, DomainError, GridMismatch, ImproperClosedLoop,
                     IndeterminateGain, NeverSettles, PidMatchError, TrajectoryFileError)
from .lti_core import (PidGains, Polynomial, StabilityVerdict, StateSpace, TransferFunction, closed_loop,
                       dc_gain, is_stable, pid_tf, poly_arith, roots, series, tf_to_ss, unity_feedback)
from .metrics import (MetricsComparison, MetricsReport, compare_metrics, evaluate_gains, iae,
                      percent_overshoot, settling_time)
from .optimizer import OptimOptions, OptimResult, minimize, target_iae_objective
from .simulate import ResponseTrace, TimeGrid, discretize_zoh, resample, step_response
from .target_design import (SecondOrderSpec, TargetModel, TrajectorySpec, damping_ratio, make_target,
                            make_target_from_trajectory, natural_frequency)
from .tuner import TuneReport, tune

__version__ = '1.0.0'

__all__ = [
    'CoverageError', 'DegreeZero', 'DomainError', 'GridMismatch', 'ImproperClosedLoop',
    'IndeterminateGain', 'NeverSettles', 'PidMatchError', 'TrajectoryFileError',
    'PidGains', 'Polynomial', 'StabilityVerdict', 'StateSpace', 'TransferFunction', 'closed_loop',
    'dc_gain', 'is_stable', 'pid_tf', 'poly_arith', 'roots', 'series', 'tf_to_ss', 'unity_feedback',
    'MetricsComparison', 'MetricsReport', 'compare_metrics', 'evaluate_gains', 'iae',
    'percent_overshoot', 'settling_time',
    'OptimOptions', 'OptimResult', 'minimize', 'target_iae_objective',
    'ResponseTrace', 'TimeGrid', 'discretize_zoh', 'resample', 'step_response',
    'SecondOrderSpec', 'TargetModel', 'TrajectorySpec', 'damping_ratio', 'make_target',
    'make_target_from_trajectory', 'natural_frequency',
    'TuneReport', 'tune',
]
