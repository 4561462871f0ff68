"""
optimizer.py
============

Bound-constrained, budgeted minimization of the target-matching objective.

The objective is the trapezoidal IAE between the closed-loop unit-step
response under a candidate PID and the target trace.  :func:`minimize`
searches the box ``lower <= x <= upper`` (the non-negative orthant by
default) from ``x0`` (all zeros by default) with at most ``max_evals``
objective evaluations.

Every evaluation goes through :class:`_BudgetedObjective`, which projects
the point onto the box, counts evaluations, stops the search when the budget
runs out and remembers the best point seen.  Hence for both supported
methods the returned gains are feasible, never worse than ``x0``, and the
budget is never exceeded.

Methods
-------
``nelder-mead``
    Bounded simplex (:func:`scipy.optimize.minimize`), initial perturbation
    ``initial_step`` per free coordinate, restarted from the incumbent while
    a restart still improves by more than ``f_tol``.
``slsqp``
    Sequential quadratic programming with finite-difference gradients.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.optimize import Bounds
from scipy.optimize import minimize as scipy_minimize

from .errors import DomainError, GridMismatch, ImproperClosedLoop
from .lti_core import PidGains, TransferFunction, closed_loop
from .metrics import iae
from .simulate import ResponseTrace, TimeGrid, step_response

logger = logging.getLogger(__name__)

METHODS = ('nelder-mead', 'slsqp')
# returned for non-finite objective values so the search can back away
_PENALTY = 1e12


@dataclass(frozen=True)
class OptimOptions:
    """Search settings; defaults reproduce the reference tuning setup.

    Parameters
    ----------
    max_evals : int
        Objective evaluation budget.
    x0 : PidGains
        Starting point, inside the box.
    lower, upper : tuple of float
        Box bounds on ``(kp, ki, kd)``; ``upper`` may hold ``math.inf``.
    f_tol, x_tol : float
        Absolute stopping tolerances on objective spread and point spread.
    pi_only : bool
        Fix ``kd`` at exactly 0.
    method : str
        One of :data:`METHODS`.
    initial_step : float
        Simplex perturbation per free coordinate.
    restarts : int
        Maximum number of Nelder-Mead restarts from the incumbent.
    progress_every : int
        Log the incumbent at INFO level every this many evaluations.
    """

    max_evals: int = 3000
    x0: PidGains = field(default_factory=lambda: PidGains(0.0, 0.0, 0.0))
    lower: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    upper: Tuple[float, float, float] = (math.inf, math.inf, math.inf)
    f_tol: float = 1e-6
    x_tol: float = 1e-6
    pi_only: bool = False
    method: str = 'nelder-mead'
    initial_step: float = 0.1
    restarts: int = 2
    progress_every: int = 100

    def __post_init__(self) -> None:
        if self.max_evals < 1:
            raise DomainError(f'Evaluation budget must be >= 1, got {self.max_evals}')
        if self.method not in METHODS:
            raise DomainError(f'Unknown method {self.method!r}; choose one of {", ".join(METHODS)}')
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        x0 = self.x0.as_array()
        if lower.shape != (3,) or upper.shape != (3,):
            raise DomainError('lower and upper need exactly three entries (kp, ki, kd)')
        if np.any(lower < 0.0) or np.any(np.isnan(upper)):
            raise DomainError(f'Gain bounds must be non-negative, got lower={self.lower}')
        if np.any(lower > x0) or np.any(x0 > upper):
            raise DomainError(f'x0={self.x0} is outside the box [{self.lower}, {self.upper}]')
        if self.initial_step <= 0.0 or self.f_tol <= 0.0 or self.x_tol <= 0.0:
            raise DomainError('initial_step, f_tol and x_tol must be positive')

    def box(self) -> Tuple[np.ndarray, np.ndarray]:
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float).copy()
        if self.pi_only:
            upper[2] = lower[2] = 0.0
        return lower, upper


@dataclass(frozen=True)
class OptimResult:
    """Outcome of :func:`minimize`.

    ``trace`` lists ``(evaluations, best objective)`` each time the incumbent
    improved.  ``converged`` is False when the budget ran out first.
    """

    gains: PidGains
    objective: float
    evals: int
    converged: bool
    trace: Tuple[Tuple[int, float], ...] = ()
    method: str = 'nelder-mead'


class TargetIaeObjective:
    """IAE between the closed-loop step response under a PID and a target trace.

    Parameters
    ----------
    plant : TransferFunction
        Proper plant model.
    target : ResponseTrace
        Target response sampled on ``grid``.
    grid : TimeGrid
        Simulation and integration grid.
    pi_only : bool
        Whether ``kd`` is held at 0; required for plants of relative degree 0.
    """

    def __init__(
        self, plant: TransferFunction, target: ResponseTrace, grid: TimeGrid, pi_only: bool = False
    ) -> None:
        if target.grid != grid:
            raise GridMismatch(f'Target grid {target.grid} differs from simulation grid {grid}')
        if plant.relative_degree < 0:
            raise ImproperClosedLoop(f'Plant {plant} is improper')
        if plant.relative_degree == 0 and not pi_only:
            raise ImproperClosedLoop(
                f'Plant {plant} has relative degree 0, so an unfiltered derivative gives an '
                'improper loop; tune it with pi_only'
            )
        self.plant = plant
        self.target = target
        self.grid = grid
        self.pi_only = pi_only

    def __call__(self, g: PidGains) -> float:
        trace = step_response(closed_loop(self.plant, g), self.grid)
        return iae(self.grid, trace, self.target)


def target_iae_objective(
    plant: TransferFunction, target: ResponseTrace, grid: TimeGrid, pi_only: bool = False
) -> TargetIaeObjective:
    """Objective ``g -> IAE(target, step response of closed_loop(plant, g))``."""
    return TargetIaeObjective(plant, target, grid, pi_only)


class _BudgetExhausted(Exception):
    pass


class _BudgetedObjective:
    """Projects onto the box, enforces the budget and tracks the incumbent."""

    def __init__(
        self,
        f: Callable[[PidGains], float],
        x_full: np.ndarray,
        free: np.ndarray,
        lower: np.ndarray,
        upper: np.ndarray,
        max_evals: int,
        progress_every: int,
    ) -> None:
        self.f = f
        self.x_full = x_full
        self.free = free
        self.lower = lower[free]
        self.upper = upper[free]
        self.max_evals = max_evals
        self.progress_every = progress_every
        self.evals = 0
        self.best_x: Optional[np.ndarray] = None
        self.best_f = math.inf
        self.trace: List[Tuple[int, float]] = []

    def gains_for(self, z: np.ndarray) -> PidGains:
        x = self.x_full.copy()
        x[self.free] = np.clip(z, self.lower, self.upper)
        return PidGains.from_array(x)

    def __call__(self, z: np.ndarray) -> float:
        if self.evals >= self.max_evals:
            raise _BudgetExhausted
        z = np.clip(np.asarray(z, dtype=float), self.lower, self.upper)
        value = float(self.f(self.gains_for(z)))
        self.evals += 1
        if not math.isfinite(value):
            value = _PENALTY
        if value < self.best_f:
            self.best_f = value
            self.best_x = z.copy()
            self.trace.append((self.evals, value))
        if self.progress_every and self.evals % self.progress_every == 0:
            logger.info('%5d evaluations, best objective %.6g', self.evals, self.best_f)
        return value

    @property
    def remaining(self) -> int:
        return self.max_evals - self.evals


def _initial_simplex(z0: np.ndarray, lower: np.ndarray, upper: np.ndarray, step: float) -> np.ndarray:
    simplex = [z0]
    for i in range(z0.size):
        vertex = z0.copy()
        room_up = upper[i] - z0[i]
        if room_up > 0.0:
            vertex[i] += min(step, room_up)
        else:
            vertex[i] -= min(step, z0[i] - lower[i])
        simplex.append(vertex)
    return np.array(simplex)


def _nelder_mead(wrapped: _BudgetedObjective, z0: np.ndarray, opts: OptimOptions) -> bool:
    bounds = Bounds(wrapped.lower, wrapped.upper)
    start = z0
    converged = False
    for attempt in range(opts.restarts + 1):
        before = wrapped.best_f
        res = scipy_minimize(
            wrapped,
            start,
            method='Nelder-Mead',
            bounds=bounds,
            options={
                'maxfev': wrapped.remaining,
                'xatol': opts.x_tol,
                'fatol': opts.f_tol,
                'initial_simplex': _initial_simplex(start, wrapped.lower, wrapped.upper,
                                                    opts.initial_step),
            },
        )
        converged = bool(res.success)
        if not converged or (attempt > 0 and before - wrapped.best_f <= opts.f_tol):
            break
        if wrapped.remaining <= 0:
            break
        logger.debug('Restarting simplex from %s (objective %.6g)', wrapped.best_x, wrapped.best_f)
        start = wrapped.best_x
    return converged


def _slsqp(wrapped: _BudgetedObjective, z0: np.ndarray, opts: OptimOptions) -> bool:
    res = scipy_minimize(
        wrapped,
        z0,
        method='SLSQP',
        bounds=Bounds(wrapped.lower, wrapped.upper),
        options={'maxiter': opts.max_evals, 'ftol': opts.f_tol},
    )
    return bool(res.success)


def minimize(f: Callable[[PidGains], float], opts: OptimOptions = OptimOptions()) -> OptimResult:
    """Locally minimize ``f`` over the gain box described by ``opts``.

    Returns
    -------
    OptimResult
        Best gains found.  Budget exhaustion is reported through
        ``converged = False``, never raised.
    """
    lower, upper = opts.box()
    x_full = np.clip(opts.x0.as_array(), lower, upper)
    free = upper > lower
    wrapped = _BudgetedObjective(f, x_full, free, lower, upper, opts.max_evals, opts.progress_every)
    z0 = x_full[free]
    try:
        if not free.any():
            wrapped(z0)
            converged = True
        elif opts.method == 'slsqp':
            converged = _slsqp(wrapped, z0, opts)
        else:
            converged = _nelder_mead(wrapped, z0, opts)
    except _BudgetExhausted:
        converged = False
    if not converged:
        logger.warning('Optimizer stopped without converging after %d evaluations', wrapped.evals)
    gains = wrapped.gains_for(wrapped.best_x)
    logger.debug('Optimizer finished: %s, objective %.6g, %d evaluations',
                 gains, wrapped.best_f, wrapped.evals)
    return OptimResult(
        gains=gains,
        objective=wrapped.best_f,
        evals=wrapped.evals,
        converged=converged,
        trace=tuple(wrapped.trace),
        method=opts.method,
    )
