import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from pidmatch.errors import DomainError, GridMismatch, ImproperClosedLoop
from pidmatch.lti_core import PidGains, TransferFunction
from pidmatch.optimizer import OptimOptions, minimize, target_iae_objective
from pidmatch.simulate import TimeGrid
from pidmatch.target_design import default_grid, make_target

METHODS = ['nelder-mead', 'slsqp']


class Recorder:
    """Wraps an objective and keeps every point it was asked about."""

    def __init__(self, f):
        self.f = f
        self.points = []

    def __call__(self, g):
        self.points.append(g)
        return self.f(g)


def quadratic(g):
    return (g.kp - 1.0) ** 2 + (g.ki - 2.0) ** 2 + g.kd ** 2


def rosenbrock(g):
    return (1.0 - g.kp) ** 2 + 100.0 * (g.ki - g.kp ** 2) ** 2 + (g.kd - 0.3) ** 2


class TestOptimOptions:

    def test_defaults(self):
        opts = OptimOptions()
        assert opts.max_evals == 3000
        assert opts.x0 == PidGains(0.0, 0.0, 0.0)
        assert opts.f_tol == 1e-6 and opts.x_tol == 1e-6

    @pytest.mark.parametrize('kwargs', [
        {'max_evals': 0},
        {'method': 'bfgs'},
        {'lower': (-1.0, 0.0, 0.0)},
        {'upper': (1.0, 1.0, 1.0), 'x0': PidGains(2.0, 0.0, 0.0)},
        {'initial_step': 0.0},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(DomainError):
            OptimOptions(**kwargs)


@pytest.mark.parametrize('method', METHODS)
class TestMinimize:

    def test_convex_quadratic(self, method):
        result = minimize(quadratic, OptimOptions(method=method))
        assert result.converged
        np.testing.assert_allclose(result.gains.as_array(), [1.0, 2.0, 0.0], atol=1e-4)
        assert result.method == method

    def test_active_lower_bound(self, method):
        result = minimize(lambda g: (g.kp + 1.0) ** 2 + (g.ki - 0.5) ** 2 + g.kd ** 2,
                          OptimOptions(method=method))
        assert result.gains.kp == pytest.approx(0.0, abs=1e-6)
        assert result.gains.ki == pytest.approx(0.5, abs=1e-4)

    def test_never_leaves_the_box(self, method):
        f = Recorder(quadratic)
        upper = (0.5, 10.0, 10.0)
        result = minimize(f, OptimOptions(method=method, upper=upper))
        for g in f.points:
            assert 0.0 <= g.kp <= 0.5 and 0.0 <= g.ki <= 10.0 and 0.0 <= g.kd <= 10.0
        assert result.gains.kp == pytest.approx(0.5, abs=1e-4)

    def test_pi_only_holds_kd_at_zero(self, method):
        f = Recorder(lambda g: quadratic(g) + (g.kd - 1.0) ** 2)
        result = minimize(f, OptimOptions(method=method, pi_only=True))
        assert result.gains.kd == 0.0
        assert all(g.kd == 0.0 for g in f.points)

    def test_budget(self, method):
        f = Recorder(rosenbrock)
        result = minimize(f, OptimOptions(method=method, max_evals=40))
        assert len(f.points) <= 40
        assert result.evals == len(f.points)
        assert not result.converged

    def test_descent_and_trace(self, method):
        result = minimize(rosenbrock, OptimOptions(method=method, max_evals=500))
        assert result.objective <= rosenbrock(PidGains(0.0, 0.0, 0.0))
        objectives = [f for _, f in result.trace]
        assert objectives == sorted(objectives, reverse=True)
        assert result.trace[-1][1] == result.objective

    def test_deterministic(self, method):
        a = minimize(rosenbrock, OptimOptions(method=method, max_evals=300))
        b = minimize(rosenbrock, OptimOptions(method=method, max_evals=300))
        assert a == b

    def test_non_finite_values_are_penalized(self, method):
        result = minimize(lambda g: math.nan if g.kp > 2.0 else quadratic(g), OptimOptions(method=method))
        assert math.isfinite(result.objective)
        assert result.gains.kp <= 2.0


def test_fully_fixed_box_evaluates_once():
    f = Recorder(quadratic)
    result = minimize(f, OptimOptions(upper=(0.0, 0.0, 0.0)))
    assert len(f.points) == 1
    assert result.gains == PidGains(0.0, 0.0, 0.0)
    assert result.converged


class TestTargetIaeObjective:

    def test_zero_gains_give_area_under_target(self, g2, reference_spec):
        grid = default_grid(reference_spec)
        target = make_target(reference_spec, grid).trace
        f = target_iae_objective(g2, target, grid)
        assert f(PidGains(0.0, 0.0, 0.0)) == pytest.approx(trapezoid(np.abs(target.y), dx=grid.dt), rel=1e-12)

    def test_reproducible_and_positive(self, g3, reference_spec):
        grid = default_grid(reference_spec)
        f = target_iae_objective(g3, make_target(reference_spec, grid).trace, grid)
        g = PidGains(2.8653, 1.1718, 2.6221)
        value = f(g)
        assert math.isfinite(value) and value > 0.0
        assert f(g) == value

    def test_relative_degree_zero_needs_pi_only(self, reference_spec):
        grid = default_grid(reference_spec)
        target = make_target(reference_spec, grid).trace
        plant = TransferFunction.from_coeffs([1, 2], [1, 1])
        with pytest.raises(ImproperClosedLoop, match='pi_only'):
            target_iae_objective(plant, target, grid)
        assert math.isfinite(target_iae_objective(plant, target, grid, pi_only=True)(PidGains(1.0, 1.0)))

    def test_grid_mismatch(self, g1, reference_spec):
        target = make_target(reference_spec, default_grid(reference_spec)).trace
        with pytest.raises(GridMismatch):
            target_iae_objective(g1, target, TimeGrid.spanning(12.5, 0.005))

    def test_unstable_candidate_stays_finite(self, reference_spec):
        grid = default_grid(reference_spec)
        plant = TransferFunction.from_coeffs([1], [1, -3])
        f = target_iae_objective(plant, make_target(reference_spec, grid).trace, grid)
        assert math.isfinite(f(PidGains(0.1, 0.0)))


@pytest.mark.slow
def test_pi_tuning_matches_exhaustive_grid_search(g1, reference_spec):
    grid = default_grid(reference_spec)
    f = target_iae_objective(g1, make_target(reference_spec, grid).trace, grid, pi_only=True)
    result = minimize(f, OptimOptions(pi_only=True))
    axis = np.round(np.arange(0, 501) * 0.01, 2)
    best = min(f(PidGains(kp, ki)) for kp in axis for ki in axis)
    assert result.objective <= 1.02 * best
