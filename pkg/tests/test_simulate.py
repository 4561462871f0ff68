import logging
import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from pidmatch.errors import CoverageError, DomainError
from pidmatch.lti_core import PidGains, StateSpace, TransferFunction, closed_loop, tf_to_ss
from pidmatch.simulate import OVERFLOW_LIMIT, TimeGrid, discretize_zoh, resample, step_response

TABLE1_ROWS = [
    ([1, 1], PidGains(0.8218, 1.3517, 0.0)),
    ([1, 1], PidGains(1.4316, 2.5948, 0.0)),
    ([1, 2, 1], PidGains(2.2108, 1.1993, 0.5475)),
    ([1, 2, 1], PidGains(2.0456, 1.4540, 0.6997)),
    ([1, 3, 3, 1], PidGains(2.8653, 1.1718, 2.6221)),
    ([1, 3, 3, 1], PidGains(2.1751, 0.8474, 1.3958)),
]


def _ode_step(tf, grid):
    """Step response of ``tf`` by adaptive Runge-Kutta on its realization."""
    ss = tf_to_ss(tf)
    sol = solve_ivp(lambda t, x: ss.A @ x + ss.B[:, 0], (0.0, grid.end), np.zeros(ss.order),
                    method='DOP853', t_eval=grid.times, rtol=1e-10, atol=1e-12)
    return (ss.C @ sol.y).ravel() + ss.D


class TestTimeGrid:

    def test_default_tuning_grid(self):
        grid = TimeGrid.for_settling_time(2.5)
        assert grid.n_points == 1251
        assert grid.end == pytest.approx(12.5)
        assert grid.t0 == 0.0

    def test_times(self):
        grid = TimeGrid(0.5, 5)
        np.testing.assert_array_equal(grid.times, [0.0, 0.5, 1.0, 1.5, 2.0])

    @pytest.mark.parametrize('dt,n', [(0.0, 10), (-0.1, 10), (0.1, 1)])
    def test_invalid(self, dt, n):
        with pytest.raises(DomainError):
            TimeGrid(dt, n)


class TestDiscretize:

    def test_scalar_lag(self):
        d = discretize_zoh(StateSpace(np.array([[-1.0]]), np.array([[1.0]]), np.array([[1.0]]), 0.0), 0.01)
        assert d.Ad[0, 0] == pytest.approx(math.exp(-0.01), rel=1e-13)
        assert d.Bd[0, 0] == pytest.approx(1.0 - math.exp(-0.01), rel=1e-12)

    def test_integrator(self):
        d = discretize_zoh(StateSpace(np.zeros((1, 1)), np.array([[1.0]]), np.array([[1.0]]), 0.0), 0.5)
        assert d.Ad[0, 0] == pytest.approx(1.0)
        assert d.Bd[0, 0] == pytest.approx(0.5)

    def test_double_integrator(self):
        a = np.array([[0.0, 1.0], [0.0, 0.0]])
        d = discretize_zoh(StateSpace(a, np.array([[0.0], [1.0]]), np.array([[1.0, 0.0]]), 0.0), 1.0)
        np.testing.assert_allclose(d.Ad, [[1.0, 1.0], [0.0, 1.0]], atol=1e-14)
        np.testing.assert_allclose(d.Bd, [[0.5], [1.0]], atol=1e-14)

    def test_rejects_bad_step(self, g1):
        with pytest.raises(DomainError):
            discretize_zoh(tf_to_ss(g1), 0.0)


class TestStepResponse:

    def test_first_order_analytic(self, g1, table_grid):
        trace = step_response(g1, table_grid)
        expected = 1.0 - np.exp(-table_grid.times)
        assert np.max(np.abs(trace.y - expected)) < 1e-9
        assert trace.y[100] == pytest.approx(0.632121, abs=1e-6)
        assert not trace.overflowed

    def test_first_order_never_exceeds_dc_gain(self, g1, table_grid):
        assert np.all(step_response(g1, table_grid).y <= 1.0)

    def test_pure_gain(self, table_grid):
        trace = step_response(TransferFunction.from_coeffs([1], [1]), table_grid)
        np.testing.assert_array_equal(trace.y, np.ones(table_grid.n_points))

    def test_second_order_target_analytic(self, table_grid):
        zeta = -math.log(0.01) / math.sqrt(math.pi ** 2 + math.log(0.01) ** 2)
        wn = 4.0 / (zeta * 2.5)
        tf = TransferFunction.from_coeffs([wn * wn], [1.0, 2 * zeta * wn, wn * wn])
        t = table_grid.times
        wd = wn * math.sqrt(1 - zeta ** 2)
        expected = 1.0 - np.exp(-zeta * wn * t) * (np.cos(wd * t) + zeta / math.sqrt(1 - zeta ** 2) * np.sin(wd * t))
        assert np.max(np.abs(step_response(tf, table_grid).y - expected)) < 1e-9

    def test_biproper_starts_at_feedthrough(self):
        trace = step_response(TransferFunction.from_coeffs([1, 2], [1, 1]), TimeGrid(0.01, 101))
        assert trace.y[0] == pytest.approx(1.0)
        # (s+2)/(s+1) = 1 + 1/(s+1)
        assert trace.y[-1] == pytest.approx(2.0 - math.exp(-1.0), abs=1e-12)

    def test_halving_dt_agrees_on_shared_points(self, g3):
        loop = closed_loop(g3, PidGains(2.1751, 0.8474, 1.3958))
        coarse = step_response(loop, TimeGrid.spanning(12.5, 0.01))
        fine = step_response(loop, TimeGrid.spanning(12.5, 0.005))
        assert np.max(np.abs(fine.y[::2] - coarse.y)) < 1e-9

    @pytest.mark.parametrize('den,gains', TABLE1_ROWS)
    def test_matches_adaptive_integrator(self, den, gains, table_grid):
        loop = closed_loop(TransferFunction.from_coeffs([1], den), gains)
        ours = step_response(loop, table_grid).y
        assert np.max(np.abs(ours - _ode_step(loop, table_grid))) < 1e-7

    def test_overflow_flag_and_clamp(self, caplog):
        with caplog.at_level(logging.WARNING, logger='pidmatch.simulate'):
            trace = step_response(TransferFunction.from_coeffs([1], [1, -5]), TimeGrid.spanning(10.0, 0.01))
        assert [r.levelno for r in caplog.records] == [logging.WARNING]
        assert f'sample {trace.overflow_index}' in caplog.records[0].getMessage()
        assert trace.overflowed
        k = trace.overflow_index
        assert abs(trace.y[k - 1]) <= OVERFLOW_LIMIT
        assert np.all(np.abs(trace.y[k:]) <= OVERFLOW_LIMIT)
        assert np.all(np.isfinite(trace.y))
        # 1/(s-5) reaches 1e6 at t = ln(5e6 + 1) / 5
        assert k * 0.01 == pytest.approx(math.log(5e6 + 1) / 5.0, abs=0.011)

    def test_agrees_with_control(self, g2, table_grid):
        control = pytest.importorskip('control')
        loop = closed_loop(g2, PidGains(2.0456, 1.4540, 0.6997))
        _, y = control.step_response(control.tf(list(loop.num.coeffs), list(loop.den.coeffs)),
                                     T=table_grid.times)
        np.testing.assert_allclose(step_response(loop, table_grid).y, np.ravel(y), atol=1e-7)


class TestResample:

    def test_linear_ramp(self):
        trace = resample([0.0, 10.0], [0.0, 10.0], TimeGrid(1.0, 11))
        np.testing.assert_allclose(trace.y, np.arange(11.0))

    def test_on_grid_is_identity(self, table_grid):
        y = np.sin(table_grid.times)
        trace = resample(table_grid.times, y, table_grid)
        np.testing.assert_array_equal(trace.y, y)

    def test_short_trajectory(self, table_grid):
        with pytest.raises(CoverageError):
            resample([0.0, 5.0], [0.0, 1.0], table_grid)

    def test_late_start(self, table_grid):
        with pytest.raises(CoverageError):
            resample([0.5, 20.0], [0.0, 1.0], table_grid)

    def test_start_within_first_step_holds_first_value(self):
        trace = resample([0.01, 1.0], [0.2, 1.0], TimeGrid(0.01, 101))
        assert trace.y[0] == pytest.approx(0.2)

    def test_non_monotone(self, table_grid):
        with pytest.raises(DomainError):
            resample([0.0, 10.0, 5.0, 20.0], [0, 1, 1, 1], table_grid)
