import numpy as np
import pytest

from pidmatch.errors import ImproperClosedLoop
from pidmatch.lti_core import PidGains, TransferFunction
from pidmatch.metrics import evaluate_gains
from pidmatch.optimizer import OptimOptions
from pidmatch.simulate import TimeGrid
from pidmatch.target_design import SecondOrderSpec, TrajectorySpec, default_grid, make_target
from pidmatch.tuner import EXIT_NOT_CONVERGED, EXIT_OK, EXIT_UNSTABLE, tune


@pytest.fixture(scope='module')
def g2_report():
    return tune(TransferFunction.from_coeffs([1], [1, 2, 1]), SecondOrderSpec(ts=2.5, po=1.0))


class TestTune:

    def test_second_order_plant(self, g2_report):
        assert g2_report.successful
        assert g2_report.exit_code() == EXIT_OK
        assert g2_report.metrics.iae_unit_step <= 1.05 * 0.8803
        assert g2_report.metrics.overshoot_pct <= 2.1342 + 1.0
        assert g2_report.optimizer.evals <= 3000
        assert g2_report.grid == TimeGrid.spanning(12.5, 0.01)

    def test_metrics_are_recomputable(self, g2_report):
        again = evaluate_gains(g2_report.plant, g2_report.gains, g2_report.grid)
        assert again == g2_report.metrics

    def test_target_is_the_designed_one(self, g2_report):
        expected = make_target(g2_report.spec, g2_report.grid).trace.y
        np.testing.assert_array_equal(g2_report.target_model.trace.y, expected)

    def test_iae_vs_target_is_optimizer_objective(self, g2_report):
        assert g2_report.iae_vs_target == pytest.approx(g2_report.optimizer.objective, rel=1e-12)

    def test_first_order_converges_to_pi(self, g1, reference_spec):
        report = tune(g1, reference_spec)
        assert report.successful
        assert report.gains.kd == pytest.approx(0.0, abs=1e-4)
        assert report.metrics.iae_unit_step <= 1.05 * 0.8696

    def test_trajectory_path_gives_same_gains(self, g1, reference_spec):
        grid = default_grid(reference_spec)
        target = make_target(reference_spec, grid)
        traj = TrajectorySpec(tuple(grid.times), tuple(target.trace.y))
        opts = OptimOptions(pi_only=True, max_evals=400)
        a = tune(g1, reference_spec, opts)
        b = tune(g1, traj, opts)
        assert a.gains == b.gains
        assert a.optimizer.objective == pytest.approx(b.optimizer.objective, abs=1e-9)

    def test_unstable_result_is_reported_not_raised(self, reference_spec):
        plant = TransferFunction.from_coeffs([1], [1, -1])
        report = tune(plant, reference_spec, OptimOptions(upper=(0.1, 0.1, 0.0)))
        assert not report.successful
        assert not report.stability.stable
        assert report.exit_code() in (EXIT_UNSTABLE, EXIT_NOT_CONVERGED)
        assert report.gains.kp <= 0.1 and report.gains.ki <= 0.1 and report.gains.kd == 0.0

    def test_biproper_plant_needs_pi_only(self, reference_spec):
        plant = TransferFunction.from_coeffs([1, 2], [1, 1])
        with pytest.raises(ImproperClosedLoop):
            tune(plant, reference_spec)
        report = tune(plant, reference_spec, OptimOptions(pi_only=True, max_evals=300))
        assert report.gains.kd == 0.0

    def test_reference_gains_comparison(self, g1, reference_spec):
        report = tune(g1, reference_spec, OptimOptions(pi_only=True, max_evals=400),
                      reference_gains=PidGains(1.4316, 2.5948))
        assert report.reference_metrics is not None
        assert report.comparison is not None
        # the own tuning targets 1 % overshoot, the reference rule overshoots ~6 %
        assert report.comparison.overshoot_pct > 0.0

    def test_explicit_grid(self, g3, reference_spec):
        grid = TimeGrid.spanning(15.0, 0.02)
        report = tune(g3, reference_spec, OptimOptions(max_evals=200), grid=grid)
        assert report.grid == grid
        assert report.target_model.trace.grid == grid
