import json
import math

import numpy as np
import pytest

from pidmatch.errors import TrajectoryFileError
from pidmatch.export import (build_report, dumps_report, read_trace_csv, render_series_svg, render_trace_svg,
                             write_report, write_trace_csv)
from pidmatch.lti_core import PidGains, closed_loop, is_stable
from pidmatch.metrics import MetricsReport, closed_loop_response, evaluate_gains
from pidmatch.optimizer import OptimResult
from pidmatch.target_design import TrajectorySpec, make_target

REPORT_KEYS = ['plant', 'spec', 'grid', 'gains', 'metrics', 'stability', 'optimizer']


@pytest.fixture
def g3_report(g3, reference_spec, table_grid):
    gains = PidGains(2.8653, 1.1718, 2.6221)
    result = OptimResult(gains=gains, objective=0.0123, evals=412, converged=True)
    return build_report(g3, reference_spec, table_grid, gains, evaluate_gains(g3, gains, table_grid),
                        is_stable(closed_loop(g3, gains)), iae_vs_target=0.0123, optimizer=result)


class TestReport:

    def test_key_set(self, g3_report):
        assert list(g3_report) == REPORT_KEYS
        assert list(g3_report['metrics']) == [
            'settling_time', 'overshoot_pct', 'iae_unit_step', 'iae_vs_target', 'final_value']
        assert g3_report['spec'] == {'ts': 2.5, 'po': 1.0}
        assert g3_report['grid'] == {'dt': 0.01, 'n_points': 1251}
        assert g3_report['plant'] == {'num': [1.0], 'den': [1.0, 3.0, 3.0, 1.0]}
        assert len(g3_report['stability']['poles']) == 4
        assert set(g3_report['stability']['poles'][0]) == {'re', 'im'}
        assert g3_report['optimizer'] == {'evals': 412, 'objective': 0.0123, 'converged': True}

    def test_round_trip_is_byte_identical(self, g3_report, tmp_path):
        path = tmp_path / 'r.json'
        write_report(str(path), g3_report)
        text = path.read_text()
        assert text.endswith('}\n')
        assert dumps_report(json.loads(text)) == text

    def test_non_finite_written_as_null(self, g3, table_grid):
        gains = PidGains(1.0, 0.0, 0.0)
        metrics = MetricsReport(settling_time=math.inf, overshoot_pct=0.0, iae_unit_step=math.nan,
                                final_value=0.25, stable=True, poles=(-1.0 + 0j,))
        report = build_report(g3, TrajectorySpec((0.0, 20.0), (0.0, 1.0), source='step.csv'), table_grid,
                              gains, metrics, is_stable(closed_loop(g3, gains)))
        assert report['metrics']['settling_time'] is None
        assert report['metrics']['iae_unit_step'] is None
        assert report['spec'] == {'trajectory_file': 'step.csv'}
        assert report['optimizer'] is None
        json.loads(dumps_report(report))


class TestTraceCsv:

    def test_rows_and_header(self, g2, reference_spec, table_grid, tmp_path):
        path = tmp_path / 'trace.csv'
        target = make_target(reference_spec, table_grid).trace.y
        y = closed_loop_response(g2, PidGains(2.2108, 1.1993, 0.5475), table_grid).y
        write_trace_csv(str(path), table_grid, target, y)
        lines = path.read_text().splitlines()
        assert lines[0] == 't,y_target,y_pid'
        assert len(lines) == table_grid.n_points + 1
        df = read_trace_csv(str(path))
        np.testing.assert_allclose(df['y_pid'].to_numpy(), y, rtol=1e-12, atol=1e-15)
        np.testing.assert_allclose(df['t'].to_numpy(), table_grid.times)

    def test_wrong_header(self, tmp_path):
        path = tmp_path / 'other.csv'
        path.write_text('a,b\n1,2\n')
        with pytest.raises(TrajectoryFileError):
            read_trace_csv(str(path))


def test_svg_is_rendered_from_csv_only(g1, table_grid, tmp_path):
    csv_path = tmp_path / 'trace.csv'
    y = closed_loop_response(g1, PidGains(0.8218, 1.3517), table_grid).y
    write_trace_csv(str(csv_path), table_grid, np.ones(table_grid.n_points), y)
    before = csv_path.read_bytes()
    render_trace_svg(str(csv_path), str(tmp_path / 'a.svg'))
    render_trace_svg(str(csv_path), str(tmp_path / 'b.svg'))
    assert csv_path.read_bytes() == before
    assert (tmp_path / 'a.svg').read_bytes() == (tmp_path / 'b.svg').read_bytes()
    assert b'<svg' in (tmp_path / 'a.svg').read_bytes()


def test_svg_rendering_keeps_global_rc_params(tmp_path):
    matplotlib = pytest.importorskip('matplotlib')
    before = matplotlib.rcParams['svg.hashsalt']
    render_series_svg(str(tmp_path / 's.svg'), [0.0, 1.0], {'y': [0.0, 1.0]}, band=None)
    assert matplotlib.rcParams['svg.hashsalt'] == before
    assert b'<svg' in (tmp_path / 's.svg').read_bytes()
