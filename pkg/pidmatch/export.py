"""
export.py
=========

Serialization of tuning and evaluation results.

* JSON reports with a fixed key set and key order.  Non-finite numbers are
  written as ``null`` so every report is strict JSON, and parsing a report
  and dumping it again reproduces it byte for byte.
* CSV traces with the header ``t,y_target,y_pid``, one row per grid point.
* SVG step-response plots rendered with matplotlib from CSV data only.
"""

from __future__ import annotations

import json
import math
from typing import Any, Dict, Mapping, Optional, Sequence

import matplotlib

matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from .errors import TrajectoryFileError  # noqa: E402
from .lti_core import PidGains, StabilityVerdict, TransferFunction  # noqa: E402
from .metrics import MetricsReport  # noqa: E402
from .optimizer import OptimResult  # noqa: E402
from .simulate import TimeGrid  # noqa: E402
from .target_design import SecondOrderSpec, TargetSpec  # noqa: E402

TRACE_COLUMNS = ['t', 'y_target', 'y_pid']


def _num(value: Optional[float]) -> Optional[float]:
    if value is None:
        return None
    value = float(value)
    return value if math.isfinite(value) else None


def build_report(
    plant: TransferFunction,
    spec: Optional[TargetSpec],
    grid: TimeGrid,
    gains: PidGains,
    metrics: MetricsReport,
    stability: StabilityVerdict,
    iae_vs_target: Optional[float] = None,
    optimizer: Optional[OptimResult] = None,
) -> Dict[str, Any]:
    """Assemble the JSON report structure (plain dicts, lists and floats)."""
    if spec is None:
        spec_out: Optional[Dict[str, Any]] = None
    elif isinstance(spec, SecondOrderSpec):
        spec_out = {'ts': spec.ts, 'po': spec.po}
    else:
        spec_out = {'trajectory_file': spec.source}
    return {
        'plant': {'num': list(plant.num.coeffs), 'den': list(plant.den.coeffs)},
        'spec': spec_out,
        'grid': {'dt': grid.dt, 'n_points': grid.n_points},
        'gains': {'kp': gains.kp, 'ki': gains.ki, 'kd': gains.kd},
        'metrics': {
            'settling_time': _num(metrics.settling_time),
            'overshoot_pct': _num(metrics.overshoot_pct),
            'iae_unit_step': _num(metrics.iae_unit_step),
            'iae_vs_target': _num(iae_vs_target),
            'final_value': _num(metrics.final_value),
        },
        'stability': {
            'stable': stability.stable,
            'marginal': stability.marginal,
            'poles': [{'re': p.real, 'im': p.imag} for p in stability.poles],
        },
        'optimizer': None if optimizer is None else {
            'evals': optimizer.evals,
            'objective': _num(optimizer.objective),
            'converged': optimizer.converged,
        },
    }


def dumps_report(report: Mapping[str, Any]) -> str:
    return json.dumps(report, indent=2, allow_nan=False) + '\n'


def write_report(path: str, report: Mapping[str, Any]) -> None:
    with open(path, 'w', encoding='utf-8') as fh:
        fh.write(dumps_report(report))


def write_trace_csv(path: str, grid: TimeGrid, y_target: Sequence[float], y_pid: Sequence[float]) -> None:
    df = pd.DataFrame({
        't': grid.times,
        'y_target': np.asarray(y_target, dtype=float),
        'y_pid': np.asarray(y_pid, dtype=float),
    }, columns=TRACE_COLUMNS)
    df.to_csv(path, index=False)


def read_trace_csv(path: str) -> pd.DataFrame:
    try:
        df = pd.read_csv(path)
    except (OSError, ValueError) as exc:
        raise TrajectoryFileError(f'Cannot read trace file {path}: {exc}') from exc
    if list(df.columns) != TRACE_COLUMNS:
        raise TrajectoryFileError(
            f'{path}: expected header {",".join(TRACE_COLUMNS)}, got {",".join(map(str, df.columns))}'
        )
    return df


def render_series_svg(
    path: str,
    t: Sequence[float],
    series: Mapping[str, Sequence[float]],
    title: Optional[str] = None,
    band: Optional[float] = 0.02,
) -> None:
    """Plot every entry of ``series`` against ``t`` into an SVG file."""
    with plt.rc_context({'svg.hashsalt': 'pidmatch'}):
        fig, ax = plt.subplots(figsize=(8, 4.5))
        try:
            for label, values in series.items():
                ax.plot(t, values, linewidth=1.8, label=label)
            ax.axhline(1.0, color='k', linestyle=':', linewidth=0.8)
            if band:
                ax.axhspan(1.0 - band, 1.0 + band, color='0.85', alpha=0.5,
                           label=f'±{band:.0%} band')
            ax.set_xlabel('t [s]')
            ax.set_ylabel('y')
            ax.grid(True, alpha=0.3)
            ax.legend(loc='lower right')
            if title:
                ax.set_title(title)
            fig.savefig(path, format='svg', bbox_inches='tight', metadata={'Date': None})
        finally:
            plt.close(fig)


def render_trace_svg(csv_path: str, svg_path: str, title: Optional[str] = None) -> None:
    """Plot a ``t,y_target,y_pid`` CSV (and nothing else) into an SVG file."""
    df = read_trace_csv(csv_path)
    render_series_svg(
        svg_path,
        df['t'].to_numpy(),
        {'target': df['y_target'].to_numpy(), 'PID loop': df['y_pid'].to_numpy()},
        title=title,
    )
