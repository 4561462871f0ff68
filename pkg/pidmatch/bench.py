"""
bench.py
========

Reproduction harness for the published comparison figures.

Fixtures live in ``config/*.yaml`` as data: plants, gain rows, expected
settling time / overshoot / IAE and the tolerance profile each row is judged
with.  Published gain rows are re-simulated and checked against tight
two-sided bands; own-tuning rows run the full tuner from the zero start and
are checked against one-sided bounds.  Failures are outcomes, never
exceptions.

Example usage::

    from pidmatch.bench import render_table, run_table1

    outcomes = run_table1()
    print(render_table(outcomes))
    assert all(o.overall for o in outcomes)
"""

from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass, field
from multiprocessing import Pool
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Union

import pandas as pd
import yaml

from .errors import DomainError, PidMatchError
from .lti_core import PidGains, TransferFunction
from .metrics import MetricsComparison, MetricsReport, closed_loop_response, compare_metrics, evaluate_gains
from .optimizer import OptimOptions
from .simulate import TimeGrid
from .target_design import SecondOrderSpec, make_target
from .tuner import tune

logger = logging.getLogger(__name__)

CONFIG_DIR = Path(__file__).resolve().parent.parent / 'config'
TABLE1_FILE = 'table1.yaml'
ASTROM_FILE = 'astrom.yaml'
FIELDS = ('ts', 'po', 'iae')
_BOUND_KINDS = ('rel', 'abs', 'max_ratio', 'max_excess')


@dataclass(frozen=True)
class Expectation:
    """Expected value with exactly one positive tolerance.

    ``rel`` and ``abs`` are two-sided bands (relative and absolute);
    ``max_ratio`` and ``max_excess`` are one-sided upper bounds
    (``measured <= value * max_ratio`` and ``measured <= value + max_excess``).
    """

    value: float
    rel: Optional[float] = None
    abs: Optional[float] = None
    max_ratio: Optional[float] = None
    max_excess: Optional[float] = None

    def __post_init__(self) -> None:
        given = {k: getattr(self, k) for k in _BOUND_KINDS if getattr(self, k) is not None}
        if len(given) != 1:
            raise DomainError(f'Expectation needs exactly one of {", ".join(_BOUND_KINDS)}, got {given}')
        kind, tol = next(iter(given.items()))
        if not tol > 0.0:
            raise DomainError(f'Tolerance {kind} must be strictly positive, got {tol}')

    def check(self, measured: float) -> bool:
        if not math.isfinite(measured):
            return False
        if self.rel is not None:
            return abs(measured - self.value) <= self.rel * abs(self.value)
        if self.abs is not None:
            return abs(measured - self.value) <= self.abs
        if self.max_ratio is not None:
            return measured <= self.value * self.max_ratio
        return measured <= self.value + self.max_excess

    def describe(self) -> str:
        if self.rel is not None:
            return f'{self.value:.4f} ±{self.rel:.0%}'
        if self.abs is not None:
            return f'{self.value:.4f} ±{self.abs:g}'
        if self.max_ratio is not None:
            return f'<= {self.value * self.max_ratio:.4f}'
        return f'<= {self.value + self.max_excess:.4f}'


@dataclass(frozen=True)
class KnownDeviation:
    """A published figure the ideal loop does not reproduce.

    ``regression`` is the frozen measurement of the ideal unity-feedback loop
    the field is checked against instead; ``provenance`` says where both
    numbers come from.
    """

    published: float
    regression: Expectation
    provenance: str = ''


@dataclass(frozen=True, eq=False)
class BenchCase:
    """One fixture row: fixed ``gains`` to evaluate, or a ``tune`` target."""

    name: str
    plant: TransferFunction
    horizon: float
    expected: Mapping[str, Expectation]
    gains: Optional[PidGains] = None
    tune: Optional[SecondOrderSpec] = None
    dt: float = 0.01
    plant_label: str = ''
    method: str = ''
    require_stable: bool = False
    ie_identity: Optional[float] = None
    deviations: Mapping[str, KnownDeviation] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if (self.gains is None) == (self.tune is None):
            raise DomainError(f'Case {self.name}: give either gains or a tune target, not both')
        if not self.horizon > 0.0:
            raise DomainError(f'Case {self.name}: horizon must be positive, got {self.horizon}')
        unknown = set(self.expected) - set(FIELDS)
        if unknown:
            raise DomainError(f'Case {self.name}: unknown expected fields {sorted(unknown)}')
        stray = set(self.deviations) - set(self.expected)
        if stray:
            raise DomainError(f'Case {self.name}: deviations for unchecked fields {sorted(stray)}')

    @property
    def is_tuning(self) -> bool:
        return self.tune is not None

    @property
    def grid(self) -> TimeGrid:
        return TimeGrid.spanning(self.horizon, self.dt)


@dataclass(frozen=True, eq=False)
class BenchOutcome:
    """Measured figures and per-check verdicts of one case.

    ``passed`` holds one entry per checked field (``ts``, ``po``, ``iae`` and,
    when requested, ``stable`` and ``ie_identity``); ``overall`` is their
    conjunction.  Fields listed in ``case.deviations`` are judged against
    their regression figure and reported as deviations.
    """

    case: BenchCase
    measured: Dict[str, float]
    passed: Dict[str, bool]
    stable: bool
    gains: Optional[PidGains] = None
    metrics: Optional[MetricsReport] = None
    error: Optional[str] = None

    @property
    def name(self) -> str:
        return self.case.name

    @property
    def overall(self) -> bool:
        return self.error is None and bool(self.passed) and all(self.passed.values())

    @property
    def deviated(self) -> List[str]:
        return [k for k in self.case.deviations if self.passed.get(k)]

    @property
    def verdict(self) -> str:
        if self.error:
            return 'ERROR'
        if not self.overall:
            return 'FAIL: ' + ','.join(k for k, ok in self.passed.items() if not ok)
        if self.deviated:
            return 'deviation: ' + ','.join(self.deviated)
        return 'pass'


def _expectations(expected: Mapping[str, float], profile: Mapping[str, Any]) -> Dict[str, Expectation]:
    out: Dict[str, Expectation] = {}
    for key in FIELDS:
        bound = profile.get(key)
        if bound is None or key not in expected:
            continue
        out[key] = Expectation(value=float(expected[key]), **{k: float(v) for k, v in bound.items()})
    return out


def _deviations(rows: Mapping[str, Any], expected: Mapping[str, float]) -> Dict[str, KnownDeviation]:
    out: Dict[str, KnownDeviation] = {}
    for key, row in rows.items():
        if key not in expected:
            raise DomainError(f'Deviation for {key} has no published value to deviate from')
        bounds = {k: float(v) for k, v in row.items() if k in _BOUND_KINDS}
        out[key] = KnownDeviation(
            published=float(expected[key]),
            regression=Expectation(value=float(row['measured']), **bounds),
            provenance=str(row.get('provenance', '')).strip(),
        )
    return out


def _horizon(grid_cfg: Mapping[str, Any], expected: Mapping[str, float]) -> float:
    if 'horizon' in grid_cfg:
        return float(grid_cfg['horizon'])
    rule = grid_cfg['horizon_rule']
    raw = float(rule['mult']) * float(expected['ts'])
    step = float(rule.get('round_to', 0.0))
    if step > 0.0:
        raw = math.ceil(raw / step) * step
    return max(float(rule.get('min', 0.0)), raw)


def load_cases(path: Union[str, Path]) -> List[BenchCase]:
    """Read a YAML fixture file into bench cases, in file order."""
    with open(path, encoding='utf-8') as fh:
        cfg = yaml.safe_load(fh)
    grid_cfg = cfg['grid']
    dt = float(grid_cfg.get('dt', 0.01))
    plants = {
        label: TransferFunction.from_coeffs(p['num'], p['den'])
        for label, p in cfg['plants'].items()
    }
    profiles = cfg['profiles']
    cases: List[BenchCase] = []
    for row in cfg['cases']:
        profile = {**profiles[row['profile']], **row.get('tolerance', {})}
        expected = row['expected']
        gains = PidGains(**row['gains']) if 'gains' in row else None
        target = SecondOrderSpec(**row['tune']) if 'tune' in row else None
        cases.append(BenchCase(
            name=row['name'],
            plant=plants[row['plant']],
            horizon=_horizon(grid_cfg, expected),
            expected=_expectations(expected, profile),
            gains=gains,
            tune=target,
            dt=dt,
            plant_label=row['plant'],
            method=row.get('method', ''),
            require_stable=bool(profile.get('require_stable', False)),
            ie_identity=profile.get('ie_identity'),
            deviations=_deviations(row.get('deviations', {}), expected),
        ))
    logger.debug('Loaded %d bench cases from %s', len(cases), path)
    return cases


def run_case(case: BenchCase) -> BenchOutcome:
    """Evaluate (or tune, then evaluate) one case; errors become failed outcomes."""
    grid = case.grid
    try:
        if case.is_tuning:
            report = tune(case.plant, case.tune, OptimOptions(), grid=grid)
            gains, metrics = report.gains, report.metrics
        else:
            gains = case.gains
            metrics = evaluate_gains(case.plant, gains, grid)
    except PidMatchError as exc:
        logger.warning('Bench case %s failed: %s', case.name, exc)
        return BenchOutcome(case=case, measured={}, passed={k: False for k in case.expected},
                            stable=False, error=str(exc))

    measured = {'ts': metrics.settling_time, 'po': metrics.overshoot_pct, 'iae': metrics.iae_unit_step}
    passed = {}
    for key, exp in case.expected.items():
        dev = case.deviations.get(key)
        passed[key] = (dev.regression if dev is not None else exp).check(measured[key])
    if case.require_stable:
        passed['stable'] = metrics.stable
    if case.ie_identity is not None:
        if gains.ki > 0.0:
            ie = 1.0 / gains.ki
            measured['ie'] = ie
            passed['ie_identity'] = abs(metrics.iae_unit_step - ie) <= case.ie_identity * ie
        else:
            passed['ie_identity'] = False
    outcome = BenchOutcome(case=case, measured=measured, passed=passed,
                           stable=metrics.stable, gains=gains, metrics=metrics)
    logger.info('%s: %s', case.name, outcome.verdict)
    return outcome


def run_cases(cases: Sequence[BenchCase], workers: int = 1) -> List[BenchOutcome]:
    """Run ``cases``; ``workers > 1`` uses a process pool.  Order is fixture order."""
    if workers > 1 and len(cases) > 1:
        with Pool(processes=min(workers, len(cases))) as pool:
            return pool.map(run_case, cases)
    return [run_case(c) for c in cases]


def _config_path(config_dir: Optional[Union[str, Path]], name: str) -> Path:
    return Path(config_dir if config_dir is not None else CONFIG_DIR) / name


def run_table1(config_dir: Optional[Union[str, Path]] = None, workers: int = 1) -> List[BenchOutcome]:
    """Six published-gain rows (two methods, three plants) and three own tuning runs."""
    return run_cases(load_cases(_config_path(config_dir, TABLE1_FILE)), workers)


def run_astrom_g3(config_dir: Optional[Union[str, Path]] = None, workers: int = 1) -> List[BenchOutcome]:
    """Five PI rows on ``1/(s+1)^3``, each on its own horizon."""
    return run_cases(load_cases(_config_path(config_dir, ASTROM_FILE)), workers)


def _fmt(value: Optional[float]) -> str:
    return '-' if value is None or not math.isfinite(value) else f'{value:.4f}'


def outcomes_frame(outcomes: Sequence[BenchOutcome]) -> pd.DataFrame:
    rows = []
    for o in outcomes:
        g = o.gains
        rows.append({
            'case': o.name,
            'kp': _fmt(g.kp if g else None),
            'ki': _fmt(g.ki if g else None),
            'kd': _fmt(g.kd if g else None),
            'Ts': _fmt(o.measured.get('ts')),
            'PO (%)': _fmt(o.measured.get('po')),
            'IAE': _fmt(o.measured.get('iae')),
            'expected': ', '.join(f'{k} {_expected_text(o.case, k)}' for k in o.case.expected),
            'result': o.verdict,
        })
    return pd.DataFrame(rows)


def _expected_text(case: BenchCase, key: str) -> str:
    dev = case.deviations.get(key)
    if dev is None:
        return case.expected[key].describe()
    return f'{dev.regression.describe()} (published {dev.published:.4f})'


def render_deviations(outcomes: Sequence[BenchOutcome]) -> str:
    """One line per known deviation, with its provenance; empty when there are none."""
    lines = []
    for o in outcomes:
        for key in o.case.deviations:
            dev = o.case.deviations[key]
            value = _fmt(o.measured.get(key))
            state = 'reproduced' if o.passed.get(key) else 'REGRESSED'
            lines.append(f'{o.name} {key}: published {dev.published:.4f}, measured {value} ({state})'
                         + (f'; {dev.provenance}' if dev.provenance else ''))
    return '\n'.join(lines)


def render_table(outcomes: Sequence[BenchOutcome]) -> str:
    """Human-readable results table, four decimals."""
    if not outcomes:
        return '(no cases)'
    return outcomes_frame(outcomes).to_string(index=False)


def summarize_improvements(outcomes: Sequence[BenchOutcome]) -> Dict[str, MetricsComparison]:
    """Per plant: improvement of the own-method row over the pidtune row.

    Only evaluated (fixed-gain) rows are compared; plants lacking either row
    are skipped.
    """
    by_plant: Dict[str, Dict[str, MetricsReport]] = {}
    for o in outcomes:
        if o.metrics is None or o.case.is_tuning:
            continue
        by_plant.setdefault(o.case.plant_label, {})[o.case.method] = o.metrics
    return {
        label: compare_metrics(rows['pidmatch'], rows['pidtune'])
        for label, rows in by_plant.items()
        if 'pidmatch' in rows and 'pidtune' in rows
    }


def render_improvements(summary: Mapping[str, MetricsComparison]) -> str:
    lines = []
    for label, c in summary.items():
        lines.append(f'{label}: overshoot {_fmt(c.overshoot_pct)}%  '
                     f'settling {_fmt(c.settling_time)}%  IAE {_fmt(c.iae)}%  (positive = lower than pidtune)')
    return '\n'.join(lines)


def outcomes_to_dict(outcomes: Sequence[BenchOutcome]) -> Dict[str, Any]:
    """JSON-ready summary of a bench run."""
    def _clean(d: Mapping[str, float]) -> Dict[str, Optional[float]]:
        return {k: (v if math.isfinite(v) else None) for k, v in d.items()}

    return {
        'passed': all(o.overall for o in outcomes),
        'cases': [
            {
                'name': o.name,
                'gains': None if o.gains is None else {'kp': o.gains.kp, 'ki': o.gains.ki, 'kd': o.gains.kd},
                'measured': _clean(o.measured),
                'expected': {k: e.value for k, e in o.case.expected.items()},
                'passed': dict(o.passed),
                'deviations': {
                    k: {'published': d.published, 'regression': d.regression.value, 'provenance': d.provenance}
                    for k, d in o.case.deviations.items()
                },
                'stable': o.stable,
                'overall': o.overall,
                'error': o.error,
            }
            for o in outcomes
        ],
    }


def write_comparison_plots(
    outcomes: Sequence[BenchOutcome],
    out_dir: Union[str, Path],
    target: SecondOrderSpec = SecondOrderSpec(ts=2.5, po=1.0),
) -> List[Path]:
    """One SVG per plant: the target and every evaluated gain row on that plant."""
    from .export import render_series_svg

    os.makedirs(out_dir, exist_ok=True)
    groups: Dict[str, List[BenchOutcome]] = {}
    for o in outcomes:
        if o.gains is not None:
            groups.setdefault(o.case.plant_label, []).append(o)
    written: List[Path] = []
    for label, rows in groups.items():
        grid = min((o.case.grid for o in rows), key=lambda g: g.n_points)
        series = {'target': make_target(target, grid).trace.y}
        for o in rows:
            series[o.name] = closed_loop_response(o.case.plant, o.gains, o.case.grid).y[:grid.n_points]
        path = Path(out_dir) / f'{label}.svg'
        render_series_svg(str(path), grid.times, series, title=f'{label}: unit-step responses')
        written.append(path)
    return written
