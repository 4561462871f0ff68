"""
Command-line frontend.

Commands::

    tune  --num 1 --den 1,2,1 --ts 2.5 --po 1 [--out r.json --csv r.csv --svg r.svg]
    eval  --num 1 --den 1,3,3,1 --kp 2.1751 --ki 0.8474 --kd 1.3958
    bench table1|astrom [--json out.json] [--plots DIR] [--workers N]
    plot  --csv r.csv --svg r.svg

Plants are given as descending comma-separated coefficients.  Numbers are
printed with four decimals.  Exit codes: 0 success, 1 bench case failed,
2 invalid input, 3 resulting loop unstable, 4 optimizer did not converge
and the loop is unstable.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import tempfile
from typing import List, Optional, Sequence, Tuple

from .adapters import adapter_for
from .bench import (outcomes_to_dict, render_deviations, render_improvements, render_table, run_astrom_g3,
                    run_table1, summarize_improvements, write_comparison_plots)
from .errors import DomainError, PidMatchError
from .export import build_report, dumps_report, render_trace_svg, write_report, write_trace_csv
from .lti_core import PidGains, TransferFunction, closed_loop, is_stable
from .metrics import MetricsReport, closed_loop_response, evaluate_gains, iae
from .optimizer import METHODS, OptimOptions
from .simulate import DEFAULT_DT, DEFAULT_HORIZON_MULT, TimeGrid
from .target_design import SecondOrderSpec, TargetModel, TargetSpec, build_target, default_grid
from .tuner import EXIT_OK, EXIT_UNSTABLE, tune

logger = logging.getLogger(__name__)

EXIT_BENCH_FAILED = 1
EXIT_INVALID = 2
# eval horizon when neither a target nor --horizon is given
DEFAULT_EVAL_HORIZON = 12.5


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise _UsageError(message)


def coefficients(text: str) -> Tuple[float, ...]:
    values = tuple(float(v) for v in text.split(',') if v.strip() != '')
    if not values:
        raise ValueError(text)
    return values


def _build_parser() -> _Parser:
    verbosity = _Parser(add_help=False)
    verbosity.add_argument('-v', '--verbose', action='count', default=0,
                           help='-v for progress, -vv for debug output')

    plant = _Parser(add_help=False)
    plant.add_argument('--num', type=coefficients, required=True, help='Plant numerator, e.g. 1')
    plant.add_argument('--den', type=coefficients, required=True, help='Plant denominator, e.g. 1,3,3,1')
    plant.add_argument('--ts', type=float, default=None, help='Target settling time [s] (2%% band)')
    plant.add_argument('--po', type=float, default=None, help='Target percent overshoot, in (0, 100)')
    plant.add_argument('--trajectory', default=None,
                       help='Target trajectory file (CSV or Excel, columns t,y) instead of --ts/--po')
    plant.add_argument('--dt', type=float, default=DEFAULT_DT, help='Grid step [s] (default 0.01)')
    plant.add_argument('--horizon-mult', type=float, default=DEFAULT_HORIZON_MULT,
                       help='Horizon as a multiple of ts (default 5)')
    plant.add_argument('--horizon', type=float, default=None, help='Explicit horizon [s]')

    outputs = _Parser(add_help=False)
    outputs.add_argument('--out', default=None, help='JSON report path')
    outputs.add_argument('--csv', default=None, help='CSV trace path (t,y_target,y_pid)')
    outputs.add_argument('--svg', default=None, help='SVG step-response plot path')

    parser = _Parser(prog='pidmatch', description='PID tuning by IAE matching of a target step response.')
    sub = parser.add_subparsers(dest='command', required=True)

    p_tune = sub.add_parser('tune', parents=[verbosity, plant, outputs], help='Tune PID gains')
    p_tune.add_argument('--pi-only', action='store_true', help='Fix kd = 0')
    p_tune.add_argument('--budget', type=int, default=3000, help='Objective evaluation budget (default 3000)')
    p_tune.add_argument('--kp-max', type=float, default=math.inf)
    p_tune.add_argument('--ki-max', type=float, default=math.inf)
    p_tune.add_argument('--kd-max', type=float, default=math.inf)
    p_tune.add_argument('--method', choices=METHODS, default='nelder-mead')
    p_tune.add_argument('--compare-kp', type=float, default=None, help='Reference gains to compare against')
    p_tune.add_argument('--compare-ki', type=float, default=None)
    p_tune.add_argument('--compare-kd', type=float, default=0.0)

    p_eval = sub.add_parser('eval', parents=[verbosity, plant, outputs], help='Evaluate given PID gains')
    p_eval.add_argument('--kp', type=float, required=True)
    p_eval.add_argument('--ki', type=float, required=True)
    p_eval.add_argument('--kd', type=float, default=0.0)

    p_bench = sub.add_parser('bench', parents=[verbosity], help='Reproduce the benchmark tables')
    p_bench.add_argument('table', choices=['table1', 'astrom'])
    p_bench.add_argument('--json', default=None, help='Machine-readable results path')
    p_bench.add_argument('--plots', default=None, help='Directory for step-response comparison SVGs')
    p_bench.add_argument('--workers', type=int, default=1, help='Parallel worker processes')
    p_bench.add_argument('--config-dir', default=None, help='Fixture directory (default: bundled config/)')

    p_plot = sub.add_parser('plot', parents=[verbosity], help='Render a CSV trace as SVG')
    p_plot.add_argument('--csv', required=True)
    p_plot.add_argument('--svg', required=True)
    p_plot.add_argument('--title', default=None)
    return parser


def _setup_logging(verbose: int) -> None:
    level = logging.WARNING if verbose <= 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, format='%(levelname)s %(name)s: %(message)s')


def _target_spec(args: argparse.Namespace, required: bool) -> Optional[TargetSpec]:
    if args.trajectory is not None:
        if args.ts is not None or args.po is not None:
            raise DomainError('Give either --trajectory or --ts/--po, not both')
        return adapter_for(args.trajectory).load_spec(args.trajectory)
    if args.ts is None and args.po is None:
        if required:
            raise DomainError('tune needs a target: --ts and --po, or --trajectory')
        return None
    if args.ts is None or args.po is None:
        raise DomainError('--ts and --po must be given together')
    return SecondOrderSpec(ts=args.ts, po=args.po)


def _grid(args: argparse.Namespace, spec: Optional[TargetSpec]) -> TimeGrid:
    if args.horizon is not None:
        return TimeGrid.spanning(args.horizon, args.dt)
    if spec is not None:
        return default_grid(spec, args.dt, args.horizon_mult)
    return TimeGrid.spanning(DEFAULT_EVAL_HORIZON, args.dt)


def _write_outputs(args: argparse.Namespace, report: dict, grid: TimeGrid, y_target, y_pid) -> None:
    if args.out:
        write_report(args.out, report)
        print(f'Report written to {args.out}')
    if args.csv:
        write_trace_csv(args.csv, grid, y_target, y_pid)
        print(f'Trace written to {args.csv}')
    if args.svg:
        if args.csv:
            render_trace_svg(args.csv, args.svg)
        else:
            with tempfile.TemporaryDirectory() as tmp:
                csv_path = os.path.join(tmp, 'trace.csv')
                write_trace_csv(csv_path, grid, y_target, y_pid)
                render_trace_svg(csv_path, args.svg)
        print(f'Plot written to {args.svg}')


def _print_target(model: TargetModel) -> None:
    s = model.summary()
    shape = 'trajectory' if s['zeta'] is None else f'zeta={s["zeta"]:.4f}  wn={s["wn"]:.4f}'
    ts = '-' if s['settling_time'] is None else f'{s["settling_time"]:.4f} s'
    po = '-' if s['overshoot_pct'] is None else f'{s["overshoot_pct"]:.4f} %'
    print(f'target     {shape}  achieved Ts={ts}  PO={po}')


def _print_metrics(gains: PidGains, metrics: MetricsReport, iae_vs_target: Optional[float]) -> None:
    print(f'gains      kp={gains.kp:.4f}  ki={gains.ki:.4f}  kd={gains.kd:.4f}')
    settle = f'{metrics.settling_time:.4f} s' + ('' if metrics.settled else ' (not settled)')
    print(f'Ts         {settle}')
    print(f'PO         {metrics.overshoot_pct:.4f} %')
    print(f'IAE        {metrics.iae_unit_step:.4f} (unit step)')
    if iae_vs_target is not None:
        print(f'IAE        {iae_vs_target:.4f} (vs target)')
    print(f'final      {metrics.final_value:.4f}')
    worst = max((p.real for p in metrics.poles), default=-math.inf)
    print(f'stable     {"yes" if metrics.stable else "NO"} (max Re(pole) = {worst:.4f})')


def _cmd_tune(args: argparse.Namespace) -> int:
    plant = TransferFunction.from_coeffs(args.num, args.den)
    spec = _target_spec(args, required=True)
    opts = OptimOptions(
        max_evals=args.budget,
        upper=(args.kp_max, args.ki_max, args.kd_max),
        pi_only=args.pi_only,
        method=args.method,
    )
    reference = None
    if args.compare_kp is not None or args.compare_ki is not None:
        if args.compare_kp is None or args.compare_ki is None:
            raise DomainError('--compare-kp and --compare-ki must be given together')
        reference = PidGains(args.compare_kp, args.compare_ki, args.compare_kd)

    grid = TimeGrid.spanning(args.horizon, args.dt) if args.horizon is not None else None
    report = tune(plant, spec, opts, grid=grid, dt=args.dt, horizon_mult=args.horizon_mult,
                  reference_gains=reference)

    _print_target(report.target_model)
    _print_metrics(report.gains, report.metrics, report.iae_vs_target)
    res = report.optimizer
    print(f'optimizer  {res.method}, {res.evals} evaluations, objective {res.objective:.4f}, '
          f'{"converged" if res.converged else "NOT converged"}')
    if report.comparison is not None:
        c = report.comparison
        fmt = lambda v: '-' if v is None else f'{v:.4f} %'  # noqa: E731
        print(f'vs reference: overshoot {fmt(c.overshoot_pct)}, settling {fmt(c.settling_time)}, '
              f'IAE {fmt(c.iae)} lower')

    out = build_report(plant, spec, report.grid, report.gains, report.metrics, report.stability,
                       iae_vs_target=report.iae_vs_target, optimizer=res)
    y_pid = closed_loop_response(plant, report.gains, report.grid).y
    _write_outputs(args, out, report.grid, report.target_model.trace.y, y_pid)
    if not report.successful:
        print('Optimized loop is UNSTABLE: tighten --kp-max/--ki-max/--kd-max or revise the target',
              file=sys.stderr)
    return report.exit_code()


def _cmd_eval(args: argparse.Namespace) -> int:
    plant = TransferFunction.from_coeffs(args.num, args.den)
    gains = PidGains(args.kp, args.ki, args.kd)
    spec = _target_spec(args, required=False)
    grid = _grid(args, spec)

    metrics = evaluate_gains(plant, gains, grid)
    stability = is_stable(closed_loop(plant, gains))
    y_pid = closed_loop_response(plant, gains, grid)
    iae_vs_target = None
    if spec is not None:
        target = build_target(spec, grid)
        iae_vs_target = iae(grid, y_pid, target.trace)
        y_target = target.trace.y
        _print_target(target)
    else:
        y_target = [1.0] * grid.n_points

    _print_metrics(gains, metrics, iae_vs_target)
    out = build_report(plant, spec, grid, gains, metrics, stability, iae_vs_target=iae_vs_target)
    _write_outputs(args, out, grid, y_target, y_pid.y)
    return EXIT_OK if stability.stable else EXIT_UNSTABLE


def _cmd_bench(args: argparse.Namespace) -> int:
    if args.workers < 1:
        raise DomainError(f'--workers must be >= 1, got {args.workers}')
    runner = run_table1 if args.table == 'table1' else run_astrom_g3
    outcomes = runner(config_dir=args.config_dir, workers=args.workers)
    print(render_table(outcomes))
    deviations = render_deviations(outcomes)
    if deviations:
        print()
        print('Known deviations from published figures:')
        print(deviations)
    summary = summarize_improvements(outcomes)
    if summary:
        print()
        print(render_improvements(summary))
    if args.json:
        with open(args.json, 'w', encoding='utf-8') as fh:
            fh.write(dumps_report(outcomes_to_dict(outcomes)))
        print(f'Results written to {args.json}')
    if args.plots:
        for path in write_comparison_plots(outcomes, args.plots):
            print(f'Plot written to {path}')
    failed = [o.name for o in outcomes if not o.overall]
    if failed:
        print(f'{len(failed)} of {len(outcomes)} cases failed: {", ".join(failed)}', file=sys.stderr)
        return EXIT_BENCH_FAILED
    print(f'All {len(outcomes)} cases passed')
    return EXIT_OK


def _cmd_plot(args: argparse.Namespace) -> int:
    render_trace_svg(args.csv, args.svg, title=args.title)
    print(f'Plot written to {args.svg}')
    return EXIT_OK


_COMMANDS = {'tune': _cmd_tune, 'eval': _cmd_eval, 'bench': _cmd_bench, 'plot': _cmd_plot}


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse ``argv``, dispatch the command and return its exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
    except _UsageError as exc:
        print(f'pidmatch: error: {exc}', file=sys.stderr)
        return EXIT_INVALID
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    _setup_logging(args.verbose)
    try:
        return _COMMANDS[args.command](args)
    except PidMatchError as exc:
        print(f'pidmatch: error: {exc}', file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f'pidmatch: error: {exc}', file=sys.stderr)
        return EXIT_INVALID


def main(argv: Optional[List[str]] = None) -> None:
    sys.exit(run(argv))


if __name__ == '__main__':
    main()
