"""Command-line entry point.

Exit codes:

0  success
1  usage, configuration or I/O error
2  numerical failure (integration gave up, or every sweep point failed)
3  interior equilibrium not found or degenerate
4  audit failure
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .accounting import ExtensiveState, build_flows, extensive_from_intensive, full_audit, simulate_extensive
from .config import ConfigError, load_params, params_from_mapping, params_to_mapping, parse_overrides
from .equilibrium import EquilibriumError, explosive_growth_limit, interior_equilibrium
from .experiments import (
    Scenario,
    builtin_scenarios,
    compare_regimes,
    dump_scenario,
    export_csv,
    export_svg,
    resolve_scenario,
    run_scenario,
)
from .integrator import Termination
from .model import PARAM_KEYS, PORTFOLIO_KEYS, RangeError, kappa_inverse, validate_params

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_EQUILIBRIUM = 3
EXIT_AUDIT = 4


class UsageError(Exception):
    pass


def fmt(x) -> str:
    if x is None:
        return "none"
    if isinstance(x, (float, int, np.floating)):
        return f"{float(x):.6g}"
    return str(x)


def _csv_text(rows) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _err(msg: str) -> None:
    print(f"narrowbank: {msg}", file=sys.stderr)


def build_scenario(args, default: str = "fractional-finite") -> Scenario:
    """Scenario from ``--scenario`` (or ``default``), then ``--params``, then
    ``--set`` overrides in command-line order, then ``--horizon``/``--cadence``."""
    scen = resolve_scenario(getattr(args, "scenario", None) or default)
    items: list[tuple[str, float | str]] = []
    if getattr(args, "params", None):
        params, portfolio = load_params(args.params)
        items += list(params_to_mapping(params, portfolio).items())
    items += parse_overrides(getattr(args, "set", None) or [])
    if getattr(args, "horizon", None) is not None:
        items.append(("integrator.horizon", args.horizon))
    if getattr(args, "cadence", None) is not None:
        items.append(("integrator.cadence", args.cadence))
    return scen.with_overrides(items) if items else scen


def _outdir(args) -> Path | None:
    if not args.out:
        return None
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create output directory {out}: {exc.strerror or exc}") from exc
    return out


def summary_lines(bundle) -> list[str]:
    s = bundle.summary()
    lines = [
        f"scenario: {s['label']}",
        f"termination: {s['termination']} at t={fmt(s['t_end'])}",
        f"regime: {s['regime']}",
        f"terminal growth: {fmt(s['terminal_growth'])}",
        f"onset of decline: {fmt(s['onset'])}",
        f"theta_b below -1 from: {fmt(s['theta_b_below_minus_one'])}",
        f"audit worst relative residual: {fmt(s['audit_worst'])}",
    ]
    if bundle.trajectory is not None:
        state = ", ".join(f"{k[9:]}={fmt(v)}" for k, v in s.items() if k.startswith("terminal."))
        lines.append(f"terminal state: {state}")
        if bundle.trajectory.message:
            lines.append(f"integrator: {bundle.trajectory.message}")
    if bundle.equilibrium is not None:
        eq = bundle.equilibrium
        lines.append(
            f"interior equilibrium: omega={fmt(eq.omega_bar)}, e={fmt(eq.e_bar)}, "
            f"ell={fmt(eq.ell_bar)}, m_f={fmt(eq.m_f_bar)}"
        )
    else:
        lines.append(f"interior equilibrium: {bundle.equilibrium_note}")
    lines.append(f"explosive growth limit: {fmt(bundle.explosive_limit)}")
    if s["error"]:
        lines.append(f"error: {s['error']}")
    return lines


def cmd_simulate(args) -> int:
    scen = build_scenario(args)
    bundle = run_scenario(scen)
    out = _outdir(args)
    if out is not None:
        export_csv(bundle, out / f"{scen.label}.csv")
        export_svg(bundle, out / f"{scen.label}.svg")
        (out / f"{scen.label}.txt").write_text("\n".join(summary_lines(bundle)) + "\n")
    print("\n".join(summary_lines(bundle)))
    if bundle.error is not None:
        _err(bundle.error)
        return EXIT_USAGE
    if bundle.trajectory.termination == Termination.FAILURE:
        _err(bundle.trajectory.message)
        return EXIT_NUMERICAL
    return EXIT_OK


def _params_for(args):
    if args.params:
        params, portfolio = load_params(args.params)
    else:
        params, portfolio = params_from_mapping({}, require_all=False)
    overrides = parse_overrides(args.set or [])
    if overrides:
        values = params_to_mapping(params, portfolio)
        for key, value in overrides:
            if key not in PARAM_KEYS and key not in PORTFOLIO_KEYS:
                raise ConfigError(f"unknown parameter key {key!r}")
            values[key] = value
        params, portfolio = params_from_mapping(values)
    return params, portfolio


def cmd_equilibrium(args) -> int:
    params, portfolio = _params_for(args)
    bad = validate_params(params, portfolio)
    target = params.nu * (params.alpha + params.beta + params.delta)
    print(f"equilibrium investment share: {fmt(target)}")
    try:
        print(f"pi_bar: {fmt(kappa_inverse(target, params))}")
    except RangeError as exc:
        print(f"pi_bar: unavailable ({exc})")
    print(f"target growth alpha+beta: {fmt(params.alpha + params.beta)}")
    print(f"explosive growth limit: {fmt(explosive_growth_limit(params))}")
    if bad:
        _err("invalid parameters: " + "; ".join(bad))
        return EXIT_EQUILIBRIUM
    try:
        eq = interior_equilibrium(params)
    except EquilibriumError as exc:
        _err(str(exc))
        return EXIT_EQUILIBRIUM
    print(f"omega_bar: {fmt(eq.omega_bar)}")
    print(f"e_bar: {fmt(eq.e_bar)}")
    print(f"ell_bar: {fmt(eq.ell_bar)}")
    print(f"m_f_bar: {fmt(eq.m_f_bar)}")
    print(f"growth: {fmt(eq.growth_bar)}")
    print(f"residual: {fmt(eq.residual)}")
    for alt in eq.alternatives:
        print(f"alternative: omega={fmt(alt.omega_bar)}, e={fmt(alt.e_bar)}, ell={fmt(alt.ell_bar)}")
    return EXIT_OK


def cmd_compare(args) -> int:
    bundles = []
    for name in args.scenarios:
        args.scenario = name
        bundles.append(run_scenario(build_scenario(args)))
    report = compare_regimes(*bundles)
    text = "\n".join(report.lines()) + "\n"
    print(text, end="")
    out = _outdir(args)
    if out is not None:
        (out / "comparison.txt").write_text(text)
        (out / "comparison.csv").write_text(_csv_text([("key", "value"), *report.csv_rows()]))
    failed = [b for b in bundles if b.error is not None]
    for b in failed:
        _err(f"{b.scenario.label}: {b.error}")
    if failed:
        return EXIT_USAGE
    if any(b.trajectory.termination == Termination.FAILURE for b in bundles):
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_audit(args) -> int:
    scen = build_scenario(args)
    horizon = scen.config.horizon
    if not 0.0 <= args.t <= horizon:
        raise UsageError(f"--t {args.t} outside [0, horizon={horizon}]")
    core, aux = scen.initial_state()
    state0 = extensive_from_intensive(core, aux, scen.params)
    traj = simulate_extensive(state0, scen.params, scen.portfolio, scen.config.replace(horizon=args.t))
    state = ExtensiveState(*traj.states[-1])
    if args.inject_fault:
        # time deposits with no counterpart, and households paid more dividends than banks pay out
        state = state._replace(D=state.D + max(1.0, abs(state.D)) * 1e-3)
        snap = build_flows(state, scen.params, scen.portfolio)
        fl = snap.flows
        snap.transactions["bank dividends"]["households"] = fl.dividends * 1.01 + 1e-3
    else:
        snap = None
    report = full_audit(state, scen.params, scen.portfolio, snapshot=snap, tx_tol=1e-10, bs_tol=1e-7)
    print(f"scenario: {scen.label}")
    print(f"audit time: {fmt(traj.t_end)} (requested {fmt(args.t)}, termination {traj.termination})")
    print(report.as_table())
    out = _outdir(args)
    if out is not None:
        rows = [(n, repr(r), repr(rel), repr(tol), st) for n, r, rel, tol, st in report.csv_rows()]
        (out / f"{scen.label}-audit.csv").write_text(
            _csv_text([("check", "residual", "relative", "tol", "status"), *rows])
        )
    if traj.termination == Termination.FAILURE:
        _err(traj.message)
        return EXIT_NUMERICAL
    if not report.ok:
        _err(f"{len(report.violations)} audit check(s) failed")
        return EXIT_AUDIT
    return EXIT_OK


def _sweep_point(job):
    scen, key, value = job
    try:
        bundle = run_scenario(scen.with_overrides([(key, value)]))
    except (ConfigError, ValueError) as exc:
        return {"value": value, "error": str(exc)}
    s = bundle.summary()
    s["value"] = value
    if s["error"] is None and bundle.trajectory.termination == Termination.FAILURE:
        s["error"] = bundle.trajectory.message
    return s


SWEEP_COLUMNS = ("value", "termination", "regime", "t_end", "terminal_growth", "onset", "audit_worst", "error")


def sweep_values(args) -> list[float]:
    if args.values:
        try:
            return [float(v) for v in args.values.split(",")]
        except ValueError as exc:
            raise UsageError(f"--values must be comma-separated numbers: {exc}") from exc
    if args.start is None or args.stop is None or args.count is None:
        raise UsageError("sweep needs --values or all of --start, --stop, --count")
    if args.count < 1:
        raise UsageError("--count must be at least 1")
    if args.count == 1:
        return [float(args.start)]
    return [float(v) for v in np.linspace(args.start, args.stop, args.count)]


def cmd_sweep(args) -> int:
    scen = build_scenario(args)
    key = args.key
    if key in ("label", "notes") or key.startswith("integrator."):
        raise UsageError(f"sweep key must be a parameter or initial.* key, got {key!r}")
    values = sweep_values(args)
    # validates the key before any work
    scen.with_overrides([(key, values[0])])
    jobs = [(scen, key, v) for v in values]
    workers = args.workers or os.cpu_count() or 1
    if workers == 1 or len(jobs) == 1:
        rows = [_sweep_point(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            rows = list(pool.map(_sweep_point, jobs))
    table = [(key, *SWEEP_COLUMNS[1:])]
    for r in rows:
        cells = [repr(float(r["value"]))]
        for c in SWEEP_COLUMNS[1:]:
            v = r.get(c)
            cells.append("" if v is None else repr(v) if isinstance(v, float) else str(v))
        table.append(tuple(cells))
    text = _csv_text(table)
    print(text, end="")
    out = _outdir(args)
    if out is not None:
        (out / "sweep.csv").write_text(text)
    if all(r.get("error") for r in rows):
        _err("every sweep point failed")
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_scenarios(args) -> int:
    builtins = builtin_scenarios()
    if args.dump:
        scen = resolve_scenario(args.dump)
        print(dump_scenario(scen), end="")
        return EXIT_OK
    for name, s in builtins.items():
        print(f"{name}: {s.notes}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="narrowbank", description="Five-sector banking model simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, scenario=True, run=True):
        p.add_argument("--params", metavar="PATH", help="parameter file (key = value)")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override, repeatable")
        p.add_argument("--out", metavar="DIR", help="output directory")
        if scenario:
            p.add_argument("--scenario", metavar="NAME|PATH", help="builtin name or scenario file")
        if run:
            p.add_argument("--horizon", type=float, metavar="YEARS")
            p.add_argument("--cadence", type=float, metavar="YEARS")

    p = sub.add_parser("simulate", help="run one scenario")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("equilibrium", help="interior equilibrium and explosive limit")
    common(p, scenario=False, run=False)
    p.set_defaults(func=cmd_equilibrium)

    p = sub.add_parser("compare", help="compare two scenarios")
    p.add_argument("scenarios", nargs=2, metavar="SCENARIO")
    common(p, scenario=False)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("audit", help="accounting audit at a given time")
    common(p)
    p.add_argument("--t", type=float, required=True, metavar="YEAR")
    p.add_argument("--inject-fault", action="store_true", help="corrupt the state before auditing")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("sweep", help="run a grid over one key")
    common(p)
    p.add_argument("--key", required=True)
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--count", type=int)
    p.add_argument("--values", help="comma-separated values instead of a range")
    p.add_argument("--workers", type=int, default=0, help="worker processes (default: CPU count)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("scenarios", help="list builtin scenarios")
    p.add_argument("--dump", metavar="NAME|PATH", help="print a scenario in file format")
    p.set_defaults(func=cmd_scenarios)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        _err(str(exc))
        return EXIT_USAGE
    except OSError as exc:
        _err(str(exc))
        return EXIT_USAGE
    except ValueError as exc:
        _err(str(exc))
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
