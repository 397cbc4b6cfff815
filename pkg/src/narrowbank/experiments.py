"""Scenario registry, run bundles, regime comparison and file export.

A scenario is everything a run consumes: parameters, portfolio rules,
initial ratios (one of ``m_f``, ``theta_b``, ``d`` may be ``"auto"`` and is
then solved from the bank capital requirement) and integrator settings.
Scenarios read from and write to the same ``key = value`` format as
parameter files, with ``initial.`` and ``integrator.`` prefixes.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Iterable, Mapping
from xml.sax.saxutils import escape

import numpy as np

from .accounting import (
    INTENSIVE_KEYS,
    AuditReport,
    ExtensiveState,
    InitializationError,
    consistent_init,
    extensive_from_intensive,
    full_audit,
    project_trajectory,
    simulate_extensive,
)
from .config import ConfigError, format_kv, parse_kv, params_from_mapping, read_kv
from .dynamics import AuxState, CoreState, growth_rate
from .equilibrium import (
    DegenerateEquilibrium,
    EquilibriumError,
    InteriorEquilibrium,
    explosive_growth_limit,
    interior_equilibrium,
)
from .integrator import (
    IntegratorConfig,
    PreconditionError,
    Trajectory,
    classify_regime,
    growth_series,
    integrate,
    onset_of_decline,
)
from .model import (
    PARAM_KEYS,
    PORTFOLIO_KEYS,
    ModelParams,
    PortfolioMatrix,
    RangeError,
    inflation,
    kappa_inverse,
    profit_share,
    validate_params,
)

AUTO = "auto"
INTEGRATOR_KEYS = tuple(f.name for f in fields(IntegratorConfig))

DEFAULT_INITIAL: dict[str, float | None] = {
    "omega": 0.75,
    "e": 0.9,
    "ell": 0.6,
    "m_f": 0.5,
    "theta_h": 0.1,
    "theta_b": 0.1,
    "h": 0.05,
    "m_h": 0.2,
    "d": 0.3,
}

CSV_COLUMNS = (
    "t", "omega", "e", "ell", "m_f", "theta_h", "theta_b", "h", "m_h", "d",
    "pi", "g_Y", "i", "audit_max_residual",
)


@dataclass(frozen=True)
class Scenario:
    label: str
    params: ModelParams = ModelParams()
    portfolio: PortfolioMatrix = PortfolioMatrix()
    initial: Mapping[str, float | None] = field(default_factory=lambda: dict(DEFAULT_INITIAL))
    config: IntegratorConfig = IntegratorConfig()
    notes: str = ""

    def initial_state(self) -> tuple[CoreState, AuxState]:
        return consistent_init(dict(self.initial), self.params)

    def solved_key(self) -> str | None:
        missing = [k for k in INTENSIVE_KEYS if self.initial.get(k) is None]
        return missing[0] if len(missing) == 1 else None

    def with_overrides(self, items: Iterable[tuple[str, float | str]]) -> "Scenario":
        """Apply ``(key, value)`` pairs in order; later pairs win."""
        values = scenario_to_mapping(self)
        for key, value in items:
            if key.startswith("resolved."):
                raise ConfigError(f"{key}: resolved values are outputs and cannot be set")
            _check_key(key)
            values[key] = value
        for key in [k for k in values if k.startswith("resolved.")]:
            del values[key]
        return scenario_from_mapping(values)


def _check_key(key: str) -> None:
    if key in ("label", "notes") or key in PARAM_KEYS or key in PORTFOLIO_KEYS or key == "lambda0":
        return
    if key.startswith("initial.") and key[8:] in INTENSIVE_KEYS:
        return
    if key.startswith("integrator.") and key[11:] in INTEGRATOR_KEYS:
        return
    raise ConfigError(f"unknown key {key!r}")


def scenario_from_mapping(values: Mapping[str, float | str]) -> Scenario:
    """Build a scenario from flat keys.

    Parameters and portfolio entries not listed keep their baseline values;
    every initial ratio must be given (``auto`` for the solved one).
    ``resolved.*`` keys, as written in CSV headers, are checked against the
    solved initial state.
    """
    for key in values:
        if not key.startswith("resolved."):
            _check_key(key)
    param_vals = {k: v for k, v in values.items() if k in PARAM_KEYS or k in PORTFOLIO_KEYS or k == "lambda0"}
    params, portfolio = params_from_mapping(param_vals, require_all=False)

    initial: dict[str, float | None] = {}
    for k in INTENSIVE_KEYS:
        key = f"initial.{k}"
        if key not in values:
            raise ConfigError(f"missing key {key!r}")
        v = values[key]
        if v == AUTO:
            initial[k] = None
        elif isinstance(v, str):
            raise ConfigError(f"{key}: expected a number or 'auto', got {v!r}")
        else:
            initial[k] = float(v)

    cfg_vals = {}
    for k in INTEGRATOR_KEYS:
        key = f"integrator.{k}"
        if key in values:
            v = values[key]
            if k == "method":
                cfg_vals[k] = str(v)
            elif isinstance(v, str):
                raise ConfigError(f"{key}: expected a number, got {v!r}")
            else:
                cfg_vals[k] = float(v)
    config = IntegratorConfig(**cfg_vals)
    bad = config.violations()
    if bad:
        raise ConfigError("integrator: " + "; ".join(bad))

    label = values.get("label", "custom")
    notes = values.get("notes", "")
    scen = Scenario(str(label), params, portfolio, initial, config, str(notes))

    resolved = {k[9:]: v for k, v in values.items() if k.startswith("resolved.")}
    if resolved:
        core, aux = _initial_or_config_error(scen)
        state = dict(zip(INTENSIVE_KEYS, (*core, *aux)))
        for k, v in resolved.items():
            if k not in state:
                raise ConfigError(f"unknown key 'resolved.{k}'")
            if isinstance(v, str) or abs(state[k] - v) > 1e-12 * max(1.0, abs(v)):
                raise ConfigError(f"resolved.{k} = {v!r} does not match the solved value {state[k]!r}")
    return scen


def _initial_or_config_error(s: Scenario) -> tuple[CoreState, AuxState]:
    try:
        return s.initial_state()
    except InitializationError as exc:
        raise ConfigError(f"initial conditions: {exc}") from exc


def scenario_to_mapping(s: Scenario) -> dict[str, float | str]:
    out: dict[str, float | str] = {"label": s.label}
    if s.notes:
        out["notes"] = s.notes
    out.update(asdict(s.params))
    out.update(asdict(s.portfolio))
    for k in INTENSIVE_KEYS:
        v = s.initial.get(k)
        out[f"initial.{k}"] = AUTO if v is None else float(v)
    for k, v in asdict(s.config).items():
        out[f"integrator.{k}"] = v
    return out


def dump_scenario(s: Scenario) -> str:
    return format_kv(scenario_to_mapping(s))


def load_scenario(path: str | Path) -> Scenario:
    return scenario_from_mapping(read_kv(path))


def builtin_scenarios() -> dict[str, Scenario]:
    """The four reference runs on the baseline calibration, 100 years each."""
    frac = ModelParams()
    narrow = frac.replace(f=1.0)
    frac_init = {**DEFAULT_INITIAL, "m_f": None}
    narrow_init = {**DEFAULT_INITIAL, "theta_b": None}
    out = [
        Scenario("fractional-finite", frac, initial={**frac_init, "ell": 0.6},
                 notes="10% reserves, low initial debt; m_f solved from the capital requirement"),
        Scenario("fractional-explosive", frac, initial={**frac_init, "ell": 6.0},
                 notes="10% reserves, high initial debt; m_f solved from the capital requirement"),
        Scenario("narrow-finite", narrow, initial={**narrow_init, "ell": 0.6},
                 notes="full reserves, low initial debt; theta_b = d - (1 - k_r) ell"),
        Scenario("narrow-explosive", narrow, initial={**narrow_init, "ell": 6.0},
                 notes="full reserves, high initial debt; theta_b = d - (1 - k_r) ell"),
    ]
    return {s.label: s for s in out}


def resolve_scenario(name_or_path: str) -> Scenario:
    """A builtin scenario by name, or a scenario file."""
    builtins = builtin_scenarios()
    if name_or_path in builtins:
        return builtins[name_or_path]
    path = Path(name_or_path)
    if not path.exists():
        raise ConfigError(
            f"no builtin scenario or file named {name_or_path!r} "
            f"(builtins: {', '.join(builtins)})"
        )
    return load_scenario(path)


# Reference values reported for the baseline runs. They are shown next to
# the computed values and never asserted.
REPORTED: dict[str, dict[str, float]] = {
    "fractional-finite": {
        "pi_bar": 0.1248,
        "omega_bar": 0.6948,
        "e_bar": 0.9706,
        "ell_bar": 4.1937,
        "m_f_bar": 0.7577,
        "growth": 0.0451,
    },
    "fractional-explosive": {"terminal_growth": -0.0522, "onset": 70.0},
    "narrow-finite": {"growth": 0.0451},
    "narrow-explosive": {"onset": 20.0},
}


# -- running ------------------------------------------------------------------


@dataclass
class RunBundle:
    scenario: Scenario
    core0: CoreState | None = None
    aux0: AuxState | None = None
    trajectory: Trajectory | None = None
    extensive: Trajectory | None = None
    audits: list[AuditReport] = field(default_factory=list)
    regime: str = "indeterminate"
    onset: float | None = None
    theta_b_cross: float | None = None
    equilibrium: InteriorEquilibrium | None = None
    equilibrium_note: str = ""
    pi_bar: float | None = None
    explosive_limit: float = math.nan
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None and self.trajectory is not None

    @property
    def termination(self) -> str:
        return str(self.trajectory.termination) if self.trajectory is not None else "error"

    @property
    def growth(self) -> np.ndarray:
        if self.trajectory is None:
            return np.empty(0)
        return growth_series(self.trajectory, self.scenario.params)

    @property
    def terminal_growth(self) -> float:
        g = self.growth
        return float(g[-1]) if len(g) else math.nan

    @property
    def audit_worst(self) -> np.ndarray:
        return np.array([rep.worst for rep in self.audits])

    @property
    def audits_ok(self) -> bool:
        return bool(self.audits) and all(rep.ok for rep in self.audits)

    def resolved_initial(self) -> dict[str, float]:
        if self.core0 is None:
            return {}
        return dict(zip(INTENSIVE_KEYS, (*self.core0, *self.aux0)))

    def summary(self) -> dict[str, object]:
        traj = self.trajectory
        out: dict[str, object] = {
            "label": self.scenario.label,
            "termination": self.termination,
            "regime": self.regime,
            "t_end": traj.t_end if traj is not None else math.nan,
            "terminal_growth": self.terminal_growth,
            "onset": self.onset,
            "theta_b_below_minus_one": self.theta_b_cross,
            "audit_worst": float(self.audit_worst.max()) if self.audits else math.nan,
            "error": self.error,
        }
        if traj is not None:
            core, aux = traj.terminal
            out.update({f"terminal.{k}": float(v) for k, v in zip(INTENSIVE_KEYS, (*core, *aux))})
        return out


def first_crossing_below(traj: Trajectory, name: str, level: float) -> float | None:
    below = np.flatnonzero(traj[name] < level)
    return float(traj.t[below[0]]) if len(below) else None


def _equilibrium_annotation(bundle: RunBundle) -> None:
    p = bundle.scenario.params
    bundle.explosive_limit = explosive_growth_limit(p)
    try:
        bundle.pi_bar = kappa_inverse(p.nu * (p.alpha + p.beta + p.delta), p)
    except RangeError:
        bundle.pi_bar = None
    try:
        bundle.equilibrium = interior_equilibrium(p)
    except DegenerateEquilibrium as exc:
        bundle.equilibrium_note = f"degenerate: {exc}"
    except EquilibriumError as exc:
        bundle.equilibrium_note = f"not found: {exc}"


def run_scenario(s: Scenario, *, audit: bool = True) -> RunBundle:
    """Integrate, audit and classify one scenario.

    Initialization and parameter errors are recorded in ``error`` instead of
    raised. The level system is integrated on exactly the same sample grid
    as the ratio system so the two can be compared sample by sample.
    """
    bundle = RunBundle(s)
    _equilibrium_annotation(bundle)
    bad = validate_params(s.params, s.portfolio)
    if bad:
        bundle.error = "invalid parameters: " + "; ".join(bad)
        return bundle
    try:
        bundle.core0, bundle.aux0 = s.initial_state()
        traj = integrate(bundle.core0, bundle.aux0, s.params, s.portfolio, s.config)
    except (InitializationError, PreconditionError) as exc:
        bundle.error = str(exc)
        return bundle
    bundle.trajectory = traj
    bundle.regime = classify_regime(traj, s.params)
    bundle.onset = onset_of_decline(traj, s.params)
    bundle.theta_b_cross = first_crossing_below(traj, "theta_b", -1.0)

    if audit:
        state0 = extensive_from_intensive(bundle.core0, bundle.aux0, s.params)
        # Same grid as the ratio run: stop at its end time, never earlier.
        ext_cfg = s.config.replace(
            horizon=traj.t_end,
            blowup_threshold=math.inf,
            convergence_tol=1e-300,
        )
        ext = simulate_extensive(state0, s.params, s.portfolio, ext_cfg)
        bundle.extensive = ext
        bundle.audits = [
            full_audit(ExtensiveState(*row), s.params, s.portfolio, tx_tol=1e-10, bs_tol=1e-7)
            for row in ext.states
        ]
    return bundle


def equivalence_gap(bundle: RunBundle) -> np.ndarray:
    """Per-component max difference between the ratio run and the projected
    level run, in units of ``rtol * max|x| + atol`` over the run."""
    traj, ext = bundle.trajectory, bundle.extensive
    if traj is None or ext is None:
        raise ValueError("bundle has no level trajectory")
    common, ii, ie = np.intersect1d(traj.t, ext.t, return_indices=True)
    x = traj.states[ii]
    y = project_trajectory(ext, bundle.scenario.params)[ie]
    cfg = bundle.scenario.config
    scale = cfg.rtol * np.abs(x).max(axis=0) + cfg.atol
    return np.abs(x - y).max(axis=0) / scale


# -- comparison -----------------------------------------------------------------


@dataclass(frozen=True)
class RegimeSummary:
    label: str
    f: float
    regime: str
    termination: str
    t_end: float
    terminal_growth: float
    onset: float | None
    theta_b_cross: float | None
    equilibrium: tuple[float, float, float, float] | None
    equilibrium_growth: float | None
    equilibrium_note: str
    pi_bar: float | None
    explosive_limit: float
    error: str | None

    @classmethod
    def from_bundle(cls, b: RunBundle) -> "RegimeSummary":
        eq = b.equilibrium
        return cls(
            label=b.scenario.label,
            f=b.scenario.params.f,
            regime=b.regime,
            termination=b.termination,
            t_end=b.trajectory.t_end if b.trajectory is not None else math.nan,
            terminal_growth=b.terminal_growth,
            onset=b.onset,
            theta_b_cross=b.theta_b_cross,
            equilibrium=tuple(eq.core) if eq is not None else None,
            equilibrium_growth=eq.growth_bar if eq is not None else None,
            equilibrium_note=b.equilibrium_note,
            pi_bar=b.pi_bar,
            explosive_limit=b.explosive_limit,
            error=b.error,
        )


@dataclass(frozen=True)
class Annotation:
    scenario: str
    quantity: str
    reported: float
    computed: float | None


def _diff(a: float | None, b: float | None) -> float | None:
    if a is None or b is None:
        return None
    return a - b


@dataclass(frozen=True)
class ComparisonReport:
    """Differences are always ``a - b``."""

    a: RegimeSummary
    b: RegimeSummary
    terminal_growth_difference: float
    equilibrium_growth_difference: float | None
    onset_difference: float | None
    crossing_difference: float | None
    narrow_onset_earlier: bool | None
    annotations: tuple[Annotation, ...]

    def lines(self) -> list[str]:
        a, b = self.a, self.b
        out = [f"comparison: {a.label} (f={_g(a.f)}) vs {b.label} (f={_g(b.f)})"]
        for s in (a, b):
            out.append(
                f"  {s.label}: regime {s.regime}, termination {s.termination} at t={_g(s.t_end)}, "
                f"terminal growth {_g(s.terminal_growth)}, onset {_g(s.onset)}, "
                f"theta_b < -1 at {_g(s.theta_b_cross)}"
            )
            if s.error:
                out.append(f"  {s.label}: error: {s.error}")
            if s.equilibrium is None:
                out.append(f"  {s.label}: no interior equilibrium ({s.equilibrium_note})")
        out.append(f"terminal growth difference: {_g(self.terminal_growth_difference)}")
        eg = self.equilibrium_growth_difference
        if eg is None:
            out.append("equilibrium growth difference: unavailable (no interior equilibrium)")
        else:
            verdict = "<=" if abs(eg) <= 1e-4 else ">"
            out.append(f"equilibrium growth difference: {_g(eg)} ({verdict} 1e-4)")
        out.append(f"onset difference: {_g(self.onset_difference)}")
        out.append(f"theta_b crossing difference: {_g(self.crossing_difference)}")
        if self.narrow_onset_earlier is not None:
            out.append(f"narrow onset earlier: {'yes' if self.narrow_onset_earlier else 'no'}")
        for n in self.annotations:
            out.append(f"reported {n.scenario} {n.quantity}: {_g(n.reported)} (computed {_g(n.computed)})")
        return out

    def csv_rows(self) -> list[tuple[str, str]]:
        rows = []
        for tag, s in (("a", self.a), ("b", self.b)):
            for k, v in asdict(s).items():
                rows.append((f"{tag}.{k}", _csv(v)))
        for k in (
            "terminal_growth_difference",
            "equilibrium_growth_difference",
            "onset_difference",
            "crossing_difference",
            "narrow_onset_earlier",
        ):
            rows.append((k, _csv(getattr(self, k))))
        for n in self.annotations:
            rows.append((f"reported.{n.scenario}.{n.quantity}", f"{_csv(n.reported)}|{_csv(n.computed)}"))
        return rows


def _g(x) -> str:
    if x is None:
        return "none"
    return f"{x:.6g}"


def _csv(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, tuple):
        return " ".join(_csv(v) for v in x)
    return str(x)


def _annotations(b: RunBundle) -> list[Annotation]:
    rep = REPORTED.get(b.scenario.label, {})
    eq = b.equilibrium
    computed = {
        "pi_bar": b.pi_bar,
        "omega_bar": eq.omega_bar if eq else None,
        "e_bar": eq.e_bar if eq else None,
        "ell_bar": eq.ell_bar if eq else None,
        "m_f_bar": eq.m_f_bar if eq else None,
        "growth": b.terminal_growth if b.ok else None,
        "terminal_growth": b.terminal_growth if b.ok else None,
        "onset": b.onset,
    }
    return [Annotation(b.scenario.label, k, v, computed.get(k)) for k, v in rep.items()]


def compare_regimes(a: RunBundle, b: RunBundle) -> ComparisonReport:
    sa, sb = RegimeSummary.from_bundle(a), RegimeSummary.from_bundle(b)
    narrow_earlier = None
    if (sa.f == 1.0) != (sb.f == 1.0) and sa.onset is not None and sb.onset is not None:
        narrow, frac = (sa, sb) if sa.f == 1.0 else (sb, sa)
        narrow_earlier = narrow.onset < frac.onset
    return ComparisonReport(
        a=sa,
        b=sb,
        terminal_growth_difference=sa.terminal_growth - sb.terminal_growth,
        equilibrium_growth_difference=_diff(sa.equilibrium_growth, sb.equilibrium_growth),
        onset_difference=_diff(sa.onset, sb.onset),
        crossing_difference=_diff(sa.theta_b_cross, sb.theta_b_cross),
        narrow_onset_earlier=narrow_earlier,
        annotations=tuple(_annotations(a) + _annotations(b)),
    )


# -- export -----------------------------------------------------------------------


def csv_header(bundle: RunBundle) -> str:
    """``# key = value`` lines echoing every input of the run."""
    values = scenario_to_mapping(bundle.scenario)
    values.update({f"resolved.{k}": v for k, v in bundle.resolved_initial().items()})
    return "".join(f"# {line}\n" for line in format_kv(values).splitlines())


def sample_rows(bundle: RunBundle) -> list[list[float]]:
    traj = bundle.trajectory
    if traj is None:
        return []
    p = bundle.scenario.params
    audit = {}
    if bundle.extensive is not None:
        audit = dict(zip(bundle.extensive.t.tolist(), bundle.audit_worst.tolist()))
    rows = []
    for t, y in zip(traj.t.tolist(), traj.states.tolist()):
        omega, _, ell, m_f = y[:4]
        pi = profit_share(omega, ell, m_f, p)
        rows.append([t, *y, pi, growth_rate(pi, p), inflation(omega, p), audit.get(t, math.nan)])
    return rows


def export_csv(bundle: RunBundle, destination: str | Path) -> Path:
    path = Path(destination)
    lines = [csv_header(bundle), ",".join(CSV_COLUMNS) + "\n"]
    lines += [",".join(repr(float(v)) for v in row) + "\n" for row in sample_rows(bundle)]
    try:
        path.write_text("".join(lines))
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def read_csv_header(path: str | Path) -> dict[str, float | str]:
    header = []
    for line in Path(path).read_text().splitlines():
        if not line.startswith("# "):
            break
        header.append(line[2:])
    return parse_kv("\n".join(header), str(path))


def scenario_from_csv(path: str | Path) -> Scenario:
    return scenario_from_mapping(read_csv_header(path))


def read_csv_rows(path: str | Path) -> tuple[tuple[str, ...], np.ndarray]:
    lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    cols = tuple(lines[0].split(","))
    data = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]]).reshape(-1, len(cols))
    return cols, data


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


def _panel(x, series, names, box, title) -> list[str]:
    left, top, width, height = box
    out = [f'<g class="panel" data-panel="{escape(title)}">']
    out.append(f'<rect x="{left}" y="{top}" width="{width}" height="{height}" fill="none" stroke="#444"/>')
    out.append(f'<text x="{left + 4}" y="{top - 6}" font-size="12">{escape(title)}</text>')
    if len(x) == 0:
        out.append("</g>")
        return out
    ys = np.concatenate([s for s in series] + [np.zeros(1)])
    lo, hi = float(ys.min()), float(ys.max())
    if hi - lo < 1e-12:
        lo, hi = lo - 1.0, hi + 1.0
    x0, x1 = float(x[0]), float(x[-1])
    if x1 == x0:
        x1 = x0 + 1.0

    def px(v):
        return left + (v - x0) / (x1 - x0) * width

    def py(v):
        return top + (hi - v) / (hi - lo) * height

    zero = py(0.0)
    out.append(
        f'<line class="zero" x1="{left}" y1="{zero:.3f}" x2="{left + width}" y2="{zero:.3f}" '
        f'stroke="#999" stroke-dasharray="4,3"/>'
    )
    out.append(f'<text x="{left - 4}" y="{top + 10}" font-size="10" text-anchor="end">{hi:.3g}</text>')
    out.append(f'<text x="{left - 4}" y="{top + height}" font-size="10" text-anchor="end">{lo:.3g}</text>')
    out.append(f'<text x="{left + width}" y="{top + height + 14}" font-size="10" text-anchor="end">t = {x1:.3g}</text>')
    for k, (name, s) in enumerate(zip(names, series)):
        pts = " ".join(f"{px(a):.3f},{py(b):.3f}" for a, b in zip(x, s))
        colour = _PALETTE[k % len(_PALETTE)]
        out.append(
            f'<polyline data-series="{escape(name)}" fill="none" stroke="{colour}" '
            f'stroke-width="1.2" points="{pts}"/>'
        )
        out.append(
            f'<text x="{left + width + 8}" y="{top + 14 * (k + 1)}" font-size="11" fill="{colour}">'
            f"{escape(name)}</text>"
        )
    out.append("</g>")
    return out


def export_svg(bundle: RunBundle, destination: str | Path) -> Path:
    """Two stacked panels: core ratios on top, auxiliary ratios below."""
    path = Path(destination)
    traj = bundle.trajectory
    t = traj.t if traj is not None else np.empty(0)
    core_names = CoreState._fields
    aux_names = AuxState._fields

    def cols(names):
        return [traj[n] if traj is not None else np.empty(0) for n in names]

    w, h = 720, 560
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}">',
        f'<text x="{w / 2}" y="18" font-size="14" text-anchor="middle">{escape(bundle.scenario.label)}</text>',
    ]
    parts += _panel(t, cols(core_names), core_names, (60, 40, 560, 210), "core: omega, e, ell, m_f")
    parts += _panel(t, cols(aux_names), aux_names, (60, 310, 560, 210), "auxiliary: theta_h, theta_b, h, m_h, d")
    parts.append("</svg>")
    try:
        path.write_text("\n".join(parts) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path
