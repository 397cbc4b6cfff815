"""Deterministic explicit Runge-Kutta integration with model-specific events.

Two schemes are available: adaptive Dormand-Prince 5(4) and classical
fixed-step RK4. Steps are clipped so that every output sample time is hit
exactly; no interpolation is used anywhere. Integration halts at the first
of these events:

* the loan ratio exceeds the blow-up threshold (located by bisection on the
  step length, so the terminal point sits on the threshold),
* the core vector field stays below the convergence tolerance for a full
  window,
* a step cannot avoid ``e >= 1 - employment_guard`` even at the minimum
  step (singular employment),
* step-size underflow or a non-finite state (numerical failure),
* the horizon.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .dynamics import (
    CORE_DIM,
    STATE_NAMES,
    AuxState,
    CoreState,
    core_vector_field,
    growth_rate,
    join_state,
    make_rhs,
    split_state,
)
from .model import DomainError, ModelParams, PortfolioMatrix, profit_share, validate_params


class PreconditionError(ValueError):
    pass


class Termination(str, enum.Enum):
    HORIZON = "horizon-reached"
    CONVERGED = "converged"
    BLOW_UP = "blow-up"
    SINGULAR = "singular-employment"
    FAILURE = "numerical-failure"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "rk45"  # or "rk4"
    horizon: float = 100.0
    first_step: float = 0.01  # also the fixed RK4 step
    min_step: float = 1e-10
    max_step: float = 0.25
    rtol: float = 1e-9
    atol: float = 1e-11
    blowup_threshold: float = 1e6
    employment_guard: float = 1e-6
    convergence_window: float = 5.0
    convergence_tol: float = 1e-9
    cadence: float = 0.1

    def replace(self, **changes) -> "IntegratorConfig":
        return type(self)(**{**self.__dict__, **changes})

    def violations(self) -> list[str]:
        out = []
        if self.method not in ("rk45", "rk4"):
            out.append(f"unknown method {self.method!r} (expected rk45 or rk4)")
        if not self.horizon >= 0.0:
            out.append("horizon must be non-negative")
        if not 0.0 < self.min_step <= self.max_step:
            out.append("need 0 < min_step <= max_step")
        if not self.first_step > 0.0:
            out.append("first_step must be positive")
        if not (self.rtol > 0.0 and self.atol > 0.0):
            out.append("tolerances must be positive")
        if not 0.0 < self.employment_guard < 0.1:
            out.append("employment_guard must lie in (0, 0.1)")
        if not self.blowup_threshold > 10.0:
            out.append("blowup_threshold must exceed 10")
        if not self.cadence > 0.0:
            out.append("cadence must be positive")
        if not (self.convergence_window > 0.0 and self.convergence_tol > 0.0):
            out.append("convergence window and tolerance must be positive")
        return out


@dataclass
class Trajectory:
    """Sampled solution. ``states[i]`` is the state at ``t[i]``."""

    t: np.ndarray
    states: np.ndarray
    termination: Termination
    t_end: float
    names: tuple[str, ...] = STATE_NAMES
    message: str = ""
    steps: int = 0
    rejected: int = 0

    def __len__(self) -> int:
        return len(self.t)

    def column(self, name: str) -> np.ndarray:
        return self.states[:, self.names.index(name)]

    def __getitem__(self, name: str) -> np.ndarray:
        return self.column(name)

    @property
    def core(self) -> np.ndarray:
        return self.states[:, :CORE_DIM]

    def state_at(self, i: int) -> tuple[CoreState, AuxState]:
        return split_state(self.states[i])

    @property
    def terminal(self) -> tuple[CoreState, AuxState]:
        return self.state_at(-1)


# Dormand-Prince 5(4) tableau
_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_DP_E = (
    71 / 57600,
    0.0,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)


class _StepRejected(Exception):
    def __init__(self, reason: str):
        self.reason = reason


@dataclass
class Problem:
    """What the stepper needs to know about a system besides its vector field."""

    rhs: Callable[[float, np.ndarray], np.ndarray]
    employment: Callable[[np.ndarray], float]
    leverage: Callable[[np.ndarray], float]
    core_speed: Callable[[np.ndarray], float] | None = None
    names: tuple[str, ...] = field(default=STATE_NAMES)


def _eval(rhs, t, y) -> np.ndarray:
    try:
        k = rhs(t, y)
    except DomainError as exc:
        raise _StepRejected("employment" if "singular" in str(exc) else "numerical") from exc
    except (OverflowError, ZeroDivisionError, ValueError) as exc:
        raise _StepRejected("numerical") from exc
    if not np.all(np.isfinite(k)):
        raise _StepRejected("numerical")
    return k


def _dp_step(rhs, t, y, h, k1):
    ks = [k1]
    for i in range(1, 7):
        yi = y + h * sum(a * k for a, k in zip(_DP_A[i], ks))
        ks.append(_eval(rhs, t + _DP_C[i] * h, yi))
    y_new = y + h * sum(b * k for b, k in zip(_DP_B, ks) if b)
    err = h * sum(e * k for e, k in zip(_DP_E, ks) if e)
    return y_new, err, ks[6]


def _rk4_step(rhs, t, y, h, k1):
    k2 = _eval(rhs, t + 0.5 * h, y + 0.5 * h * k1)
    k3 = _eval(rhs, t + 0.5 * h, y + 0.5 * h * k2)
    k4 = _eval(rhs, t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def solve(problem: Problem, y0: Sequence[float], config: IntegratorConfig) -> Trajectory:
    """Integrate ``problem`` from ``t = 0`` under ``config``."""
    bad = config.violations()
    if bad:
        raise PreconditionError("; ".join(bad))
    y = np.array(y0, dtype=float)
    if not np.all(np.isfinite(y)):
        raise PreconditionError("initial state must be finite")
    e0 = problem.employment(y)
    if not 0.0 <= e0 < 1.0:
        raise PreconditionError(f"initial employment rate {e0} outside [0, 1)")

    rhs = problem.rhs
    cfg = config
    adaptive = cfg.method == "rk45"
    e_max = 1.0 - cfg.employment_guard

    ts = [0.0]
    ys = [y.copy()]
    t = 0.0
    h = min(cfg.first_step, cfg.max_step) if adaptive else cfg.first_step
    steps = rejected = 0
    conv_since: float | None = None
    termination = Termination.HORIZON
    message = ""

    def finish(kind: Termination, msg: str = "") -> Trajectory:
        if ts[-1] != t:
            ts.append(t)
            ys.append(y.copy())
        return Trajectory(
            np.array(ts), np.array(ys), kind, t, problem.names, msg, steps, rejected
        )

    if cfg.horizon == 0.0:
        return finish(Termination.HORIZON)

    try:
        k1 = _eval(rhs, t, y)
    except _StepRejected as exc:
        raise PreconditionError(f"vector field not finite at the initial state ({exc.reason})") from None

    n_samples = max(1, int(math.ceil(cfg.horizon / cfg.cadence - 1e-9)))
    for k in range(1, n_samples + 1):
        target = min(k * cfg.cadence, cfg.horizon)
        while t < target:
            remaining = target - t
            clipped = h >= remaining - 1e-12 * max(1.0, target)
            h_try = remaining if clipped else h
            try:
                if adaptive:
                    y_new, err, k_last = _dp_step(rhs, t, y, h_try, k1)
                    scale = cfg.atol + cfg.rtol * np.maximum(np.abs(y), np.abs(y_new))
                    err_norm = float(np.sqrt(np.mean((err / scale) ** 2)))
                    if not math.isfinite(err_norm):
                        raise _StepRejected("numerical")
                else:
                    y_new = _rk4_step(rhs, t, y, h_try, k1)
                    err_norm = 0.0
                if not np.all(np.isfinite(y_new)):
                    raise _StepRejected("numerical")
                if problem.employment(y_new) >= e_max:
                    raise _StepRejected("employment")
            except _StepRejected as exc:
                rejected += 1
                h = 0.5 * h_try
                if h < cfg.min_step:
                    kind = Termination.SINGULAR if exc.reason == "employment" else Termination.FAILURE
                    return finish(kind, f"step below min_step at t={t:.6g} ({exc.reason})")
                continue

            if adaptive and err_norm > 1.0:
                rejected += 1
                h = h_try * max(0.2, 0.9 * err_norm ** -0.2)
                if h < cfg.min_step:
                    return finish(Termination.FAILURE, f"step-size underflow at t={t:.6g}")
                continue

            if problem.leverage(y_new) > cfg.blowup_threshold:
                t, y = _locate_threshold(problem, cfg, t, y, h_try, k1, adaptive)
                steps += 1
                return finish(Termination.BLOW_UP, f"loan ratio exceeded {cfg.blowup_threshold:g}")

            steps += 1
            t = target if clipped else t + h_try
            y = y_new
            if adaptive:
                k1 = k_last
                factor = 5.0 if err_norm == 0.0 else min(5.0, max(0.2, 0.9 * err_norm ** -0.2))
                h_next = min(cfg.max_step, h_try * factor)
                h = max(h, h_next) if clipped else h_next
                h = min(h, cfg.max_step)
            else:
                k1 = _eval_or_fail(rhs, t, y)
                if k1 is None:
                    return finish(Termination.FAILURE, f"non-finite derivative at t={t:.6g}")
                h = cfg.first_step

        ts.append(t)
        ys.append(y.copy())

        if problem.core_speed is not None:
            speed = problem.core_speed(y)
            if speed < cfg.convergence_tol:
                if conv_since is None:
                    conv_since = t
                if t - conv_since >= cfg.convergence_window - 1e-9:
                    return finish(Termination.CONVERGED, f"core speed {speed:.3g} below tolerance")
            else:
                conv_since = None

    return finish(termination, message)


def _eval_or_fail(rhs, t, y):
    try:
        return _eval(rhs, t, y)
    except _StepRejected:
        return None


def _locate_threshold(problem, cfg, t, y, h, k1, adaptive):
    """Shorten the last step until the loan ratio sits on the blow-up threshold."""

    def advance(hh):
        if adaptive:
            return _dp_step(problem.rhs, t, y, hh, k1)[0]
        return _rk4_step(problem.rhs, t, y, hh, k1)

    lo, hi = 0.0, h
    y_hi = advance(hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        y_mid = advance(mid)
        if problem.leverage(y_mid) > cfg.blowup_threshold:
            hi, y_hi = mid, y_mid
        else:
            lo = mid
    return t + hi, y_hi


def intensive_problem(params: ModelParams, portfolio: PortfolioMatrix) -> Problem:
    def speed(y):
        core = CoreState(*map(float, y[:CORE_DIM]))
        return max(abs(v) for v in core_vector_field(core, params))

    return Problem(
        rhs=make_rhs(params, portfolio),
        employment=lambda y: float(y[1]),
        leverage=lambda y: float(y[2]),
        core_speed=speed,
    )


def integrate(
    core: CoreState,
    aux: AuxState,
    params: ModelParams,
    portfolio: PortfolioMatrix,
    config: IntegratorConfig = IntegratorConfig(),
) -> Trajectory:
    """Integrate the joint core and auxiliary system from ``t = 0``."""
    bad = validate_params(params, portfolio)
    if bad:
        raise PreconditionError("invalid parameters: " + "; ".join(bad))
    return solve(intensive_problem(params, portfolio), join_state(core, aux), config)


def growth_series(traj: Trajectory, params: ModelParams) -> np.ndarray:
    """Real output growth at every sample."""
    return np.array(
        [
            growth_rate(profit_share(w, l, mf, params), params)
            for w, l, mf in zip(traj["omega"], traj["ell"], traj["m_f"])
        ]
    )


def classify_regime(
    traj: Trajectory,
    params: ModelParams,
    *,
    tol: float = 1e-3,
    window: float = 10.0,
) -> str:
    """Label a trajectory ``interior``, ``explosive`` or ``indeterminate``."""
    from .equilibrium import EquilibriumError, interior_equilibrium

    if len(traj) < 2:
        return "indeterminate"
    if traj.termination == Termination.BLOW_UP:
        return "explosive"
    try:
        eq = interior_equilibrium(params)
    except EquilibriumError:
        eq = None
    if eq is not None:
        gap = np.max(np.abs(traj.core[-1] - np.array(eq.core)))
        if gap <= tol:
            return "interior"
    tail = traj.t >= traj.t_end - window
    if tail.sum() >= 3:
        ell = traj["ell"][tail]
        omega = traj["omega"][tail]
        e = traj["e"][tail]
        if np.all(np.diff(ell) > 0) and np.all(np.diff(omega) < 0) and np.all(np.diff(e) < 0):
            return "explosive"
    return "indeterminate"


def onset_of_decline(traj: Trajectory, params: ModelParams) -> float | None:
    """First sample time from which real output shrinks for the rest of the run."""
    g = growth_series(traj, params)
    if len(g) == 0 or g[-1] >= 0.0:
        return None
    nonneg = np.flatnonzero(g >= 0.0)
    if len(nonneg) == 0:
        return float(traj.t[0])
    return float(traj.t[nonneg[-1] + 1])
