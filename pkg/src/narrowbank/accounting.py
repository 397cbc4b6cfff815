"""Level (extensive) simulation of the economy and audits of its accounts.

The level system is integrated independently of the intensive one. The
balance-sheet, transactions and flow-of-funds matrices are rebuilt from each
level state, and the audits check that every row nets to zero and that each
sector's saving matches its flow of funds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .dynamics import AuxState, CoreState, consumption_share, core_vector_field, xi_flow
from .integrator import IntegratorConfig, PreconditionError, Problem, Trajectory, solve
from .model import (
    DomainError,
    ModelParams,
    PortfolioMatrix,
    inflation,
    kappa,
    phillips,
    saving_weights,
    validate_params,
)


class DegenerateStateError(ValueError):
    pass


class InitializationError(ValueError):
    pass


class ExtensiveState(NamedTuple):
    p: float
    a: float
    N: float
    w: float
    K: float
    L: float
    M_h: float
    M_f: float
    D: float
    H: float
    Theta_h: float
    Theta_b: float
    Theta_cb: float
    Theta: float
    R: float

    def output(self, params: ModelParams) -> float:
        return self.K / params.nu

    @property
    def M(self) -> float:
        return self.M_h + self.M_f


EXTENSIVE_NAMES = ExtensiveState._fields

# Scale of the level system at t = 0
Y0 = 100.0
P0 = 1.0
A0 = 1.0


# -- initial conditions -------------------------------------------------------

INTENSIVE_KEYS = ("omega", "e", "ell", "m_f", "theta_h", "theta_b", "h", "m_h", "d")
SOLVABLE_KEYS = ("m_f", "theta_b", "d")


def capital_gap(values: dict[str, float], params: ModelParams) -> float:
    """Bank equity in excess of ``k_r * L``, over nominal output."""
    p = params
    v = values
    return (
        (1.0 - p.k_r) * v["ell"]
        + v["theta_b"]
        + p.f * (v["m_h"] + v["m_f"])
        - (v["m_h"] + v["m_f"])
        - v["d"]
    )


def consistent_init(values: dict[str, float | None], params: ModelParams) -> tuple[CoreState, AuxState]:
    """Complete a set of initial ratios so that bank equity equals ``k_r * L``.

    Exactly one of ``m_f``, ``theta_b`` or ``d`` may be missing (``None``);
    it is solved from the capital requirement. With full reserves the firm
    deposit ratio drops out of the requirement and cannot be the missing one.
    When nothing is missing the ratios must already satisfy the requirement.
    """
    p = params
    vals = dict(values)
    unknown = sorted(set(vals) - set(INTENSIVE_KEYS))
    if unknown:
        raise InitializationError(f"unknown initial key(s): {', '.join(unknown)}")
    missing = [k for k in INTENSIVE_KEYS if vals.get(k) is None]
    bad = [k for k in missing if k not in SOLVABLE_KEYS]
    if bad:
        raise InitializationError(f"initial value(s) required: {', '.join(bad)}")
    if len(missing) > 1:
        raise InitializationError(f"only one of m_f, theta_b, d may be solved for, got {missing}")
    for k in INTENSIVE_KEYS:
        if k not in missing and not math.isfinite(float(vals[k])):
            raise InitializationError(f"initial {k} must be finite")

    if missing:
        (key,) = missing
        vals[key] = 0.0
        gap = capital_gap(vals, p)
        if key == "theta_b":
            vals[key] = -gap
        elif key == "d":
            vals[key] = gap
        else:
            coeff = 1.0 - p.f  # d(gap)/d(m_f) = -(1 - f)
            if coeff <= 0.0:
                raise InitializationError(
                    "firm deposits are not pinned by the capital requirement when f = 1; "
                    "give m_f and solve theta_b or d instead"
                )
            vals[key] = gap / coeff
            if vals[key] < 0.0:
                raise InitializationError(f"implied initial m_f = {vals[key]:.6g} is negative")
        if key == "d" and vals[key] < 0.0:
            raise InitializationError(f"implied initial d = {vals[key]:.6g} is negative")
    else:
        gap = capital_gap(vals, p)
        scale = max(1.0, *(abs(float(vals[k])) for k in ("ell", "theta_b", "m_h", "m_f", "d")))
        if abs(gap) > 1e-12 * scale:
            raise InitializationError(
                f"initial ratios violate the capital requirement by {gap:.3g} of output"
            )
    if not 0.0 <= vals["e"] < 1.0:
        raise InitializationError(f"initial employment {vals['e']} outside [0, 1)")
    core = CoreState(*(float(vals[k]) for k in CoreState._fields))
    aux = AuxState(*(float(vals[k]) for k in AuxState._fields))
    return core, aux


def narrow_init(
    core0: CoreState,
    theta_h: float,
    h: float,
    m_h: float,
    params: ModelParams,
    d: float = 0.3,
) -> tuple[CoreState, AuxState, ExtensiveState]:
    """Initial state under full reserves.

    Demand deposits are matched one-for-one by reserves and the lending arm
    holds ``theta_b = d - (1 - k_r) * ell`` in bills (negative means it
    borrows from the government).
    """
    if params.f != 1.0:
        raise InitializationError(f"narrow_init requires f = 1, got f = {params.f}")
    values = dict(zip(CoreState._fields, core0))
    values.update(theta_h=theta_h, theta_b=None, h=h, m_h=m_h, d=d)
    core, aux = consistent_init(values, params)
    return core, aux, extensive_from_intensive(core, aux, params)


def extensive_from_intensive(
    core: CoreState, aux: AuxState, params: ModelParams, *, Y: float = Y0, p: float = P0, a: float = A0
) -> ExtensiveState:
    omega, e, ell, m_f = core
    theta_h, theta_b, h, m_h, d = aux
    if not (Y > 0 and p > 0 and a > 0 and e > 0):
        raise DegenerateStateError("output, prices, productivity and employment must be positive")
    pY = p * Y
    M_h, M_f = m_h * pY, m_f * pY
    H = h * pY
    R = params.f * (M_h + M_f)
    Theta_h, Theta_b = theta_h * pY, theta_b * pY
    Theta_cb = H + R
    return ExtensiveState(
        p=p,
        a=a,
        N=Y / (a * e),
        w=omega * p * a,
        K=params.nu * Y,
        L=ell * pY,
        M_h=M_h,
        M_f=M_f,
        D=d * pY,
        H=H,
        Theta_h=Theta_h,
        Theta_b=Theta_b,
        Theta_cb=Theta_cb,
        Theta=Theta_h + Theta_b + Theta_cb,
        R=R,
    )


def intensive_projection(state: ExtensiveState, params: ModelParams) -> tuple[CoreState, AuxState]:
    """Ratios to nominal output, wage share and employment rate of a level state."""
    s = ExtensiveState(*state)
    Y = s.output(params)
    if not (s.p > 0 and Y > 0 and s.a > 0 and s.N > 0):
        raise DegenerateStateError("projection needs positive p, Y, a and N")
    pY = s.p * Y
    core = CoreState(s.w / (s.p * s.a), Y / (s.a * s.N), s.L / pY, s.M_f / pY)
    aux = AuxState(s.Theta_h / pY, s.Theta_b / pY, s.H / pY, s.M_h / pY, s.D / pY)
    return core, aux


# -- flows ----------------------------------------------------------------------


@dataclass(frozen=True)
class Flows:
    """Nominal flows implied by a level state."""

    pY: float
    pC: float
    pG: float
    pI: float
    W: float
    pT: float
    loan_interest: float
    depreciation: float
    bills_interest_h: float
    bills_interest_b: float
    bills_interest_cb: float
    bills_interest_total: float
    deposit_interest_h: float
    deposit_interest_f: float
    time_deposit_interest: float
    profits_firms: float
    profits_banks: float
    dividends: float
    profits_cb: float
    disposable_income: float
    household_saving: float


def bank_dividends(profits_banks: float, pI: float, loan_interest: float, params: ModelParams) -> float:
    """Dividends that keep bank equity at ``k_r`` times loans."""
    return profits_banks - params.k_r * (pI + loan_interest)


def compute_flows(state: ExtensiveState, params: ModelParams) -> Flows:
    s = ExtensiveState(*state)
    p = params
    Y = s.output(p)
    if Y <= 0.0 or s.p <= 0.0:
        raise DegenerateStateError(f"output and prices must be positive (Y={Y}, p={s.p})")
    pY = s.p * Y
    W = s.w * Y / s.a
    pT = p.t_share * pY
    rL = p.r * s.L
    profits_firms = pY - W - pT - rL + p.r_m * s.M_f
    pi = profits_firms / pY
    inv_share = kappa(pi, p)
    pI = inv_share * pY
    pC = consumption_share(pi, p) * pY
    profits_banks = rL - p.r_m * s.M - p.r_d * s.D + p.r_theta * s.Theta_b
    dividends = bank_dividends(profits_banks, pI, rL, p)
    disposable = W + p.r_m * s.M_h + p.r_d * s.D + p.r_theta * s.Theta_h + dividends
    return Flows(
        pY=pY,
        pC=pC,
        pG=p.g_share * pY,
        pI=pI,
        W=W,
        pT=pT,
        loan_interest=rL,
        depreciation=s.p * p.delta * s.K,
        bills_interest_h=p.r_theta * s.Theta_h,
        bills_interest_b=p.r_theta * s.Theta_b,
        bills_interest_cb=p.r_theta * s.Theta_cb,
        bills_interest_total=p.r_theta * s.Theta,
        deposit_interest_h=p.r_m * s.M_h,
        deposit_interest_f=p.r_m * s.M_f,
        time_deposit_interest=p.r_d * s.D,
        profits_firms=profits_firms,
        profits_banks=profits_banks,
        dividends=dividends,
        profits_cb=p.r_theta * s.Theta_cb,
        disposable_income=disposable,
        household_saving=disposable - pC,
    )


def extensive_vector_field(
    state: ExtensiveState, params: ModelParams, portfolio: PortfolioMatrix
) -> ExtensiveState:
    s = ExtensiveState(*state)
    p = params
    fl = compute_flows(s, p)
    Y = s.output(p)
    e = Y / (s.a * s.N)
    omega = fl.W / fl.pY
    infl = inflation(omega, p)
    lam0, lam1, lam2, lam3 = saving_weights(p, portfolio)
    S_h = fl.household_saving
    dM_f = fl.profits_firms + fl.loan_interest
    dM_h = lam2 * S_h
    return ExtensiveState(
        p=infl * s.p,
        a=p.alpha * s.a,
        N=p.beta * s.N,
        w=(phillips(e, p) + p.gamma * infl) * s.w,
        K=fl.pI / s.p - p.delta * s.K,
        L=fl.pI + fl.loan_interest,
        M_h=dM_h,
        M_f=dM_f,
        D=lam3 * S_h,
        H=lam0 * S_h,
        Theta_h=lam1 * S_h,
        Theta_b=(1.0 - p.f) * (fl.profits_firms + lam2 * S_h)
        + lam3 * S_h
        - (1.0 - p.k_r) * fl.pI
        + (p.k_r - p.f) * fl.loan_interest,
        Theta_cb=lam0 * S_h + p.f * (dM_h + dM_f),
        Theta=fl.pG - fl.pT + p.r_theta * (s.Theta_h + s.Theta_b),
        R=p.f * (dM_h + dM_f),
    )


# -- audit reports --------------------------------------------------------------

SECTORS = ("households", "firms_current", "firms_capital", "banks", "government", "central_bank")


@dataclass
class AuditCheck:
    name: str
    residual: float
    scale: float
    tol: float

    @property
    def relative(self) -> float:
        if self.scale == 0.0:
            return 0.0 if self.residual == 0.0 else math.inf
        return abs(self.residual) / self.scale

    @property
    def ok(self) -> bool:
        return self.relative <= self.tol


@dataclass
class AuditReport:
    checks: list[AuditCheck] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    savings: dict[str, float] = field(default_factory=dict)

    def add(self, name: str, terms, tol: float) -> None:
        terms = [float(x) for x in terms]
        residual = math.fsum(terms)
        scale = max((abs(x) for x in terms), default=0.0)
        self.checks.append(AuditCheck(name, residual, scale, tol))

    def extend(self, other: "AuditReport") -> "AuditReport":
        self.checks.extend(other.checks)
        self.warnings.extend(other.warnings)
        self.savings.update(other.savings)
        return self

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def violations(self) -> list[AuditCheck]:
        return [c for c in self.checks if not c.ok]

    @property
    def worst(self) -> float:
        return max((c.relative for c in self.checks), default=0.0)

    def check(self, name: str) -> AuditCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def as_table(self) -> str:
        width = max((len(c.name) for c in self.checks), default=10)
        lines = [f"{'check':<{width}}  {'residual':>12}  {'relative':>10}  {'tol':>8}  status"]
        for c in self.checks:
            lines.append(
                f"{c.name:<{width}}  {c.residual:>12.4e}  {c.relative:>10.3e}  {c.tol:>8.1e}  "
                f"{'ok' if c.ok else 'FAIL'}"
            )
        for name, value in self.savings.items():
            lines.append(f"saving {name:<{width - 7}}  {value:>12.6g}")
        for w in self.warnings:
            lines.append(f"warning: {w}")
        return "\n".join(lines)

    def csv_rows(self) -> list[tuple[str, float, float, float, str]]:
        return [(c.name, c.residual, c.relative, c.tol, "ok" if c.ok else "FAIL") for c in self.checks]


@dataclass
class FlowSnapshot:
    """Transactions and flow-of-funds matrices at one instant.

    ``transactions[row][sector]`` holds signed entries; sectors missing from a
    row have no entry in that row.
    """

    transactions: dict[str, dict[str, float]]
    flow_of_funds: dict[str, dict[str, float]]
    flows: Flows
    bank_saving_target: float


def build_flows(state: ExtensiveState, params: ModelParams, portfolio: PortfolioMatrix) -> FlowSnapshot:
    s = ExtensiveState(*state)
    fl = compute_flows(s, params)
    d = extensive_vector_field(s, params, portfolio)
    tx = {
        "consumption": {"households": -fl.pC, "firms_current": fl.pC},
        "government spending": {"firms_current": fl.pG, "government": -fl.pG},
        "investment": {"firms_current": fl.pI, "firms_capital": -fl.pI},
        "wages": {"households": fl.W, "firms_current": -fl.W},
        "taxes": {"firms_current": -fl.pT, "government": fl.pT},
        "interest on loans": {"firms_current": -fl.loan_interest, "banks": fl.loan_interest},
        "depreciation": {"firms_current": -fl.depreciation, "firms_capital": fl.depreciation},
        "interest on bills": {
            "households": fl.bills_interest_h,
            "banks": fl.bills_interest_b,
            "government": -fl.bills_interest_total,
            "central_bank": fl.bills_interest_cb,
        },
        "interest on demand deposits": {
            "households": fl.deposit_interest_h,
            "firms_current": fl.deposit_interest_f,
            "banks": -params.r_m * s.M,
        },
        "interest on time deposits": {"households": fl.time_deposit_interest, "banks": -fl.time_deposit_interest},
        "bank dividends": {"households": fl.dividends, "banks": -fl.dividends},
        "central bank profits": {"government": fl.profits_cb, "central_bank": -fl.profits_cb},
    }
    fof = {
        "change in capital": {"firms": s.p * d.K},
        "change in loans": {"firms": -d.L, "banks": d.L},
        "change in cash": {"households": d.H, "central_bank": -d.H},
        "change in bills": {
            "households": d.Theta_h,
            "banks": d.Theta_b,
            "government": -d.Theta,
            "central_bank": d.Theta_cb,
        },
        "change in demand deposits": {"households": d.M_h, "firms": d.M_f, "banks": -(d.M_h + d.M_f)},
        "change in time deposits": {"households": d.D, "banks": -d.D},
        "change in reserves": {"banks": d.R, "central_bank": -d.R},
    }
    return FlowSnapshot(tx, fof, fl, params.k_r * d.L)


def _column(matrix: dict[str, dict[str, float]], sector: str) -> list[float]:
    return [row[sector] for row in matrix.values() if sector in row]


def transactions_audit(
    state: ExtensiveState,
    params: ModelParams,
    portfolio: PortfolioMatrix,
    *,
    snapshot: FlowSnapshot | None = None,
    tol: float = 1e-10,
) -> AuditReport:
    """Row sums of the transactions and flow-of-funds matrices, and sector
    savings against their flow of funds."""
    snap = snapshot or build_flows(state, params, portfolio)
    tx, fof, fl = snap.transactions, snap.flow_of_funds, snap.flows
    rep = AuditReport()
    for row, cells in tx.items():
        rep.add(f"transactions: {row}", cells.values(), tol)
    for row, cells in fof.items():
        if row != "change in capital":
            rep.add(f"flow of funds: {row}", cells.values(), tol)
    rep.add("GDP: pC + pG + pI = pY", [fl.pC, fl.pG, fl.pI, -fl.pY], tol)

    tx_columns = {
        "households": "households",
        "firms": "firms_current",
        "banks": "banks",
        "government": "government",
        "central_bank": "central_bank",
    }
    rep.savings = {f"S_{k}": math.fsum(_column(tx, col)) for k, col in tx_columns.items()}
    for sector, col in tx_columns.items():
        used = _column(fof, sector)
        rep.add(f"column: {sector} saving = flow of funds", [*_column(tx, col), *(-u for u in used)], tol)
    every_cell = [v for sector in SECTORS for v in _column(tx, sector)]
    rep.add("financial balances sum to zero", every_cell, tol)
    rep.add("bank saving = k_r dL/dt", [*_column(tx, "banks"), -snap.bank_saving_target], tol)
    xi = xi_flow(*_ratios_for_xi(state, params), params)
    rep.add("household saving / pY = Xi", [fl.household_saving / fl.pY, -xi], tol)
    return rep


def _ratios_for_xi(state: ExtensiveState, params: ModelParams):
    core, aux = intensive_projection(state, params)
    return core.omega, core.ell, core.m_f, aux.theta_h + aux.theta_b


def balance_sheet_audit(state: ExtensiveState, params: ModelParams, *, tol: float = 1e-8) -> AuditReport:
    """Asset rows net to zero, net-worth identities and reserve requirement."""
    s = ExtensiveState(*state)
    p = params
    pK = s.p * s.K
    rep = AuditReport()
    rep.add("balance sheet: loans", [-s.L, s.L], tol)
    rep.add("balance sheet: cash", [s.H, -s.H], tol)
    rep.add("balance sheet: bills", [s.Theta_h, s.Theta_b, -s.Theta, s.Theta_cb], tol)
    rep.add("balance sheet: demand deposits", [s.M_h, s.M_f, -s.M], tol)
    rep.add("balance sheet: reserves", [s.R, -s.R], tol)
    rep.add("reserve requirement R = f M", [s.R, -p.f * s.M_h, -p.f * s.M_f], tol)
    rep.add("bank equity X_b = k_r L", [s.L, s.Theta_b, s.R, -s.M_h, -s.M_f, -s.D, -p.k_r * s.L], tol)
    rep.add("central bank net worth = 0", [s.Theta_cb, -s.H, -s.R], tol)
    X_h = s.H + s.Theta_h + s.M_h + s.D
    X_f = pK - s.L + s.M_f
    X_b = s.L + s.Theta_b + s.R - s.M - s.D
    X_g = -s.Theta
    X_cb = s.Theta_cb - s.H - s.R
    rep.add("net worth sums to pK", [X_h, X_f, X_b, X_g, X_cb, -pK], tol)
    if p.f == 1.0:
        rep.add("full reserves R = M", [s.R, -s.M_h, -s.M_f], tol)
        rep.add("lending facility Theta_b = D - (1 - k_r) L", [s.Theta_b, -s.D, (1.0 - p.k_r) * s.L], tol)
    for name in ("D", "H", "M_h", "M_f", "Theta_h"):
        if getattr(s, name) < 0.0:
            rep.warnings.append(f"{name} is negative ({getattr(s, name):.6g})")
    return rep


def full_audit(
    state: ExtensiveState,
    params: ModelParams,
    portfolio: PortfolioMatrix,
    *,
    snapshot: FlowSnapshot | None = None,
    tx_tol: float = 1e-10,
    bs_tol: float = 1e-8,
) -> AuditReport:
    rep = balance_sheet_audit(state, params, tol=bs_tol)
    return rep.extend(transactions_audit(state, params, portfolio, snapshot=snapshot, tol=tx_tol))


# -- level simulation -----------------------------------------------------------


def extensive_problem(params: ModelParams, portfolio: PortfolioMatrix) -> Problem:
    p = params

    def rhs(t, y):
        return np.array(extensive_vector_field(ExtensiveState(*y), p, portfolio), dtype=float)

    def employment(y):
        s = ExtensiveState(*y)
        return s.K / p.nu / (s.a * s.N)

    def leverage(y):
        s = ExtensiveState(*y)
        return s.L / (s.p * s.K / p.nu)

    def speed(y):
        core, _ = intensive_projection(ExtensiveState(*y), p)
        return max(abs(v) for v in core_vector_field(core, p))

    return Problem(rhs=rhs, employment=employment, leverage=leverage, core_speed=speed, names=EXTENSIVE_NAMES)


def simulate_extensive(
    state0: ExtensiveState,
    params: ModelParams,
    portfolio: PortfolioMatrix,
    config: IntegratorConfig = IntegratorConfig(),
) -> Trajectory:
    bad = validate_params(params, portfolio)
    if bad:
        raise PreconditionError("invalid parameters: " + "; ".join(bad))
    return solve(extensive_problem(params, portfolio), np.array(state0, dtype=float), config)


def project_trajectory(traj: Trajectory, params: ModelParams) -> np.ndarray:
    """Intensive 9-vectors of every sample of a level trajectory."""
    out = []
    for row in traj.states:
        core, aux = intensive_projection(ExtensiveState(*row), params)
        out.append([*core, *aux])
    return np.array(out)


def audit_trajectory(
    traj: Trajectory,
    params: ModelParams,
    portfolio: PortfolioMatrix,
    *,
    tx_tol: float = 1e-10,
    bs_tol: float = 1e-7,
) -> list[AuditReport]:
    """Full audit at every sample of a level trajectory."""
    reports = []
    for row in traj.states:
        state = ExtensiveState(*row)
        try:
            reports.append(full_audit(state, params, portfolio, tx_tol=tx_tol, bs_tol=bs_tol))
        except (DomainError, DegenerateStateError) as exc:
            rep = AuditReport()
            rep.checks.append(AuditCheck(f"evaluation failed: {exc}", math.inf, 1.0, 0.0))
            reports.append(rep)
    return reports
