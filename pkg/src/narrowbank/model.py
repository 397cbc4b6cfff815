"""Parameters and behavioural functions of the five-sector economy.

Everything here is a pure function of its arguments. Time is measured in
years and all rates are annual.
"""

from __future__ import annotations

import math
import sys
from dataclasses import asdict, dataclass, fields

from scipy.optimize import brentq


class DomainError(ValueError):
    """Argument outside the domain of a behavioural function."""


class RangeError(ValueError):
    """Target value outside the range of a monotone function."""


@dataclass(frozen=True)
class ModelParams:
    """Scalar parameters of a run. Defaults are the baseline calibration
    with a 10% reserve requirement."""

    r: float = 0.04  # loans
    r_d: float = 0.02  # time deposits
    r_theta: float = 0.012  # bills
    r_m: float = 0.01  # demand deposits
    alpha: float = 0.025
    beta: float = 0.02
    eta_p: float = 0.35
    m: float = 1.6
    gamma: float = 0.8
    g_share: float = 0.2
    t_share: float = 0.08
    nu: float = 3.0
    delta: float = 0.05
    k_r: float = 0.08
    f: float = 0.1
    phi0: float = 0.0401
    phi1: float = 6.41e-5
    kappa0: float = -0.0056
    kappa1: float = 0.8
    kappa2: float = 1.0
    kappa3: float = 2.0
    kappa4: float = 10.0
    xi: float = 4.0

    def replace(self, **changes: float) -> "ModelParams":
        return type(self)(**{**asdict(self), **changes})


@dataclass(frozen=True)
class PortfolioMatrix:
    """Household portfolio coefficients.

    Only the free entries are stored. The cash share and the remaining
    sensitivities follow from symmetry and adding-up, so those constraints
    cannot be violated.
    """

    lambda10: float = 0.3
    lambda20: float = 0.3
    lambda30: float = 0.3
    lambda11: float = 4.0
    lambda12: float = -1.0
    lambda22: float = 2.0

    @property
    def lambda0(self) -> float:
        return 1.0 - (self.lambda10 + self.lambda20 + self.lambda30)

    @property
    def sensitivities(self) -> tuple[tuple[float, float, float], ...]:
        """Full symmetric 3x3 matrix of rate sensitivities, columns ordered
        (bills, demand deposits, time deposits)."""
        l11, l12, l22 = self.lambda11, self.lambda12, self.lambda22
        l13 = -(l11 + l12)
        l23 = -(l12 + l22)
        l33 = l11 + 2.0 * l12 + l22
        return ((l11, l12, l13), (l12, l22, l23), (l13, l23, l33))

    def replace(self, **changes: float) -> "PortfolioMatrix":
        return type(self)(**{**asdict(self), **changes})


PARAM_KEYS = tuple(f.name for f in fields(ModelParams))
PORTFOLIO_KEYS = tuple(f.name for f in fields(PortfolioMatrix))


def _finite(name: str, x: float) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"{name} must be finite, got {x!r}")
    return x


def phillips(e: float, params: ModelParams) -> float:
    """Wage-bargaining rate ``phi1 / (1 - e)**2 - phi0``; singular at full employment."""
    e = _finite("employment rate", e)
    if e < 0.0:
        raise DomainError(f"employment rate must be non-negative, got {e}")
    if e >= 1.0:
        raise DomainError(f"Phillips curve is singular at e >= 1, got {e}")
    return params.phi1 / (1.0 - e) ** 2 - params.phi0


def phillips_inverse(y: float, params: ModelParams) -> float:
    y = _finite("wage-bargaining rate", y)
    if y <= -params.phi0:
        raise DomainError(f"rate {y} is at or below the Phillips floor {-params.phi0}")
    return 1.0 - math.sqrt(params.phi1 / (y + params.phi0))


def kappa_upper(params: ModelParams) -> float:
    """Upper asymptote of the investment function."""
    return params.kappa0 + params.kappa1 / params.kappa2**params.xi


def kappa(pi: float, params: ModelParams) -> float:
    """Investment share of output as a generalized logistic function of the
    profit share. Strictly increasing, bounded by ``kappa0`` below and
    :func:`kappa_upper` above."""
    pi = _finite("profit share", pi)
    z = -params.kappa4 * pi
    if z > 30.0:
        # (k2 + k3 e^z)^-xi evaluated in logs; the power overflows long before exp does
        log_den = z + math.log(params.kappa3) + math.log1p(params.kappa2 * math.exp(-z) / params.kappa3)
        return params.kappa0 + params.kappa1 * math.exp(-params.xi * log_den)
    return params.kappa0 + params.kappa1 / (params.kappa2 + params.kappa3 * math.exp(z)) ** params.xi


def kappa_prime(pi: float, params: ModelParams) -> float:
    z = -params.kappa4 * pi
    if z > 700.0:
        return 0.0
    if z > 30.0:
        log_den = z + math.log(params.kappa3) + math.log1p(params.kappa2 * math.exp(-z) / params.kappa3)
        return params.kappa1 * params.xi * params.kappa4 * math.exp(-params.xi * log_den)
    ez = params.kappa3 * math.exp(z)
    base = params.kappa2 + ez
    return params.kappa1 * params.xi * params.kappa4 * ez / base ** (params.xi + 1.0)


def kappa_inverse(target: float, params: ModelParams, tol: float = 1e-12) -> float:
    """Profit share at which investment equals ``target``.

    Brent's method on an expanding bracket, run until the bracket itself is a
    few ulps wide. A residual test alone is not enough on the flat tails.
    """
    target = _finite("investment share", target)
    lo_bound, hi_bound = params.kappa0, kappa_upper(params)
    if not lo_bound < target < hi_bound:
        raise RangeError(f"investment share {target} outside ({lo_bound}, {hi_bound})")

    def g(p: float) -> float:
        return kappa(p, params) - target

    lo, hi = -1.0, 1.0
    while g(lo) > 0.0:
        lo *= 2.0
        if lo < -1e6:
            raise RangeError(f"investment share {target} not reachable numerically")
    while g(hi) < 0.0:
        hi *= 2.0
        if hi > 1e6:
            raise RangeError(f"investment share {target} not reachable numerically")
    if g(lo) == 0.0:
        return lo
    if g(hi) == 0.0:
        return hi
    x = brentq(g, lo, hi, xtol=1e-300, rtol=4.0 * sys.float_info.epsilon, maxiter=2000)
    if abs(g(x)) > tol:
        raise RangeError(f"kappa_inverse did not reach tolerance for target {target}")
    return x


def inflation(omega: float, params: ModelParams) -> float:
    """Price inflation under lagged markup pricing: ``eta_p * (m * omega - 1)``."""
    omega = _finite("wage share", omega)
    return params.eta_p * (params.m * omega - 1.0)


def reduced_lambdas(
    portfolio: PortfolioMatrix, rates: tuple[float, float, float]
) -> tuple[float, float, float, float]:
    """Shares of household saving flowing into (cash, bills, demand deposits,
    time deposits), given ``rates = (r_theta, r_m, r_d)``. Shares may be
    negative; they always sum to one."""
    r_theta, r_m, r_d = rates
    pm = portfolio
    lam1 = pm.lambda10 + pm.lambda11 * r_theta + pm.lambda12 * r_m - (pm.lambda11 + pm.lambda12) * r_d
    lam2 = pm.lambda20 + pm.lambda12 * r_theta + pm.lambda22 * r_m - (pm.lambda12 + pm.lambda22) * r_d
    # time deposits take the exactly rounded remainder, so adding-up holds to half an ulp
    lam3 = math.fsum((1.0, -pm.lambda0, -lam1, -lam2))
    return pm.lambda0, lam1, lam2, lam3


def saving_weights(params: ModelParams, portfolio: PortfolioMatrix) -> tuple[float, float, float, float]:
    return reduced_lambdas(portfolio, (params.r_theta, params.r_m, params.r_d))


def profit_share(omega: float, ell: float, m_f: float, params: ModelParams) -> float:
    """After-tax, pre-depreciation profits of firms over nominal output."""
    return 1.0 - params.t_share - omega - params.r * ell + params.r_m * m_f


def validate_params(params: ModelParams, portfolio: PortfolioMatrix | None = None) -> list[str]:
    """Return a list of violated invariants; empty when the parameters are admissible."""
    p = params
    out: list[str] = []
    for name, value in asdict(p).items():
        if not math.isfinite(value):
            out.append(f"{name} must be finite")
    if out:
        return out
    if not 0.0 <= p.f <= 1.0:
        out.append("reserve ratio out of [0,1]")
    if not 0.0 <= p.gamma <= 1.0:
        out.append("money-illusion degree gamma out of [0,1]")
    if not 0.0 <= p.k_r <= 1.0:
        out.append("capital adequacy ratio out of [0,1]")
    if p.m < 1.0:
        out.append("markup m must be at least 1")
    if p.nu <= 0.0:
        out.append("capital-to-output ratio nu must be positive")
    if p.phi1 <= 0.0:
        out.append("Phillips curvature phi1 must be positive")
    if p.kappa1 <= 0.0:
        out.append("investment amplitude must be positive")
    for name in ("kappa2", "kappa3", "kappa4", "xi"):
        if getattr(p, name) <= 0.0:
            out.append(f"investment parameter {name} must be positive")
    if not out:
        target = p.nu * (p.alpha + p.beta + p.delta)
        if not p.kappa0 < target < kappa_upper(p):
            out.append("equilibrium investment target nu*(alpha+beta+delta) outside the investment range")
    if portfolio is not None:
        for name, value in asdict(portfolio).items():
            if not math.isfinite(value):
                out.append(f"portfolio entry {name} must be finite")
    return out
