"""Interior equilibrium of the core system and the explosive growth limit.

The interior point is found in three one-dimensional steps: the profit share
by inverting the investment function, the wage share by a bracketed root of
the profit-share closure, and the employment rate by inverting the Phillips
curve.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

from .dynamics import CoreState, core_vector_field
from .model import (
    DomainError,
    ModelParams,
    RangeError,
    inflation,
    kappa,
    kappa_inverse,
    phillips_inverse,
    profit_share,
)


class EquilibriumError(ValueError):
    pass


class EquilibriumNotFound(EquilibriumError):
    pass


class DegenerateEquilibrium(EquilibriumError):
    """A fixed point exists but nominal growth does not exceed both interest
    rates, so the debt and deposit ratios are negative."""

    def __init__(self, message: str, candidates: tuple["InteriorEquilibrium", ...] = ()):
        super().__init__(message)
        self.candidates = candidates


@dataclass(frozen=True)
class InteriorEquilibrium:
    omega_bar: float
    e_bar: float
    ell_bar: float
    m_f_bar: float
    pi_bar: float
    growth_bar: float
    residual: float
    nominal_growth: float
    alternatives: tuple["InteriorEquilibrium", ...] = field(default=(), compare=False)

    @property
    def core(self) -> CoreState:
        return CoreState(self.omega_bar, self.e_bar, self.ell_bar, self.m_f_bar)

    @property
    def ambiguous(self) -> bool:
        return bool(self.alternatives)


def equilibrium_residual(state: CoreState, params: ModelParams) -> float:
    """Max-norm of the core vector field at ``state``."""
    return max(abs(v) for v in core_vector_field(CoreState(*state), params))


def explosive_growth_limit(params: ModelParams) -> float:
    """Real growth as the profit share tends to minus infinity."""
    return params.kappa0 / params.nu - params.delta


def _closure_parts(omega: float, pi_bar: float, params: ModelParams):
    p = params
    gam = p.alpha + p.beta + inflation(omega, p)
    ell = kappa(pi_bar, p) / (gam - p.r)
    m_f = (1.0 - p.t_share - omega) / (gam - p.r_m)
    return gam, ell, m_f


def _closure(omega: float, pi_bar: float, params: ModelParams) -> float:
    _, ell, m_f = _closure_parts(omega, pi_bar, params)
    return profit_share(omega, ell, m_f, params) - pi_bar


def _pole_inside(a: float, b: float, params: ModelParams) -> bool:
    p = params
    ga = p.alpha + p.beta + inflation(a, p)
    gb = p.alpha + p.beta + inflation(b, p)
    return (ga - p.r) * (gb - p.r) <= 0.0 or (ga - p.r_m) * (gb - p.r_m) <= 0.0


def _build(omega: float, pi_bar: float, params: ModelParams) -> InteriorEquilibrium:
    p = params
    gam, ell, m_f = _closure_parts(omega, pi_bar, p)
    e = phillips_inverse(p.alpha + (1.0 - p.gamma) * inflation(omega, p), p)
    core = CoreState(omega, e, ell, m_f)
    return InteriorEquilibrium(
        omega_bar=omega,
        e_bar=e,
        ell_bar=ell,
        m_f_bar=m_f,
        pi_bar=pi_bar,
        growth_bar=kappa(pi_bar, p) / p.nu - p.delta,
        residual=equilibrium_residual(core, p),
        nominal_growth=gam,
    )


def closure_roots(params: ModelParams, n_grid: int = 200) -> list[InteriorEquilibrium]:
    """All fixed points found by scanning the wage share on ``(0, 1 - t)``.

    Sign changes caused by the poles where nominal growth equals ``r`` or
    ``r_m`` are discarded. Degenerate points are included.
    """
    p = params
    target = p.nu * (p.alpha + p.beta + p.delta)
    try:
        pi_bar = kappa_inverse(target, p)
    except RangeError as exc:
        raise EquilibriumNotFound(f"equilibrium investment share {target:.6g} unreachable: {exc}") from exc
    upper = 1.0 - p.t_share
    grid = np.linspace(1e-4, upper - 1e-4, n_grid)
    with np.errstate(all="ignore"):
        vals = [_closure(w, pi_bar, p) for w in grid]
    roots = []
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if not (np.isfinite(fa) and np.isfinite(fb)) or fa * fb > 0.0:
            continue
        if _pole_inside(a, b, p):
            continue
        if fa == 0.0:
            w = a
        elif fb == 0.0:
            continue  # picked up as the left end of the next interval
        else:
            w = brentq(_closure, a, b, args=(pi_bar, p), xtol=1e-14, rtol=4 * np.finfo(float).eps)
        try:
            roots.append(_build(w, pi_bar, p))
        except DomainError:
            continue
    return roots


def _admissible(eq: InteriorEquilibrium, params: ModelParams) -> bool:
    p = params
    return (
        eq.nominal_growth > p.r
        and eq.nominal_growth > p.r_m
        and 0.0 < eq.omega_bar < 1.0 - p.t_share
        and 0.0 < eq.e_bar < 1.0
    )


def interior_equilibrium(params: ModelParams) -> InteriorEquilibrium:
    """Interior fixed point of the core system.

    Raises :class:`EquilibriumNotFound` when the investment target is out of
    range or the closure has no root, and :class:`DegenerateEquilibrium` when
    every root has nominal growth at or below one of the interest rates.
    When several admissible roots exist the one with the lowest wage share is
    returned and the others are attached as ``alternatives``.
    """
    roots = closure_roots(params)
    if not roots:
        raise EquilibriumNotFound("profit-share closure has no sign change on (0, 1 - t)")
    good = [eq for eq in roots if _admissible(eq, params)]
    if not good:
        desc = ", ".join(
            f"omega={eq.omega_bar:.6g} (Gamma={eq.nominal_growth:.6g}, ell={eq.ell_bar:.6g}, m_f={eq.m_f_bar:.6g})"
            for eq in roots
        )
        raise DegenerateEquilibrium(
            f"no admissible interior equilibrium: nominal growth must exceed r={params.r} "
            f"and r_m={params.r_m}; fixed points found: {desc}",
            tuple(roots),
        )
    best = good[0]
    if len(good) > 1:
        best = replace(best, alternatives=tuple(good[1:]))
    return best
