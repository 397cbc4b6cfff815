"""Vector fields of the intensive (output-normalized) variables.

The core block ``(omega, e, ell, m_f)`` is autonomous. The auxiliary block
``(theta_h, theta_b, h, m_h, d)`` is driven by the core block and never
feeds back into it, so both are integrated jointly as one 9-vector.
"""

from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np

from .model import (
    ModelParams,
    PortfolioMatrix,
    inflation,
    kappa,
    phillips,
    profit_share,
    saving_weights,
)


class CoreState(NamedTuple):
    omega: float
    e: float
    ell: float
    m_f: float


class AuxState(NamedTuple):
    theta_h: float
    theta_b: float
    h: float
    m_h: float
    d: float


STATE_NAMES = CoreState._fields + AuxState._fields
CORE_DIM = len(CoreState._fields)


def split_state(y) -> tuple[CoreState, AuxState]:
    return CoreState(*map(float, y[:CORE_DIM])), AuxState(*map(float, y[CORE_DIM:]))


def join_state(core: CoreState, aux: AuxState) -> np.ndarray:
    return np.array([*core, *aux], dtype=float)


def growth_rate(pi: float, params: ModelParams) -> float:
    """Real output growth ``kappa(pi)/nu - delta``."""
    return kappa(pi, params) / params.nu - params.delta


def gamma_rate(omega: float, ell: float, m_f: float, params: ModelParams) -> float:
    """Nominal output growth: real growth plus inflation."""
    pi = profit_share(omega, ell, m_f, params)
    return growth_rate(pi, params) + inflation(omega, params)


def consumption_share(pi: float, params: ModelParams) -> float:
    return 1.0 - params.g_share - kappa(pi, params)


def xi_flow(omega: float, ell: float, m_f: float, theta_p: float, params: ModelParams) -> float:
    """Household saving over nominal output, ``(pY_h - pC) / pY``.

    ``theta_p`` is the private (household plus bank) holding of bills.
    """
    p = params
    pi = profit_share(omega, ell, m_f, p)
    return (
        p.g_share
        - p.t_share
        - pi
        + p.r_theta * theta_p
        + (1.0 - p.k_r) * kappa(pi, p)
        - p.k_r * p.r * ell
    )


def core_vector_field(state: CoreState, params: ModelParams) -> CoreState:
    omega, e, ell, m_f = state
    p = params
    pi = profit_share(omega, ell, m_f, p)
    k = kappa(pi, p)
    infl = inflation(omega, p)
    gam = k / p.nu - p.delta + infl
    return CoreState(
        (phillips(e, p) - (1.0 - p.gamma) * infl - p.alpha) * omega,
        (k / p.nu - p.alpha - p.beta - p.delta) * e,
        (p.r - gam) * ell + k,
        (p.r_m - gam) * m_f - omega + 1.0 - p.t_share,
    )


def aux_vector_field(
    core: CoreState, aux: AuxState, params: ModelParams, portfolio: PortfolioMatrix
) -> AuxState:
    omega, _, ell, m_f = core
    theta_h, theta_b, h, m_h, d = aux
    p = params
    lam0, lam1, lam2, lam3 = saving_weights(p, portfolio)
    pi = profit_share(omega, ell, m_f, p)
    k = kappa(pi, p)
    gam = k / p.nu - p.delta + inflation(omega, p)
    xi = xi_flow(omega, ell, m_f, theta_h + theta_b, p)
    return AuxState(
        -gam * theta_h + lam1 * xi,
        -gam * theta_b
        + (lam3 + (1.0 - p.f) * lam2) * xi
        - (1.0 - p.k_r) * k
        + (1.0 - p.f) * pi
        + (p.k_r - p.f) * p.r * ell,
        -gam * h + lam0 * xi,
        -gam * m_h + lam2 * xi,
        -gam * d + lam3 * xi,
    )


def joint_vector_field(y, params: ModelParams, portfolio: PortfolioMatrix) -> np.ndarray:
    core, aux = split_state(y)
    return join_state(core_vector_field(core, params), aux_vector_field(core, aux, params, portfolio))


def make_rhs(params: ModelParams, portfolio: PortfolioMatrix) -> Callable[[float, np.ndarray], np.ndarray]:
    """Autonomous right-hand side ``f(t, y)`` of the joint 9-dimensional system."""

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        return joint_vector_field(y, params, portfolio)

    return rhs
