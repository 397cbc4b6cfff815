import numpy as np
import pytest

from narrowbank.dynamics import AuxState, CoreState
from narrowbank.equilibrium import explosive_growth_limit, interior_equilibrium
from narrowbank.integrator import (
    IntegratorConfig,
    PreconditionError,
    Termination,
    Trajectory,
    classify_regime,
    growth_series,
    integrate,
    onset_of_decline,
)
from narrowbank.model import ModelParams, PortfolioMatrix

from oracles import BASE, blow_up_time, core_solution

P = ModelParams()
PM = PortfolioMatrix()
AUX = AuxState(0.1, 0.1, 0.05, 0.2, 0.3)
LOW_DEBT = CoreState(0.75, 0.9, 0.6, 0.19111)
HIGH_DEBT = CoreState(0.75, 0.9, 6.0, 5.711)


def test_matches_scipy_reference(converging):
    cfg = IntegratorConfig(horizon=50.0, cadence=1.0)
    traj = integrate(LOW_DEBT, AUX, converging, PM, cfg)
    ref = core_solution({**BASE, "r": 0.01}, list(LOW_DEBT), traj.t)
    assert np.max(np.abs(traj.core - ref)) < 1e-7


def test_blow_up_time_matches_scipy_reference():
    traj = integrate(LOW_DEBT, AUX, P, PM)
    assert traj.termination == Termination.BLOW_UP
    assert traj.t_end == pytest.approx(blow_up_time(BASE, list(LOW_DEBT)), abs=1e-4)
    assert traj["ell"][-1] == pytest.approx(1e6, rel=1e-9)
    assert traj.t_end < 100.0


def test_fixed_point_is_stationary(converging):
    eq = interior_equilibrium(converging)
    traj = integrate(eq.core, AUX, converging, PM)
    assert traj.termination == Termination.CONVERGED
    assert np.max(np.abs(traj.core[-1] - np.array(eq.core))) <= 1e-8


def test_converges_to_interior_equilibrium(converging):
    traj = integrate(LOW_DEBT, AUX, converging, PM, IntegratorConfig(horizon=600.0))
    eq = interior_equilibrium(converging)
    assert traj.termination == Termination.CONVERGED
    assert abs(traj["omega"][-1] - eq.omega_bar) <= 1e-3
    assert abs(traj["e"][-1] - eq.e_bar) <= 1e-3
    assert classify_regime(traj, converging) == "interior"
    assert onset_of_decline(traj, converging) is None


def test_high_debt_explodes():
    traj = integrate(HIGH_DEBT, AUX, P, PM)
    assert traj.termination == Termination.BLOW_UP
    g = growth_series(traj, P)
    tail = traj.t >= traj.t_end - 10.0
    assert np.all(np.abs(g[tail] - explosive_growth_limit(P)) <= 5e-3)
    assert classify_regime(traj, P) == "explosive"
    assert onset_of_decline(traj, P) == 0.0


def test_samples_on_cadence_and_finite():
    cfg = IntegratorConfig(horizon=10.0, cadence=0.5)
    traj = integrate(LOW_DEBT, AUX, P, PM, cfg)
    assert np.all(np.diff(traj.t) > 0)
    assert traj.t[:-1] == pytest.approx(np.arange(0, 10.0, 0.5), abs=1e-12)
    assert traj.t[-1] == 10.0
    assert traj.termination == Termination.HORIZON
    assert np.all(np.isfinite(traj.states))
    assert np.all(traj["e"] < 1 - cfg.employment_guard)


def test_deterministic():
    a = integrate(HIGH_DEBT, AUX, P, PM)
    b = integrate(HIGH_DEBT, AUX, P, PM)
    assert a.t.tobytes() == b.t.tobytes()
    assert a.states.tobytes() == b.states.tobytes()


def test_rk4_step_halving(converging):
    cfg = IntegratorConfig(method="rk4", horizon=100.0, first_step=0.02)
    a = integrate(LOW_DEBT, AUX, converging, PM, cfg)
    b = integrate(LOW_DEBT, AUX, converging, PM, cfg.replace(first_step=0.01))
    assert np.max(np.abs(a.core[-1] - b.core[-1])) <= 1e-6


def test_adaptive_agrees_with_fine_rk4(converging):
    cfg = IntegratorConfig(horizon=50.0)
    a = integrate(LOW_DEBT, AUX, converging, PM, cfg)
    b = integrate(LOW_DEBT, AUX, converging, PM, cfg.replace(method="rk4", first_step=0.005))
    scale = cfg.rtol * np.abs(a.core[-1]) + cfg.atol
    assert np.all(np.abs(a.core[-1] - b.core[-1]) <= 10 * scale)


def test_singular_employment():
    # with a zero wage share profits stay high and employment keeps rising
    start = CoreState(0.0, 1 - 2e-6, 0.0, 0.0)
    traj = integrate(start, AUX, P, PM, IntegratorConfig(horizon=5.0))
    assert traj.termination == Termination.SINGULAR
    assert np.all(traj["e"] < 1 - 1e-6)


def test_numerical_failure_is_recorded():
    cfg = IntegratorConfig(rtol=1e-30, atol=1e-30)
    traj = integrate(LOW_DEBT, AUX, P, PM, cfg)
    assert traj.termination == Termination.FAILURE
    assert "underflow" in traj.message


def test_preconditions():
    with pytest.raises(PreconditionError):
        integrate(CoreState(0.7, 1.0, 0.6, 0.2), AUX, P, PM)
    with pytest.raises(PreconditionError):
        integrate(LOW_DEBT, AUX, P.replace(f=2.0), PM)
    with pytest.raises(PreconditionError):
        integrate(CoreState(0.7, 0.9, np.nan, 0.2), AUX, P, PM)
    with pytest.raises(PreconditionError):
        integrate(LOW_DEBT, AUX, P, PM, IntegratorConfig(min_step=1.0, max_step=0.1))


def test_config_violations():
    assert IntegratorConfig().violations() == []
    bad = IntegratorConfig(method="euler", employment_guard=0.5, blowup_threshold=5.0).violations()
    assert len(bad) == 3


def test_zero_horizon():
    traj = integrate(LOW_DEBT, AUX, P, PM, IntegratorConfig(horizon=0.0))
    assert len(traj) == 1
    assert classify_regime(traj, P) == "indeterminate"


def _synthetic(pis_omega, params):
    t = np.arange(len(pis_omega), dtype=float)
    states = np.array([[w, 0.9, 0.0, 0.0, 0, 0, 0, 0, 0] for w in pis_omega])
    return Trajectory(t, states, Termination.HORIZON, t[-1])


def test_onset_edge_cases():
    p = P
    # omega close to 1 - t gives a negative profit share and shrinking output
    shrinking = _synthetic([0.9] * 5, p)
    assert onset_of_decline(shrinking, p) == 0.0
    growing = _synthetic([0.5] * 5, p)
    assert onset_of_decline(growing, p) is None
    turning = _synthetic([0.5, 0.5, 0.9, 0.5, 0.9, 0.9], p)
    assert onset_of_decline(turning, p) == 4.0
