"""Independent reference computations used by the tests.

Nothing here imports the package's numerical routines: formulas are written
out again from the model equations, and root finding and integration use
plain bisection or scipy.
"""

import math

import numpy as np
from scipy.integrate import solve_ivp

# baseline calibration, written out by hand
BASE = dict(
    r=0.04, r_d=0.02, r_theta=0.012, r_m=0.01, alpha=0.025, beta=0.02, eta_p=0.35, m=1.6,
    gamma=0.8, g_share=0.2, t_share=0.08, nu=3.0, delta=0.05, k_r=0.08, f=0.1,
    phi0=0.0401, phi1=6.41e-5, kappa0=-0.0056, kappa1=0.8, kappa2=1.0, kappa3=2.0,
    kappa4=10.0, xi=4.0,
)


def kappa(pi, q):
    with np.errstate(over="ignore"):
        den = (q["kappa2"] + q["kappa3"] * np.exp(np.float64(-q["kappa4"] * pi))) ** q["xi"]
    return float(q["kappa0"] + q["kappa1"] / den)


def kappa_inverse_closed(y, q):
    """Solve the logistic for pi in closed form."""
    inner = (q["kappa1"] / (y - q["kappa0"])) ** (1.0 / q["xi"]) - q["kappa2"]
    return -math.log(inner / q["kappa3"]) / q["kappa4"]


def phillips(e, q):
    return q["phi1"] / (1.0 - e) ** 2 - q["phi0"]


def bisect(fn, lo, hi, tol=1e-15, iters=300):
    flo = fn(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = fn(mid)
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def reduced_lambdas(lam0, intercepts, l11, l12, l22, rates):
    """Savings weights as intercepts plus the full sensitivity matrix times
    the rate vector (bills, demand deposits, time deposits)."""
    full = np.array(
        [
            [l11, l12, -(l11 + l12)],
            [l12, l22, -(l12 + l22)],
            [-(l11 + l12), -(l12 + l22), l11 + 2 * l12 + l22],
        ]
    )
    lam = np.array(intercepts) + full @ np.array(rates)
    return (lam0, *lam.tolist())


def core_rhs(q):
    def f(t, y):
        w, e, l, mf = y
        pi = 1 - q["t_share"] - w - q["r"] * l + q["r_m"] * mf
        k = kappa(pi, q)
        i = q["eta_p"] * (q["m"] * w - 1)
        gam = k / q["nu"] - q["delta"] + i
        return [
            (phillips(e, q) - (1 - q["gamma"]) * i - q["alpha"]) * w,
            (k / q["nu"] - q["alpha"] - q["beta"] - q["delta"]) * e,
            (q["r"] - gam) * l + k,
            (q["r_m"] - gam) * mf - w + 1 - q["t_share"],
        ]

    return f


def equilibrium_brute(q, n=20000):
    """Fixed points of the core system by dense scan and bisection in omega."""
    pi_bar = kappa_inverse_closed(q["nu"] * (q["alpha"] + q["beta"] + q["delta"]), q)
    k = kappa(pi_bar, q)

    def parts(w):
        gam = q["alpha"] + q["beta"] + q["eta_p"] * (q["m"] * w - 1)
        return gam, k / (gam - q["r"]), (1 - q["t_share"] - w) / (gam - q["r_m"])

    def resid(w):
        gam, l, mf = parts(w)
        return 1 - q["t_share"] - w - q["r"] * l + q["r_m"] * mf - pi_bar

    def gam_of(w):
        return parts(w)[0]

    grid = np.linspace(1e-4, 1 - q["t_share"] - 1e-4, n)
    out = []
    for a, b in zip(grid[:-1], grid[1:]):
        ga, gb = gam_of(a), gam_of(b)
        if (ga - q["r"]) * (gb - q["r"]) <= 0 or (ga - q["r_m"]) * (gb - q["r_m"]) <= 0:
            continue
        if resid(a) * resid(b) < 0:
            w = bisect(resid, a, b)
            gam, l, mf = parts(w)
            y = q["alpha"] + (1 - q["gamma"]) * q["eta_p"] * (q["m"] * w - 1)
            e = 1 - math.sqrt(q["phi1"] / (y + q["phi0"]))
            out.append(dict(omega=w, e=e, ell=l, m_f=mf, gamma=gam, pi=pi_bar))
    return out


def blow_up_time(q, y0, threshold=1e6, horizon=200.0):
    """Time at which the loan ratio reaches ``threshold``, by scipy DOP853."""

    def ev(t, y):
        return y[2] - threshold

    ev.terminal = True
    sol = solve_ivp(core_rhs(q), (0, horizon), y0, method="DOP853", rtol=1e-11, atol=1e-12, events=ev)
    return sol.t_events[0][0] if len(sol.t_events[0]) else None


def core_solution(q, y0, t_eval):
    sol = solve_ivp(
        core_rhs(q), (0, t_eval[-1]), y0, method="DOP853", rtol=1e-12, atol=1e-13, t_eval=t_eval
    )
    return sol.y.T
