"""A calibration with a lower loan rate, where the interior equilibrium
exists and attracts the finite-debt initial conditions.

    python demos/converging_variant.py

With r = 0.01 both reserve regimes settle on the same growth rate.
"""

from narrowbank import builtin_scenarios, interior_equilibrium, run_scenario

base = builtin_scenarios()
eq = interior_equilibrium(base["fractional-finite"].params.replace(r=0.01))
print(f"interior equilibrium: omega={eq.omega_bar:.6f} e={eq.e_bar:.6f} "
      f"ell={eq.ell_bar:.5f} m_f={eq.m_f_bar:.5f} growth={eq.growth_bar:.4f}")

for name in ("fractional-finite", "narrow-finite"):
    scen = base[name].with_overrides([("r", 0.01), ("integrator.horizon", 600.0)])
    b = run_scenario(scen, audit=False)
    core = b.trajectory.core[-1]
    gap = max(abs(x - y) for x, y in zip(core, eq.core))
    print(f"{name:18s} {b.termination} at t={b.trajectory.t_end:.1f}, "
          f"growth {b.terminal_growth:.6f}, distance to equilibrium {gap:.2e}")
