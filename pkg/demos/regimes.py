"""Run the four builtin scenarios and compare reserve regimes.

    python demos/regimes.py [OUTDIR]

Writes one CSV and one SVG per scenario plus a comparison text file.
"""

import sys
from pathlib import Path

from narrowbank import builtin_scenarios, compare_regimes, export_csv, export_svg, run_scenario

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo-output")
out.mkdir(parents=True, exist_ok=True)

bundles = {}
for name, scen in builtin_scenarios().items():
    b = run_scenario(scen)
    bundles[name] = b
    export_csv(b, out / f"{name}.csv")
    export_svg(b, out / f"{name}.svg")
    s = b.summary()
    opt = lambda x: "never" if x is None else f"{x:.1f}"
    print(f"{name:22s} {s['termination']:>16s} t={s['t_end']:8.3f}  regime={s['regime']:<13s}"
          f" g_end={s['terminal_growth']:+.5f}  onset={opt(s['onset'])}"
          f"  theta_b<-1 from {opt(s['theta_b_below_minus_one'])}")

lines = []
for a, b in (("fractional-finite", "narrow-finite"), ("fractional-explosive", "narrow-explosive")):
    lines += compare_regimes(bundles[a], bundles[b]).lines() + [""]
(out / "comparison.txt").write_text("\n".join(lines))
print()
print("\n".join(lines))
