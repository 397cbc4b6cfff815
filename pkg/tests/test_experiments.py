import math
import re

import numpy as np
import pytest

from narrowbank.config import ConfigError
from narrowbank.equilibrium import interior_equilibrium
from narrowbank.experiments import (
    CSV_COLUMNS,
    REPORTED,
    Scenario,
    builtin_scenarios,
    compare_regimes,
    dump_scenario,
    equivalence_gap,
    export_csv,
    export_svg,
    load_scenario,
    read_csv_header,
    read_csv_rows,
    resolve_scenario,
    run_scenario,
    scenario_from_csv,
    scenario_from_mapping,
)
from narrowbank.accounting import balance_sheet_audit, extensive_from_intensive


@pytest.fixture(scope="module")
def converged(builtins, converging):
    """Low-debt runs under the converging variant, long enough to settle."""
    out = {}
    for name in ("fractional-finite", "narrow-finite"):
        s = builtins[name].with_overrides([("r", converging.r), ("integrator.horizon", 600.0), ("integrator.cadence", 1.0)])
        out[name] = run_scenario(s)
    return out


def test_builtin_registry(builtins):
    assert list(builtins) == ["fractional-finite", "fractional-explosive", "narrow-finite", "narrow-explosive"]
    for name, s in builtins.items():
        assert s.config.horizon == 100.0
        narrow = name.startswith("narrow")
        assert s.params.f == (1.0 if narrow else 0.1)
        assert s.solved_key() == ("theta_b" if narrow else "m_f")
        assert s.initial["ell"] == (6.0 if "explosive" in name else 0.6)
        core, aux = s.initial_state()
        assert balance_sheet_audit(extensive_from_intensive(core, aux, s.params), s.params).ok
    assert builtins["fractional-finite"].initial["theta_b"] == 0.1


def test_narrow_initial_bank_bills(builtins):
    assert builtins["narrow-finite"].initial_state()[1].theta_b == pytest.approx(-0.252, abs=1e-14)
    assert builtins["narrow-explosive"].initial_state()[1].theta_b == pytest.approx(-5.22, abs=1e-14)


def test_converging_runs_reach_equilibrium(converged, converging):
    eq = interior_equilibrium(converging)
    a, b = converged["fractional-finite"], converged["narrow-finite"]
    for bundle in (a, b):
        assert bundle.regime == "interior"
        assert abs(bundle.terminal_growth - (converging.alpha + converging.beta)) <= 1e-3
        assert bundle.onset is None
        assert bundle.audits_ok
    ta, tb = a.trajectory.terminal[0], b.trajectory.terminal[0]
    assert abs(ta.omega - tb.omega) <= 1e-3 and abs(ta.e - tb.e) <= 1e-3
    assert abs(ta.omega - eq.omega_bar) <= 1e-3


def test_converging_equivalence(builtins, converging):
    for name in ("fractional-finite", "narrow-finite"):
        bundle = run_scenario(builtins[name].with_overrides([("r", converging.r)]))
        assert np.all(equivalence_gap(bundle) <= 10.0)


def test_converging_comparison(converged):
    rep = compare_regimes(converged["fractional-finite"], converged["narrow-finite"])
    assert rep.equilibrium_growth_difference == 0.0
    assert abs(rep.terminal_growth_difference) <= 1e-4
    assert any("equilibrium growth difference: 0 (<= 1e-4)" in ln for ln in rep.lines())


def test_comparison_symmetry(bundles):
    ab = compare_regimes(bundles["fractional-explosive"], bundles["narrow-explosive"])
    ba = compare_regimes(bundles["narrow-explosive"], bundles["fractional-explosive"])
    assert ab.terminal_growth_difference == -ba.terminal_growth_difference
    assert ab.onset_difference == -ba.onset_difference
    assert ab.crossing_difference == -ba.crossing_difference
    assert ab.narrow_onset_earlier == ba.narrow_onset_earlier


def test_identical_bundles_compare_to_zero(bundles):
    b = bundles["fractional-finite"]
    rep = compare_regimes(b, b)
    assert rep.terminal_growth_difference == 0.0
    assert rep.onset_difference == 0.0
    assert rep.crossing_difference == 0.0
    assert rep.narrow_onset_earlier is None


def test_reported_values_are_annotations(bundles):
    rep = compare_regimes(bundles["fractional-finite"], bundles["narrow-finite"])
    names = {(n.scenario, n.quantity) for n in rep.annotations}
    assert ("fractional-finite", "pi_bar") in names
    assert any(ln.startswith("reported fractional-finite pi_bar: 0.1248") for ln in rep.lines())
    assert REPORTED["fractional-explosive"]["terminal_growth"] == -0.0522


def test_zero_horizon(builtins):
    b = run_scenario(builtins["fractional-finite"].with_overrides([("integrator.horizon", 0.0)]))
    assert len(b.trajectory) == 1
    assert b.regime == "indeterminate"


def test_initialization_error_recorded(builtins, tmp_path):
    bad = builtins["narrow-finite"].with_overrides([("initial.m_f", "auto"), ("initial.theta_b", 0.1)])
    b = run_scenario(bad)
    assert b.error is not None and "not pinned" in b.error
    path = export_csv(b, tmp_path / "empty.csv")
    cols, rows = read_csv_rows(path)
    assert cols == CSV_COLUMNS and rows.shape == (0, len(CSV_COLUMNS))


def test_csv_layout(bundles, tmp_path):
    b = bundles["fractional-finite"]
    path = export_csv(b, tmp_path / "a.csv")
    cols, rows = read_csv_rows(path)
    assert cols == CSV_COLUMNS
    assert np.all(np.diff(rows[:, 0]) > 0)
    assert rows[:, 1:10] == pytest.approx(b.trajectory.states, rel=0, abs=0)
    assert np.all(rows[:, -1] <= 1e-10)
    header = read_csv_header(path)
    assert header["initial.m_f"] == "auto"
    assert header["resolved.m_f"] == b.core0.m_f
    for key in ("r", "kappa4", "lambda22", "integrator.rtol", "initial.omega"):
        assert key in header


def test_csv_final_row_at_equilibrium(converged, converging, tmp_path):
    path = export_csv(converged["fractional-finite"], tmp_path / "c.csv")
    _, rows = read_csv_rows(path)
    assert rows[-1, 1] == pytest.approx(interior_equilibrium(converging).omega_bar, abs=1e-3)


def test_csv_reproducible_and_header_round_trip(builtins, tmp_path):
    s = builtins["narrow-explosive"]
    a = export_csv(run_scenario(s), tmp_path / "a.csv").read_bytes()
    b = export_csv(run_scenario(s), tmp_path / "b.csv").read_bytes()
    assert a == b
    again = scenario_from_csv(tmp_path / "a.csv")
    assert again == s
    c = export_csv(run_scenario(again), tmp_path / "c.csv").read_bytes()
    assert c == a


def test_header_rejects_tampered_resolved_value(bundles, tmp_path):
    path = export_csv(bundles["fractional-finite"], tmp_path / "a.csv")
    text = path.read_text().replace("# initial.ell = 0.6", "# initial.ell = 0.7")
    path.write_text(text)
    with pytest.raises(ConfigError, match="does not match the solved value"):
        scenario_from_csv(path)


def _polyline(svg: str, name: str):
    m = re.search(rf'data-series="{name}"[^>]*points="([^"]*)"', svg)
    return np.array([[float(v) for v in p.split(",")] for p in m.group(1).split()])


def test_svg_panels(bundles, tmp_path):
    svg = export_svg(bundles["narrow-finite"], tmp_path / "n.svg").read_text()
    assert svg.startswith("<?xml") and 'version="1.1"' in svg
    for name in ("omega", "e", "ell", "m_f", "theta_h", "theta_b", "h", "m_h", "d"):
        assert f'data-series="{name}"' in svg
    zeros = [float(m) for m in re.findall(r'class="zero" x1="[^"]*" y1="([^"]*)"', svg)]
    assert len(zeros) == 2
    theta_b = _polyline(svg, "theta_b")
    # screen y grows downwards; tiny values may round onto the zero line
    assert np.all(theta_b[:, 1] >= zeros[1])
    assert np.all(bundles["narrow-finite"].trajectory["theta_b"] < 0)


def test_scenario_files(builtins, tmp_path):
    s = builtins["fractional-explosive"]
    path = tmp_path / "s.txt"
    path.write_text(dump_scenario(s))
    assert load_scenario(path) == s
    assert resolve_scenario(str(path)) == s
    assert resolve_scenario("narrow-finite") == builtins["narrow-finite"]
    with pytest.raises(ConfigError, match="no builtin"):
        resolve_scenario(str(tmp_path / "missing.txt"))


def test_scenario_mapping_errors(builtins):
    s = builtins["fractional-finite"]
    with pytest.raises(ConfigError, match="unknown key"):
        s.with_overrides([("bogus", 1.0)])
    with pytest.raises(ConfigError, match="unknown key"):
        s.with_overrides([("initial.x", 1.0)])
    with pytest.raises(ConfigError, match="auto"):
        s.with_overrides([("initial.e", "lots")])
    with pytest.raises(ConfigError, match="integrator"):
        s.with_overrides([("integrator.cadence", -1.0)])
    with pytest.raises(ConfigError, match="missing key"):
        scenario_from_mapping({"label": "x"})


def test_overrides_apply_in_order(builtins):
    s = builtins["fractional-finite"].with_overrides([("r", 0.02), ("r", 0.03), ("integrator.method", "rk4")])
    assert s.params.r == 0.03
    assert s.config.method == "rk4"
    assert isinstance(s, Scenario)


def test_bundle_summary(bundles):
    s = bundles["fractional-explosive"].summary()
    assert s["regime"] == "explosive"
    assert s["termination"] == "blow-up"
    assert math.isfinite(s["terminal_growth"])
    assert s["terminal.ell"] == pytest.approx(1e6, rel=1e-9)
