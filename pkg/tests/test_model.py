import math
from dataclasses import asdict

import pytest

from narrowbank.model import (
    DomainError,
    ModelParams,
    PortfolioMatrix,
    RangeError,
    inflation,
    kappa,
    kappa_inverse,
    kappa_prime,
    kappa_upper,
    phillips,
    phillips_inverse,
    profit_share,
    reduced_lambdas,
    validate_params,
)

from oracles import BASE, kappa_inverse_closed
from oracles import kappa as kappa_ref

P = ModelParams()


def test_defaults_match_handwritten_calibration():
    assert asdict(P) == BASE


def test_phillips_values():
    assert phillips(0.0, P) == pytest.approx(-0.0400359, abs=5e-8)
    assert phillips(0.96, P) == pytest.approx(6.41e-5 / 0.0016 - 0.0401, rel=1e-12)
    assert phillips(0.96, P) == pytest.approx(-3.75e-5, abs=1e-12)


@pytest.mark.parametrize("e", [1.0, 1.5, -0.01, math.inf, math.nan])
def test_phillips_domain(e):
    with pytest.raises(DomainError):
        phillips(e, P)


def test_phillips_singular_message():
    with pytest.raises(DomainError, match="singular"):
        phillips(1.0, P)


def test_phillips_blows_up_near_one():
    assert phillips(1 - 1e-6, P) > 1e4


def test_phillips_inverse():
    assert phillips_inverse(phillips(0.9, P), P) == pytest.approx(0.9, rel=1e-12)
    assert phillips_inverse(-3.75e-5, P) == pytest.approx(0.96, rel=1e-12)
    with pytest.raises(DomainError):
        phillips_inverse(-0.05, P)
    with pytest.raises(DomainError):
        phillips_inverse(-P.phi0, P)


def test_kappa_values():
    assert kappa(0.0, P) == pytest.approx(-0.0056 + 0.8 / 81, rel=1e-14)
    assert kappa(0.0, P) == pytest.approx(0.0042765, abs=1e-7)
    assert kappa(-200.0, P) == pytest.approx(P.kappa0, abs=1e-15)
    assert kappa(50.0, P) == pytest.approx(0.7944, abs=1e-12)
    assert kappa_upper(P) == pytest.approx(0.7944, abs=1e-15)


def test_kappa_matches_reference_formula():
    for pi in [-3.0, -1.0, -0.2, 0.0, 0.1, 0.5, 2.0]:
        assert kappa(pi, P) == pytest.approx(kappa_ref(pi, BASE), rel=1e-13, abs=1e-16)


def test_kappa_extreme_arguments_do_not_overflow():
    # the power of the denominator overflows long before exp does
    assert kappa(-40.0, P) == pytest.approx(P.kappa0, abs=1e-15)
    assert kappa(-1e4, P) == P.kappa0
    assert kappa_prime(-40.0, P) >= 0.0


def test_kappa_nonfinite():
    with pytest.raises(DomainError):
        kappa(math.nan, P)


def test_kappa_prime_matches_finite_difference():
    for pi in [-0.5, 0.0, 0.2, 1.0]:
        h = 1e-6
        fd = (kappa(pi + h, P) - kappa(pi - h, P)) / (2 * h)
        assert kappa_prime(pi, P) == pytest.approx(fd, rel=1e-6)


def test_kappa_inverse_equilibrium_target():
    target = P.nu * (P.alpha + P.beta + P.delta)
    assert target == pytest.approx(0.285, abs=1e-15)
    got = kappa_inverse(target, P)
    assert got == pytest.approx(kappa_inverse_closed(target, BASE), abs=1e-12)
    assert got == pytest.approx(0.193760, abs=5e-7)
    assert abs(kappa(got, P) - target) <= 1e-12


def test_kappa_inverse_round_trip_point():
    assert kappa_inverse(kappa(0.1, P), P) == pytest.approx(0.1, abs=1e-10)


@pytest.mark.parametrize("target", [0.80, 0.7944, -0.0056, -1.0])
def test_kappa_inverse_range(target):
    with pytest.raises(RangeError):
        kappa_inverse(target, P)


def test_inflation():
    assert inflation(1 / P.m, P) == 0.0
    assert inflation(0.6948, P) == pytest.approx(0.039088, abs=1e-12)
    assert inflation(0.0, P) == -0.35


def test_reduced_lambdas_baseline():
    lam = reduced_lambdas(PortfolioMatrix(), (0.012, 0.01, 0.02))
    assert lam == pytest.approx((0.1, 0.278, 0.288, 0.334), abs=1e-15)
    assert math.fsum(lam) == pytest.approx(1.0, abs=1e-15)


def test_reduced_lambdas_intercepts_only():
    pm = PortfolioMatrix(lambda11=0.0, lambda12=0.0, lambda22=0.0)
    assert reduced_lambdas(pm, (0.012, 0.01, 0.02)) == pytest.approx((0.1, 0.3, 0.3, 0.3), abs=1e-15)


def test_portfolio_structure():
    pm = PortfolioMatrix()
    assert pm.lambda0 == pytest.approx(0.1, abs=1e-15)
    m = pm.sensitivities
    for i in range(3):
        assert sum(m[i][j] for j in range(3)) == 0.0
        for j in range(3):
            assert m[i][j] == m[j][i]


def test_profit_share():
    assert profit_share(1 - P.t_share, 0.0, 0.0, P) == 0.0
    assert profit_share(0.0, 0.0, 0.0, P) == pytest.approx(0.92, abs=1e-15)
    assert profit_share(0.6948, 4.1937, 0.7577, P) == pytest.approx(
        0.92 - 0.6948 - 0.04 * 4.1937 + 0.01 * 0.7577, abs=1e-15
    )
    assert profit_share(0.6948, 4.1937, 0.7577, P) == pytest.approx(0.06503, abs=1e-5)


def test_validate_params():
    assert validate_params(P) == []
    assert "reserve ratio out of [0,1]" in validate_params(P.replace(f=1.5))
    assert "investment amplitude must be positive" in validate_params(P.replace(kappa1=-1.0))
    assert any("investment range" in v for v in validate_params(P.replace(nu=100.0)))
    assert any("gamma" in v for v in validate_params(P.replace(gamma=1.2)))
    assert any("finite" in v for v in validate_params(P.replace(r=math.nan)))
