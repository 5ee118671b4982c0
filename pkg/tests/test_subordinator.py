from math import gamma, pi, sqrt

import numpy as np
import pytest
from hypothesis import given, strategies as st

from stablecz import subordinator as S
from stablecz.density import StableSpec
from stablecz.subordinator import SubordinatorSpec


def levy(s):
    return np.exp(-1 / (4 * s)) / (2 * sqrt(pi) * s ** 1.5)


def test_spec_validation():
    with pytest.raises(ValueError):
        SubordinatorSpec(0.0)
    with pytest.raises(ValueError):
        SubordinatorSpec(1.0)
    with pytest.raises(ValueError):
        SubordinatorSpec(0.5, -1.0)


@given(st.floats(1e-3, 1e4))
def test_half_index_general_route_matches_closed_form(s):
    assert S.general_stable_density(s, 0.5) == pytest.approx(levy(s), rel=1e-10)


@pytest.mark.parametrize("index", [0.25, 0.5, 0.75])
def test_laplace_residuals(index):
    res = S.laplace_residuals(SubordinatorSpec(index))
    assert max(abs(r) for r in res) <= 1e-6


def test_relativistic_laplace_residuals():
    res = S.laplace_residuals(SubordinatorSpec(0.5, 1.0))
    assert max(abs(r) for r in res) <= 1e-6


def test_total_mass():
    assert S.total_mass(SubordinatorSpec(0.75)) == pytest.approx(1.0, abs=1e-8)


@given(st.floats(0.0, 1e6), st.floats(0.05, 0.95))
def test_exponent_massless_is_power(lam, index):
    assert S.exponent(index, 0.0, lam) == pytest.approx(lam ** index, rel=1e-14)


@given(st.floats(1e-8, 1e3), st.floats(0.1, 3.0))
def test_exponent_relativistic_form(lam, m):
    c = m ** 2
    assert S.exponent(0.5, m, lam) == pytest.approx((lam + c) ** 0.5 - m,
                                                    rel=1e-9, abs=1e-14)


def test_exponent_rejects_negative():
    with pytest.raises(ValueError):
        S.exponent(0.5, 0.0, -1.0)


def test_eta_rejects_nonpositive():
    with pytest.raises(ValueError):
        S.eval_eta(SubordinatorSpec(0.5), 0.0)


def test_etabound_half():
    c = S.check_etabound(SubordinatorSpec(0.5))
    assert c == pytest.approx(1 / (2 * sqrt(pi)), rel=1e-6)


@pytest.mark.parametrize("index", [0.25, 0.75])
def test_tail_limit(index):
    spec = SubordinatorSpec(index)
    s = 1e12
    # next series term is smaller by a factor of order s**(-index)
    assert s ** (1 + index) * S.eval_eta(spec, s) == pytest.approx(
        S.tail_limit(spec), rel=2 * s ** (-index))
    assert S.tail_limit(spec) == pytest.approx(index / gamma(1 - index))


def test_growth_slope_pure():
    assert S.check_growth(SubordinatorSpec(0.3)) == pytest.approx(0.3, abs=1e-12)


@pytest.mark.parametrize("alpha", [1.0, 2.0])
def test_fourierray_value(alpha):
    assert S.check_fourierray(StableSpec(alpha)) == pytest.approx(
        1 / (16 * pi ** 2), rel=1e-8)


def test_fourierray_massless_reduction():
    a = S.check_fourierray(StableSpec.make(1.0, 1, 0.0))
    assert a == S.check_fourierray(StableSpec(1.0))


def test_eta_table_matches_direct():
    spec = SubordinatorSpec(0.75)
    tab = S.eta_table(spec)
    s = np.geomspace(1e-2, 1e3, 13)
    assert tab(s) == pytest.approx(S.eval_eta(spec, s), rel=1e-7)
