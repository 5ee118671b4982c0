from math import gamma, pi

import numpy as np
import pytest
from hypothesis import given, strategies as st

from stablecz import density as D
from stablecz.density import StableSpec


def gaussian(n, r):
    return (4 * pi) ** (-n / 2) * np.exp(-r * r / 4)


def cauchy(n, r):
    return gamma((n + 1) / 2) / pi ** ((n + 1) / 2) * (1 + r * r) ** (-(n + 1) / 2)


def test_spec_validation():
    with pytest.raises(ValueError):
        StableSpec(0.0)
    with pytest.raises(ValueError):
        StableSpec(2.5)
    with pytest.raises(ValueError):
        StableSpec(1.0, 0)
    with pytest.raises(ValueError):
        StableSpec(1.0, 1, D.PURE, 1.0)
    assert StableSpec.make(1.0, 2, 0.5).kind == D.RELATIVISTIC


def test_fourier_transform_at_origin_is_one():
    for a in (0.5, 1.0, 2.0):
        assert D.fourier_transform(StableSpec(a), 0.0) == 1.0


@given(st.floats(0.0, 30.0), st.sampled_from([1, 2, 3]))
def test_cauchy_closed_form(r, n):
    x = np.zeros(n)
    x[0] = r
    v = D.eval_density_fourier(StableSpec(1.0, n), x)
    assert v == pytest.approx(cauchy(n, r), rel=1e-8)


@given(st.floats(0.0, 8.0), st.sampled_from([1, 2]))
def test_gaussian_closed_form(r, n):
    x = np.full(n, r / np.sqrt(n))
    v = D.eval_density_fourier(StableSpec(2.0, n), x)
    assert v == pytest.approx(gaussian(n, r), rel=1e-8)


def test_origin_value_matches_transform():
    for a in (0.7, 1.3):
        spec = StableSpec(a, 2)
        assert D.radial_at_origin(spec, 2) == pytest.approx(
            D.eval_density_fourier(spec, [0.0, 0.0]), rel=1e-10)


@pytest.mark.parametrize("alpha", [0.6, 1.5])
def test_routes_agree(alpha):
    spec = StableSpec(alpha, 1)
    for r in (0.0, 0.3, 2.0, 9.0):
        a = D.eval_density_fourier(spec, [r])
        b = D.eval_density_subordination(spec, [r])
        assert a == pytest.approx(b, rel=1e-6)


def test_scaling():
    spec = StableSpec(1.0, 1)
    y = 2.5
    assert D.eval_scaled(spec, [1.0], y) == pytest.approx(
        y / (pi * (y * y + 1)), rel=1e-9)
    with pytest.raises(ValueError):
        D.eval_scaled(spec, [1.0], 0.0)


def test_gradient_and_hessian_by_differences():
    spec = StableSpec(1.0, 2)
    x = np.array([0.7, -0.4])
    h = 1e-4
    g = D.grad_density(spec, x)
    H = D.second_derivs(spec, x)
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        fd = (D.eval_density_fourier(spec, x + e)
              - D.eval_density_fourier(spec, x - e)) / (2 * h)
        assert g[k] == pytest.approx(fd, rel=1e-6)
        fdg = (D.grad_density(spec, x + e) - D.grad_density(spec, x - e)) / (2 * h)
        assert H[:, k] == pytest.approx(fdg, rel=1e-5, abs=1e-10)


def test_relativistic_massless_is_pure():
    pure = StableSpec(1.2, 1)
    rel = StableSpec.make(1.2, 1, 0.0)
    for r in (0.0, 1.0, 5.0):
        assert D.eval_density_fourier(rel, [r]) == D.eval_density_fourier(pure, [r])


def test_relativistic_mass_thins_tail():
    pure = StableSpec(1.0, 1)
    rel = StableSpec.make(1.0, 1, 1.0)
    assert D.eval_density_fourier(rel, [20.0]) < D.eval_density_fourier(pure, [20.0])


@given(st.floats(50.0, 1e4), st.sampled_from([0.5, 0.7]), st.sampled_from([1, 2, 3]))
def test_tail_series_leading_term(r, alpha, m):
    lead = (2 ** alpha * gamma((alpha + m) / 2) * gamma(alpha / 2 + 1)
            * np.sin(pi * alpha / 2) * pi ** (-m / 2 - 1) * r ** (-alpha - m))
    val = D.tail_series(alpha, m, np.array([r]))[0]
    assert val == pytest.approx(lead, rel=10 * r ** (-alpha))


def test_tail_series_cauchy_exact():
    for m in (1, 3, 5):
        r = np.array([10.0, 100.0])
        exact = (gamma((m + 1) / 2) / pi ** ((m + 1) / 2)
                 * (1 + r * r) ** (-(m + 1) / 2))
        assert D.tail_series(1.0, m, r) == pytest.approx(exact, rel=1e-12)


def test_profile_against_closed_form():
    spec = StableSpec(1.0, 1)
    prof = D.get_profile(spec)
    r = np.array([0.01, 0.5, 3.0, 40.0, 5e3])
    assert prof.radial(0, r) == pytest.approx(cauchy(1, r), rel=1e-9)
    assert prof.radial(2, r) == pytest.approx(cauchy(3, r), rel=1e-9)


def test_profile_json_roundtrip(tmp_path):
    prof = D.get_profile(StableSpec(2.0, 1))
    out = tmp_path / "p.json"
    prof.to_json(out)
    import json
    d = json.loads(out.read_text())
    assert set(d) >= {"spec", "radii", "phi", "dphi", "d2phi"}
    assert len(d["radii"]) == len(d["phi"])


def test_decay_constants_cauchy():
    c0, c1, c2 = D.decay_constants(D.get_profile(StableSpec(1.0, 1)))
    assert c0 == pytest.approx(1 / pi, rel=1e-6)
    assert np.isfinite(c1) and np.isfinite(c2)
