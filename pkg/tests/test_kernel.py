from math import pi

import numpy as np
import pytest
from hypothesis import given, strategies as st

from stablecz import kernel as K
from stablecz import symbols as S
from stablecz.density import StableSpec, get_profile


def kval(spec, A, u):
    u = np.atleast_1d(np.asarray(u, float))
    return K.kernel_full(spec, A, u, np.zeros_like(u)).value


@given(st.floats(0.05, 20.0), st.sampled_from([-1.0, 1.0]))
def test_hilbert_kernel(r, sign):
    spec = StableSpec(1.0, 1)
    assert kval(spec, S.riesz(1, 1), [sign * r]) == pytest.approx(
        1 / (pi * sign * r), rel=1e-7)


def test_riesz_kernel_plane():
    spec = StableSpec(1.0, 2)
    assert kval(spec, S.riesz(1, 2), [1.0, 0.0]) == pytest.approx(
        1 / (2 * pi), rel=1e-7)
    assert abs(kval(spec, S.riesz(1, 2), [0.0, 1.0])) < 1e-12


@given(st.floats(0.0, 2 * pi))
def test_second_order_riesz_kernel_heat(t):
    # -xi_i xi_j / (2 |xi|^2) is half of d_i d_j applied to the inverse of
    # -Laplacian, whose kernel is -log|u| / (2 pi)
    spec = StableSpec(2.0, 2)
    u = np.array([np.cos(t), np.sin(t)])
    assert kval(spec, S.riesz2(1, 2, 2), u) == pytest.approx(
        u[0] * u[1] / (2 * pi), rel=1e-7, abs=1e-10)
    assert kval(spec, S.riesz2(1, 1, 2), u) == pytest.approx(
        (u[0] ** 2 - u[1] ** 2) / (4 * pi), rel=1e-7, abs=1e-10)


@given(st.sampled_from([0.7, 1.0, 1.5, 2.0]), st.integers(-3, 3))
def test_homogeneity(alpha, k):
    spec = StableSpec(alpha, 2)
    A = S.riesz(2, 2)
    e = np.array([0.6, 0.8])
    base = kval(spec, A, e)
    r = 2.0 ** k
    assert r ** 2 * kval(spec, A, r * e) == pytest.approx(base, rel=1e-5)


def test_spatial_constant_kernel_vanishes_in_one_dimension():
    spec = StableSpec(1.5, 1)
    assert abs(kval(spec, S.spatial_identity(1), [0.8])) < 1e-10


def test_zero_symbol_kernel():
    assert kval(StableSpec(1.0, 1), S.zero(1), [1.0]) == 0.0


def test_singular_diagonal():
    with pytest.raises(ValueError):
        kval(StableSpec(1.0, 1), S.riesz(1, 1), [0.0])


def test_relativistic_rejected():
    with pytest.raises(ValueError):
        kval(StableSpec.make(1.0, 1, 1.0), S.riesz(1, 1), [1.0])


def test_gradient_analytic_vs_differences():
    spec = StableSpec(1.5, 2)
    A = S.get_symbol("identity@exp_neg_y", 2)
    x, xt = np.array([0.9, -0.3]), np.zeros(2)
    g = K.kernel_gradient(spec, A, x, xt)
    fd = K.finite_difference_gradient(spec, A, x, xt)
    assert g == pytest.approx(fd, rel=1e-5, abs=1e-9)


def test_general_route_matches_semigroup():
    spec = StableSpec(1.5, 1)
    prof = get_profile(spec)
    a = S.FY_CATALOG["exp_neg_y"][0]
    x, xt = np.array([1.0]), np.array([0.0])
    sg = K.kernel_entry_semigroup(spec, a, 0, 0, x - xt, profile=prof).value
    gen = K.kernel_entry_general(spec, lambda pts, y: a(y), 0, 0, x, xt,
                                 profile=prof).value
    assert gen == pytest.approx(sg, rel=1e-5)


def test_hilbert_size_constants():
    spec = StableSpec(1.0, 1)
    signed = [K.kernel_entry_semigroup(spec, a, i, j, np.array([1.0])).value
              for a, i, j in ((1.0, 1, 0), (-1.0, 0, 1))]
    assert signed == pytest.approx([1 / (2 * pi)] * 2, rel=1e-7)
    # integrating |h| bounds the signed kernel from above
    c1 = K.size_constant(spec, 1, 0, [1.0])
    c2 = K.size_constant(spec, 0, 1, [1.0])
    assert c1 + c2 >= 1 / pi


def test_smoothness_constant_positive():
    spec = StableSpec(1.0, 1)
    c = K.smoothness_constant(spec, 1, 0, 0, [1.0])
    assert np.isfinite(c) and c > 0


def test_general_bound_vertical_rejected():
    with pytest.raises(ValueError):
        K.size_constant(StableSpec(1.0, 1), 1, 0, [1.0], method="general")
