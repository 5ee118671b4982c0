from math import pi

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stablecz import montecarlo as M
from stablecz import symbols as S
from stablecz.density import StableSpec
from stablecz.fields import Geometry, SampledField

GEOM = Geometry(1, 8.0, 256)
X = GEOM.axis()
F = SampledField(GEOM, np.exp(-X ** 2 / 0.5), "f")
G = SampledField(GEOM, np.exp(-(X - 0.5) ** 2), "g")
BR = StableSpec(1.0, 1)
ST = StableSpec(2.0, 1)


def small(mode="br", n=400, **kw):
    kw.setdefault("start_height", 1.0 if mode == "br" else 0.5)
    return M.PathConfig(mode=mode, n_paths=n, **kw)


def test_config_defaults_and_validation():
    c = M.PathConfig(start_height=4.0)
    assert c.h_t == pytest.approx(4e-3)
    assert c.mode == M.BACKGROUND
    with pytest.raises(ValueError):
        M.PathConfig(mode="other")
    with pytest.raises(ValueError):
        M.PathConfig(n_paths=0)


def test_extension_bottom_rung_is_field():
    ext = M.extend(F, BR)
    assert np.max(np.abs(ext.u[0] - F.values)) < 1e-12


@given(st.integers(1, 5), st.floats(0.0, 3.0))
@settings(max_examples=10)
def test_extension_single_harmonic(k, y):
    f = SampledField(GEOM, np.cos(2 * pi * k * X / GEOM.L), "cos")
    ext = M.extend(f, BR)
    val = ext.value(X[::16], np.full(16, y))
    assert val == pytest.approx(np.exp(-2 * pi * k * y / GEOM.L) * f.values[::16],
                                abs=2e-3)


def test_vertical_derivative_mean_zero():
    ext = M.extend(F, BR)
    assert np.max(np.abs(ext.grad_y.mean(axis=1))) < 1e-12


def test_unsupported_alpha():
    with pytest.raises(ValueError):
        M.extend(F, StableSpec(1.5, 1))


def test_zero_symbol_and_zero_field_exact():
    ens = M.run_paths(small(), BR, S.zero(1), F)
    assert np.all(ens.transform == 0)
    zero = SampledField(GEOM, np.zeros(GEOM.N), "0")
    ens = M.run_paths(small(), BR, S.identity(1), zero)
    assert np.all(ens.transform == 0)
    ens = M.run_paths(small("st"), ST, S.spatial_identity(1), zero)
    assert np.all(ens.transform == 0)


def test_reproducible_bitwise():
    a = M.run_paths(small(n=200, seed=7), BR, S.riesz(1, 1), F)
    b = M.run_paths(small(n=200, seed=7), BR, S.riesz(1, 1), F)
    assert np.array_equal(a.transform, b.transform)
    assert np.array_equal(a.endpoint, b.endpoint)
    c = M.run_paths(small(n=200, seed=8), BR, S.riesz(1, 1), F)
    assert not np.array_equal(a.transform, c.transform)


def test_path_prefix_independent_of_count():
    a = M.run_paths(small(n=50, seed=3), BR, S.identity(1), F)
    b = M.run_paths(small(n=120, seed=3), BR, S.identity(1), F)
    assert np.array_equal(a.transform[0], b.transform[0][:50])


def test_mode_spec_mismatch():
    with pytest.raises(ValueError):
        M.run_paths(small("st"), BR, S.identity(1), F)
    with pytest.raises(ValueError):
        M.run_paths(small("st"), ST, S.riesz(1, 1), F)


def test_duality_quadrature_matches_truncated_multiplier():
    for name in ("identity", "riesz_1", "riesz2_11"):
        A = S.get_symbol(name, 1)
        for Y in (1.0, 4.0):
            rhs = M.duality_rhs(F, G, A, "br", height=Y)
            tf = M.apply_truncated(F, A, "br", height=Y)
            assert rhs == pytest.approx(np.sum(tf.values * G.values) * GEOM.h,
                                        rel=1e-10)
    A = S.spatial_identity(1)
    rhs = M.duality_rhs(F, G, A, "st", height=1.0)
    tf = M.apply_truncated(F, A, "st", height=1.0)
    assert rhs == pytest.approx(np.sum(tf.values * G.values) * GEOM.h, rel=1e-10)


def test_identity_duality_full_height_is_pairing():
    # m = 1 away from the zero mode, so the full pairing drops the mean term
    rhs = M.duality_rhs(F, G, S.identity(1), "br")
    mean_term = F.integral() * G.integral() / GEOM.L
    assert rhs == pytest.approx(np.sum(F.values * G.values) * GEOM.h - mean_term,
                                rel=1e-8)


def test_duality_and_norm_statistics():
    ens = M.run_paths(M.PathConfig(n_paths=3000, start_height=1.0, seed=11),
                      BR, [S.identity(1), S.riesz(1, 1)], F)
    for A in (S.identity(1), S.riesz(1, 1)):
        assert M.check_duality(ens, F, G, A).within(4)
    assert M.check_norm_preservation(ens, F, 2).within(4)
    ratio, se = M.calibration(ens, F, G, S.identity(1))
    assert abs(ratio - 1) < 4 * se


def test_spacetime_duality():
    ens = M.run_paths(M.PathConfig("st", 1e-2, 0.5, 3000, 5), ST,
                      S.spatial_identity(1), F)
    assert M.check_duality(ens, F, G, S.spatial_identity(1)).within(4)


def test_project_bins():
    ens = M.run_paths(small(n=2000), BR, [S.zero(1), S.identity(1)], F)
    pr = M.project(ens, 8, "zero")
    assert np.all(pr.mean[pr.counts > 0] == 0)
    pr = M.project(ens, 8, "identity")
    assert pr.counts.sum() == ens.endpoint.size
    assert pr.centers.size == 8


def test_bin_average_constant():
    one = SampledField(GEOM, np.ones(GEOM.N))
    assert M.bin_average(one, 16) == pytest.approx(np.ones(16))


def test_records_shape():
    ens = M.run_paths(small(n=20), BR, S.identity(1), F)
    rec = ens.to_records()
    assert len(rec) == 20 and set(rec[0]) == {"endpoint", "transform_value",
                                              "terminal_f"}
