import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from stablecz import symbols as S
from stablecz.fields import Geometry, SampledField


def test_riesz_layout():
    A = S.riesz(1, 2)
    m = A.constant_matrix()
    assert m[2, 0] == 1 and m[0, 2] == -1
    assert np.count_nonzero(m) == 2
    assert A.norm() == pytest.approx(1.0)


def test_riesz2_and_identity():
    assert S.riesz2(1, 2, 2).constant_matrix()[0, 1] == -1
    assert S.identity(3).norm() == 1.0
    assert S.zero(2).is_zero
    assert S.spatial_identity(2).all_spatial
    assert not S.identity(2).all_spatial


@pytest.mark.parametrize("name", ["riesz_2", "riesz2_21", "identity", "zero",
                                  "spatial_identity", "identity@exp_neg_y",
                                  "modulated", "modulated:inv_one_plus_x2"])
def test_catalog_roundtrip(name, tmp_path):
    A = S.get_symbol(name, 2)
    path = tmp_path / "m.json"
    path.write_text(json.dumps(A.to_dict()))
    B = S.get_symbol(str(path), 2)
    assert B.entries == A.entries


def test_unknown_symbol():
    with pytest.raises(ValueError):
        S.get_symbol("nonsense", 1)
    with pytest.raises(ValueError):
        S.riesz(3, 2)


def test_x_dependence_rejected_on_vertical():
    with pytest.raises(ValueError):
        S.MatrixSymbol(1, {(1, 1): S.Entry(S.FXY, 1.0, "half_plus_cos")})


@given(st.floats(0.0, 50.0))
def test_y_builtins_bounded(y):
    A = S.get_symbol("identity@y_over_1py", 1)
    assert 0 <= A.matrix_y(np.array([y]))[0, 0, 0] <= 1


def test_indicator_breakpoint():
    A = S.get_symbol("riesz_1@indicator_y_lt_1", 1)
    assert 1.0 in A.breakpoints
    v = A.matrix_y(np.array([0.5, 1.5]))
    assert v[0, 1, 0] == 1 and v[1, 1, 0] == 0


def test_scaled_norm():
    assert S.get_symbol("identity@exp_neg_y", 2).norm() == pytest.approx(1.0, rel=1e-5)


def test_geometry_validation():
    with pytest.raises(ValueError):
        Geometry(1, 8.0, 100)
    with pytest.raises(ValueError):
        Geometry(4, 8.0, 16)


@given(st.sampled_from([1, 2]), st.sampled_from([8, 16, 32]))
def test_geometry_axis(dim, N):
    g = Geometry(dim, 4.0, N)
    ax = g.axis()
    assert ax[0] == -2.0 and ax.size == N
    assert g.cell == pytest.approx(g.h ** dim)
    assert g.points().shape == (N,) * dim + (dim,)


def test_field_norms_and_io(tmp_path):
    g = Geometry(1, 32.0, 512)
    f = SampledField.from_function(g, lambda x: np.exp(-x * x), "g")
    assert f.integral() == pytest.approx(np.sqrt(np.pi), rel=1e-12)
    assert f.norm(2) == pytest.approx((np.pi / 2) ** 0.25, rel=1e-12)
    f.check_support()
    p = tmp_path / "f.json"
    f.save(p)
    h = SampledField.load(p)
    assert np.array_equal(h.values, f.values) and h.geometry == g


def test_complex_field_io(tmp_path):
    g = Geometry(2, 4.0, 8)
    v = np.arange(64).reshape(8, 8) * (1 + 2j)
    f = SampledField(g, v)
    p = tmp_path / "c.json"
    f.save(p)
    assert np.array_equal(SampledField.load(p).values, v)


def test_support_check():
    g = Geometry(1, 8.0, 64)
    with pytest.raises(ValueError):
        SampledField(g, np.ones(64), "flat").check_support()
