"""Fourier multipliers of ``T_A`` for symbols that do not depend on ``x``.

``T_A`` is defined through the pairing ``int T_A f g = int int 2y (A grad u_f)
. grad u_g dx dy`` with ``u_f(., y) = phi_y * f``.  On the Fourier side the
gradient of ``u_f`` is ``b(xi, y) fhat`` with

    b = (2 pi i xi phihat_y, d/dy phihat_y),   phihat_y(xi) = exp(-rho(2 pi y |xi|)),

so that ``m(xi) = int 2y sum_ij a_ij(y) b_j conj(b_i) dy``.  Each nonzero entry
contributes a direction factor times a radial integral ``I_ij(|xi|)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gamma, pi

import numpy as np
from scipy.interpolate import CubicSpline

from .density import PURE, char_exponent
from .fields import Geometry
from .quadrature import integrate_halfline_log

_ABS_TOL = 1e-15
_REL_TOL = 1e-12


def rho_prime(spec, k):
    k = np.asarray(k, dtype=float)
    a = spec.alpha
    m = spec.effective_mass
    if m == 0 or a == 2:
        return a * k ** (a - 1)
    return a * k * (k * k + m ** (2.0 / a)) ** (a / 2.0 - 1)


def _entry_class(spec, i, j):
    v = spec.dim
    if i < v and j < v:
        return "ss"
    if i == v and j == v:
        return "vv"
    return "sv"


def _weight(cls, spec, y, k):
    """Radial integrand of one entry without ``2y a(y)``."""
    z = 2 * pi * y * k
    ph = np.exp(-char_exponent(spec, z))
    if cls == "ss":
        return 4 * pi ** 2 * k * k * ph * ph
    dph = -2 * pi * k * rho_prime(spec, z) * ph
    if cls == "sv":
        return 2 * pi * k * ph * dph
    return dph * dph


def radial_integrals(spec, A, k):
    """``I_ij(k) = int 2y a_ij(y) w_ij(y, k) dy`` for the nonzero entries.

    Returns ``(keys, values)`` in the order of ``sorted(A.entries)``.
    """
    if not A.is_y_only:
        raise ValueError("symbol depends on x; T_A is not a multiplier")
    if k <= 0:
        raise ValueError("|xi| must be positive")
    keys = sorted(A.entries)
    if not keys:
        return keys, np.zeros(0)
    classes = [_entry_class(spec, i, j) for i, j in keys]
    entries = [A.entries[key] for key in keys]

    def f(y):
        cols = [2 * y * e.of_y(y) * _weight(c, spec, y, k)
                for e, c in zip(entries, classes)]
        return np.stack(cols, axis=-1)

    center = 1.0 / (2 * pi * k)
    width = 30.0 / min(spec.alpha, 1.0) + 10.0
    pts = [np.log(b / center) for b in A.breakpoints]
    val, _ = integrate_halfline_log(f, center, width=width, abs_tol=_ABS_TOL,
                                    rel_tol=_REL_TOL, points=pts or None)
    return keys, np.asarray(val)


def _direction_factors(spec, keys, xi_hat):
    """Direction factors, shape ``xi_hat.shape[:-1] + (len(keys),)``."""
    v = spec.dim
    cols = []
    for i, j in keys:
        if i < v and j < v:
            cols.append(xi_hat[..., i] * xi_hat[..., j] + 0j)
        elif i == v and j < v:
            cols.append(1j * xi_hat[..., j])
        elif i < v and j == v:
            cols.append(-1j * xi_hat[..., i])
        else:
            cols.append(np.ones(xi_hat.shape[:-1]) + 0j)
    return np.stack(cols, axis=-1)


def compute_multiplier(spec, A, xi):
    """``m(xi)`` for an x-independent symbol ``A``."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if xi.shape != (spec.dim,):
        raise ValueError(f"xi must have {spec.dim} components")
    if A.dim != spec.dim:
        raise ValueError("symbol and spec dimensions differ")
    k = float(np.linalg.norm(xi))
    if k == 0:
        raise ValueError("m is not defined at xi = 0")
    keys, vals = radial_integrals(spec, A, k)
    if not keys:
        return 0j
    return complex(np.sum(_direction_factors(spec, keys, xi / k) * vals))


def is_scale_free(spec, A):
    """``m`` is homogeneous of degree zero (pure stable, constant ``A``)."""
    return (spec.kind == PURE or spec.effective_mass == 0) and A.is_constant


# --- closed forms -----------------------------------------------------------

def riesz_multiplier(j, xi):
    """``i xi_j / |xi|``; ``j`` is 1-based."""
    xi = np.asarray(xi, dtype=float)
    k = np.linalg.norm(xi, axis=-1)
    if np.any(k == 0):
        raise ValueError("Riesz multiplier undefined at xi = 0")
    return 1j * xi[..., j - 1] / k


def hilbert_multiplier(xi):
    """``-i sgn(xi)``, the Hilbert transform with kernel ``1/(pi x)``."""
    xi = np.asarray(xi, dtype=float)
    if np.any(xi == 0):
        raise ValueError("Hilbert multiplier undefined at xi = 0")
    return -1j * np.sign(xi)


def beurling_multiplier(xi):
    """``(xi1^2 - xi2^2 - 2 i xi1 xi2) / |xi|^2``."""
    xi = np.asarray(xi, dtype=float)
    if xi.shape[-1] != 2:
        raise ValueError("Beurling-Ahlfors transform needs dim 2")
    k2 = np.sum(xi * xi, axis=-1)
    if np.any(k2 == 0):
        raise ValueError("Beurling multiplier undefined at xi = 0")
    x1, x2 = xi[..., 0], xi[..., 1]
    return (x1 * x1 - x2 * x2 - 2j * x1 * x2) / k2


def constant_symbol_integrals(alpha):
    """Scale-free radial integrals for pure stable laws.

    Returns ``(I_ss, I_sv, I_vv)``: the spatial, mixed and vertical weights
    integrated against ``2y`` for a constant unit entry.
    """
    i_ss = 2 * gamma(2 / alpha) / (alpha * 2 ** (2 / alpha))
    i_sv = -2 * gamma(1 / alpha + 1) / 2 ** (1 / alpha + 1)
    i_vv = alpha / 2.0
    return i_ss, i_sv, i_vv


def identity_part(spec, A):
    """Coefficient of the identity in ``T_A`` for constant ``A``.

    The spatial trace spreads evenly over directions and the vertical
    diagonal entry acts as a pure multiple of the identity.
    """
    if not is_scale_free(spec, A):
        raise ValueError("identity part is defined for scale-free multipliers")
    mat = A.constant_matrix()
    i_ss, _, i_vv = constant_symbol_integrals(spec.alpha)
    n = spec.dim
    return i_ss * np.trace(mat[:n, :n]) / n + i_vv * mat[n, n]


def littlewood_paley_constants(spec):
    """``(J_s, J_v, C_LP)`` with ``sup |m| <= 2 C_LP ||A||``.

    ``J_s = int t phihat(t)^2 dt`` and ``J_v = int t (rho'(2 pi t) 2 pi)^2
    phihat(t)^2 dt`` along a unit ray, and ``C_LP = 4 pi^2 J_s + J_v``.
    """
    def spatial(t):
        return t * np.exp(-2 * char_exponent(spec, 2 * pi * t))

    def vertical(t):
        return t * (2 * pi * rho_prime(spec, 2 * pi * t)) ** 2 * np.exp(
            -2 * char_exponent(spec, 2 * pi * t))

    width = 30.0 / min(spec.alpha, 1.0) + 10.0
    js, _ = integrate_halfline_log(spatial, 1 / (2 * pi), width=width,
                                   abs_tol=1e-16, rel_tol=1e-12)
    jv, _ = integrate_halfline_log(vertical, 1 / (2 * pi), width=width,
                                   abs_tol=1e-16, rel_tol=1e-12)
    return float(js), float(jv), float(4 * pi ** 2 * js + jv)


# --- tables -------------------------------------------------------------------

@dataclass
class MultiplierTable:
    geometry: Geometry
    values: np.ndarray
    spec: object
    symbol_id: str

    def to_dict(self):
        v = self.values.ravel()
        return {"geometry": self.geometry.to_dict(),
                "spec": self.spec.to_dict(), "symbol": self.symbol_id,
                "values": np.stack([v.real, v.imag], axis=-1).tolist()}

    @property
    def sup(self):
        return float(np.max(np.abs(self.values)))


_TABLE_CACHE = {}
_SPLINE_THRESHOLD = 3000


def _radial_values(spec, A, k_unique):
    """Radial integrals on the positive ``|xi|`` values, shape (K, entries)."""
    if is_scale_free(spec, A):
        keys, vals = radial_integrals(spec, A, 1.0)
        return keys, np.broadcast_to(vals, (k_unique.size, len(keys)))
    if k_unique.size <= _SPLINE_THRESHOLD:
        rows = [radial_integrals(spec, A, k)[1] for k in k_unique]
        return sorted(A.entries), np.array(rows)
    # dense log-spaced table in |xi|, then splines
    nodes = np.geomspace(k_unique[0], k_unique[-1], 1200)
    rows = np.array([radial_integrals(spec, A, k)[1] for k in nodes])
    spline = CubicSpline(np.log(nodes), rows, axis=0)
    return sorted(A.entries), spline(np.log(k_unique))


def tabulate(spec, A, geometry):
    """Multiplier on the dual grid of ``geometry`` (FFT order), ``m(0)=0``."""
    if geometry.dim != spec.dim or A.dim != spec.dim:
        raise ValueError("grid, symbol and spec dimensions differ")
    key = (spec, A, geometry)
    if key in _TABLE_CACHE:
        return _TABLE_CACHE[key]
    xi = np.stack(geometry.frequencies(), axis=-1)
    k = np.linalg.norm(xi, axis=-1)
    values = np.zeros(geometry.shape, dtype=complex)
    if sorted(A.entries) and not A.is_zero:
        pos = k > 0
        k_unique, inverse = np.unique(k[pos], return_inverse=True)
        keys, radial = _radial_values(spec, A, k_unique)
        xi_hat = xi[pos] / k[pos][:, None]
        dirs = _direction_factors(spec, keys, xi_hat)
        values[pos] = np.sum(dirs * radial[inverse], axis=-1)
    table = MultiplierTable(geometry, values, spec, A.name)
    _TABLE_CACHE[key] = table
    return table


def closed_form_table(geometry, kind, j=1):
    """Tables of the reference multipliers: ``riesz``, ``hilbert``,
    ``beurling`` or ``one``; ``m(0) = 0``."""
    xi = np.stack(geometry.frequencies(), axis=-1)
    k = np.linalg.norm(xi, axis=-1)
    pos = k > 0
    values = np.zeros(geometry.shape, dtype=complex)
    if kind == "riesz":
        values[pos] = riesz_multiplier(j, xi[pos])
    elif kind == "hilbert":
        if geometry.dim != 1:
            raise ValueError("Hilbert transform needs dim 1")
        values[pos] = hilbert_multiplier(xi[pos][:, 0])
    elif kind == "beurling":
        values[pos] = beurling_multiplier(xi[pos])
    elif kind == "one":
        values[pos] = 1.0
    else:
        raise ValueError(f"unknown reference multiplier {kind!r}")
    return MultiplierTable(geometry, values, None, kind)
