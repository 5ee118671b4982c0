"""Applying ``T_A`` to sampled fields.

Two routes: multiplication on the periodic dual grid, and direct
principal-value quadrature of the kernel in polar coordinates about each
output point.  Also reference Riesz and Beurling-Ahlfors transforms, ``L^p``
ratios and weak-type profiles.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import pi

import numpy as np
from scipy import ndimage

from . import multiplier as mult
from .fields import Geometry, SampledField
from .kernel import kernel_full


def p_star(p):
    if p <= 1:
        raise ValueError("p must exceed 1")
    return max(p, p / (p - 1.0))


# --- multiplier route ---------------------------------------------------------

def apply_table(field, values):
    """Multiply the DFT of ``field`` by ``values`` (FFT order)."""
    fhat = np.fft.fftn(field.values)
    out = np.fft.ifftn(fhat * values)
    if not np.iscomplexobj(field.values) and _hermitian(values):
        out = out.real
    return out


def _hermitian(values, tol=1e-12):
    flipped = values
    for ax in range(values.ndim):
        flipped = np.roll(np.flip(flipped, axis=ax), 1, axis=ax)
    scale = max(1.0, float(np.max(np.abs(values))))
    return bool(np.max(np.abs(values - np.conj(flipped))) <= tol * scale)


def apply_multiplier(field, table, *, pad=1):
    """``T f`` with ``T`` acting by ``table`` on the discrete transform.

    ``pad`` > 1 embeds the field in a box ``pad`` times larger per axis with
    zeros around it; ``table`` must then live on that larger grid (see
    :func:`padded_geometry`).  The result is cut back to the field's box.
    """
    geom = field.geometry
    if pad == 1:
        if table.geometry != geom:
            raise ValueError("table and field geometries differ")
        values = apply_table(field, table.values)
        return SampledField(geom, values, f"T[{field.name}]")
    big = padded_geometry(geom, pad)
    if table.geometry != big:
        raise ValueError("table does not match the padded geometry")
    n0 = (big.N - geom.N) // 2
    sl = (slice(n0, n0 + geom.N),) * geom.dim
    padded = np.zeros(big.shape, dtype=field.values.dtype)
    padded[sl] = field.values
    out = apply_table(SampledField(big, padded), table.values)
    return SampledField(geom, out[sl], f"T[{field.name}]")


def padded_geometry(geom, pad):
    if pad < 1 or pad & (pad - 1):
        raise ValueError("pad must be a power of two")
    return Geometry(geom.dim, geom.L * pad, geom.N * pad)


def apply_symbol(field, spec, A, *, pad=1, dc="zero"):
    """Multiplier route for an x-independent symbol.

    ``dc="local"`` replaces the ``m(0) = 0`` convention by the local part
    of ``T_A`` (scale-free symbols only), which is what the whole-space
    operator does to the mean of a compactly supported field.
    """
    table = mult.tabulate(spec, A, padded_geometry(field.geometry, pad))
    if dc == "local":
        values = table.values.copy()
        values[(0,) * field.geometry.dim] = mult.identity_part(spec, A)
        table = mult.MultiplierTable(table.geometry, values, spec,
                                     table.symbol_id)
    elif dc != "zero":
        raise ValueError(f"unknown dc convention {dc!r}")
    return apply_multiplier(field, table, pad=pad)


def riesz_apply(field, j):
    table = mult.closed_form_table(field.geometry, "riesz", j)
    return apply_multiplier(field, table)


def hilbert_apply(field):
    table = mult.closed_form_table(field.geometry, "hilbert")
    return apply_multiplier(field, table)


def beurling_apply(field, *, route="composition"):
    """Beurling-Ahlfors transform ``B = R_2^2 - R_1^2 + 2i R_1 R_2`` (n = 2).

    ``route="direct"`` multiplies by the closed-form symbol instead.
    """
    if field.geometry.dim != 2:
        raise ValueError("Beurling-Ahlfors transform needs dim 2")
    if route == "direct":
        table = mult.closed_form_table(field.geometry, "beurling")
        return apply_multiplier(field, table)
    src = SampledField(field.geometry, field.values.astype(complex))
    r1 = riesz_apply(src, 1)
    r2 = riesz_apply(src, 2)
    r11 = riesz_apply(r1, 1).values
    r22 = riesz_apply(r2, 2).values
    r12 = riesz_apply(r2, 1).values
    return SampledField(field.geometry, r22 - r11 + 2j * r12,
                        f"B[{field.name}]")


# --- principal-value route ------------------------------------------------------------

@dataclass
class PVResult:
    field: SampledField
    error: np.ndarray
    points: tuple


def angular_profile(spec, A, n_angles=128):
    """``Omega(w) = K_A(w, 0)`` on the unit sphere (``n`` = 1: ``+-1``)."""
    if spec.dim == 1:
        return np.array([kernel_full(spec, A, [s], [0.0]).value
                         for s in (1.0, -1.0)])
    theta = 2 * pi * np.arange(n_angles) / n_angles
    return np.array([kernel_full(spec, A, [np.cos(t), np.sin(t)],
                                 [0.0, 0.0]).value for t in theta])


def _richardson(eps, vals):
    """Value at ``eps = 0`` of the quadratic through three samples."""
    eps = np.asarray(eps, dtype=float)
    coef = np.polyfit(eps, np.asarray(vals), 2)
    return coef[-1]


def apply_kernel_pv(field, spec, A, epsilon_schedule=(4, 2, 1), *,
                    stride=1, n_angles=128, radial_nodes=None,
                    check_support=True):
    """Principal-value route for constant symbols.

    For each output point the truncated integral ``int_{|u|>eps} K(u)
    f(x-u) du`` is written in polar form ``int_eps^R F(r) dr / r`` with
    ``F(r) = int Omega(w) f(x - r w) dw``, which pairs opposite nodes about
    the singularity.  ``eps`` runs over ``epsilon_schedule`` (multiples of
    ``h``) and is extrapolated to zero by the quadratic through the three
    values.  The local part ``c f(x)`` of ``T_A`` is added.

    ``stride`` evaluates every ``stride``-th grid point per axis; returns a
    :class:`PVResult` whose ``error`` is the spread between the
    extrapolation and the finest truncation.
    """
    if check_support:
        field.check_support()
    if not A.is_constant:
        raise ValueError("the PV route needs a constant symbol")
    geom = field.geometry
    if geom.dim != spec.dim:
        raise ValueError("field and spec dimensions differ")
    if len(epsilon_schedule) != 3:
        raise ValueError("epsilon schedule needs three entries")
    omega = angular_profile(spec, A, n_angles)
    mean = omega.mean()
    if abs(mean) > 1e-7 * max(1.0, np.max(np.abs(omega))):
        raise ValueError("kernel has nonzero spherical mean; PV undefined")
    local = mult.identity_part(spec, A)
    h = geom.h
    eps = np.array(epsilon_schedule, dtype=float) * h
    if geom.dim == 1:
        out, err, idx = _pv_line(field, omega, eps, stride)
    elif geom.dim == 2:
        out, err, idx = _pv_plane(field, omega, eps, stride, radial_nodes)
    else:
        raise ValueError("PV route supports dim 1 and 2")
    out = out + local * field.values[np.ix_(*idx)]
    sub = Geometry(geom.dim, geom.L, geom.N // stride) if stride > 1 else geom
    res = SampledField(sub, out, f"T_pv[{field.name}]",
                       {"stride": stride, "local_part": float(local)})
    return PVResult(res, err, idx)


def _pv_line(field, omega, eps, stride):
    """Grid-aligned trapezoid sums of ``F(r)/r`` in one dimension."""
    geom = field.geometry
    f = field.values
    N, h = geom.N, geom.h
    idx = np.arange(0, N, stride)
    k = np.arange(1, N)
    r = k * h
    padded = np.concatenate([np.zeros(N), f, np.zeros(N)])
    vals = np.empty((3, idx.size))
    for chunk in np.array_split(np.arange(idx.size), max(1, idx.size // 256)):
        rows = idx[chunk][:, None] + N
        minus = padded[rows - k[None, :]]
        plus = padded[rows + k[None, :]]
        g = (omega[0] * minus + omega[1] * plus) / r[None, :]
        for s, e in enumerate(eps):
            m = int(round(e / h))
            vals[s, chunk] = h * (0.5 * g[:, m - 1] + g[:, m:].sum(axis=1))
    out = _richardson(eps, vals)
    err = np.abs(out - vals[-1])
    return out, err, (idx,)


def _pv_plane(field, omega, eps, stride, radial_nodes):
    """Polar quadrature with cubic-spline interpolation of ``f``.

    The radial integral splits at ``r0 = 8h``: the part beyond ``r0`` is
    shared by all cut-offs, the part in ``[eps, r0]`` uses geometric panels.
    """
    geom = field.geometry
    N, h = geom.N, geom.h
    coeffs = ndimage.spline_filter(np.asarray(field.values, dtype=float),
                                   order=3, mode="grid-constant")
    n_ang = omega.size
    theta = 2 * pi * np.arange(n_ang) / n_ang
    wdir = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    gl_x, gl_w = np.polynomial.legendre.leggauss(8)
    r0 = 8 * h
    r_max = 1.1 * geom.L
    width = max(2 * h, 0.125) if radial_nodes is None else (
        (r_max - r0) / radial_nodes)

    def nodes(edges):
        mid = 0.5 * (edges[1:] + edges[:-1])
        half = 0.5 * (edges[1:] - edges[:-1])
        return ((mid[:, None] + half[:, None] * gl_x).ravel(),
                (half[:, None] * gl_w).ravel())

    parts = [nodes(np.arange(r0, r_max + width, width))]
    parts += [nodes(np.geomspace(e, r0, 7)) for e in eps]
    idx = np.arange(0, N, stride)
    xs = -0.5 * geom.L + idx * h
    sums = np.zeros((len(parts), idx.size, idx.size))
    for part, (rq, wq) in enumerate(parts):
        # offsets r w in index units: (R, A, 2)
        off = rq[:, None, None] * wdir[None, :, :] / h
        for a, x1 in enumerate(xs):
            base1 = (x1 + 0.5 * geom.L) / h
            base2 = (xs + 0.5 * geom.L) / h
            p1 = np.broadcast_to(base1 - off[None, :, :, 0],
                                 (idx.size,) + off.shape[:2])
            p2 = base2[:, None, None] - off[None, :, :, 1]
            vals = ndimage.map_coordinates(
                coeffs, [p1.ravel(), p2.ravel()], order=3,
                mode="grid-constant", prefilter=False).reshape(p2.shape)
            F = (vals @ omega) * (2 * pi / n_ang)          # (cols, R)
            sums[part, a] = (F / rq[None, :]) @ wq
    trunc = sums[1:] + sums[0]
    out = _richardson(eps, trunc.reshape(3, -1)).reshape(idx.size, idx.size)
    err = np.abs(out - trunc[-1])
    return out, err, (idx, idx)


# --- norms and distributions ---------------------------------------------------------

def lp_ratio(field_t, field, p):
    """``||T f||_p / ||f||_p`` by midpoint sums."""
    if not 1 < p < np.inf:
        raise ValueError("p must lie in (1, inf)")
    denom = field.norm(p)
    if denom == 0:
        raise ValueError("field is zero")
    return field_t.norm(p) / denom


def weak_profile(field_t, field, lambdas):
    """``lambda |{|T f| > lambda}|`` for each ``lambda`` (grid measure)."""
    if field.norm(1) == 0:
        raise ValueError("field is zero")
    mod = np.abs(field_t.values).ravel()
    cell = field_t.geometry.cell
    lam = np.asarray(lambdas, dtype=float)
    return np.array([l * np.count_nonzero(mod > l) * cell for l in lam])


def weak_sup(field_t, field, lambdas=None):
    """``sup_lambda lambda |{|T f| > lambda}|``.

    Without ``lambdas`` the supremum is exact over the sampled values: the
    distribution function jumps at each ``|Tf|`` value.
    """
    if lambdas is not None:
        return float(np.max(weak_profile(field_t, field, lambdas)))
    mod = np.sort(np.abs(field_t.values).ravel())[::-1]
    cell = field_t.geometry.cell
    # just below the k-th largest value the level set holds k points
    counts = np.arange(1, mod.size + 1)
    return float(np.max(mod * counts * cell))
