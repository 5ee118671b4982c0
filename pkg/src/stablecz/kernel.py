"""Kernels ``K_A(x, x~)`` of the operators ``T_A``.

With the pairing ``int T_A f g = int int 2y (A grad u_f) . grad u_g``, the
kernel is

    K(x, x~) = sum_ij int int 2y a_ij(xb, y) d_j phi_y(xb - x~) d_i phi_y(xb - x) dxb dy

where index ``n`` (0-based) is ``d/dy``.  When ``a_ij`` does not depend on
``x`` the ``xb`` integral collapses through ``phi_y * phi_y = phi_{c y}``,
``c = 2**(1/alpha)``, and each entry becomes a one-dimensional integral of
derivatives of ``Q(u, y) = phi_{c y}(u)``, ``u = x - x~``:

    spatial i, j           -d_i d_j Q
    i vertical, j spatial  +1/2 d_j d_y Q
    i spatial, j vertical  -1/2 d_i d_y Q
    both vertical          1/4 ((1 - alpha) d_y Q / y + d_y^2 Q)

Derivatives in ``y`` follow from the homogeneity ``Q(u, y) = y^-n Q(u/y, 1)``.
This collapse needs the semigroup property, so kernels are computed for the
pure stable family only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .density import PURE, get_profile
from .quadrature import QuadratureError, integrate

_ABS_TOL = 1e-13
_REL_TOL = 1e-9
_LOG_WIDTH = 40.0
_TAIL_SPAN = 20.0


@dataclass
class KernelEvaluation:
    value: float
    quadrature_error: float

    def __float__(self):
        return float(self.value)


def _require_pure(spec):
    if spec.kind != PURE and spec.effective_mass != 0:
        raise ValueError("kernels are available for pure stable laws only")


def _as_point(spec, u):
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if u.shape != (spec.dim,):
        raise ValueError(f"point must have {spec.dim} components")
    return u


class _QTerms:
    """Derivatives of ``Q(u, y)`` on a batch of heights ``y``."""

    def __init__(self, profile, u, y, order):
        spec = profile.spec
        n = spec.dim
        c = 2.0 ** (1.0 / spec.alpha)
        s = c * y
        z = u[None, :] / s[:, None]
        d = profile.derivatives(z, order + 2)
        self.n, self.u, self.y, self.alpha = n, u, y, spec.alpha
        self.q = s ** -n * d[0]
        self.g = s[:, None] ** (-n - 1) * d[1]
        self.h = s[:, None, None] ** (-n - 2) * d[2]
        self.t = (s[:, None, None, None] ** (-n - 3) * d[3]
                  if order >= 1 else None)

    # first y-derivatives
    def qy(self):
        return -(self.n * self.q + self.g @ self.u) / self.y

    def gy(self):
        return -((self.n + 1) * self.g + self.h @ self.u) / self.y[:, None]

    def hy(self):
        return -((self.n + 2) * self.h + self.t @ self.u) / self.y[:, None, None]

    # second y-derivatives
    def qyy(self):
        return -((self.n + 1) * self.qy() + self.gy() @ self.u) / self.y

    def gyy(self):
        return -((self.n + 2) * self.gy() + self.hy() @ self.u) / self.y[:, None]


def _entry_values(terms, i, j):
    """``h_ij(u, y)`` on the batch."""
    n = terms.n
    if i < n and j < n:
        return -terms.h[:, i, j]
    if i == n and j < n:
        return 0.5 * terms.gy()[:, j]
    if i < n and j == n:
        return -0.5 * terms.gy()[:, i]
    return 0.25 * ((1 - terms.alpha) * terms.qy() / terms.y + terms.qyy())


def _entry_gradient(terms, i, j):
    """``grad_u h_ij(u, y)`` on the batch, shape (batch, n)."""
    n = terms.n
    if i < n and j < n:
        return -terms.t[:, i, j, :]
    if i == n and j < n:
        return 0.5 * terms.hy()[:, j, :]
    if i < n and j == n:
        return -0.5 * terms.hy()[:, i, :]
    return 0.25 * ((1 - terms.alpha) * terms.gy() / terms.y[:, None]
                   + terms.gyy())


def _height_integral(spec, u, func, breakpoints=(), *, abs_tol=_ABS_TOL,
                     rel_tol=_REL_TOL):
    """``int_0^inf func(y) dy`` with ``y = |u| e^v / c`` and ``|v| <= 40``."""
    r = float(np.linalg.norm(u))
    center = r / 2.0 ** (1.0 / spec.alpha)

    def g(v):
        y = center * np.exp(v)
        val = np.asarray(func(y))
        return val * y.reshape((-1,) + (1,) * (val.ndim - 1))

    pts = [np.log(b / center) for b in breakpoints if b > 0]
    pts = [p for p in pts if abs(p) < _LOG_WIDTH] or None
    return integrate(g, -_LOG_WIDTH, _LOG_WIDTH, abs_tol=abs_tol,
                     rel_tol=rel_tol, points=pts)


def kernel_entry_semigroup(spec, a, i, j, u, *, breakpoints=(),
                           absolute=False, profile=None):
    """``int 2y a(y) h_ij(u, y) dy`` for an x-independent entry ``a``.

    ``a`` is a function of ``y`` (vectorized) or a constant.  With
    ``absolute`` the modulus of the integrand is used (size constants).
    """
    _require_pure(spec)
    u = _as_point(spec, u)
    if not np.any(u):
        raise ValueError("kernel is singular at u = 0")
    profile = get_profile(spec) if profile is None else profile
    afun = a if callable(a) else (lambda y, c=float(a): c * np.ones_like(y))
    if not callable(a) and a == 0:
        return KernelEvaluation(0.0, 0.0)

    def integrand(y):
        vals = 2 * y * afun(y) * _entry_values(_QTerms(profile, u, y, 0), i, j)
        return np.abs(vals) if absolute else vals

    try:
        val, err = _height_integral(spec, u, integrand, breakpoints)
    except QuadratureError as exc:
        raise QuadratureError(f"kernel entry ({i},{j}) at u={u}: {exc}",
                              exc.value, exc.error) from exc
    return KernelEvaluation(float(val), float(err))


def kernel_gradient_semigroup(spec, a, i, j, u, *, breakpoints=(),
                              absolute=False, profile=None):
    """``grad_u`` of :func:`kernel_entry_semigroup`; returns (vector, err)."""
    _require_pure(spec)
    u = _as_point(spec, u)
    if not np.any(u):
        raise ValueError("kernel is singular at u = 0")
    profile = get_profile(spec) if profile is None else profile
    afun = a if callable(a) else (lambda y, c=float(a): c * np.ones_like(y))

    def integrand(y):
        vals = (2 * y * afun(y))[:, None] * _entry_gradient(
            _QTerms(profile, u, y, 1), i, j)
        return np.abs(vals) if absolute else vals

    val, err = _height_integral(spec, u, integrand, breakpoints)
    return np.asarray(val, dtype=float), float(err)


# --- x-dependent spatial entries --------------------------------------------

_Y_CHUNK = 32
_INNER_PANELS = 3000


def _general_integrand(spec, profile, afun, i, j, x, xt, deriv_k, absolute):
    """Height integrand ``y -> int 2y a(xb,y) d_j phi_y(xb-x~) D phi_y(xb-x) dxb``.

    ``D`` is ``d_i``; with ``deriv_k`` set the first factor is replaced by its
    ``x~_k`` derivative (smoothness constants).

    The ``xb`` domain is split at the bisector of ``x`` and ``x~``.  On each
    half, ``xb = p + y sinh(tau) e`` with ``p`` the half's own center and ``e``
    pointing away from the other center, so the nearby factor is resolved on
    an ``O(1)`` scale in ``tau`` at every height.  Across the axis (``n = 2``)
    ``xb`` moves by ``y sinh(tau2)``.
    """
    n = spec.dim
    u = x - xt
    r = float(np.linalg.norm(u))
    e1 = u / r
    e2 = np.array([-e1[1], e1[0]]) if n == 2 else None

    def d_phi(w, y, order):
        d = profile.derivatives(w / y[..., None], order)
        return d[order] * y[(...,) + (None,) * order] ** (-n - order)

    def body(points, yy):
        first = d_phi(points - xt, yy, 1 if deriv_k is None else 2)
        if deriv_k is None:
            f1 = first[..., j]
        else:
            # the x~ derivative of d_j phi_y(xb - x~) is -d_k d_j phi_y
            f1 = -first[..., j, deriv_k]
        f2 = d_phi(points - x, yy, 1)[..., i]
        val = 2 * yy * afun(points, yy) * f1 * f2
        return np.abs(val) if absolute else val

    def half(y, center, outward):
        b = np.arcsinh(0.5 * r / y)

        def along(sigma):
            # sigma in [0, 1] -> tau in [-b, T]
            tau = -b[None, :] + sigma[:, None] * (b[None, :] + _TAIL_SPAN)
            jac = (b[None, :] + _TAIL_SPAN) * y[None, :] * np.cosh(tau)
            return y[None, :] * np.sinh(tau), jac

        if n == 1:
            def f(sigma):
                off, jac = along(sigma)
                pts = center[0] + outward[0] * off
                yy = np.broadcast_to(y, off.shape)
                return body(pts[..., None], yy) * jac

            val, _ = integrate(f, 0.0, 1.0, abs_tol=1e-300, rel_tol=1e-9,
                               max_panels=_INNER_PANELS, strict=False)
            return val

        def f_outer(sigma):
            off1, jac1 = along(sigma)                    # (S, Y)

            def f_cross(t):
                tau2 = t * _TAIL_SPAN
                off2 = y[None, None, :] * np.sinh(tau2)[:, None, None]
                jac2 = (_TAIL_SPAN * y[None, None, :]
                        * np.cosh(tau2)[:, None, None])
                pts = (center + off1[None, :, :, None] * outward
                       + off2[..., None] * e2)
                yy = np.broadcast_to(y, pts.shape[:-1])
                vals = body(pts, yy) * jac1[None] * jac2
                return vals.reshape(len(t), -1)

            val, _ = integrate(f_cross, -1.0, 1.0, abs_tol=1e-300,
                               rel_tol=1e-9, points=[0.0], panels=2,
                               max_panels=_INNER_PANELS, strict=False)
            return val.reshape(off1.shape)

        val, _ = integrate(f_outer, 0.0, 1.0, abs_tol=1e-300, rel_tol=1e-9,
                           max_panels=_INNER_PANELS, strict=False)
        return val

    def spatial(y):
        y = np.asarray(y, dtype=float)
        out = np.empty(y.shape)
        for lo in range(0, y.size, _Y_CHUNK):
            yc = y[lo:lo + _Y_CHUNK]
            out[lo:lo + _Y_CHUNK] = half(yc, x, e1) + half(yc, xt, -e1)
        return out

    return spatial


def kernel_entry_general(spec, a, i, j, x, xt, *, absolute=False,
                         deriv_k=None, profile=None, rel_tol=1e-7):
    """Double integral for a spatial entry ``a(x, y)`` (``i, j < n``).

    ``a`` maps points ``(..., n)`` and heights to values; the ``xb``
    integral runs over sinh-mapped coordinates centered between ``x`` and
    ``x~`` (``n`` in {1, 2}).
    """
    _require_pure(spec)
    n = spec.dim
    if n not in (1, 2):
        raise ValueError("general kernel quadrature supports n = 1, 2")
    if not (i < n and j < n):
        raise ValueError("general route is for spatial entries")
    x = _as_point(spec, x)
    xt = _as_point(spec, xt)
    if np.allclose(x, xt, rtol=0, atol=0):
        raise ValueError("kernel is singular at x = x~")
    profile = get_profile(spec) if profile is None else profile
    if not callable(a):
        if a == 0:
            return KernelEvaluation(0.0, 0.0)
        afun = lambda pts, y, c=float(a): c * np.ones(np.shape(y))  # noqa: E731
    else:
        afun = a
    spatial = _general_integrand(spec, profile, afun, i, j, x, xt, deriv_k,
                                 absolute)

    def paired(y):
        # the modulus column scales the tolerance when the value cancels
        v = spatial(y)
        return np.stack([v, np.abs(v)], axis=-1)

    val, err = _height_integral(spec, x - xt, paired, abs_tol=1e-300,
                                rel_tol=rel_tol)
    val = val[0]
    return KernelEvaluation(float(val), float(err))


# --- whole symbols --------------------------------------------------------------

def _entry_function(entry):
    return lambda y: entry.of_y(y)


def kernel_full(spec, A, x, xt, *, profile=None):
    """``K_A(x, x~)``; x-independent entries use the semigroup route."""
    _require_pure(spec)
    if A.dim != spec.dim:
        raise ValueError("symbol and spec dimensions differ")
    x = _as_point(spec, x)
    xt = _as_point(spec, xt)
    u = x - xt
    if not np.any(u):
        raise ValueError("kernel is singular at x = x~")
    total, err = 0.0, 0.0
    for (i, j), entry in sorted(A.entries.items()):
        if entry.kind == "const" and entry.value == 0:
            continue
        if entry.kind == "fxy":
            ev = kernel_entry_general(
                spec, lambda pts, y, e=entry: e.of_xy(pts, y), i, j, x, xt,
                profile=profile)
        else:
            ev = kernel_entry_semigroup(spec, _entry_function(entry), i, j, u,
                                        breakpoints=entry.breakpoints,
                                        profile=profile)
        total += ev.value
        err += ev.quadrature_error
    return KernelEvaluation(total, err)


def kernel_gradient(spec, A, x, xt, *, profile=None, step=None):
    """``grad_x K_A(x, x~)``.

    Semigroup entries are differentiated analytically; x-dependent entries
    by central differences with step ``1e-4 |x - x~|``.
    """
    x = _as_point(spec, x)
    xt = _as_point(spec, xt)
    u = x - xt
    grad = np.zeros(spec.dim)
    h = 1e-4 * np.linalg.norm(u) if step is None else step
    for (i, j), entry in sorted(A.entries.items()):
        if entry.kind == "fxy":
            f = (lambda pts, y, e=entry: e.of_xy(pts, y))
            for k in range(spec.dim):
                dx = np.zeros(spec.dim)
                dx[k] = h
                plus = kernel_entry_general(spec, f, i, j, x + dx, xt,
                                            profile=profile).value
                minus = kernel_entry_general(spec, f, i, j, x - dx, xt,
                                             profile=profile).value
                grad[k] += (plus - minus) / (2 * h)
        elif not (entry.kind == "const" and entry.value == 0):
            g, _ = kernel_gradient_semigroup(
                spec, _entry_function(entry), i, j, u,
                breakpoints=entry.breakpoints, profile=profile)
            grad += g
    return grad


def finite_difference_gradient(spec, A, x, xt, *, profile=None, rel_step=1e-4):
    """Central-difference ``grad_x K_A``."""
    x = _as_point(spec, x)
    xt = _as_point(spec, xt)
    h = rel_step * np.linalg.norm(x - xt)
    grad = np.zeros(spec.dim)
    for k in range(spec.dim):
        dx = np.zeros(spec.dim)
        dx[k] = h
        grad[k] = (kernel_full(spec, A, x + dx, xt, profile=profile).value
                   - kernel_full(spec, A, x - dx, xt, profile=profile).value
                   ) / (2 * h)
    return grad


# --- homogeneity constants --------------------------------------------------------

def _unit(direction):
    d = np.atleast_1d(np.asarray(direction, dtype=float))
    norm = np.linalg.norm(d)
    if norm == 0:
        raise ValueError("direction must be nonzero")
    return d / norm


def size_constant(spec, i, j, direction, *, method=None, profile=None):
    """Constant ``C`` with ``|K^{ij}(u)| <= ||a_ij|| C / |u|^n`` along
    ``direction``.

    ``method="semigroup"`` integrates ``2t |h_ij(e, t)|``; ``"general"``
    integrates ``2t |d_i phi_t(z)| |d_j phi_t(z - e)|`` over ``(z, t)`` and
    is only defined for spatial entries.  Default: semigroup for entries
    touching the vertical direction, general otherwise.
    """
    e = _unit(direction)
    n = spec.dim
    if method is None:
        method = "semigroup" if n in (i, j) else "general"
    if method == "semigroup":
        return kernel_entry_semigroup(spec, 1.0, i, j, e, absolute=True,
                                      profile=profile).value
    if n in (i, j):
        raise ValueError("the general bound diverges for vertical entries")
    return kernel_entry_general(spec, 1.0, i, j, e, np.zeros(n),
                                absolute=True, profile=profile).value


def smoothness_constant(spec, i, j, k, direction, *, method=None,
                        profile=None):
    """Constant ``C`` with ``|d_k K^{ij}(u)| <= ||a_ij|| C / |u|^{n+1}``."""
    e = _unit(direction)
    n = spec.dim
    if method is None:
        method = "semigroup" if n in (i, j) else "general"
    if method == "semigroup":
        g, _ = kernel_gradient_semigroup(spec, 1.0, i, j, e, absolute=True,
                                         profile=profile)
        return float(g[k])
    if n in (i, j):
        raise ValueError("the general bound diverges for vertical entries")
    return kernel_entry_general(spec, 1.0, i, j, e, np.zeros(n),
                                absolute=True, deriv_k=k,
                                profile=profile).value
