"""Stable and relativistic-stable subordinators evaluated at time one.

The one-sided stable density is evaluated through Kanter's integral
representation, which is the Bromwich inversion of ``exp(-lam**a)`` after
the contour is deformed onto its steepest-descent path; the integrand is
positive and non-oscillatory.  The index-1/2 case uses its closed form.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gamma, pi, sqrt

import numpy as np
from scipy import special

from .quadrature import integrate, integrate_halfline_log


@dataclass(frozen=True)
class SubordinatorSpec:
    """Subordinator with Laplace exponent ``(lam + m**(1/index))**index - m``.

    ``mass = 0`` is the pure ``index``-stable subordinator.
    """

    index: float
    mass: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.index < 1.0:
            raise ValueError(f"index must lie in (0, 1), got {self.index}")
        if self.mass < 0.0:
            raise ValueError(f"mass must be nonnegative, got {self.mass}")

    @property
    def shift(self):
        """Exponential tilt ``m**(1/index)`` of the relativistic density."""
        return self.mass ** (1.0 / self.index) if self.mass > 0 else 0.0


def laplace_exponent(spec, lam):
    """Laplace exponent ``Phi(lam)``; ``E exp(-lam T_1) = exp(-Phi(lam))``."""
    return exponent(spec.index, spec.mass, lam)


def exponent(index, mass, lam):
    """``(lam + m**(1/index))**index - m`` for ``0 < index <= 1``.

    ``index = 1`` is the deterministic clock ``T_t = t`` and is allowed here
    so that Brownian motion itself fits the subordinated form.
    """
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0):
        raise ValueError("lambda must be nonnegative")
    if mass == 0.0 or index == 1.0:
        return lam ** index
    # (lam + c)^a - c^a, written to avoid cancellation for small lam
    c = mass ** (1.0 / index)
    return mass * np.expm1(index * np.log1p(lam / c))


def _kanter_a(theta, a):
    return (np.sin(a * theta) ** a * np.sin((1 - a) * theta) ** (1 - a)
            / np.sin(theta)) ** (1.0 / (1 - a))


def _stable_series(s, a, terms=400):
    """Convergent large-``s`` series of the one-sided stable density."""
    k = np.arange(1, terms + 1)
    logmag = (special.gammaln(a * k + 1) - special.gammaln(k + 1)
              - (a * k + 1) * np.log(s))
    sgn = (-1.0) ** (k + 1) * np.sin(pi * a * k)
    return float(np.sum(sgn * np.exp(logmag)) / pi)


def _stable_density(s, a):
    if a == 0.5:
        return np.exp(-0.25 / s) / (2.0 * sqrt(pi) * s ** 1.5)
    return general_stable_density(s, a)


def general_stable_density(s, a):
    """One-sided stable density at a scalar ``s`` without closed forms:
    the convergent series far out, Kanter's integral elsewhere."""
    if s ** (-a) < 0.3:
        return _stable_series(s, a)
    x = s ** (-a / (1 - a))

    def integrand(theta):
        k = _kanter_a(theta, a)
        return k * np.exp(-x * k)

    val, _ = integrate(integrand, 0.0, pi, abs_tol=1e-300, rel_tol=1e-12,
                       strict=False)
    return a / ((1 - a) * pi) * s ** (-1.0 / (1 - a)) * val


def eval_eta(spec, s):
    """Density ``eta(1, s)`` of ``T_1``; vectorized over ``s > 0``."""
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(s_arr <= 0):
        raise ValueError("s must be positive")
    a = spec.index
    if a == 0.5:
        out = _stable_density(s_arr, a)
    else:
        out = np.array([_stable_density(v, a) for v in s_arr])
    if spec.mass > 0:
        out = out * np.exp(spec.mass - spec.shift * s_arr)
    return out if np.ndim(s) else float(out[0])


def laplace_residuals(spec, lambdas=(0.5, 1.0, 2.0, 4.0)):
    """``int exp(-lam s) eta(1,s) ds - exp(-Phi(lam))`` for each ``lam``."""
    out = []
    for lam in lambdas:
        val, _ = integrate_halfline_log(
            lambda s, lam=lam: eval_eta(spec, s) * np.exp(-lam * s),
            1.0, width=40.0, abs_tol=1e-14, rel_tol=1e-11)
        out.append(float(val) - float(np.exp(-laplace_exponent(spec, lam))))
    return out


def total_mass(spec):
    val, _ = integrate_halfline_log(lambda s: eval_eta(spec, s), 1.0,
                                    width=60.0, abs_tol=1e-14,
                                    rel_tol=1e-11)
    return float(val)


def default_s_grid(lo=1e-3, hi=1e3, num=600):
    return np.geomspace(lo, hi, num)


def tail_limit(spec):
    """``lim s**(1+index) eta(1,s)`` as ``s -> inf`` (pure stable only)."""
    a = spec.index
    return a / gamma(1.0 - a) if spec.mass == 0 else 0.0


def check_etabound(spec, s_grid=None):
    """Measured constant ``C`` with ``eta(1,s) <= C s**(-1-index)``.

    The supremum is taken over ``s_grid``.  When it sits at the right end of
    the grid the weighted density is still increasing there, so the value is
    extended to ``s -> inf`` by Richardson extrapolation in ``s**-index``
    over the last grid points.
    """
    s = default_s_grid() if s_grid is None else np.asarray(s_grid, float)
    if s.min() > 1e-3 or s.max() < 1e3:
        raise ValueError("s_grid must span at least [1e-3, 1e3]")
    w = s ** (1 + spec.index) * eval_eta(spec, s)
    c = float(w.max())
    if int(np.argmax(w)) >= s.size - 2:
        tail = s[-8:]
        z = tail ** (-spec.index)
        coef = np.polyfit(z, w[-8:], 3)
        c = max(c, float(np.polyval(coef, 0.0)))
    return c


def check_growth(spec, lo=1e2, hi=1e6, num=41):
    """Fitted log-log slope of ``Phi`` over ``[lo, hi]``."""
    lam = np.geomspace(lo, hi, num)
    slope, _ = np.polyfit(np.log(lam), np.log(laplace_exponent(spec, lam)), 1)
    return float(slope)


def check_fourierray(spec):
    """``int_0^inf t phihat(t e)^2 dt`` for a unit vector ``e``.

    ``spec`` carries ``alpha`` and ``mass``; the transform of the time-one
    density is ``phihat(xi) = exp(-Phi((2 pi |xi|)^2))`` with ``Phi`` of index
    ``alpha / 2``.  Raises ``ValueError`` when the integral diverges.
    """
    index = spec.alpha / 2.0

    def integrand(t):
        return t * np.exp(-2.0 * exponent(index, spec.mass,
                                          (2 * pi * t) ** 2))

    val, err = integrate_halfline_log(integrand, 0.1, width=60.0,
                                      abs_tol=1e-15, rel_tol=1e-12)
    tail = integrand(np.array([0.1 * np.exp(60.0)]))[0]
    if not np.isfinite(val) or tail > 1e-30:
        raise ValueError("ray integral diverges")
    return float(val)


class EtaTable:
    """Spline of ``log eta(1, s)`` against ``log s`` for fast repeated use.

    Below the table ``eta`` is treated as zero (it vanishes faster than any
    power there); above it the ``s**(-1-index)`` tail of the pure density is
    continued, times the relativistic exponential tilt.
    """

    def __init__(self, spec, lo=1e-6, hi=1e10, num=3000):
        from scipy.interpolate import CubicSpline

        self.spec = spec
        pure = SubordinatorSpec(spec.index)
        s = np.geomspace(lo, hi, num)
        vals = eval_eta(pure, s)
        keep = vals > 1e-300
        self._s = s[keep]
        self._log = np.log(vals[keep])
        self._spline = CubicSpline(np.log(self._s), self._log)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        lo, hi = self._s[0], self._s[-1]
        mid = (s >= lo) & (s <= hi)
        out[mid] = np.exp(self._spline(np.log(s[mid])))
        top = s > hi
        out[top] = np.exp(self._log[-1]) * (hi / s[top]) ** (
            1 + self.spec.index)
        if self.spec.mass > 0:
            out = out * np.exp(self.spec.mass - self.spec.shift * s)
        return out


_ETA_TABLES = {}


def eta_table(spec):
    if spec not in _ETA_TABLES:
        _ETA_TABLES[spec] = EtaTable(spec)
    return _ETA_TABLES[spec]
