"""Monte Carlo martingale transforms in one space dimension.

Two path models:

* ``background_radiation`` (``alpha = 1``): standard Brownian ``(X, Y)`` starts at
  ``(U, Y_max)`` with ``U`` uniform on the periodic box and runs until ``Y``
  hits zero.  ``u_f`` is the Poisson extension.  Averaged over the start
  point, the expected time spent near height ``y`` has density
  ``2 min(y, Y_max)``, which is the ``2y`` weight of the duality identity
  once ``Y_max`` is large.
* ``spacetime`` (``alpha = 2``): ``Z_s = (B_s, T - s)`` for ``s`` in
  ``[0, T]`` with ``B`` run at twice the standard speed (generator
  ``Delta``) and ``u_f`` the heat extension ``exp(-4 pi^2 |xi|^2 t)``.

The transform ``A * f`` is the left-point sum of ``A grad u_f . dB``.
Gradients come from tables on the field grid and a ladder of heights,
interpolated linearly.  Each path draws from its own generator seeded with
``(seed * 1000003 + i) mod 2^32``, so ensembles are bitwise reproducible.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from math import pi

import numba
import numpy as np

from .fields import SampledField
from .quadrature import integrate, integrate_halfline_log

BACKGROUND = "background_radiation"
SPACETIME = "spacetime"
MODES = {"br": BACKGROUND, "st": SPACETIME,
         BACKGROUND: BACKGROUND, SPACETIME: SPACETIME}


@dataclass(frozen=True)
class PathConfig:
    mode: str = BACKGROUND
    h_t: float | None = None
    start_height: float = 4.0
    n_paths: int = 10_000
    seed: int = 0
    max_steps: int = 10_000_000
    height_cap: float = 1e6

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        object.__setattr__(self, "mode", MODES[self.mode])
        if self.h_t is None:
            object.__setattr__(self, "h_t", 1e-3 * self.start_height)
        if self.h_t <= 0 or self.start_height <= 0:
            raise ValueError("step and start height must be positive")
        if self.n_paths < 1:
            raise ValueError("need at least one path")

    def to_dict(self):
        return asdict(self)


# --- extensions ----------------------------------------------------------------

class Extension:
    """Tables of ``u_f`` and its gradient on the grid times a height ladder."""

    def __init__(self, f, mode=BACKGROUND, *, top=None, rungs=600,
                 horizon=None):
        geom = f.geometry
        if geom.dim != 1:
            raise ValueError("Monte Carlo supports dim 1")
        if np.iscomplexobj(f.values):
            raise ValueError("field must be real")
        self.mode = MODES[mode]
        self.field = f
        self.L, self.N = geom.L, geom.N
        xi = np.fft.fftfreq(geom.N, d=geom.h)
        fhat = np.fft.fft(f.values)
        if self.mode == BACKGROUND:
            top = 40.0 * geom.L if top is None else top
            ladder = np.concatenate([[0.0], np.geomspace(1e-3 * geom.h, top,
                                                         rungs)])
            damp = np.exp(-2 * pi * np.abs(xi)[None, :] * ladder[:, None])
            self.grad_y = np.fft.ifft(-2 * pi * np.abs(xi) * fhat * damp).real
        else:
            if horizon is None:
                raise ValueError("spacetime extension needs the horizon T")
            ladder = np.concatenate([[0.0], np.geomspace(1e-4 * geom.h ** 2,
                                                         horizon, rungs)])
            damp = np.exp(-4 * pi ** 2 * xi[None, :] ** 2 * ladder[:, None])
            self.grad_y = np.zeros((ladder.size, geom.N))
        self.ladder = ladder
        self.u = np.fft.ifft(fhat * damp).real
        self.grad_x = np.fft.ifft(2j * pi * xi * fhat * damp).real

    def _interp(self, table, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        pos = ((x + 0.5 * self.L) / self.L % 1.0) * self.N
        i0 = np.floor(pos).astype(int) % self.N
        i1 = (i0 + 1) % self.N
        wx = pos - np.floor(pos)
        k = np.clip(np.searchsorted(self.ladder, y) - 1, 0,
                    self.ladder.size - 2)
        wy = np.clip((y - self.ladder[k]) / (self.ladder[k + 1]
                                             - self.ladder[k]), 0, 1)
        lo = table[k, i0] * (1 - wx) + table[k, i1] * wx
        hi = table[k + 1, i0] * (1 - wx) + table[k + 1, i1] * wx
        return lo * (1 - wy) + hi * wy

    def value(self, x, y):
        return self._interp(self.u, x, y)

    def gradient(self, x, y):
        return (self._interp(self.grad_x, x, y),
                self._interp(self.grad_y, x, y))


def extend(f, spec=None, *, mode=None, horizon=None, **kw):
    """Extension of ``f``: Poisson for ``alpha = 1``, heat for ``alpha = 2``."""
    if mode is None:
        if spec is None:
            raise ValueError("need a spec or a mode")
        if spec.alpha == 1:
            mode = BACKGROUND
        elif spec.alpha == 2:
            mode = SPACETIME
        else:
            raise ValueError("Monte Carlo supports alpha 1 and 2 only")
    return Extension(f, mode, horizon=horizon, **kw)


def symbol_table(A, ladder, mode):
    """``A(y)`` on the ladder as ``(rungs, 2, 2)``; spacetime uses the
    spatial entry only."""
    if A.dim != 1:
        raise ValueError("Monte Carlo supports dim 1")
    if not A.is_y_only:
        raise ValueError("Monte Carlo supports x-independent symbols")
    mats = A.matrix_y(ladder)
    if mode == SPACETIME:
        if np.any(mats[:, 1, :] != 0) or np.any(mats[:, :, 1] != 0):
            raise ValueError("spacetime transforms use spatial symbols")
    return np.ascontiguousarray(mats)


# --- path kernels ----------------------------------------------------------------------

@numba.njit(cache=True)
def _ladder_index(ladder, y):
    k = np.searchsorted(ladder, y) - 1
    if k < 0:
        k = 0
    if k > ladder.size - 2:
        k = ladder.size - 2
    return k


@numba.njit(cache=True)
def _grid_weights(x, L, N):
    pos = ((x + 0.5 * L) / L) % 1.0 * N
    i0 = int(np.floor(pos)) % N
    return i0, (i0 + 1) % N, pos - np.floor(pos)


@numba.njit(cache=True)
def _bilinear(table, k, wy, i0, i1, wx):
    lo = table[k, i0] * (1 - wx) + table[k, i1] * wx
    hi = table[k + 1, i0] * (1 - wx) + table[k + 1, i1] * wx
    return lo * (1 - wy) + hi * wy


@numba.njit(cache=True)
def _run_background(grad_x, grad_y, ladder, L, N, mats, y_max, h_t,
                    n_paths, seed, max_steps, y_cap):
    n_sym = mats.shape[0]
    end = np.empty(n_paths)
    trans = np.zeros((n_sym, n_paths))
    status = np.zeros(n_paths, dtype=np.int64)
    steps_used = np.zeros(n_paths, dtype=np.int64)
    top = ladder[-1]
    for p in range(n_paths):
        np.random.seed((seed * 1000003 + p) % 4294967296)
        x = (np.random.random() - 0.5) * L
        y = y_max
        steps = 0
        while True:
            ratio = y / y_max
            dt = h_t * (ratio * ratio if ratio > 1.0 else 1.0)
            sq = np.sqrt(dt)
            dbx = sq * np.random.standard_normal()
            dby = sq * np.random.standard_normal()
            gx = 0.0
            gy = 0.0
            k = 0
            wy = 0.0
            if y < top:
                k = _ladder_index(ladder, y)
                wy = (y - ladder[k]) / (ladder[k + 1] - ladder[k])
                i0, i1, wx = _grid_weights(x, L, N)
                gx = _bilinear(grad_x, k, wy, i0, i1, wx)
                gy = _bilinear(grad_y, k, wy, i0, i1, wx)
            y_new = y + dby
            theta = 1.0
            if y_new <= 0.0:
                theta = y / (y - y_new)
            if gx != 0.0 or gy != 0.0:
                for s in range(n_sym):
                    a00 = mats[s, k, 0, 0] * (1 - wy) + mats[s, k + 1, 0, 0] * wy
                    a01 = mats[s, k, 0, 1] * (1 - wy) + mats[s, k + 1, 0, 1] * wy
                    a10 = mats[s, k, 1, 0] * (1 - wy) + mats[s, k + 1, 1, 0] * wy
                    a11 = mats[s, k, 1, 1] * (1 - wy) + mats[s, k + 1, 1, 1] * wy
                    vx = a00 * gx + a01 * gy
                    vy = a10 * gx + a11 * gy
                    trans[s, p] += theta * (vx * dbx + vy * dby)
            x += theta * dbx
            steps += 1
            if y_new <= 0.0:
                break
            y = y_new
            if y > y_cap or steps >= max_steps:
                status[p] = 1
                break
        end[p] = ((x + 0.5 * L) % L) - 0.5 * L
        steps_used[p] = steps
    return end, trans, status, steps_used


@numba.njit(cache=True)
def _run_spacetime(grad_x, ladder, L, N, mats, horizon, h_t, n_paths, seed):
    n_sym = mats.shape[0]
    end = np.empty(n_paths)
    trans = np.zeros((n_sym, n_paths))
    n_steps = int(np.ceil(horizon / h_t - 1e-12))
    dt_last = horizon - (n_steps - 1) * h_t
    for p in range(n_paths):
        np.random.seed((seed * 1000003 + p) % 4294967296)
        x = (np.random.random() - 0.5) * L
        for step in range(n_steps):
            dt = h_t if step < n_steps - 1 else dt_last
            t = horizon - step * h_t
            db = np.sqrt(2.0 * dt) * np.random.standard_normal()
            k = _ladder_index(ladder, t)
            wy = (t - ladder[k]) / (ladder[k + 1] - ladder[k])
            if wy > 1.0:
                wy = 1.0
            i0, i1, wx = _grid_weights(x, L, N)
            gx = _bilinear(grad_x, k, wy, i0, i1, wx)
            if gx != 0.0:
                for s in range(n_sym):
                    a = mats[s, k, 0, 0] * (1 - wy) + mats[s, k + 1, 0, 0] * wy
                    trans[s, p] += a * gx * db
            x += db
        end[p] = ((x + 0.5 * L) % L) - 0.5 * L
    return end, trans


# --- ensembles ------------------------------------------------------------------------

@dataclass
class Ensemble:
    config: PathConfig
    symbols: list
    endpoint: np.ndarray
    transform: np.ndarray          # (symbols, paths)
    terminal_f: np.ndarray
    escaped: int
    box: float
    runtime: float
    steps: np.ndarray = field(default=None, repr=False)

    def transform_for(self, name):
        return self.transform[self.symbols.index(name)]

    def to_records(self, symbol=0):
        s = self.symbols.index(symbol) if isinstance(symbol, str) else symbol
        return [{"endpoint": float(e), "transform_value": float(t),
                 "terminal_f": float(v)}
                for e, t, v in zip(self.endpoint, self.transform[s],
                                   self.terminal_f)]

    def to_dict(self):
        return {"config": self.config.to_dict(), "symbols": self.symbols,
                "escaped": self.escaped, "box": self.box,
                "runtime_s": self.runtime,
                "paths": {name: self.to_records(i)
                          for i, name in enumerate(self.symbols)}}


def _interp_periodic(values, L, x):
    N = values.size
    pos = ((x + 0.5 * L) / L % 1.0) * N
    i0 = np.floor(pos).astype(int) % N
    w = pos - np.floor(pos)
    return values[i0] * (1 - w) + values[(i0 + 1) % N] * w


def run_paths(config, spec, symbols, f, extension=None):
    """Simulate ``config.n_paths`` paths and transform ``f`` by each symbol.

    ``symbols`` is one :class:`MatrixSymbol` or a list; all share the paths.
    Paths that exceed the height cap or the step budget are excluded and
    counted in ``escaped``.
    """
    if not isinstance(symbols, (list, tuple)):
        symbols = [symbols]
    mode = config.mode
    if spec is not None:
        want = BACKGROUND if spec.alpha == 1 else SPACETIME
        if spec.alpha not in (1, 2) or want != mode:
            raise ValueError("background radiation pairs with alpha = 1, "
                             "spacetime with alpha = 2")
    ext = extension or extend(f, mode=mode, horizon=config.start_height)
    if ext.mode != mode:
        raise ValueError("extension mode does not match the configuration")
    mats = np.ascontiguousarray(np.stack(
        [symbol_table(A, ext.ladder, mode) for A in symbols]))
    t0 = time.perf_counter()
    if mode == BACKGROUND:
        end, trans, status, steps = _run_background(
            ext.grad_x, ext.grad_y, ext.ladder, ext.L, ext.N, mats,
            config.start_height, config.h_t, config.n_paths, config.seed,
            config.max_steps, config.height_cap * config.start_height)
        keep = status == 0
    else:
        end, trans = _run_spacetime(ext.grad_x, ext.ladder, ext.L, ext.N,
                                    mats, config.start_height, config.h_t,
                                    config.n_paths, config.seed)
        steps = None
        keep = np.ones(end.size, dtype=bool)
    runtime = time.perf_counter() - t0
    escaped = int(np.count_nonzero(~keep))
    if escaped > 1e-3 * config.n_paths:
        raise RuntimeError(f"{escaped} of {config.n_paths} paths escaped")
    end = end[keep]
    return Ensemble(config, [A.name for A in symbols], end, trans[:, keep],
                    _interp_periodic(f.values, ext.L, end), escaped, ext.L,
                    runtime, steps)


# --- checks ---------------------------------------------------------------------------

@dataclass
class MCComparison:
    estimate: float
    std_error: float
    reference: float

    @property
    def z(self):
        if self.std_error == 0:
            return 0.0 if self.estimate == self.reference else np.inf
        return (self.estimate - self.reference) / self.std_error

    def within(self, k=3.0):
        return abs(self.estimate - self.reference) <= k * self.std_error

    def to_dict(self):
        return {"estimate": self.estimate, "std_error": self.std_error,
                "reference": self.reference, "z": self.z}


def _mean_se(samples, scale):
    n = samples.size
    mean = float(np.mean(samples)) * scale
    se = float(np.std(samples, ddof=1) / np.sqrt(n)) * scale if n > 1 else 0.0
    return mean, se


def check_norm_preservation(ensemble, f, p):
    """``E|f(B_0)|^p`` (Lebesgue start) against ``int |f|^p``."""
    if p < 1:
        raise ValueError("p must be at least 1")
    mean, se = _mean_se(np.abs(ensemble.terminal_f) ** p, ensemble.box)
    return MCComparison(mean, se, f.norm(p) ** p)


def duality_rhs(f, g, A, mode=BACKGROUND, *, height=None):
    """``int int w A grad u_f . grad u_g`` on the periodic box.

    Background radiation: ``w = 2 min(y, height)`` (``height=None`` gives
    ``2y``).  Spacetime: ``w = 2`` on ``t < height``, the quadratic
    variation rate of the doubled-speed motion.  The spatial integral
    is a Parseval sum; the height integral is adaptive quadrature.
    """
    mode = MODES[mode]
    geom = f.geometry
    if g.geometry != geom:
        raise ValueError("f and g live on different grids")
    xi = np.fft.fftfreq(geom.N, d=geom.h)
    k = np.abs(xi)
    cross = np.fft.fft(f.values) * np.conj(np.fft.fft(g.values)) * (
        geom.L / geom.N ** 2)

    if mode == BACKGROUND:
        def spatial(y):
            y = np.asarray(y, dtype=float)
            mats = A.matrix_y(y)                          # (Y, 2, 2)
            damp = np.exp(-4 * pi * k[None, :] * y[:, None])
            bx = 2j * pi * xi
            by = -2 * pi * k + 0j
            # sum_ij a_ij b_j conj(b_i)
            q = (mats[:, 0, 0, None] * bx * np.conj(bx)
                 + mats[:, 0, 1, None] * by * np.conj(bx)
                 + mats[:, 1, 0, None] * bx * np.conj(by)
                 + mats[:, 1, 1, None] * by * np.conj(by))
            s = np.sum(q * damp * cross[None, :], axis=1).real
            w = 2 * (y if height is None else np.minimum(y, height))
            return w * s

        kmin = 1.0 / geom.L
        lo = 1e-6 * geom.h
        val, _ = integrate(spatial, 0.0, lo, abs_tol=1e-16, rel_tol=1e-12)
        center = 1.0 / (4 * pi * kmin)
        kinks = list(A.breakpoints) + ([height] if height is not None else [])
        pts = sorted(np.log((b - lo) / center) for b in kinks if b > lo)
        rest, _ = integrate_halfline_log(
            lambda y: spatial(lo + y), center, width=60.0,
            abs_tol=1e-15, rel_tol=1e-11, points=pts or None)
        return float(val + rest)

    def spatial_t(t):
        t = np.asarray(t, dtype=float)
        mats = A.matrix_y(t)
        damp = np.exp(-8 * pi ** 2 * xi[None, :] ** 2 * t[:, None])
        q = 2 * mats[:, 0, 0, None] * 4 * pi ** 2 * xi[None, :] ** 2
        return np.sum(q * damp * cross[None, :], axis=1).real

    if height is None:
        val, _ = integrate_halfline_log(spatial_t, geom.L ** 2, width=60.0,
                                        abs_tol=1e-15, rel_tol=1e-11)
    else:
        pts = list(height * np.geomspace(1e-12, 1.0, 25)[:-1])
        val, _ = integrate(spatial_t, 0.0, height, points=pts,
                           abs_tol=1e-15, rel_tol=1e-11)
    return float(val)


def check_duality(ensemble, f, g, A, *, name=None):
    """MC ``E[(A * f) g(B_0)]`` against the duality integral truncated at
    the start height (the exact target for a finite start)."""
    name = A.name if name is None else name
    samples = ensemble.transform_for(name) * _interp_periodic(
        g.values, ensemble.box, ensemble.endpoint)
    mean, se = _mean_se(samples, ensemble.box)
    ref = duality_rhs(f, g, A, ensemble.config.mode,
                      height=ensemble.config.start_height)
    return MCComparison(mean, se, ref)


@dataclass
class Projection:
    centers: np.ndarray
    mean: np.ndarray
    std_error: np.ndarray
    counts: np.ndarray

    @property
    def empty_bins(self):
        return np.flatnonzero(self.counts == 0)


def project(ensemble, n_bins, symbol=0):
    """Bin averages of the transform by endpoint with standard errors."""
    s = ensemble.symbols.index(symbol) if isinstance(symbol, str) else symbol
    L = ensemble.box
    edges = np.linspace(-0.5 * L, 0.5 * L, n_bins + 1)
    which = np.clip(np.searchsorted(edges, ensemble.endpoint, "right") - 1,
                    0, n_bins - 1)
    vals = ensemble.transform[s]
    counts = np.bincount(which, minlength=n_bins)
    sums = np.bincount(which, weights=vals, minlength=n_bins)
    sq = np.bincount(which, weights=vals * vals, minlength=n_bins)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)
        var = np.where(counts > 1, (sq - counts * mean ** 2)
                       / np.maximum(counts - 1, 1), np.nan)
        se = np.sqrt(np.maximum(var, 0) / np.maximum(counts, 1))
    return Projection(0.5 * (edges[1:] + edges[:-1]), mean, se, counts)


def bin_average(f, n_bins):
    """Averages of a grid field over the projection bins (endpoints are
    uniform on the box, so this is the exact target of :func:`project`)."""
    geom = f.geometry
    if geom.N % n_bins:
        raise ValueError("bins must divide the grid")
    # grid points sit at bin-relative offsets; trapezoid weights per bin
    per = geom.N // n_bins
    vals = np.append(f.values, f.values[0]).real
    w = np.ones(per + 1)
    w[0] = w[-1] = 0.5
    return np.array([np.dot(w, vals[b * per:(b + 1) * per + 1]) / per
                     for b in range(n_bins)])


def truncated_multiplier(A, geometry, mode=BACKGROUND, *, height):
    """Multiplier of the finite-start projection for a constant ``A``.

    Background radiation: ``q(xi) (2/c^2)(1 - exp(-c Y))``, ``c = 4 pi |xi|``
    with ``q = sum a_ij beta_j conj(beta_i)``, ``beta = (2 pi i xi,
    -2 pi |xi|)``.  Spacetime: ``a (1 - exp(-8 pi^2 xi^2 T))``.
    """
    if not A.is_constant:
        raise ValueError("closed form needs a constant symbol")
    mode = MODES[mode]
    a = A.constant_matrix()
    xi = np.fft.fftfreq(geometry.N, d=geometry.h)
    k = np.abs(xi)
    out = np.zeros(geometry.N, dtype=complex)
    pos = k > 0
    if mode == BACKGROUND:
        bx = 2j * pi * xi[pos]
        by = -2 * pi * k[pos]
        q = (a[0, 0] * bx * np.conj(bx) + a[0, 1] * by * np.conj(bx)
             + a[1, 0] * bx * np.conj(by) + a[1, 1] * by * by)
        c = 4 * pi * k[pos]
        out[pos] = q * 2 / c ** 2 * (-np.expm1(-c * height))
    else:
        out[pos] = a[0, 0] * (-np.expm1(-8 * pi ** 2 * k[pos] ** 2 * height))
    return out


def apply_truncated(f, A, mode=BACKGROUND, *, height):
    vals = np.fft.ifft(np.fft.fft(f.values) * truncated_multiplier(
        A, f.geometry, mode, height=height))
    return SampledField(f.geometry, vals.real, f"T_Y[{f.name}]")


def calibration(ensemble, f, g, identity):
    """Ratio of the MC duality estimate to the quadrature for ``A = I``.

    The occupation normalization is fixed analytically; this ratio is the
    measured check of it (1 within its standard error).
    """
    c = check_duality(ensemble, f, g, identity)
    return c.estimate / c.reference, c.std_error / abs(c.reference)
