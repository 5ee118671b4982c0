"""Matrix symbols ``A(x, y)`` acting on the gradient in the upper half-space.

Indices are 0-based internally: ``0..n-1`` are spatial and ``n`` is the
vertical direction.  JSON files use 1-based indices so that the vertical
index reads ``n+1``.

Entries are constants, functions of ``y`` or functions of ``(x, y)`` taken
from a fixed catalog; there is no expression parsing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

CONST, FY, FXY = "const", "fy", "fxy"


def _one(y):
    return np.ones_like(np.asarray(y, dtype=float))


def _indicator_y_lt_1(y):
    return (np.asarray(y, dtype=float) < 1.0).astype(float)


def _exp_neg_y(y):
    return np.exp(-np.asarray(y, dtype=float))


def _y_over_1py(y):
    y = np.asarray(y, dtype=float)
    return y / (1.0 + y)


# name -> (function of y, breakpoints in y)
FY_CATALOG = {
    "one": (_one, ()),
    "indicator_y_lt_1": (_indicator_y_lt_1, (1.0,)),
    "exp_neg_y": (_exp_neg_y, ()),
    "y_over_1py": (_y_over_1py, ()),
}


def _half_plus_cos(x, y):
    x = np.asarray(x, dtype=float)
    return 0.5 + 0.5 * np.cos(x[..., 0]) * np.exp(-np.asarray(y, float))


def _inv_one_plus_x2(x, y):
    x = np.asarray(x, dtype=float)
    return 1.0 / (1.0 + np.sum(x * x, axis=-1)) + 0.0 * np.asarray(y, float)


# functions of (x, y); x has a trailing axis of length n.  All lie in [0, 1].
FXY_CATALOG = {
    "half_plus_cos": _half_plus_cos,
    "inv_one_plus_x2": _inv_one_plus_x2,
}


@dataclass(frozen=True)
class Entry:
    kind: str
    value: float = 1.0
    expr: str = "one"

    def __post_init__(self):
        if self.kind not in (CONST, FY, FXY):
            raise ValueError(f"unknown entry type {self.kind!r}")
        if self.kind == FY and self.expr not in FY_CATALOG:
            raise ValueError(f"unknown y-builtin {self.expr!r}")
        if self.kind == FXY and self.expr not in FXY_CATALOG:
            raise ValueError(f"unknown (x,y)-builtin {self.expr!r}")

    def of_y(self, y):
        """Value for an x-independent entry; vectorized over ``y``."""
        if self.kind == CONST:
            return self.value * np.ones_like(np.asarray(y, dtype=float))
        if self.kind == FY:
            return self.value * FY_CATALOG[self.expr][0](y)
        raise ValueError("entry depends on x")

    def of_xy(self, x, y):
        if self.kind == FXY:
            return self.value * FXY_CATALOG[self.expr](x, y)
        x = np.asarray(x, dtype=float)
        return self.of_y(np.broadcast_to(y, x.shape[:-1]))

    @property
    def breakpoints(self):
        return FY_CATALOG[self.expr][1] if self.kind == FY else ()

    def to_dict(self, i, j):
        d = {"i": i + 1, "j": j + 1, "type": self.kind}
        if self.kind == CONST:
            d["value"] = self.value
        else:
            d["expr"] = self.expr
            if self.value != 1.0:
                d["value"] = self.value
        return d


@dataclass(frozen=True)
class MatrixSymbol:
    """Sparse ``(n+1) x (n+1)`` symbol; absent entries are zero."""

    dim: int
    entries: dict = field(default_factory=dict)
    name: str = "custom"

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be at least 1")
        for (i, j), e in self.entries.items():
            if not (0 <= i <= self.dim and 0 <= j <= self.dim):
                raise ValueError(f"entry ({i + 1},{j + 1}) out of range")
            if e.kind == FXY and self.dim in (i, j):
                raise ValueError(
                    f"entry ({i + 1},{j + 1}) touches the vertical direction "
                    "and must not depend on x")

    def __hash__(self):
        return hash((self.dim, self.name, tuple(sorted(self.entries.items()))))

    @property
    def vertical(self):
        return self.dim

    @property
    def is_zero(self):
        return all(e.kind == CONST and e.value == 0 for e in self.entries.values())

    @property
    def is_constant(self):
        return all(e.kind == CONST for e in self.entries.values())

    @property
    def is_y_only(self):
        return all(e.kind != FXY for e in self.entries.values())

    @property
    def all_spatial(self):
        return all(self.dim not in k or (e.kind == CONST and e.value == 0)
                   for k, e in self.entries.items())

    @property
    def breakpoints(self):
        pts = set()
        for e in self.entries.values():
            pts.update(e.breakpoints)
        return tuple(sorted(pts))

    def matrix_y(self, y):
        """Stack of matrices ``A(y)`` with shape ``y.shape + (n+1, n+1)``."""
        y = np.asarray(y, dtype=float)
        out = np.zeros(y.shape + (self.dim + 1, self.dim + 1))
        for (i, j), e in self.entries.items():
            out[..., i, j] = e.of_y(y)
        return out

    def matrix_xy(self, x, y):
        """``A(x, y)``; ``x`` has a trailing axis of length ``n``."""
        x = np.asarray(x, dtype=float)
        shape = np.broadcast_shapes(x.shape[:-1], np.shape(y))
        out = np.zeros(shape + (self.dim + 1, self.dim + 1))
        for (i, j), e in self.entries.items():
            out[..., i, j] = e.of_xy(x, y)
        return out

    def constant_matrix(self):
        if not self.is_constant:
            raise ValueError("symbol is not constant")
        return self.matrix_y(np.array(1.0))

    def norm(self, samples=None):
        """``sup |A(x,y) v|`` over ``|v| <= 1``, sampled over ``(x, y)``.

        Constant symbols are exact; catalog functions attain their suprema
        on the sampled set closely enough for all listed builtins.
        """
        if self.is_constant:
            return float(np.linalg.norm(self.constant_matrix(), 2))
        y = np.concatenate([np.geomspace(1e-6, 1e6, 241), [0.999999, 1.0]])
        if self.is_y_only:
            mats = self.matrix_y(y)
        else:
            rng = np.random.default_rng(0)
            n_x = 64 if samples is None else samples
            x = np.concatenate([np.zeros((1, self.dim)),
                                rng.uniform(-6, 6, (n_x, self.dim))])
            mats = self.matrix_xy(x[:, None, :], y[None, :])
        return float(np.max(np.linalg.norm(mats, 2, axis=(-2, -1))))

    def to_dict(self):
        return {"dim": self.dim, "name": self.name,
                "entries": [e.to_dict(i, j)
                            for (i, j), e in sorted(self.entries.items())],
                "norm": self.norm()}

    @classmethod
    def from_dict(cls, d):
        entries = {}
        for item in d["entries"]:
            kind = item.get("type", CONST)
            key = (int(item["i"]) - 1, int(item["j"]) - 1)
            if kind == CONST:
                entries[key] = Entry(CONST, float(item["value"]))
            else:
                entries[key] = Entry(kind, float(item.get("value", 1.0)),
                                     item["expr"])
        return cls(int(d["dim"]), entries, d.get("name", "custom"))

    def scaled(self, expr):
        """Multiply every entry by the y-builtin ``expr``."""
        out = {}
        for k, e in self.entries.items():
            if e.kind == CONST:
                out[k] = Entry(FY, e.value, expr)
            elif e.expr == "one" and e.kind == FY:
                out[k] = Entry(FY, e.value, expr)
            else:
                raise ValueError("only constant entries can be rescaled")
        return MatrixSymbol(self.dim, out, f"{self.name}@{expr}")


def load_symbol(path):
    with open(path) as fh:
        return MatrixSymbol.from_dict(json.load(fh))


def riesz(j, dim):
    """Antisymmetric symbol coupling the vertical direction with axis ``j``.

    ``j`` is 1-based.  Its operator is a first-order Riesz transform.
    """
    if not 1 <= j <= dim:
        raise ValueError(f"axis {j} out of range for dim {dim}")
    return MatrixSymbol(dim, {(dim, j - 1): Entry(CONST, 1.0),
                              (j - 1, dim): Entry(CONST, -1.0)},
                        f"riesz_{j}")


def riesz2(i, j, dim):
    """Single spatial entry ``-1`` at ``(i, j)`` (1-based)."""
    if not (1 <= i <= dim and 1 <= j <= dim):
        raise ValueError(f"entry ({i},{j}) out of range for dim {dim}")
    return MatrixSymbol(dim, {(i - 1, j - 1): Entry(CONST, -1.0)},
                        f"riesz2_{i}{j}")


def identity(dim):
    return MatrixSymbol(dim, {(k, k): Entry(CONST, 1.0)
                              for k in range(dim + 1)}, "identity")


def zero(dim):
    return MatrixSymbol(dim, {}, "zero")


def spatial_identity(dim):
    return MatrixSymbol(dim, {(k, k): Entry(CONST, 1.0) for k in range(dim)},
                        "spatial_identity")


def modulated_spatial(dim, expr="half_plus_cos"):
    """Spatial identity block times an x-dependent catalog function."""
    return MatrixSymbol(dim, {(k, k): Entry(FXY, 1.0, expr)
                              for k in range(dim)}, f"modulated_{expr}")


def get_symbol(name, dim):
    """Catalog lookup.

    Names: ``riesz_J``, ``riesz2_IJ``, ``identity``, ``zero``,
    ``spatial_identity``, ``modulated`` (x-dependent), optionally followed by
    ``@expr`` to multiply by a y-builtin, e.g. ``identity@indicator_y_lt_1``.
    A path to a JSON file is also accepted.
    """
    if name.endswith(".json"):
        return load_symbol(name)
    base, _, expr = name.partition("@")
    if base.startswith("riesz2_") and len(base) == 9:
        sym = riesz2(int(base[7]), int(base[8]), dim)
    elif base.startswith("riesz_"):
        sym = riesz(int(base[6:]), dim)
    elif base == "identity":
        sym = identity(dim)
    elif base == "zero":
        sym = zero(dim)
    elif base == "spatial_identity":
        sym = spatial_identity(dim)
    elif base.startswith("modulated"):
        _, _, fx = base.partition(":")
        sym = modulated_spatial(dim, fx or "half_plus_cos")
    else:
        raise ValueError(f"unknown symbol {name!r}")
    return sym.scaled(expr) if expr else sym
