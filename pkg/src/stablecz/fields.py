"""Periodic sampling grids and sampled fields."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Geometry:
    """``N`` points per axis on ``[-L/2, L/2)^n``; spacing ``h = L / N``."""

    dim: int
    L: float
    N: int

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError("grids support dim 1, 2 or 3")
        if self.L <= 0:
            raise ValueError("box length must be positive")
        if self.N < 2 or self.N & (self.N - 1):
            raise ValueError("N must be a power of two")

    @property
    def h(self):
        return self.L / self.N

    @property
    def shape(self):
        return (self.N,) * self.dim

    @property
    def cell(self):
        return self.h ** self.dim

    def axis(self):
        return -0.5 * self.L + self.h * np.arange(self.N)

    def coords(self):
        """Coordinate arrays, one per axis, each of shape ``self.shape``."""
        return np.meshgrid(*([self.axis()] * self.dim), indexing="ij")

    def points(self):
        return np.stack(self.coords(), axis=-1)

    def frequencies(self):
        """Dual-grid arrays ``xi_k = k / L`` in FFT order, one per axis."""
        f = np.fft.fftfreq(self.N, d=self.h)
        return np.meshgrid(*([f] * self.dim), indexing="ij")

    def to_dict(self):
        return {"dim": self.dim, "L": self.L, "N": self.N}


@dataclass
class SampledField:
    geometry: Geometry
    values: np.ndarray
    name: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.shape != self.geometry.shape:
            raise ValueError(f"values have shape {self.values.shape}, "
                             f"grid needs {self.geometry.shape}")

    @classmethod
    def from_function(cls, geometry, func, name=""):
        return cls(geometry, func(*geometry.coords()), name)

    def norm(self, p):
        """Grid ``L^p`` norm by the midpoint rule."""
        return float((np.sum(np.abs(self.values) ** p)
                      * self.geometry.cell) ** (1.0 / p))

    def integral(self):
        return self.values.sum() * self.geometry.cell

    def tail_ratio(self):
        """``max |f|`` within ``L/4`` of the boundary over ``max |f|``."""
        top = np.max(np.abs(self.values))
        if top == 0:
            return 0.0
        inner = np.ones(self.geometry.shape, dtype=bool)
        for c in self.geometry.coords():
            inner &= np.abs(c) < self.geometry.L / 4
        return float(np.max(np.abs(self.values[~inner])) / top)

    def check_support(self, tol=1e-12):
        ratio = self.tail_ratio()
        if ratio > tol:
            raise ValueError(f"field {self.name!r} is not negligible near the "
                             f"box boundary (ratio {ratio:.2e} > {tol:.0e})")

    def to_dict(self):
        v = self.values
        if np.iscomplexobj(v):
            flat = np.stack([v.real.ravel(), v.imag.ravel()], axis=-1).tolist()
        else:
            flat = v.ravel().tolist()
        return {**self.geometry.to_dict(), "name": self.name,
                "values": flat, "meta": self.meta}

    @classmethod
    def from_dict(cls, d):
        geom = Geometry(int(d["dim"]), float(d["L"]), int(d["N"]))
        v = np.asarray(d["values"], dtype=float)
        if v.ndim == 2 and v.shape[1] == 2:
            v = v[:, 0] + 1j * v[:, 1]
        return cls(geom, v.reshape(geom.shape), d.get("name", ""),
                   d.get("meta", {}))

    def save(self, path):
        from .io import write_json
        write_json(path, self.to_dict())

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))
