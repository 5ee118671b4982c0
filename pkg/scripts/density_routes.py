"""Compare Fourier inversion with the subordination mixture on a radial grid.

    python scripts/density_routes.py --alphas 0.5,1,1.5 --dims 1,2 --out routes.json
"""

import argparse
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from stablecz.density import StableSpec, eval_density_fourier, \
    eval_density_subordination
from stablecz.io import write_json


@dataclass
class RouteConfig:
    alphas: list = field(default_factory=lambda: [0.5, 1.0, 1.5])
    dims: list = field(default_factory=lambda: [1, 2])
    r_max: float = 10.0
    num: int = 41


def run(cfg):
    rows = []
    radii = np.linspace(0.0, cfg.r_max, cfg.num)
    for a in cfg.alphas:
        for n in cfg.dims:
            spec = StableSpec(a, n)
            t0 = time.perf_counter()
            rel = []
            for r in radii:
                x = np.zeros(n)
                x[0] = r
                fv = eval_density_fourier(spec, x)
                rel.append(abs(eval_density_subordination(spec, x) / fv - 1))
            rows.append({"alpha": a, "dim": n, "max_rel_diff": max(rel),
                         "worst_r": float(radii[int(np.argmax(rel))]),
                         "seconds": time.perf_counter() - t0})
            print(f"alpha={a:<4} n={n}  max rel diff {max(rel):.2e}", flush=True)
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alphas", default="0.5,1,1.5")
    ap.add_argument("--dims", default="1,2")
    ap.add_argument("--r-max", type=float, default=10.0)
    ap.add_argument("--num", type=int, default=41)
    ap.add_argument("--out")
    a = ap.parse_args()
    cfg = RouteConfig([float(v) for v in a.alphas.split(",")],
                      [int(v) for v in a.dims.split(",")], a.r_max, a.num)
    rows = run(cfg)
    if a.out:
        write_json(a.out, {"config": asdict(cfg), "rows": rows})


if __name__ == "__main__":
    main()
