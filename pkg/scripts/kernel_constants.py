"""Tabulate measured kernel size and smoothness constants.

Runs the CZ-bound suite over a grid of indices, dimensions and symbols and
records the two suprema with their range-extension counterparts.

    python scripts/kernel_constants.py --symbols riesz_1,identity@exp_neg_y
"""

import argparse
from dataclasses import asdict, dataclass, field

from stablecz import symbols, verify
from stablecz.density import StableSpec
from stablecz.io import write_json


@dataclass
class KernelSweep:
    alphas: list = field(default_factory=lambda: [0.7, 1.0, 1.5, 2.0])
    dims: list = field(default_factory=lambda: [1, 2])
    symbols: list = field(default_factory=lambda: ["riesz_1",
                                                   "identity@exp_neg_y"])


def run(cfg):
    rows = []
    for a in cfg.alphas:
        for n in cfg.dims:
            for name in cfg.symbols:
                rep = verify.suite_cz_bounds(StableSpec(a, n),
                                             symbols.get_symbol(name, n))
                m = rep.measured
                rows.append({"alpha": a, "dim": n, "symbol": name,
                             "passed": rep.passed, "runtime_s": rep.runtime,
                             **{k: m[k] for k in m if k.startswith("kappa")}})
                print(f"{a:<4} n={n} {name:<22} size {m['kappa_size']:.6f} "
                      f"smooth {m['kappa_smooth']:.6f} "
                      f"{'ok' if rep.passed else 'FAIL'}", flush=True)
    return rows


def main():
    ap = argparse.ArgumentParser(description="kernel constant sweep")
    ap.add_argument("--alphas", default="0.7,1,1.5,2")
    ap.add_argument("--dims", default="1,2")
    ap.add_argument("--symbols", default="riesz_1,identity@exp_neg_y")
    ap.add_argument("--out")
    a = ap.parse_args()
    cfg = KernelSweep([float(v) for v in a.alphas.split(",")],
                      [int(v) for v in a.dims.split(",")],
                      a.symbols.split(","))
    rows = run(cfg)
    if a.out:
        write_json(a.out, {"config": asdict(cfg), "rows": rows})


if __name__ == "__main__":
    main()
