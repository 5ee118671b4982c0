"""Lp ratios of transformed battery fields against the martingale bound."""

import argparse
from dataclasses import asdict, dataclass, field

from stablecz import symbols, verify
from stablecz.density import StableSpec
from stablecz.io import write_json


@dataclass
class LpExperiment:
    alpha: float = 1.0
    dim: int = 1
    symbol: str = "riesz_1"
    p_list: list = field(default_factory=lambda: list(verify.P_LIST))


def run(cfg):
    spec = StableSpec(cfg.alpha, cfg.dim)
    A = symbols.get_symbol(cfg.symbol, cfg.dim)
    rep = verify.suite_strong_weak(spec, A, p_list=tuple(cfg.p_list))
    for c in rep.checks:
        if c.name.startswith("strong_p"):
            print(f"{c.name:<12} worst ratio {c.value:.4f}  bound "
                  f"{c.target:.4f}  ({c.witness['field']})", flush=True)
    print("weak sups:", {k: round(v, 4)
                         for k, v in rep.measured["weak_sup"].items()})
    return rep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha", type=float, default=1.0)
    ap.add_argument("--dim", type=int, default=1)
    ap.add_argument("--symbol", default="riesz_1")
    ap.add_argument("--out")
    a = ap.parse_args()
    cfg = LpExperiment(a.alpha, a.dim, a.symbol)
    rep = run(cfg)
    if a.out:
        write_json(a.out, {"config": asdict(cfg), **rep.to_dict()})


if __name__ == "__main__":
    main()
