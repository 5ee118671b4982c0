"""Monte Carlo check of the pairing identity for the stochastic-integral
representation, one ensemble shared by several symbols.

    python scripts/mc_duality.py --paths 20000 --height 2
"""

import argparse
from dataclasses import asdict, dataclass, field

import numpy as np

from stablecz import montecarlo as mc
from stablecz import symbols
from stablecz.density import StableSpec
from stablecz.fields import Geometry, SampledField
from stablecz.io import write_json


@dataclass
class DualityExperiment:
    mode: str = "br"
    paths: int = 20_000
    height: float = 2.0
    seed: int = 0
    box: float = 8.0
    points: int = 256
    symbols: list = field(default_factory=lambda: ["zero", "identity",
                                                   "riesz_1"])


def run(cfg):
    geom = Geometry(1, cfg.box, cfg.points)
    x = geom.axis()
    f = SampledField(geom, np.exp(-x ** 2 / 0.5), "f")
    g = SampledField(geom, np.exp(-(x - 0.5) ** 2), "g")
    st = cfg.mode == "st"
    spec = StableSpec(2.0 if st else 1.0, 1)
    names = ["spatial_identity" if st and n == "identity" else n
             for n in cfg.symbols if not (st and n.startswith("riesz_"))]
    syms = [symbols.get_symbol(n, 1) for n in names]
    ens = mc.run_paths(mc.PathConfig(cfg.mode, None, cfg.height, cfg.paths,
                                     cfg.seed), spec, syms, f)
    out = {}
    for A in syms:
        c = mc.check_duality(ens, f, g, A)
        out[A.name] = c.to_dict()
        z = 0.0 if c.std_error == 0 else c.z
        print(f"{A.name:<18} estimate {c.estimate:+.6f} +- {c.std_error:.1e} "
              f"reference {c.reference:+.6f}  z {z:+.2f}", flush=True)
    norm = mc.check_norm_preservation(ens, f, 2)
    out["norm"] = norm.to_dict()
    print(f"norm z {norm.z:+.2f}; {ens.runtime:.1f}s, escaped {ens.escaped}")
    return out


def main():
    ap = argparse.ArgumentParser(description="Monte Carlo duality experiment")
    ap.add_argument("--mode", choices=("br", "st"), default="br")
    ap.add_argument("--paths", type=int, default=20_000)
    ap.add_argument("--height", type=float, default=2.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out")
    a = ap.parse_args()
    cfg = DualityExperiment(a.mode, a.paths, a.height, a.seed)
    res = run(cfg)
    if a.out:
        write_json(a.out, {"config": asdict(cfg), "results": res})


if __name__ == "__main__":
    main()
