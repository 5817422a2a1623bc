"""How log(sigma)/N concentrates as the strip widens.

    python scripts/sigma_growth.py --N 4,6,8,10 --replicas 500

sigma is the last height at which some vertex of that row is still
connected to the bottom segment inside the strip.  For each N the script prints quantiles of
log(sigma)/N next to the rate predicted from gamma estimates, using a small
cap so the run stays short; censored replicas are counted, not dropped.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field

import numpy as np

from percolab.experiments import ExperimentConfig, default_cap, gamma_table, sigma_samples, sigma_summary
from percolab.lattice import DensityProfile
from percolab.rng import derive_seed


@dataclass
class Config:
    Ns: list = field(default_factory=lambda: [4, 6, 8, 10])
    k: tuple = (0.5, 0.5)
    p: tuple = (0.75, 0.85)
    replicas: int = 500
    rate_replicas: int = 20_000
    cap_limit: int = 200_000
    seed: int = 0


def run(cfg: Config) -> tuple[float, list[dict]]:
    ecfg = ExperimentConfig.from_dict({"experiment": "theorem1", "rate_replicas": cfg.rate_replicas,
                                       "seed": cfg.seed, "gamma_Ns": [4, 6, 8]})
    table, _ = gamma_table(ecfg, cfg.p)
    target = sum(k * table[float(p)]["rate"] for k, p in zip(cfg.k, cfg.p))
    prof = DensityProfile(cfg.k, cfg.p)
    rows = []
    for N in cfg.Ns:
        cap = default_cap(target, N, cfg.cap_limit)
        sig = sigma_samples(prof, N, cfg.replicas, derive_seed(cfg.seed, "growth", N), cap)
        rows.append(sigma_summary(sig, N, cap, target, [0.2]))
    return target, rows


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", default="4,6,8,10")
    ap.add_argument("--replicas", type=int, default=Config.replicas)
    ap.add_argument("--rate-replicas", type=int, default=Config.rate_replicas)
    ap.add_argument("--cap-limit", type=int, default=Config.cap_limit)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    cfg = Config([int(x) for x in args.N.split(",")], replicas=args.replicas,
                 rate_replicas=args.rate_replicas, cap_limit=args.cap_limit, seed=args.seed)
    target, rows = run(cfg)
    print(f"target rate {target:.4f}")
    print(f"{'N':>4} {'cap':>8} {'cens':>5} {'q05':>7} {'q50':>7} {'q95':>7} {'dev0.2':>7}")
    for r in rows:
        q = [r.get(k, np.nan) for k in ("q05", "q50", "q95")]
        print(f"{r['N']:4d} {r['cap']:8d} {r['censored']:5d} {q[0]:7.3f} {q[1]:7.3f} {q[2]:7.3f} "
              f"{r.get('dev_0.2', np.nan):7.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
