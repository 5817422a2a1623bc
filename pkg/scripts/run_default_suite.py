"""Run every experiment at its default configuration and record timings.

    python scripts/run_default_suite.py --out runs/suite-a
    python scripts/run_default_suite.py --out runs/suite-b
    python scripts/run_default_suite.py --compare runs/suite-a runs/suite-b

Each experiment writes report.json and results.csv under <out>/<experiment>.
Runs that stop with a refusal or cap exhaustion record the message instead,
so two suites can still be compared entry by entry.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field

from percolab.cli import write_outputs
from percolab.experiments import (
    EXPERIMENTS,
    CapExhausted,
    ExperimentConfig,
    OracleFailure,
    RefusalError,
    run,
)


@dataclass
class SuiteConfig:
    out: str
    seed: int = 0
    experiments: list = field(default_factory=lambda: list(EXPERIMENTS))


def run_suite(sc: SuiteConfig) -> dict:
    os.makedirs(sc.out, exist_ok=True)
    summary = {}
    for name in sc.experiments:
        t0 = time.perf_counter()
        cfg = ExperimentConfig.from_dict({"experiment": name, "seed": sc.seed})
        entry = {"status": "ok"}
        try:
            report = run(cfg)
            write_outputs(report, os.path.join(sc.out, name), diagnostics=True)
            text = report.to_json()
            entry["sha256"] = hashlib.sha256(text.encode()).hexdigest()
        except (RefusalError, CapExhausted, OracleFailure) as e:
            entry["status"] = type(e).__name__
            entry["message"] = str(e) if not isinstance(e, OracleFailure) else "oracle failure"
        entry["seconds"] = round(time.perf_counter() - t0, 2)
        summary[name] = entry
        print(f"{name:15s} {entry['status']:13s} {entry['seconds']:9.1f}s", flush=True)
    with open(os.path.join(sc.out, "suite.json"), "w") as f:
        json.dump({"config": asdict(sc), "results": summary}, f, indent=2, sort_keys=True)
    return summary


def compare(a: str, b: str) -> bool:
    ra = json.load(open(os.path.join(a, "suite.json")))["results"]
    rb = json.load(open(os.path.join(b, "suite.json")))["results"]
    same = True
    for name in sorted(set(ra) | set(rb)):
        x, y = ra.get(name, {}), rb.get(name, {})
        keys = ("status", "sha256", "message")
        ok = all(x.get(k) == y.get(k) for k in keys)
        same &= ok
        print(f"{'SAME' if ok else 'DIFF'}  {name}")
    return same


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs/suite")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--only", help="comma-separated experiment names")
    ap.add_argument("--compare", nargs=2, metavar=("DIR_A", "DIR_B"))
    args = ap.parse_args(argv)
    if args.compare:
        return 0 if compare(*args.compare) else 1
    exps = args.only.split(",") if args.only else list(EXPERIMENTS)
    run_suite(SuiteConfig(args.out, args.seed, exps))
    return 0


if __name__ == "__main__":
    sys.exit(main())
