"""Command line entry point: ``percolab <subcommand> [flags]``.

Exit codes: 0 success, 2 config refused, 3 oracle failure, 4 sigma cap exhausted.
Results are written only after the whole run succeeded, so a refused or
failed run leaves no files behind.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile

from .experiments import (
    EXPERIMENTS,
    CapExhausted,
    ExperimentConfig,
    OracleFailure,
    RefusalError,
    run,
)

EXIT_REFUSED, EXIT_ORACLE, EXIT_CAP = 2, 3, 4


def _flat(v):
    if isinstance(v, (list, tuple)):
        return ";".join("" if x is None else str(x) for x in v)
    return "" if v is None else v


def render_csv(report) -> str:
    buf = io.StringIO()
    buf.write(report.header + "\n")
    cols = report.columns()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for row in report.rows:
        w.writerow([_flat(row.get(c)) for c in cols])
    return buf.getvalue()


def render_diagnostics(report) -> str:
    buf = io.StringIO()
    buf.write(report.header + "\n")
    if report.diagnostics:
        cols = list(report.diagnostics[0])
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for row in report.diagnostics:
            w.writerow([_flat(row.get(c)) for c in cols])
    return buf.getvalue()


def _atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    with os.fdopen(fd, "w") as f:
        f.write(text)
    os.replace(tmp, path)


def write_outputs(report, out_dir: str, diagnostics: bool) -> list:
    os.makedirs(out_dir, exist_ok=True)
    files = {"results.csv": render_csv(report), "report.json": report.to_json()}
    if diagnostics and report.diagnostics:
        files["diagnostics.csv"] = render_diagnostics(report)
    paths = []
    for name, text in files.items():
        path = os.path.join(out_dir, name)
        _atomic_write(path, text)
        paths.append(path)
    return paths


def _floats(text):
    return [float(x) for x in text.split(",") if x]


def _ints(text):
    return [int(x) for x in text.split(",") if x]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="percolab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON file with ExperimentConfig fields")
        p.add_argument("--seed", type=int)
        p.add_argument("--replicas", type=int, help="sigma / chain replicas")
        p.add_argument("--rate-replicas", type=int, help="replicas per probability estimate")
        p.add_argument("--threads", type=int, help="worker threads (default: logical cores)")
        p.add_argument("--out", help="directory for results.csv and report.json")
        p.add_argument("--format", choices=("csv", "json"), default="json",
                       help="what to print on stdout")
        p.add_argument("--diagnostics", action="store_true",
                       help="also write chain diagnostics (rcm-strips)")
        p.add_argument("--N", type=_ints, dest="Ns", help="comma-separated N values")
        p.add_argument("--profile", help='JSON profile, e.g. \'{"k":[1],"p":[0.7]}\'')
        p.add_argument("--p", type=float, help="single density (shorthand for --profile)")
        p.add_argument("--M", type=int)
        p.add_argument("--W", type=int)
        p.add_argument("--q", type=float)
        p.add_argument("--cap-limit", type=int)
        p.add_argument("--p-grid", type=_floats)
        p.add_argument("--a-grid", type=_floats)
    return ap


def config_from_args(args) -> ExperimentConfig:
    d: dict = {}
    if args.config:
        try:
            with open(args.config) as f:
                d = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise RefusalError(f"cannot read config {args.config}: {e}") from e
    d["experiment"] = args.command
    if args.profile:
        try:
            d["profile"] = json.loads(args.profile)
        except json.JSONDecodeError as e:
            raise RefusalError(f"bad --profile: {e}") from e
    if args.p is not None:
        d["profile"] = {"k": [1.0], "p": [args.p]}
    for key, val in (("seed", args.seed), ("replicas", args.replicas),
                     ("rate_replicas", args.rate_replicas), ("Ns", args.Ns), ("M", args.M),
                     ("W", args.W), ("q", args.q), ("cap_limit", args.cap_limit),
                     ("p_grid", args.p_grid), ("a_grid", args.a_grid)):
        if val is not None:
            d[key] = val
    try:
        return ExperimentConfig.from_dict(d)
    except TypeError as e:
        raise RefusalError(str(e)) from e


def set_threads(n: int | None) -> None:
    import numba

    if n is None:
        return
    if n < 1:
        raise RefusalError("--threads must be >= 1")
    numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        set_threads(args.threads)
        cfg = config_from_args(args)
        report = run(cfg)
    except RefusalError as e:
        print(f"refused: {e}", file=sys.stderr)
        return EXIT_REFUSED
    except CapExhausted as e:
        print(f"cap exhausted: {e}", file=sys.stderr)
        return EXIT_CAP
    except OracleFailure as e:
        report = e.args[0]
        for row in report.rows:
            print(f"{'PASS' if row['ok'] else 'FAIL'}  {row['check']}: {row['detail']}")
        return EXIT_ORACLE
    if args.out:
        write_outputs(report, args.out, args.diagnostics)
    if args.command == "oracle-check":
        for row in report.rows:
            print(f"{'PASS' if row['ok'] else 'FAIL'}  {row['check']}: {row['detail']}")
    elif args.format == "csv":
        sys.stdout.write(render_csv(report))
    else:
        sys.stdout.write(report.to_json())
    if args.diagnostics and report.diagnostics and not args.out:
        sys.stderr.write(render_diagnostics(report))
    return 0


if __name__ == "__main__":
    sys.exit(main())
