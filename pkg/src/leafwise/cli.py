"""Command line entry point.

    leafwise solve scenario.json [--out DIR] [--seed S]
    leafwise sweep scenario.json --param Phi --from A --to B --steps N [--threads K]

Exit codes: 0 all certificates pass, 1 a certificate failed, 2 configuration error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path

from .errors import ConfigError
from .scenario import SWEEP_PARAMS, load_scenario, run_pipeline, run_sweep, write_outputs

log = logging.getLogger("leafwise")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="leafwise", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("solve", help="run the full pipeline on one scenario")
    s.add_argument("scenario")
    s.add_argument("--out", default=None)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--threads", type=int, default=1)
    w = sub.add_parser("sweep", help="run the pipeline across a parameter range")
    w.add_argument("scenario")
    w.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    w.add_argument("--from", dest="start", type=float, required=True)
    w.add_argument("--to", dest="stop", type=float, required=True)
    w.add_argument("--steps", type=int, required=True)
    w.add_argument("--out", default=None)
    w.add_argument("--seed", type=int, default=None)
    w.add_argument("--threads", type=int, default=1)
    return p


def _solve(args) -> int:
    sc = load_scenario(args.scenario).with_overrides(args.seed, args.out)
    res = run_pipeline(sc)
    out = Path(sc.output)
    write_outputs(sc, res, out, datetime.now(timezone.utc).isoformat())
    if res.failing:
        for c in res.certificates:
            if not c.passed:
                print(f"FAILED {c.name}: {c.detail}".rstrip(": "), file=sys.stderr)
        return 1
    print(f"{sc.name}: all certificates pass; report in {out / 'report.json'}")
    return 0


def _sweep(args) -> int:
    sc = load_scenario(args.scenario).with_overrides(args.seed, args.out)
    out = Path(sc.output)
    rows = run_sweep(sc, args.param, args.start, args.stop, args.steps, out, args.threads)
    conv = sum(1 for r in rows if r.get("converged"))
    print(f"{sc.name}: {len(rows)} points, {conv} converged; table in {out / 'sweep.csv'}")
    return 0


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        return _solve(args) if args.command == "solve" else _sweep(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
