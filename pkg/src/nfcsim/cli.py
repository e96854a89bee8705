"""`nfcsim` command line: simulate, calibrate, compare-protocols, offload-bench.

Exit codes: 0 success, 1 experiment failure under --strict, 2 configuration
error.  NFCSIM_LOG sets the log level (DEBUG prints every trace line).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import warnings
from pathlib import Path
from typing import List, Optional

from . import bench
from .errors import ConfigParse, NfcSimError, UnknownWorkload
from .readiness import DEFAULT_THRESHOLD, default_table, load_table
from .report import Report
from .scenario import bundled_scenario_path, load_scenario

EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nfcsim", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, scenario=True):
        if scenario:
            sp.add_argument("scenario", help="scenario YAML file, or the name of a bundled scenario")
            sp.add_argument("--seed", type=_u64, help="override the scenario seed")
            sp.add_argument("--repeats", type=_positive, help="override the scenario repeat count")
            sp.add_argument("--strict", action="store_true",
                            help="exit 1 if any experiment fails at a role switch")
        sp.add_argument("--out", type=Path, help="write output here instead of stdout")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")

    common(sub.add_parser("simulate", help="run a scenario's protocol experiment"))
    common(sub.add_parser("compare-protocols", help="disabling-enabling vs enabling-disabling"))
    ob = sub.add_parser("offload-bench", help="local vs offloaded workload execution")
    common(ob)
    ob.add_argument("--plaintext", type=Path, help="RSA plaintext file")
    cal = sub.add_parser("calibrate", help="fit the readiness model to success-rate tables")
    cal.add_argument("tables", help="CSV of success rates, or 'default' for the bundled tables")
    cal.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD,
                     help="minimum success rate for a recommended delay (default 0.80)")
    cal.add_argument("--round-trips", type=_positive, default=50,
                     help="round trips per tabulated experiment (default 50)")
    cal.add_argument("--seed", type=_u64, default=0)
    common(cal, scenario=False)
    return p


def _scenario_path(name: str) -> Path:
    path = Path(name)
    if path.exists():
        return path
    bundled = bundled_scenario_path(name)
    if bundled.exists():
        return bundled
    raise ConfigParse(f"no scenario file {name!r}")


def _emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _setup_logging() -> None:
    level = os.environ.get("NFCSIM_LOG", "WARNING").upper()
    logging.basicConfig(stream=sys.stderr, format="%(name)s %(levelname)s %(message)s",
                        level=getattr(logging, level, logging.WARNING))
    logging.captureWarnings(True)


def run(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _setup_logging()
    try:
        if args.command == "calibrate":
            if not 0.0 <= args.threshold <= 1.0:
                raise ConfigParse("--threshold must lie in [0, 1]")
            rows = default_table() if args.tables == "default" else load_table(args.tables)
            model, rep = bench.calibration_report(rows, args.threshold, args.round_trips, args.seed)
            _emit(model.to_json(), args.out)
            sys.stderr.write(rep.render(args.format))
            return EXIT_OK
        scn = load_scenario(_scenario_path(args.scenario)).override(args.seed, args.repeats)
        if args.command == "simulate":
            rep = bench.simulate(scn)
        elif args.command == "compare-protocols":
            rep = bench.compare_protocols(scn)
        else:
            text = args.plaintext.read_bytes() if args.plaintext else None
            rep = bench.offload_bench(scn, text)
    except (ConfigParse, UnknownWorkload, OSError) as e:
        print(f"nfcsim: configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NfcSimError as e:
        print(f"nfcsim: {e}", file=sys.stderr)
        return EXIT_CONFIG
    _emit(rep.render(args.format), args.out)
    if args.strict and rep.failures:
        print(f"nfcsim: {rep.failures} experiment(s) failed at a role switch", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
