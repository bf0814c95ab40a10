"""Command-line entry point.

    python -m app.main <command> --rule <file> [flags]

Exit codes: 0 success, 1 analysis error, 2 usage or rule-file error.
"""
import argparse
import asyncio
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from app.config import settings
from app.schemas import report_payload
from app.services.analysis_pipeline import run_command
from app.services.errors import AnalysisError, RuleSpecError
from app.services.rule_parser import load_rule_file

EXIT_OK = 0
EXIT_ANALYSIS = 1
EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--rule", required=True, help="Rule file (JSON)")
    common.add_argument("--seed", type=int, default=None, help="PRNG seed (overrides the rule file)")
    common.add_argument("--json-out", default=None, help="Also write the report to this file")
    common.add_argument("--threads", type=int, default=None, help="Worker threads for per-n sweeps")
    common.add_argument("--verbose", action="store_true", help="Debug logging on stderr")

    parser = argparse.ArgumentParser(prog="app.main", description="Linear cellular automata over F_p^r")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("analyze", parents=[common], help="Invariants, counts, zeta, orbits and oracle checks")
    fix = sub.add_parser("fixcount", parents=[common], help="log_p #Fix(g^n)")
    fix.add_argument("--n", type=int, required=True)
    z = sub.add_parser("zeta", parents=[common], help="Truncated zeta function and its classification")
    z.add_argument("--order", type=int, default=None)
    orb = sub.add_parser("orbits", parents=[common], help="Periodic orbit counts and asymptotics")
    orb.add_argument("--lmax", type=int, default=None)
    sim = sub.add_parser("simulate", parents=[common], help="Run a periodic configuration")
    sim.add_argument("--config", required=True, help="JSON cells, or a file holding them")
    sim.add_argument("--steps", type=int, default=10)
    ver = sub.add_parser("verify", parents=[common], help="Check the field/sequence correspondence")
    ver.add_argument("--nmax", type=int, default=None)
    sub.add_parser("companion", parents=[common], help="Companion rule of the rule file's blocks")

    return parser


def load_config_arg(value: str):
    """--config accepts inline JSON or a path to a JSON file."""
    text = value
    if not value.lstrip().startswith("["):
        try:
            text = Path(value).read_text(encoding="utf-8")
        except OSError as e:
            raise RuleSpecError(f"--config: cannot read {value}: {e}") from e
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise RuleSpecError(f"--config: {e}") from e


def configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)

    if args.threads is not None and args.threads < 1:
        parser.error("--threads must be >= 1")

    try:
        spec = load_rule_file(args.rule)
        report = asyncio.run(run_command(
            args.command,
            spec,
            n=getattr(args, "n", None),
            order=getattr(args, "order", None),
            l_max=getattr(args, "lmax", None),
            config=load_config_arg(args.config) if args.command == "simulate" else None,
            steps=getattr(args, "steps", 10),
            seed=args.seed,
            n_max=getattr(args, "nmax", None),
            threads=args.threads or settings.THREADS,
        ))
    except RuleSpecError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except AnalysisError as e:
        print(f"analysis error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_ANALYSIS

    text = json.dumps(report_payload(report), indent=2)
    print(text)
    if args.json_out:
        Path(args.json_out).write_text(text + "\n", encoding="utf-8")

    if getattr(report, "confined", True) is False:
        return EXIT_ANALYSIS
    if getattr(report, "passed", True) is False:
        return EXIT_ANALYSIS
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
