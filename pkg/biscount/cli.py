"""Command-line entry point: `biscount count|gen|verify|serve`.

Results go to stdout, logs (including error reports) to stderr. Exit codes:
0 success, 1 verify mismatch, 2 input error, 3 budget or resource limit.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from biscount.bigraph import generate_regular, read_graph, write_graph
from biscount.config import RunConfig
from biscount.config_store import JSONConfigStore
from biscount.engine import count_bis
from biscount.errors import (
    BudgetExceededError,
    ConvergenceError,
    GenerationError,
    GraphFormatError,
    GraphInvariantError,
    PartMismatchError,
    ProfileNotFoundError,
    RegimeError,
)
from biscount.logging_setup import configure_logging, get_logger
from biscount.oracle import verify_graph

logger = get_logger("cli")

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_INPUT = 2
EXIT_BUDGET = 3

INPUT_ERRORS = (
    GraphFormatError,
    GraphInvariantError,
    PartMismatchError,
    RegimeError,
    ValidationError,
    ProfileNotFoundError,
    json.JSONDecodeError,
    OSError,
)
BUDGET_ERRORS = (BudgetExceededError, GenerationError, ConvergenceError)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING (default) or ERROR")
    p.add_argument("--log-format", choices=["json", "text"], default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="biscount",
        description="Approximate and exact counting of independent sets in regular bipartite graphs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    count = sub.add_parser("count", help="estimate i(G) for an edge-list file")
    count.add_argument("--input", required=True, help="edge-list file")
    count.add_argument("--epsilon", type=float, default=None, help="relative error (clamped to 1)")
    count.add_argument("--seed", type=int, default=None)
    count.add_argument("--t0", type=int, default=None, help="override the contraction threshold")
    count.add_argument("--c-const", type=float, default=None, help="t0 = ceil(c * ln(n/eps))")
    count.add_argument("--exact", action="store_true", help="force the exact counter")
    count.add_argument("--workers", type=int, default=None)
    count.add_argument(
        "--no-regime-check",
        action="store_true",
        help="run the approximation pipeline even outside its valid regime",
    )
    count.add_argument("--brute-force-threshold", type=int, default=None)
    count.add_argument("--profile", default=None, help="named profile from the profile file")
    count.add_argument("--profile-path", default=None, help="profile file (default config/profiles.json)")
    count.add_argument("--json", action="store_true", help="print the result as JSON")
    count.add_argument("--no-timing", action="store_true", help="omit wall_ms from JSON output")
    _add_common(count)
    count.set_defaults(func=cmd_count)

    gen = sub.add_parser("gen", help="write a random d-regular bipartite graph")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--d", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    _add_common(gen)
    gen.set_defaults(func=cmd_gen)

    verify = sub.add_parser("verify", help="run the exact oracle comparisons")
    verify.add_argument("--input", required=True)
    verify.add_argument("--t0", type=int, default=1)
    _add_common(verify)
    verify.set_defaults(func=cmd_verify)

    serve = sub.add_parser("serve", help="run the HTTP API")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    _add_common(serve)
    serve.set_defaults(func=cmd_serve)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Environment, then the named profile, then explicit flags."""
    cfg = RunConfig.from_env()
    if args.profile:
        profile = JSONConfigStore(args.profile_path).load(args.profile)
        cfg = cfg.merged(**profile.model_dump(include=profile.model_fields_set))
    flags: Dict[str, Any] = {
        "epsilon": args.epsilon,
        "seed": args.seed,
        "t0_override": args.t0,
        "c_const": args.c_const,
        "workers": args.workers,
        "brute_force_threshold": args.brute_force_threshold,
        "force_exact": True if args.exact else None,
        "enforce_regime": False if args.no_regime_check else None,
    }
    return cfg.merged(**flags)


def cmd_count(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    g = read_graph(args.input)
    result = count_bis(g, cfg)
    if args.json:
        print(result.to_json(include_timing=not args.no_timing))
    else:
        print(
            f"i(G) ~ {result.estimate_decimal()}  (log2 {result.log2_estimate:.6f}, "
            f"method {result.method.value}, t0 {result.t0}, |family| {result.family_size})"
        )
    return EXIT_OK


def cmd_gen(args: argparse.Namespace) -> int:
    g = generate_regular(args.n, args.d, args.seed)
    write_graph(g, args.out)
    logger.info("graph written", extra={"path": args.out, "n": g.n, "d": g.d, "seed": args.seed})
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    g = read_graph(args.input)
    report = verify_graph(g, args.t0)
    print(json.dumps(report.to_dict(), indent=2))
    return EXIT_OK if report.ok else EXIT_MISMATCH


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from biscount.api import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level, json_format=args.log_format == "json")
    try:
        return args.func(args)
    except INPUT_ERRORS as exc:
        logger.error(str(exc), extra={"error": type(exc).__name__, "exit_code": EXIT_INPUT})
        return EXIT_INPUT
    except BUDGET_ERRORS as exc:
        logger.error(str(exc), extra={"error": type(exc).__name__, "exit_code": EXIT_BUDGET})
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
