"""Command-line interface: price, verify, simulate, analyze, generate.

Exit codes: 0 success, 1 verification failure, 2 parse or validation error,
3 unsupported regime, 4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from itertools import permutations
from pathlib import Path
from typing import Sequence

from .dispatch import ALGORITHMS, AUTO, eligibility, price_market
from .errors import PricingError
from .formats import (
    dump_json,
    load_market,
    load_prices,
    market_to_dict,
    prices_to_dict,
    rational_str,
)
from .gen import REGIMES, GenProfile, generate
from .market import Market
from .matching import count_optimal_allocations, legality
from .verify import adversarial_sweep, first_bundle, is_dynamic_pricing, simulate

EXIT_OK = 0
EXIT_REJECTED = 1
EXIT_INVALID = 2


def _write(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _bundle(market: Market, bundle) -> list[str]:
    return market.sort_items(bundle)


def cmd_price(args: argparse.Namespace) -> int:
    market = load_market(args.market)
    result = price_market(market, args.algo, args.fixed_at)
    _write(dump_json(prices_to_dict(result.prices, market, result.algorithm, args.seed)), args.output)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    market = load_market(args.market)
    prices = load_prices(args.prices, market)
    report = is_dynamic_pricing(market, prices)
    if report:
        print("accepted")
        return EXIT_OK
    player, bundle = report.counterexample
    print(f"rejected: player {player} demands {{{', '.join(_bundle(market, bundle))}}}, which no optimal allocation extends")
    return EXIT_REJECTED


def _orders(market: Market, mode: str, count: int, seed: int) -> list[tuple[str, ...]]:
    every = list(permutations(market.players))
    if mode == "all":
        return every
    rng = random.Random(seed)
    return rng.sample(every, min(count, len(every)))


def cmd_simulate(args: argparse.Namespace) -> int:
    market = load_market(args.market)
    orders = _orders(market, args.orders, args.count, args.seed)
    report = adversarial_sweep(market, budget=args.budget, orders=orders, all_ties=args.ties == "all")
    summary = {
        "optimum": rational_str(report.optimum),
        "min_welfare": rational_str(report.min_welfare),
        "max_welfare": rational_str(report.max_welfare),
        "orders": len(orders),
        "branches": report.branches,
        "complete": report.complete,
        "optimal_everywhere": report.ok,
        "failures": sorted(set(report.failures)),
    }
    if args.trace:
        trace = simulate(market, orders[0], first_bundle)
        steps = [
            {
                "player": s.player,
                "prices": {x: rational_str(p) for x, p in s.prices.items()},
                "bundle": _bundle(market, s.bundle),
            }
            for s in trace.steps
        ]
        worst = [
            {"player": p, "bundle": _bundle(market, b)} for p, b in (report.witness or ())
        ]
        doc = {
            "summary": summary,
            "first_order": list(orders[0]),
            "steps": steps,
            "final_welfare": rational_str(trace.final_welfare),
            "failure": trace.failure,
            "worst_path": worst,
        }
        Path(args.trace).write_text(dump_json(doc), encoding="utf-8")
    print(json.dumps(summary, ensure_ascii=False))
    if not report.complete:
        print("budget exhausted before every branch was explored", file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_REJECTED


def cmd_analyze(args: argparse.Namespace) -> int:
    market = load_market(args.market)
    info = legality(market)
    count = count_optimal_allocations(market, args.limit)
    elig = eligibility(market)
    doc = {
        "max_welfare": rational_str(info.max_welfare),
        "optimal_allocations": count if count <= args.limit else f">{args.limit}",
        "legal": {p: _bundle(market, info.legal[p]) for p in market.players},
        "always_assigned": {p: _bundle(market, info.exclusive[p]) for p in market.players},
        "eligibility": elig.as_dict(),
    }
    if args.json:
        print(json.dumps(doc, ensure_ascii=False, sort_keys=True))
        return EXIT_OK
    print(f"max welfare: {doc['max_welfare']}")
    print(f"optimal allocations: {doc['optimal_allocations']}")
    for p in market.players:
        print(f"player {p}: K = {{{', '.join(doc['legal'][p])}}}  R = {{{', '.join(doc['always_assigned'][p])}}}")
    regimes = [r for r in ("tri", "four", "two-alloc", "brute") if doc["eligibility"][r]]
    print(f"eligible regimes: {', '.join(regimes) if regimes else 'none'}")
    return EXIT_OK


def cmd_generate(args: argparse.Namespace) -> int:
    try:
        prof = GenProfile(
            players=tuple(args.players),
            demand=tuple(args.demand),
            value_bound=args.value_bound,
            regime=args.regime,
            seed=args.seed,
            nontrivial=args.nontrivial,
            max_items=args.max_items,
            attempts=args.attempts,
        )
    except ValueError as exc:
        print(json.dumps({"error": "InvalidProfile", "message": str(exc), "exit_code": EXIT_INVALID}), file=sys.stderr)
        return EXIT_INVALID
    _write(dump_json(market_to_dict(generate(prof))), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dynpricing", description="Dynamic pricing for multi-demand markets.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("price", help="compute a dynamic pricing")
    p.add_argument("market")
    p.add_argument("--algo", choices=ALGORITHMS, default=AUTO)
    p.add_argument("--fixed-at", metavar="ITEM", help="residual item to make cheapest (tri regime only)")
    p.add_argument("--seed", type=int, help="recorded in the price file metadata")
    p.add_argument("-o", "--output", help="price file to write (default: stdout)")
    p.set_defaults(func=cmd_price)

    p = sub.add_parser("verify", help="check that prices form a dynamic pricing")
    p.add_argument("market")
    p.add_argument("prices")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="run arrivals with repricing over orders and tie-breaks")
    p.add_argument("market")
    p.add_argument("--orders", choices=("all", "seeded"), default="all")
    p.add_argument("--count", type=int, default=10, help="orders to sample with --orders seeded")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ties", choices=("all", "first"), default="all")
    p.add_argument("--budget", type=int, default=200_000, help="maximum states to expand")
    p.add_argument("--trace", help="write a JSON trace to this file")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="report legality and regime eligibility")
    p.add_argument("market")
    p.add_argument("--limit", type=int, default=100, help="cap on counted optimal allocations")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("generate", help="generate a seeded market")
    p.add_argument("--players", type=int, nargs=2, default=(2, 4), metavar=("LO", "HI"))
    p.add_argument("--demand", type=int, nargs=2, default=(1, 3), metavar=("LO", "HI"))
    p.add_argument("--value-bound", type=int, default=10)
    p.add_argument("--regime", choices=REGIMES, default="any")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--nontrivial", action="store_true")
    p.add_argument("--max-items", type=int)
    p.add_argument("--attempts", type=int, default=2000)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PricingError as exc:
        code = exc.exit_code
        err = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    except OSError as exc:
        code = EXIT_INVALID
        err = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    print(json.dumps(err, ensure_ascii=False), file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
