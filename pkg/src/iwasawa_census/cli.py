"""Command-line entry point: ``iwasawa-census --experiment ...``."""

from __future__ import annotations

import argparse
import json
import logging
import re
import sys
from decimal import Decimal, InvalidOperation

from .census import DEFAULT_AUDIT_X, EXPERIMENTS, FORMATS, CensusConfig, CensusError, run

_POWER = re.compile(r"\s*(\d+)\s*(?:\*\*|\^)\s*(\d+)\s*\Z")


def parse_height(text: str) -> int:
    """Exact positive integer from '100000000', '1e8', '10**8' or '10^8'."""
    m = _POWER.match(text)
    if m:
        value = int(m.group(1)) ** int(m.group(2))
    else:
        try:
            d = Decimal(text.strip().replace("_", ""))
        except InvalidOperation:
            raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
        if not d.is_finite() or d != d.to_integral_value():
            raise argparse.ArgumentTypeError(f"height bound must be an integer: {text!r}")
        value = int(d)
    if value < 1:
        raise argparse.ArgumentTypeError("height bound must be >= 1")
    return value


def parse_grid(text: str) -> tuple[int, ...]:
    return tuple(parse_height(x) for x in text.split(",") if x.strip())


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="iwasawa-census",
        description="Census of short Weierstrass curves ordered by height.",
    )
    p.add_argument("--experiment", required=True, choices=EXPERIMENTS)
    p.add_argument("--height-bound", type=parse_height, default=None,
                   help="X, e.g. 1e8 or 10**8 (audit-E defaults to 10**13, others to 10**6)")
    p.add_argument("--grid", type=parse_grid, default=None,
                   help="comma-separated list of X values (brumer, density)")
    p.add_argument("--family", default=None, help="all | E | pi:<ell> | file:<path>")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--output", default=None, help="report path (default: stdout)")
    p.add_argument("--format", choices=FORMATS, default="csv")
    p.add_argument("--reference-facts", default=None, help="CSV A,B,rank,sha5_trivial")
    p.add_argument("--reference-reduction", default=None,
                   help="CSV A,B,ell,kodaira,conductor_exponent,tamagawa to cross-check")
    p.add_argument("--euler-cutoff", type=parse_height, default=10**6)
    p.add_argument("--checkpoint-dir", default=None)
    p.add_argument("--checkpoint-interval", type=int, default=None,
                   help="A-values per shard; shards are the unit of checkpointing")
    p.add_argument("--allow-network", action="store_true",
                   help="fetch Selmer facts from $IWASAWA_CENSUS_ENDPOINT")
    p.add_argument("--quiet", action="store_true")
    return p


def config_from_args(ns: argparse.Namespace) -> CensusConfig:
    X = ns.height_bound
    if X is None:
        X = DEFAULT_AUDIT_X if ns.experiment == "audit-E" else 10**6
    family = ns.family
    if family is None:
        family = "pi:7" if ns.experiment == "density" else "all"
    return CensusConfig(
        experiment=ns.experiment,
        height_bound=X,
        family=family,
        jobs=ns.jobs,
        output=ns.output,
        format=ns.format,
        reference_facts=ns.reference_facts,
        reference_reduction=ns.reference_reduction,
        euler_cutoff=ns.euler_cutoff,
        checkpoint_dir=ns.checkpoint_dir,
        checkpoint_interval=ns.checkpoint_interval,
        allow_network=ns.allow_network,
        grid=ns.grid,
    )


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.ERROR if ns.quiet else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = config_from_args(ns)
        return run(config, log=None if ns.quiet else sys.stderr)
    except CensusError as exc:
        print(json.dumps(exc.as_dict()), file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
