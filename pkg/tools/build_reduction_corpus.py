"""Build tests/data/reference_reduction.csv from the slow reference oracles.

Rows come from short models of small general Weierstrass equations, their
twists by -3, and curves with prescribed valuations of A and B at 2, 3, 5, 7.
Every row is computed by tests/oracles.py, which never touches the package.

    python3 tools/build_reduction_corpus.py [--out PATH] [--per-type N]
"""

from __future__ import annotations

import argparse
import csv
import itertools
import re
import sys
import time
from collections import Counter
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

import oracles  # noqa: E402

ROW_PRIMES = (2, 3, 5, 7, 11, 13)


def short_from_general(a) -> tuple[int, int] | None:
    c4, c6 = oracles.c4c6(a)
    A, B = -27 * c4, -54 * c6
    if 4 * A**3 + 27 * B * B == 0:
        return None
    for q in oracles.small_primes(200):
        while A % q**4 == 0 and B % q**6 == 0 and (A, B) != (0, 0):
            A //= q**4
            B //= q**6
    return A, B


def general_sources():
    rng = range(-2, 3)
    for a1, a2, a3 in itertools.product((0, 1), (-1, 0, 1), (0, 1)):
        for a4, a6 in itertools.product(rng, rng):
            ab = short_from_general((a1, a2, a3, a4, a6))
            if ab:
                yield ab


def twisted_sources():
    """Twists by -3 of the general sources: multiplicative at 3 becomes I_n* at 3."""
    for A, B in general_sources():
        for sign in (1, -1):
            x, y = 9 * A, 27 * B * sign
            while x % 81 == 0 and y % 729 == 0 and (x, y) != (0, 0):
                x //= 81
                y //= 729
            if 4 * x**3 + 27 * y * y:
                yield x, y


def valuation_sources(p: int, per_pattern: int = 3):
    """A few curves with v_p(A) = i, v_p(B) = k for each pattern (i, k)."""
    units = [u for u in (1, -1, 2, -2, 7, -7, 11, -13) if u % p]
    for i in range(0, 7):
        for k in range(0, 10):
            if i >= 4 and k >= 6:
                continue
            pairs = [(u, w) for u in units for w in units[::-1]]
            for u, w in pairs[:per_pattern]:
                yield p**i * u, p**k * w


def label(kod: str) -> str:
    """Collapse I_n and I_n* (n >= 1) into one bucket each."""
    if re.fullmatch(r"I[1-9]\d*", kod):
        return "In"
    if re.fullmatch(r"I[1-9]\d*\*", kod):
        return "In*"
    return kod


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(ROOT / "tests" / "data" / "reference_reduction.csv"))
    ap.add_argument("--per-type", type=int, default=4)
    ap.add_argument("--n-limit", type=int, default=10**8)
    ap.add_argument("--verbose", action="store_true")
    args = ap.parse_args(argv)

    rows: dict[tuple[int, int, int], tuple] = {}
    have: Counter = Counter()
    seen: set[tuple[int, int]] = set()
    t0 = time.time()

    def take(A: int, B: int, primes):
        if (A, B) in seen or not oracles.is_minimal_short(A, B) or 4 * A**3 + 27 * B * B == 0:
            return
        seen.add((A, B))
        t = time.time()
        try:
            info = oracles.local_oracle(A, B, primes=primes, n_limit=args.n_limit)
        except (RecursionError, KeyError, AssertionError):
            return
        if args.verbose:
            print(f"{A},{B} {primes} {time.time() - t:.2f}s {info}", file=sys.stderr, flush=True)
        if not info:
            return
        for p, row in info.items():
            if "kodaira" not in row or "f" not in row or "c" not in row:
                continue
            key = (p if p <= 3 else 5, label(row["kodaira"]))
            if have[key] >= args.per_type:
                continue
            have[key] += 1
            rows[(A, B, p)] = (A, B, p, row["kodaira"], row["f"], row["c"])

    for A, B in general_sources():
        take(A, B, ROW_PRIMES)
    for A, B in twisted_sources():
        take(A, B, (3,))
    for p in (2, 3, 5, 7):
        for A, B in valuation_sources(p):
            take(A, B, (p,))
    print(f"{len(rows)} rows in {time.time() - t0:.1f}s", file=sys.stderr)
    for key, n in sorted(have.items(), key=str):
        print(f"  {key}: {n}", file=sys.stderr)

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["A", "B", "ell", "kodaira", "conductor_exponent", "tamagawa"])
        for key in sorted(rows):
            w.writerow(rows[key])
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
