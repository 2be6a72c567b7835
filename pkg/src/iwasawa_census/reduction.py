"""Local reduction data: Frobenius traces, bad primes, Tamagawa products, 5-torsion."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .arith import factorint, primes_up_to, quadratic_character_table
from .curve_model import CurveModel
from .tate import ADDITIVE, GOOD, NONSPLIT, SPLIT, ReductionData, tate_local

__all__ = [
    "ADDITIVE",
    "GOOD",
    "NONSPLIT",
    "SPLIT",
    "BadReduction",
    "FrobeniusData",
    "ReductionData",
    "bad_primes",
    "frobenius",
    "local_data",
    "rules_out_rational_5_torsion",
    "tamagawa_product_mod",
    "tate_local",
]

DEFAULT_TORSION_BUDGET = 200


class BadReduction(ValueError):
    def __init__(self, curve: CurveModel, p: int):
        super().__init__(f"{curve.A},{curve.B} has bad reduction at {p}")
        self.curve = curve
        self.p = p


@dataclass(frozen=True)
class FrobeniusData:
    p: int
    a_p: int
    n_p: int
    ordinary: bool
    anomalous: bool


def trace_of_frobenius(A: int, B: int, p: int) -> int:
    """-sum_x chi_p(x^3 + A x + B) for an odd prime p."""
    chi = quadratic_character_table(p)
    x = np.arange(p, dtype=np.int64)
    # Reduce in steps so nothing leaves int64 for p < 2^20.
    v = (x * x % p) * x % p + (A % p) * x % p + B % p
    return -int(chi[v % p].sum(dtype=np.int64))


def frobenius(c: CurveModel, p: int) -> FrobeniusData:
    if p == 2 or c.discriminant % p == 0:
        raise BadReduction(c, p)
    a = trace_of_frobenius(c.A, c.B, p)
    n = p + 1 - a
    return FrobeniusData(p, a, n, ordinary=a % p != 0, anomalous=n % p == 0)


def bad_primes(c: CurveModel) -> list[int]:
    """Primes dividing -16 (4A^3 + 27B^2): always 2, plus the primes of the naive discriminant."""
    return sorted({2} | set(factorint(c.delta)))


def local_data(c: CurveModel) -> list[ReductionData]:
    return [tate_local(c, ell) for ell in bad_primes(c)]


def tamagawa_product_mod(c: CurveModel, q: int) -> int:
    prod = 1
    for data in local_data(c):
        prod = prod * data.c % q
    return prod


def rules_out_rational_5_torsion(c: CurveModel, budget: int = DEFAULT_TORSION_BUDGET) -> str:
    """"yes" if some good prime l <= budget, l != 5, has 5 not dividing #E(F_l).

    Rational torsion of order prime to l injects into the reduction at a good
    prime l, so one such l certifies E(Q)[5] = 0.  Never claims torsion exists.
    """
    for ell in primes_up_to(budget):
        if ell in (2, 5) or c.discriminant % ell == 0:
            continue
        if frobenius(c, ell).n_p % 5 != 0:
            return "yes"
    return "inconclusive"
