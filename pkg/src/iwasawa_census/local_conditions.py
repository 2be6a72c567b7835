"""Local congruence conditions on (A, B), their densities, and congruence families.

A local condition at a prime l is a predicate on (A mod l^m, B mod l^m),
optionally with the archimedean rider A > 0.  Its density is normalized by
the measure 1 - l^-10 of the pairs that are minimal at l.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Callable, Iterable, Mapping

import numpy as np

from .arith import factorint, iroot, is_probable_prime, primes_up_to
from .curve_model import CurveModel

# Largest residue universe (l^m)^2 counted by brute force.
ENUMERATION_LIMIT = 1 << 26
_CHUNK = 1 << 22


class DensityUnavailable(ValueError):
    pass


class FamilyFileError(ValueError):
    pass


class PiPredicate:
    """l^2 does not divide 4A^3 + 27B^2, evaluated on residues mod l^2."""

    def __init__(self, ell: int):
        self.ell = ell
        self.modulus = ell * ell

    def __call__(self, a, b):
        M = self.modulus
        return (4 * ((a * a) % M) * a + 27 * ((b * b) % M)) % M != 0

    def __repr__(self):
        return f"PiPredicate({self.ell})"


class ResidueSetPredicate:
    """Membership of (a mod M, b mod M) in an explicit set of residue pairs."""

    def __init__(self, modulus: int, pairs: Iterable[tuple[int, int]]):
        self.modulus = modulus
        self.pairs = frozenset((a % modulus, b % modulus) for a, b in pairs)
        self._codes = np.array(sorted(a * modulus + b for a, b in self.pairs), dtype=np.int64)

    def __call__(self, a, b):
        M = self.modulus
        if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
            a, b = np.broadcast_arrays(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64))
            return np.isin((a % M) * M + (b % M), self._codes)
        return (a % M, b % M) in self.pairs

    def __repr__(self):
        return f"ResidueSetPredicate(mod {self.modulus}, {len(self.pairs)} pairs)"


class _E2Predicate:
    # A = 4A' with A' = 189 mod 256, B = 16B' with B' = +-1 mod 256.
    modulus = 4096

    def __call__(self, a, b):
        return ((a % 1024) == 756) & (((b % 4096) == 16) | ((b % 4096) == 4080))


class _E5Predicate:
    modulus = 5

    def __call__(self, a, b):
        return ((a % 5) == 1) & (((b % 5) == 1) | ((b % 5) == 4))


@dataclass(frozen=True)
class LocalCondition:
    ell: int
    m: int
    predicate: Callable
    name: str = ""
    positive_A: bool = False
    # (1 - l^-10) * density, used when the residue universe is too big to count.
    closed_form: Fraction | None = None

    @property
    def modulus(self) -> int:
        return self.ell**self.m

    @property
    def reference_modulus(self) -> int:
        return self.ell ** max(self.m, 6)

    def holds(self, A: int, B: int) -> bool:
        if self.positive_A and A <= 0:
            return False
        M = self.modulus
        return bool(self.predicate(A % M, B % M))

    def residues(self) -> list[tuple[int, int]]:
        """All residue pairs mod l^m satisfying the predicate (no rider)."""
        M = self.modulus
        if M * M > ENUMERATION_LIMIT:
            raise DensityUnavailable(f"{self.name}: modulus {M} too large to list residues")
        out = []
        b = np.arange(M, dtype=np.int64)
        for a in range(M):
            hits = np.flatnonzero(np.asarray(self.predicate(np.int64(a), b)))
            out.extend((a, int(x)) for x in hits)
        return out


def _count_pairs(predicate, M: int, a_vals: np.ndarray, b_vals: np.ndarray) -> int:
    total = 0
    rows = max(1, _CHUNK // max(1, len(b_vals)))
    bb = b_vals[None, :]
    for i in range(0, len(a_vals), rows):
        aa = a_vals[i : i + rows, None]
        total += int(np.count_nonzero(predicate(aa, bb)))
    return total


def residue_count(cond: LocalCondition) -> int:
    """Number of residue pairs mod l^m satisfying the predicate."""
    M = cond.modulus
    if M * M > ENUMERATION_LIMIT:
        raise DensityUnavailable(f"{cond.name}: (l^m)^2 = {M * M} exceeds enumeration limit")
    r = np.arange(M, dtype=np.int64)
    return _count_pairs(cond.predicate, M, r, r)


def nonminimal_fraction(cond: LocalCondition) -> Fraction:
    """Measure of {predicate holds} among pairs (l^4 a', l^6 b'), relative to that slice."""
    ell, M = cond.ell, cond.modulus
    ma = ell ** max(cond.m - 4, 0)
    mb = ell ** max(cond.m - 6, 0)
    a_vals = (np.arange(ma, dtype=np.int64) * (ell**4 % M)) % M
    b_vals = (np.arange(mb, dtype=np.int64) * (ell**6 % M)) % M
    return Fraction(_count_pairs(cond.predicate, M, a_vals, b_vals), ma * mb)


def local_factor(cond: LocalCondition) -> Fraction:
    """(1 - l^-10) * d(cond): minimal-pair measure of the condition."""
    M = cond.modulus
    if M * M > ENUMERATION_LIMIT:
        if cond.closed_form is None:
            raise DensityUnavailable(
                f"{cond.name}: modulus {cond.ell}^{cond.m} too large and no closed form"
            )
        value = cond.closed_form
    else:
        mu = Fraction(residue_count(cond), M * M)
        value = mu - Fraction(1, cond.ell**10) * nonminimal_fraction(cond)
    if cond.positive_A:
        value /= 2
    return value


def local_density(cond: LocalCondition) -> Fraction:
    return local_factor(cond) / (1 - Fraction(1, cond.ell**10))


def pi_closed_form(ell: int) -> Fraction:
    return 1 - Fraction(2, ell**2) + Fraction(1, ell**3)


def pi_condition(ell: int) -> LocalCondition:
    if not is_probable_prime(ell):
        raise ValueError(f"{ell} is not prime")
    return LocalCondition(
        ell=ell,
        m=2,
        predicate=PiPredicate(ell),
        name=f"Pi_{ell}",
        closed_form=pi_closed_form(ell) if ell >= 5 else None,
    )


def pi_residue_count(ell: int) -> int:
    """#{(a, b) mod l^2 : l^2 does not divide 4a^3 + 27b^2}, by value histograms.

    Counts the zero pairs as sum_u #{a: 4a^3 = u} * #{b: 27b^2 = -u}, which
    enumerates every pair exactly without materializing the l^4 grid.
    """
    M = ell * ell
    r = np.arange(M, dtype=np.int64)
    left = np.bincount((4 * ((r * r) % M) * r) % M, minlength=M)
    right = np.bincount((27 * ((r * r) % M)) % M, minlength=M)
    zero = int(np.dot(left, right[(-np.arange(M)) % M]))
    return M * M - zero


E2 = LocalCondition(2, 12, _E2Predicate(), name="E_2", positive_A=True)
E5 = LocalCondition(5, 1, _E5Predicate(), name="E_5")


@dataclass(frozen=True)
class CongruenceFamily:
    name: str
    explicit: Mapping[int, LocalCondition] = field(default_factory=dict)
    default_rule: str = "none"  # "none" or "pi"

    def __post_init__(self):
        if self.default_rule not in ("none", "pi"):
            raise ValueError(f"unknown default rule {self.default_rule!r}")
        for ell, cond in self.explicit.items():
            if cond.ell != ell:
                raise ValueError(f"condition {cond.name} filed under prime {ell}")

    def condition_at(self, ell: int) -> LocalCondition | None:
        if ell in self.explicit:
            return self.explicit[ell]
        return pi_condition(ell) if self.default_rule == "pi" else None

    @property
    def requires_positive_A(self) -> bool:
        return any(c.positive_A for c in self.explicit.values())

    def explicit_holds(self, A: int, B: int) -> bool:
        return all(c.holds(A, B) for c in self.explicit.values())

    def contains(self, curve: CurveModel) -> bool:
        """Membership; the default rule is checked by factoring 4A^3 + 27B^2."""
        if not self.explicit_holds(curve.A, curve.B):
            return False
        if self.default_rule == "none":
            return True
        d = curve.delta
        for ell in self.explicit:
            while d % ell == 0:
                d //= ell
        return all(e < 2 for e in factorint(d).values())

    def contains_by_predicates(self, curve: CurveModel) -> bool:
        """Membership evaluating every local predicate up to sqrt|Delta|."""
        if not self.explicit_holds(curve.A, curve.B):
            return False
        if self.default_rule == "none":
            return True
        d = abs(curve.delta)
        for ell in primes_up_to(iroot(d, 2)):
            if ell not in self.explicit and not pi_condition(ell).holds(curve.A, curve.B):
                return False
        return True

    @cached_property
    def lattice_classes(self) -> list[tuple[int, list[tuple[int, int]]]]:
        """(modulus, residue pairs) for each explicit condition."""
        return [(c.modulus, c.residues()) for _, c in sorted(self.explicit.items())]


def family_all() -> CongruenceFamily:
    return CongruenceFamily("all")


def family_pi(ell: int) -> CongruenceFamily:
    return CongruenceFamily(f"pi:{ell}", {ell: pi_condition(ell)})


def family_E() -> CongruenceFamily:
    return CongruenceFamily("E", {2: E2, 5: E5}, default_rule="pi")


_PAIR = re.compile(r"\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)")


def parse_family_text(text: str, name: str = "file") -> CongruenceFamily:
    """Parse the family definition format.

    One condition per line: ``ell m (a,b) (a,b) ...`` listing the allowed
    residue pairs mod ell^m.  Optional lines: ``sign A>0`` (rider, attached
    to the lowest listed prime) and ``default pi`` / ``default none``.
    ``#`` starts a comment.
    """
    conds: dict[int, LocalCondition] = {}
    sign = False
    default = "none"
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head = line.split()
        if head[0] == "sign":
            if head[1:] != ["A>0"]:
                raise FamilyFileError(f"line {lineno}: only 'sign A>0' is supported")
            sign = True
            continue
        if head[0] == "default":
            if len(head) != 2 or head[1] not in ("pi", "none"):
                raise FamilyFileError(f"line {lineno}: expected 'default pi' or 'default none'")
            default = head[1]
            continue
        try:
            ell, m = int(head[0]), int(head[1])
        except (ValueError, IndexError):
            raise FamilyFileError(f"line {lineno}: expected 'ell m (a,b) ...'") from None
        if not is_probable_prime(ell) or m < 1:
            raise FamilyFileError(f"line {lineno}: need a prime ell and m >= 1")
        if ell in conds:
            raise FamilyFileError(f"line {lineno}: duplicate condition at {ell}")
        rest = line.split(None, 2)[2] if len(head) > 2 else ""
        pairs = [(int(a), int(b)) for a, b in _PAIR.findall(rest)]
        if _PAIR.sub("", rest).strip():
            raise FamilyFileError(f"line {lineno}: unparseable residue list")
        M = ell**m
        conds[ell] = LocalCondition(ell, m, ResidueSetPredicate(M, pairs), name=f"{name}_{ell}")
    if sign:
        if not conds:
            raise FamilyFileError("'sign A>0' needs at least one condition line")
        lowest = min(conds)
        c = conds[lowest]
        conds[lowest] = LocalCondition(c.ell, c.m, c.predicate, c.name, positive_A=True)
    return CongruenceFamily(name, conds, default_rule=default)


def load_family_file(path: str | Path) -> CongruenceFamily:
    p = Path(path)
    return parse_family_text(p.read_text(encoding="utf-8"), name=p.stem)


def family_from_selector(selector: str) -> CongruenceFamily:
    if selector == "all":
        return family_all()
    if selector == "E":
        return family_E()
    if selector.startswith("pi:"):
        return family_pi(int(selector[3:]))
    if selector.startswith("file:"):
        return load_family_file(selector[5:])
    raise ValueError(f"unknown family selector {selector!r}")


def squarefree_away_from(d: int, primes: Iterable[int]) -> bool:
    skip = set(primes)
    return all(e < 2 for q, e in factorint(d).items() if q not in skip)

