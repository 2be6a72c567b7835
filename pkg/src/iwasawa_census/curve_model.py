"""Short Weierstrass models y^2 = x^3 + A x + B over Z, ordered by height."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .arith import factorint, iroot, primes_up_to, valuation

# Below this bound the minimality witness search is plain trial division.
_TRIAL_WITNESS_BOUND = 10_000


class InvalidCurve(ValueError):
    pass


class Singular(InvalidCurve):
    def __init__(self, A: int, B: int):
        super().__init__(f"4A^3 + 27B^2 = 0 for (A, B) = ({A}, {B})")
        self.A, self.B = A, B


class NonMinimal(InvalidCurve):
    def __init__(self, A: int, B: int, witness: int):
        super().__init__(f"({A}, {B}) is not minimal: {witness}^4 | A and {witness}^6 | B")
        self.A, self.B, self.witness = A, B, witness


def naive_discriminant(A: int, B: int) -> int:
    return 4 * A**3 + 27 * B**2


def height_of(A: int, B: int) -> int:
    return max(abs(A) ** 3, B * B)


def minimality_witness(A: int, B: int) -> int | None:
    """Smallest prime l with l^4 | A and l^6 | B, or None if the model is minimal."""
    if A == 0 and B == 0:
        raise ValueError("(0, 0) has no minimality witness")
    # l^4 | A forces l^4 <= |A| unless A == 0, same for B with l^6.
    bounds = []
    if A:
        bounds.append(iroot(abs(A), 4))
    if B:
        bounds.append(iroot(abs(B), 6))
    bound = min(bounds)
    if bound < 2:
        return None
    if bound <= _TRIAL_WITNESS_BOUND:
        for ell in primes_up_to(bound):
            if A % ell**4 == 0 and B % ell**6 == 0:
                return ell
        return None
    g = abs(A) if B == 0 else abs(B) if A == 0 else _gcd(A, B)
    for ell in factorint(g):
        if A % ell**4 == 0 and B % ell**6 == 0:
            return ell
    return None


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return abs(a)


@dataclass(frozen=True)
class CurveInvariants:
    naive_discriminant: int
    curve_discriminant: int
    height: int
    j_invariant: Fraction


@dataclass(frozen=True, order=True)
class CurveModel:
    """A validated globally minimal short model.  Use :func:`new_curve`."""

    A: int
    B: int
    invariants: CurveInvariants = field(compare=False, repr=False, hash=False)

    @property
    def delta(self) -> int:
        """4A^3 + 27B^2."""
        return self.invariants.naive_discriminant

    @property
    def discriminant(self) -> int:
        """The curve discriminant -16(4A^3 + 27B^2)."""
        return self.invariants.curve_discriminant

    @property
    def height(self) -> int:
        return self.invariants.height

    @property
    def j(self) -> Fraction:
        return self.invariants.j_invariant

    def key(self) -> tuple[int, int]:
        return (self.A, self.B)


def _build(A: int, B: int) -> CurveModel:
    d = naive_discriminant(A, B)
    inv = CurveInvariants(
        naive_discriminant=d,
        curve_discriminant=-16 * d,
        height=height_of(A, B),
        j_invariant=Fraction(1728 * 4 * A**3, d),
    )
    return CurveModel(A, B, inv)


def new_curve(A: int, B: int) -> CurveModel:
    """Validate (A, B) and return the model with invariants computed eagerly."""
    A, B = int(A), int(B)
    if naive_discriminant(A, B) == 0:
        raise Singular(A, B)
    w = minimality_witness(A, B)
    if w is not None:
        raise NonMinimal(A, B, w)
    return _build(A, B)


def trusted_curve(A: int, B: int) -> CurveModel:
    """Construct without re-validation; for callers that already sieved (A, B)."""
    return _build(int(A), int(B))


def height(c: CurveModel) -> int:
    return c.height


def j_invariant(c: CurveModel) -> Fraction:
    return c.j


def j_valuation(c: CurveModel, p: int) -> int | None:
    """p-adic valuation of j, None when j = 0."""
    j = c.j
    if j == 0:
        return None
    return valuation(j.numerator, p) - valuation(j.denominator, p)


def twist_by_minus_one(c: CurveModel) -> CurveModel:
    # (A, -B) has the same height, discriminant and minimality status.
    return trusted_curve(c.A, -c.B)


def odd_part_of_naive_discriminant(c: CurveModel) -> tuple[int, int]:
    """Split 4A^3 + 27B^2 = 2^v * D' with D' odd, keeping the sign on D'."""
    d = c.delta
    v = valuation(d, 2)
    return d >> v, v
