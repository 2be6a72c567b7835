"""Rigorous enclosures: zeta(10), Euler products over l >= 7, density predictions."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .arith import primes_array
from .intervals import EulerProductValue, power_enclosure
from .local_conditions import (
    E2,
    E5,
    CongruenceFamily,
    DensityUnavailable,
    local_density,
    local_factor,
    pi_closed_form,
    pi_condition,
    pi_residue_count,
)

DEFAULT_EULER_CUTOFF = 10**6
# Exact rational products are kept up to this prime, then rounded outward.
_EXACT_PRIME_LIMIT = 1000
_PRODUCT_BITS = 256

E2_FACTOR = Fraction(1, 4194304)
E5_FACTOR = Fraction(2, 25)
E3_FACTOR_PUBLISHED = 1 - Fraction(1, 9)
PROP_CONSTANT = Fraction(1, 52428800)
THEOREM_CONSTANT = Fraction(1, 157286400)
SELMER_ZERO_PROPORTION = Fraction(3, 8)


def _zeta10_terms(width: Fraction) -> int:
    n = 2
    while Fraction(1, 9 * n**9) > width:
        n += 1
    return n


@lru_cache(maxsize=32)
def _zeta10_cached(width: Fraction) -> EulerProductValue:
    n = _zeta10_terms(width)
    s = sum(Fraction(1, k**10) for k in range(1, n + 1))
    return EulerProductValue(s, s + Fraction(1, 9 * n**9), f"zeta(10), {n} terms + integral tail")


def zeta_10(width: Fraction | float = Fraction(1, 10**12)) -> EulerProductValue:
    """Enclosure of zeta(10): partial sum to N plus the tail bound N^-9/9."""
    w = Fraction(width)
    if w <= 0:
        raise ValueError("width must be positive")
    return _zeta10_cached(w)


def _arctan_inverse(x: int, terms: int) -> EulerProductValue:
    # Alternating series with decreasing terms: consecutive partial sums bracket.
    s = Fraction(0)
    prev = s
    for k in range(terms + 1):
        prev = s
        s += Fraction((-1) ** k, (2 * k + 1) * x ** (2 * k + 1))
    return EulerProductValue(min(prev, s), max(prev, s))


def pi_enclosure(terms: int = 40) -> EulerProductValue:
    """Machin: pi = 16 atan(1/5) - 4 atan(1/239)."""
    return 16 * _arctan_inverse(5, terms) - 4 * _arctan_inverse(239, terms)


def zeta_10_closed_form() -> EulerProductValue:
    p = pi_enclosure()
    p10 = EulerProductValue(p.lower**10, p.upper**10)
    return (p10 / 93555).named("pi^10 / 93555")


@lru_cache(maxsize=16)
def euler_product_ge7(cutoff: int = DEFAULT_EULER_CUTOFF) -> EulerProductValue:
    """Enclosure of prod_{l >= 7} (1 - 2l^-2 + l^-3).

    The primes 7 <= l <= cutoff are multiplied out (exactly up to 1000, with
    outward dyadic rounding beyond); the omitted factors lie in (1 - 2l^-2, 1),
    so the tail is bracketed by [1 - 2/cutoff, 1].
    """
    if cutoff < 7:
        raise ValueError("cutoff must be at least 7")
    primes = primes_array(cutoff)
    primes = primes[primes >= 7]
    exact = Fraction(1)
    rest = []
    for q in primes.tolist():
        if q <= _EXACT_PRIME_LIMIT:
            exact *= pi_closed_form(q)
        else:
            rest.append(q)
    if rest:
        scale = 1 << _PRODUCT_BITS
        lo = (exact.numerator * scale) // exact.denominator
        hi = -((-exact.numerator * scale) // exact.denominator)
        for q in rest:
            num, den = q**3 - 2 * q + 1, q**3
            lo = lo * num // den
            hi = -((-hi * num) // den)
        partial = EulerProductValue(Fraction(lo, scale), Fraction(hi, scale))
    else:
        partial = EulerProductValue.exact(exact)
    tail = EulerProductValue(1 - Fraction(2, cutoff), 1)
    return (partial * tail).named(f"prod_(l>=7) (1 - 2/l^2 + 1/l^3), primes <= {cutoff} + tail")


def euler_partial_product_exact(cutoff: int) -> Fraction:
    primes = primes_array(cutoff)
    out = Fraction(1)
    for q in primes[primes >= 7].tolist():
        out *= pi_closed_form(q)
    return out


@dataclass(frozen=True)
class DensityPrediction:
    family: str
    density: EulerProductValue  # prod_l d(Phi_l), i.e. the limiting share of C(X)
    leading_constant: EulerProductValue  # density * 4 / zeta(10)
    exact_rational_part: Fraction | None
    X: int | None = None

    @property
    def count(self) -> EulerProductValue:
        if self.X is None:
            raise ValueError("prediction was made without a height bound")
        return self.leading_constant * power_enclosure(self.X, 5, 6)


def family_local_factors(family: CongruenceFamily) -> dict[int, Fraction]:
    """(1 - l^-10) d(Phi_l) for each explicit prime."""
    return {ell: local_factor(c) for ell, c in sorted(family.explicit.items())}


def predicted_count(
    family: CongruenceFamily,
    X: int | None = None,
    cutoff: int = DEFAULT_EULER_CUTOFF,
    zeta_width: Fraction = Fraction(1, 10**20),
) -> DensityPrediction:
    """Leading-order prediction prod_l d(Phi_l) * 4 X^(5/6) / zeta(10)."""
    z = zeta_10(zeta_width)
    factors = family_local_factors(family)
    if family.default_rule == "none":
        rational = Fraction(1)
        for ell, c in family.explicit.items():
            rational *= local_density(c)
        density = EulerProductValue.exact(rational)
        leading = 4 * density / z
        return DensityPrediction(family.name, density, leading, rational, X)
    if family.default_rule != "pi":
        raise DensityUnavailable(f"no closed form registered for default rule {family.default_rule}")
    # prod_l d(Phi_l) = zeta(10) * prod_l (1 - l^-10) d(Phi_l); the default
    # factors are 1/2, 2/3 at l = 2, 3 and 1 - 2/l^2 + 1/l^3 for l >= 5.
    rational = Fraction(1)
    for ell in (2, 3, 5):
        if ell in factors:
            rational *= factors[ell]
        else:
            rational *= local_factor(pi_condition(ell))
    tail = euler_product_ge7(cutoff)
    for ell, f in factors.items():
        if ell >= 7:
            rational *= f / pi_closed_form(ell)
    density = z * tail * rational
    leading = 4 * tail * rational
    return DensityPrediction(family.name, density, leading, rational, X)


def theorem_constant(cutoff: int = DEFAULT_EULER_CUTOFF) -> dict:
    """The lower-bound constant zeta(10) prod_{l>=7}(...) / 157286400 and its identities."""
    z = zeta_10(Fraction(1, 10**20))
    euler = euler_product_ge7(cutoff)
    value = (z * euler / 157286400).named("zeta(10) * prod_(l>=7) / 157286400")
    identities = {
        "E_2 * E_5 = 1/52428800": E2_FACTOR * E5_FACTOR == PROP_CONSTANT,
        "(3/8) * (1 - 3^-2) / 52428800 = 1/157286400": (
            SELMER_ZERO_PROPORTION * E3_FACTOR_PUBLISHED * PROP_CONSTANT == THEOREM_CONSTANT
        ),
    }
    return {"value": value, "identities": identities}


def e3_factors() -> dict:
    """The local factor at 3: the published value next to the enumerated one."""
    count = pi_residue_count(3)
    return {
        "published": E3_FACTOR_PUBLISHED,
        "enumerated": local_factor(pi_condition(3)),
        "enumerated_count": count,
        "universe": 81,
    }


def constants_report(cutoff: int = DEFAULT_EULER_CUTOFF) -> list[tuple[str, str, str]]:
    """Rows (quantity, value, kind) for the constants experiment."""
    z = zeta_10(Fraction(1, 10**12))
    z_closed = zeta_10_closed_form()
    euler = euler_product_ge7(cutoff)
    e2 = local_factor(E2)
    e5 = local_factor(E5)
    e3 = e3_factors()
    thm = theorem_constant(cutoff)
    zfine = zeta_10(Fraction(1, 10**20))
    d_pub = zfine * euler * (e3["published"] * PROP_CONSTANT)
    d_enum = zfine * euler * (e3["enumerated"] * e2 * e5)
    thm_enum = SELMER_ZERO_PROPORTION * d_enum
    rows = [
        ("zeta(10)", z.format(15), "interval"),
        ("zeta(10) width <= 10^-12", str(z.width <= Fraction(1, 10**12)), "check"),
        ("pi^10/93555", z_closed.format(15), "interval"),
        ("zeta(10) contains pi^10/93555", str(z.contains(z_closed)), "check"),
        (f"prod_(l>=7) (1-2l^-2+l^-3) [cutoff {cutoff}]", euler.format(12), "interval"),
        ("(1-2^-10) d(E_2)", str(e2), "exact"),
        ("(1-5^-10) d(E_5)", str(e5), "exact"),
        ("(1-3^-10) d(E_3) as-published (1-3^-2)", str(e3["published"]), "exact"),
        (
            "(1-3^-10) d(E_3) as-enumerated (9 does not divide 4A^3+27B^2)",
            f"{e3['enumerated']} ({e3['enumerated_count']} of {e3['universe']} residue pairs mod 9)",
            "exact",
        ),
        ("E_3 discrepancy", str(e3["published"] != e3["enumerated"]), "check"),
        ("d(E) as-published", d_pub.format(18), "interval"),
        ("d(E) as-enumerated", d_enum.format(18), "interval"),
        ("theorem constant as-published", thm["value"].format(18), "interval"),
        ("theorem constant as-enumerated (3/8 d(E) enumerated)", thm_enum.format(18), "interval"),
    ]
    for label, ok in thm["identities"].items():
        rows.append((label, str(ok), "identity"))
    return rows
