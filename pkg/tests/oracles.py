"""Slow, independent reference computations used to freeze expected values.

Nothing here imports the package under test.  Each routine takes the most
direct route available (exhaustive loops, point counts, p-adic volumes,
functional equations) so that agreement with the fast code is meaningful.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

# --- elementary -------------------------------------------------------------


def small_primes(n: int) -> list[int]:
    return [q for q in range(2, n + 1) if all(q % d for d in range(2, math.isqrt(q) + 1))]


def v(n: int, p: int, cap: int = 10**6) -> int:
    if n == 0:
        return cap
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


def is_minimal_short(A: int, B: int) -> bool:
    """No q >= 2 with q^4 | A and q^6 | B (a composite q implies a prime one)."""
    q = 2
    while (A != 0 and q**4 <= abs(A)) or (A == 0 and q**6 <= abs(B)):
        if A % q**4 == 0 and B % q**6 == 0:
            return False
        q += 1
    return True


def brute_curves(X: int) -> list[tuple[int, int]]:
    """C(X) by a double loop over a generous box, filtered by the definitions."""
    out = []
    r = 1
    while r**2 <= X:
        r += 1
    for A in range(-r, r + 1):
        for B in range(-r, r + 1):
            if max(abs(A) ** 3, B * B) > X:
                continue
            if 4 * A**3 + 27 * B**2 == 0:
                continue
            if is_minimal_short(A, B):
                out.append((A, B))
    return out


def pi_count_brute(ell: int) -> int:
    m = ell * ell
    return sum(1 for a in range(m) for b in range(m) if (4 * a**3 + 27 * b * b) % m)


def point_count_short(A: int, B: int, p: int) -> int:
    """#E(F_p) including infinity by listing pairs (x, y)."""
    squares: dict[int, int] = {}
    for y in range(p):
        squares[y * y % p] = squares.get(y * y % p, 0) + 1
    return 1 + sum(squares.get((x**3 + A * x + B) % p, 0) for x in range(p))


# --- general Weierstrass models ---------------------------------------------


def transform(a, r, s, t, u=1):
    """Coefficients after x = u^2 x' + r, y = u^3 y' + s u^2 x' + t (exact rationals)."""
    a1, a2, a3, a4, a6 = a
    b1 = a1 + 2 * s
    b2 = a2 - s * a1 + 3 * r - s * s
    b3 = a3 + r * a1 + 2 * t
    b4 = a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t
    b6 = a6 + r * a4 + r * r * a2 + r**3 - t * a3 - t * t - r * t * a1
    return tuple(Fraction(c, u**k) for c, k in zip((b1, b2, b3, b4, b6), (1, 2, 3, 4, 6)))


def discriminant(a) -> int:
    a1, a2, a3, a4, a6 = a
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    return -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6


def c4c6(a) -> tuple[int, int]:
    a1, a2, a3, a4, a6 = a
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    return b2 * b2 - 24 * b4, -(b2**3) + 36 * b2 * b4 - 216 * b6


def minimal_model_at(a, p: int) -> tuple[tuple[int, ...], int]:
    """Search every (r mod p^2, s mod p, t mod p^3) for an integral u = p rescaling.

    Any rescaling by u = p can be moved into that box by a further integral
    change of coordinates, so an empty search certifies minimality at p.
    Returns (model, number of rescalings).
    """
    a = tuple(int(c) for c in a)
    steps = 0
    while True:
        found = None
        for s in range(p):
            if (a[0] + 2 * s) % p:
                continue
            for r in range(p * p):
                for t in range(p**3):
                    b = transform(a, r, s, t, p)
                    if all(c.denominator == 1 for c in b):
                        found = tuple(int(c) for c in b)
                        break
                if found:
                    break
            if found:
                break
        if found is None:
            return a, steps
        a = found
        steps += 1


def count_points(a, p: int) -> tuple[int, list[tuple[int, int]]]:
    """(#E~(F_p) including infinity, list of singular affine points)."""
    a1, a2, a3, a4, a6 = a
    n = 1
    sing = []
    for x in range(p):
        for y in range(p):
            w = y * y + a1 * x * y + a3 * y - x**3 - a2 * x * x - a4 * x - a6
            if w % p:
                continue
            n += 1
            wx = a1 * y - 3 * x * x - 2 * a2 * x - a4
            wy = 2 * y + a1 * x + a3
            if wx % p == 0 and wy % p == 0:
                sing.append((x, y))
    return n, sing


def count_points_short(A: int, B: int, p: int) -> int:
    """#E~(F_p) including infinity for an odd prime, by a character sum."""
    x = np.arange(p, dtype=np.int64)
    rhs = ((x * x % p) * x + (A % p) * x + B % p) % p
    leg = np.full(p, -1, dtype=np.int64)
    leg[(x * x) % p] = 1
    leg[0] = 0
    return p + 1 + int(leg[rhs].sum())


def reduction_kind(a_min, p: int) -> str:
    """good / split / nonsplit / additive from the nonsingular point count."""
    if p >= 5 and a_min[:3] == (0, 0, 0):
        if (4 * a_min[3] ** 3 + 27 * a_min[4] ** 2) % p:
            return "good"
        n, sing = count_points_short(a_min[3], a_min[4], p), [None]
    else:
        n, sing = count_points(a_min, p)
    if not sing:
        return "good"
    assert len(sing) == 1
    ns = n - 1
    return {p - 1: "split", p + 1: "nonsplit", p: "additive"}[ns]


def padic_volume(a, p: int, max_depth: int = 60) -> Fraction:
    """Measure of the integral points of the affine model for |dx / W_y|."""
    a1, a2, a3, a4, a6 = a

    def W(x, y):
        return y * y + a1 * x * y + a3 * y - x**3 - a2 * x * x - a4 * x - a6

    def Wx(x, y):
        return a1 * y - 3 * x * x - 2 * a2 * x - a4

    def Wy(x, y):
        return 2 * y + a1 * x + a3

    total = Fraction(0)
    stack = [(x, y, 1) for x in range(p) for y in range(p)]
    while stack:
        x, y, j = stack.pop()
        w = v(W(x, y), p)
        if w < j:
            continue
        e = min(v(Wx(x, y), p), v(Wy(x, y), p))
        if j > e and w >= j + e:
            total += Fraction(p**e, p**j)
            continue
        if j >= max_depth:
            raise RecursionError("volume recursion too deep")
        step = p**j
        for i in range(p):
            for k in range(p):
                stack.append((x + i * step, y + k * step, j + 1))
    return total


def tamagawa_by_volume(a_min, p: int) -> int:
    n, sing = count_points(a_min, p)
    ns = n - len(sing)
    c = (1 + p * padic_volume(a_min, p)) / ns
    assert c.denominator == 1, (a_min, p, c)
    return int(c)


# --- conductor from the functional equation ---------------------------------


def _trace_table(A: int, B: int, limit: int, min_models: dict[int, tuple]) -> dict[int, int]:
    """a_p for primes p <= limit; bad primes read from the minimal model."""
    out = {}
    for p in small_primes_np(limit):
        if p in min_models:
            a = min_models[p]
        else:
            a = (0, 0, 0, A, B)
        if p in (2, 3):
            n, _ = count_points(a, p)
        else:
            n = count_points_short(a[3], a[4], p)
        out[p] = p + 1 - n
    return out


def small_primes_np(n: int) -> list[int]:
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for q in range(2, math.isqrt(n) + 1):
        if sieve[q]:
            sieve[q * q :: q] = False
    return np.nonzero(sieve)[0].tolist()


def _coefficients(ap: dict[int, int], bad: set[int], limit: int) -> np.ndarray:
    an = np.zeros(limit + 1, dtype=np.float64)
    an[1] = 1.0
    spf = np.zeros(limit + 1, dtype=np.int64)
    for p in small_primes_np(limit):
        spf[p :: p][spf[p :: p] == 0] = p
    for n in range(2, limit + 1):
        p = int(spf[n])
        m, k = n, 0
        while m % p == 0:
            m //= p
            k += 1
        if m > 1:
            an[n] = an[p**k] * an[m]
            continue
        if k == 1:
            an[n] = ap[p]
        elif p in bad:
            an[n] = an[p] * an[n // p]
        else:
            an[n] = ap[p] * an[n // p] - p * an[n // p // p]
    return an


def conductor_by_functional_equation(A: int, B: int, odd_part: int, f2_choices, f3_choices,
                                     min_models: dict[int, tuple], bad: set[int]):
    """Find the unique N = 2^f2 3^f3 * odd_part whose theta series satisfies
    theta(1/t) = eps t^2 theta(t) at two test points.  Returns (f2, f3) or None."""
    cands = [(f2, f3) for f2 in f2_choices for f3 in f3_choices]
    n_max = max(2**f2 * 3**f3 * odd_part for f2, f3 in cands)
    limit = int(7.5 * math.sqrt(n_max)) + 50
    ap = _trace_table(A, B, limit, min_models)
    an = _coefficients(ap, bad, limit)
    idx = np.arange(limit + 1, dtype=np.float64)
    passing = []
    for f2, f3 in cands:
        N = 2**f2 * 3**f3 * odd_part
        root = math.sqrt(N)

        def theta(t):
            return float(np.dot(an[1:], np.exp(-2 * math.pi * idx[1:] * t / root)))

        ok = None
        for eps in (1, -1):
            good = True
            for t in (1.2, 1.45):
                lhs, rhs = theta(1 / t), eps * t * t * theta(t)
                scale = max(abs(lhs), abs(rhs), 1e-30)
                if abs(lhs - rhs) > 1e-7 * scale + 1e-12:
                    good = False
            if good:
                ok = eps
        if ok is not None:
            passing.append((f2, f3))
    return passing[0] if len(passing) == 1 else None


# --- Kodaira symbols ---------------------------------------------------------


def kodaira_from_invariants_large_p(vc4: int, vd: int) -> str:
    """Neron's table on a minimal model at p >= 5."""
    if vd == 0:
        return "I0"
    if vc4 == 0:
        return f"I{vd}"
    if vd == 2:
        return "II"
    if vd == 3:
        return "III"
    if vd == 4:
        return "IV"
    if vd == 6 and vc4 >= 2:
        return "I0*"
    if vc4 == 2 and vd > 6:
        return f"I{vd - 6}*"
    return {8: "IV*", 9: "III*", 10: "II*"}[vd]


def kodaira_from_components(m: int, c: int, p: int, vj_negative: bool) -> str | None:
    """Additive type from the component count m = v - f + 1 and c."""
    if m == 1:
        return "II"
    if m == 2:
        return "III"
    if m == 3:
        return "IV"
    if m == 5:
        return "I0*"
    if m == 6:
        return "I1*"
    if m == 7:
        return "IV*" if c in (1, 3) else "I2*"
    if m == 8:
        if c == 4:
            return "I3*"
        if p == 3:
            return "I3*" if vj_negative else "III*"
        return None
    if m == 9:
        return "II*" if c == 1 else "I4*"
    if m >= 10:
        return f"I{m - 5}*"
    return None


def _f_choices(info: dict, p: int, top: int):
    if p not in info:
        return [0]
    if "f" in info[p]:
        return [info[p]["f"]]
    return list(range(2, min(top, info[p]["v_min"]) + 1))


def local_oracle(A: int, B: int, primes=None, n_limit: int = 10**8) -> dict[int, dict] | None:
    """Reference (kodaira, f, c) at each requested bad prime, or None when undecidable.

    p >= 5: Neron's table on the (minimal) short model, f in {0, 1, 2}.
    p = 2, 3: minimal model by search, type by point count, c by volume, f
    from the global conductor, Kodaira symbol from the component count.
    """
    d = -16 * (4 * A**3 + 27 * B * B)
    rest = abs(d)
    bad = []
    for q in small_primes_np(10**6):
        if rest % q == 0:
            bad.append(q)
            while rest % q == 0:
                rest //= q
        if q * q > rest:
            break
    if rest > 1:
        if rest > 10**12:
            return None
        bad.append(rest)
    bad = sorted(set(bad))
    info: dict[int, dict] = {}
    min_models = {}
    wanted = set(bad) if primes is None else set(primes)
    for p in bad:
        if p in (2, 3):
            a, _ = minimal_model_at((0, 0, 0, A, B), p)
        else:
            a = (0, 0, 0, A, B)
        min_models[p] = a
        vd = v(discriminant(a), p)
        if vd == 0:
            continue
        c4, c6 = c4c6(a)
        if p in wanted or p < 5:
            kind = reduction_kind(a, p)
        else:
            # Only f is needed here: multiplicative iff p does not divide c4.
            kind = "nonsplit" if c4 % p else "additive"
        row = {"kind": kind, "v_min": vd}
        if p in wanted:
            row["c"] = tamagawa_by_volume(a, p)
        if kind in ("split", "nonsplit"):
            row["f"] = 1
            row["kodaira"] = f"I{vd}"
        elif p >= 5:
            row["f"] = 2
            if p in wanted:
                row["kodaira"] = kodaira_from_invariants_large_p(v(c4, p), vd)
        info[p] = row
    odd = 1
    for p, row in info.items():
        if p >= 5:
            odd *= p ** row["f"]
    need = {p for p in (2, 3) if p in info and p in wanted and "f" not in info[p]}
    if need:
        f2s = _f_choices(info, 2, 8)
        f3s = _f_choices(info, 3, 5)
        if max(2**a * 3**b for a in f2s for b in f3s) * odd > n_limit:
            return None
        bad_set = set(info)
        got = conductor_by_functional_equation(A, B, odd, f2s, f3s, min_models, bad_set)
        if got is None:
            return None
        for p, f in zip((2, 3), got):
            if p in need:
                row = info[p]
                row["f"] = f
                m = row["v_min"] - f + 1
                c4, _ = c4c6(min_models[p])
                vj_neg = 3 * v(c4, p) < row["v_min"]
                k = kodaira_from_components(m, row["c"], p, vj_neg)
                if k is None:
                    return None
                row["kodaira"] = k
    if primes is not None:
        return {p: info[p] for p in primes if p in info}
    return info
