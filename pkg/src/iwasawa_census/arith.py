"""Integer arithmetic helpers: roots, valuations, primes, factorization."""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Iterator

import numpy as np

# Strong-pseudoprime bases that make Miller-Rabin deterministic below 3.3e24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_MR_DETERMINISTIC_LIMIT = 3_317_044_064_679_887_385_961_981
_EXTRA_BASES = (43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97)

DEFAULT_TRIAL_BOUND = 1 << 12


class FactorizationError(ArithmeticError):
    """Raised when a cofactor could not be split within the rho budget."""

    def __init__(self, n: int, cofactor: int, partial: dict[int, int]):
        super().__init__(f"could not factor {n}: unfactored cofactor {cofactor}")
        self.n = n
        self.cofactor = cofactor
        self.partial = partial


def iroot(n: int, k: int) -> int:
    """Floor of the k-th root of a non-negative integer."""
    if n < 0:
        raise ValueError("iroot of negative number")
    if k == 1 or n < 2:
        return n
    if k == 2:
        return math.isqrt(n)
    # Newton iteration from an overestimate.
    x = 1 << -(-n.bit_length() // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x**k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


def valuation(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of zero")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def val_or_inf(n: int, p: int) -> float:
    return math.inf if n == 0 else valuation(n, p)


@lru_cache(maxsize=8)
def _sieve(limit: int) -> np.ndarray:
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for q in range(2, math.isqrt(limit) + 1):
        if flags[q]:
            flags[q * q :: q] = False
    return np.flatnonzero(flags)


def primes_up_to(limit: int) -> list[int]:
    if limit < 2:
        return []
    return [int(q) for q in _sieve(limit)]


def primes_array(limit: int) -> np.ndarray:
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    return _sieve(limit)


def primes_between(lo: int, hi: int) -> Iterator[int]:
    for q in primes_up_to(hi):
        if q >= lo:
            yield q


def is_probable_prime(n: int) -> bool:
    """Miller-Rabin; deterministic for n < 3.3e24, 25 fixed bases above that."""
    if n < 2:
        return False
    for q in _MR_BASES:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    bases = _MR_BASES if n < _MR_DETERMINISTIC_LIMIT else _MR_BASES + _EXTRA_BASES
    for a in bases:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _brent_rho(n: int, c: int, max_iter: int) -> int | None:
    y, r, q, g = 2, 1, 1, 1
    m = 128
    x = ys = y
    steps = 0
    while g == 1:
        x = y
        for _ in range(r):
            y = (y * y + c) % n
        k = 0
        while k < r and g == 1:
            ys = y
            for _ in range(min(m, r - k)):
                y = (y * y + c) % n
                q = q * abs(x - y) % n
            g = math.gcd(q, n)
            k += m
        r *= 2
        steps += r
        if steps > max_iter:
            return None
    if g == n:
        g = 1
        while g == 1:
            ys = (ys * ys + c) % n
            g = math.gcd(abs(x - ys), n)
    return g if g != n else None


def _split(n: int, max_iter: int) -> int | None:
    for c in range(1, 20):
        d = _brent_rho(n, c, max_iter)
        if d is not None and 1 < d < n:
            return d
    return None


def factorint(
    n: int, trial_bound: int = DEFAULT_TRIAL_BOUND, rho_iterations: int = 1 << 22
) -> dict[int, int]:
    """Prime factorization of |n| as {prime: exponent}.

    Trial division by primes up to ``trial_bound``, then Miller-Rabin and
    Brent's rho on what is left.  Raises FactorizationError with the
    partial result when a composite cofactor resists rho.
    """
    if n == 0:
        raise ValueError("cannot factor zero")
    m = abs(n)
    out: dict[int, int] = {}
    for q in primes_up_to(trial_bound):
        if q * q > m:
            break
        if m % q == 0:
            e = 0
            while m % q == 0:
                m //= q
                e += 1
            out[q] = e
    if m == 1:
        return out
    if m < trial_bound * trial_bound or is_probable_prime(m):
        out[m] = out.get(m, 0) + 1
        return out
    stack = [m]
    while stack:
        k = stack.pop()
        if k == 1:
            continue
        if is_probable_prime(k):
            out[k] = out.get(k, 0) + 1
            continue
        r = iroot(k, 2)
        if r * r == k:
            stack += [r, r]
            continue
        d = _split(k, rho_iterations)
        if d is None:
            raise FactorizationError(n, k, dict(out))
        stack += [d, k // d]
    return dict(sorted(out.items()))


def prime_divisors(n: int, **kw) -> list[int]:
    return sorted(factorint(n, **kw))


@lru_cache(maxsize=256)
def quadratic_character_table(p: int) -> np.ndarray:
    """chi_p(x) for x in [0, p) as an int8 array (odd prime p)."""
    table = np.full(p, -1, dtype=np.int8)
    x = np.arange(p, dtype=np.int64)
    table[(x * x) % p] = 1
    table[0] = 0
    return table


def legendre(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


# --- polynomials over F_p (coefficient lists, highest degree first) -------


def _poly_trim(f: list[int]) -> list[int]:
    i = 0
    while i < len(f) - 1 and f[i] == 0:
        i += 1
    return f[i:]


def _poly_mod(f: list[int], g: list[int], p: int) -> list[int]:
    f = [c % p for c in f]
    g = _poly_trim([c % p for c in g])
    inv = pow(g[0], -1, p)
    while len(f) >= len(g) and any(f):
        coef = f[0] * inv % p
        for i in range(len(g)):
            f[i] = (f[i] - coef * g[i]) % p
        f = f[1:]
    return _poly_trim(f) if f else [0]


def _poly_mulmod(f: list[int], g: list[int], mod: list[int], p: int) -> list[int]:
    prod = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                prod[i + j] = (prod[i + j] + a * b) % p
    return _poly_mod(prod, mod, p)


def _poly_gcd(f: list[int], g: list[int], p: int) -> list[int]:
    f = _poly_trim([c % p for c in f])
    g = _poly_trim([c % p for c in g])
    while any(g):
        f, g = g, _poly_mod(f, g, p)
    return f


def count_roots_mod_p(coeffs: list[int], p: int) -> int:
    """Number of distinct roots in F_p of a polynomial (highest degree first)."""
    f = _poly_trim([c % p for c in coeffs])
    if not any(f):
        return p
    if len(f) == 1:
        return 0
    if p < 512:
        return sum(1 for x in range(p) if _horner(f, x, p) == 0)
    # gcd(f, x^p - x) has one linear factor per distinct root.
    result, base, e = [1], [1, 0], p
    while e:
        if e & 1:
            result = _poly_mulmod(result, base, f, p)
        base = _poly_mulmod(base, base, f, p)
        e >>= 1
    xp_minus_x = list(result)
    while len(xp_minus_x) < 2:
        xp_minus_x.insert(0, 0)
    xp_minus_x[-2] = (xp_minus_x[-2] - 1) % p
    g = _poly_gcd(f, xp_minus_x, p)
    return len(g) - 1


def _horner(f: list[int], x: int, p: int) -> int:
    acc = 0
    for c in f:
        acc = (acc * x + c) % p
    return acc


def has_root_mod_p(coeffs: list[int], p: int) -> bool:
    return count_roots_mod_p(coeffs, p) > 0
