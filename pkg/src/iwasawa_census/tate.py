"""Tate's algorithm on general Weierstrass models over Z at a single prime."""

from __future__ import annotations

from dataclasses import dataclass

from .arith import count_roots_mod_p, has_root_mod_p, legendre, val_or_inf, valuation
from .curve_model import CurveModel

GOOD = "good"
SPLIT = "multiplicative-split"
NONSPLIT = "multiplicative-nonsplit"
ADDITIVE = "additive"


@dataclass(frozen=True)
class Weierstrass:
    a1: int
    a2: int
    a3: int
    a4: int
    a6: int

    @classmethod
    def short(cls, A: int, B: int) -> "Weierstrass":
        return cls(0, 0, 0, A, B)

    @property
    def b2(self) -> int:
        return self.a1 * self.a1 + 4 * self.a2

    @property
    def b4(self) -> int:
        return self.a1 * self.a3 + 2 * self.a4

    @property
    def b6(self) -> int:
        return self.a3 * self.a3 + 4 * self.a6

    @property
    def b8(self) -> int:
        a1, a2, a3, a4, a6 = self.a1, self.a2, self.a3, self.a4, self.a6
        return a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4

    @property
    def c4(self) -> int:
        return self.b2**2 - 24 * self.b4

    @property
    def c6(self) -> int:
        return -self.b2**3 + 36 * self.b2 * self.b4 - 216 * self.b6

    @property
    def discriminant(self) -> int:
        b2, b4, b6, b8 = self.b2, self.b4, self.b6, self.b8
        return -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6

    def rst(self, r: int, s: int, t: int) -> "Weierstrass":
        """Substitute x = x' + r, y = y' + s x' + t."""
        a1, a2, a3, a4, a6 = self.a1, self.a2, self.a3, self.a4, self.a6
        return Weierstrass(
            a1 + 2 * s,
            a2 - s * a1 + 3 * r - s * s,
            a3 + r * a1 + 2 * t,
            a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t,
            a6 + r * a4 + r * r * a2 + r**3 - t * a3 - t * t - r * t * a1,
        )

    def scale_down(self, p: int) -> "Weierstrass":
        return Weierstrass(self.a1 // p, self.a2 // p**2, self.a3 // p**3,
                           self.a4 // p**4, self.a6 // p**6)


@dataclass(frozen=True)
class ReductionData:
    ell: int
    type: str
    kodaira: str
    v_min: int
    f: int
    c: int
    restarts: int = 0

    @property
    def is_good(self) -> bool:
        return self.type == GOOD

    @property
    def is_multiplicative(self) -> bool:
        return self.type in (SPLIT, NONSPLIT)


def _quad_has_root(a: int, b: int, c: int, p: int) -> bool:
    """Does a T^2 + b T + c have a root mod p."""
    if p == 2 or a % p == 0:
        return has_root_mod_p([a, b, c], p)
    disc = (b * b - 4 * a * c) % p
    return disc == 0 or legendre(disc, p) == 1


def tate(model: Weierstrass, p: int) -> ReductionData:
    """Kodaira symbol, conductor exponent and Tamagawa number of ``model`` at ``p``."""
    half = (p + 1) // 2  # 2 * half = 1 mod p for odd p
    restarts = 0
    m = model
    while True:
        vD = valuation(m.discriminant, p)
        if vD == 0:
            return ReductionData(p, GOOD, "I0", 0, 0, 1, restarts)

        # Move the singular point of the reduction to (0, 0).
        if p == 2:
            if m.b2 % 2 == 0:
                r = m.a4 % 2
                t = (r * (1 + m.a2 + m.a4) + m.a6) % 2
            else:
                r = m.a3 % 2
                t = (r + m.a4) % 2
        elif p == 3:
            r = (-m.b6) % 3 if m.b2 % 3 == 0 else (-m.b2 * m.b4) % 3
            t = (m.a1 * r + m.a3) % 3
        else:
            if m.c4 % p == 0:
                r = (-pow(12, -1, p) * m.b2) % p
            else:
                r = (-pow(12 * m.c4, -1, p) * (m.c6 + m.b2 * m.c4)) % p
            t = (-half * (m.a1 * r + m.a3)) % p
        m = m.rst(r, 0, t)

        if m.b2 % p != 0:
            split = _quad_has_root(1, m.a1, -m.a2, p)
            if split:
                return ReductionData(p, SPLIT, f"I{vD}", vD, 1, vD, restarts)
            return ReductionData(p, NONSPLIT, f"I{vD}", vD, 1, 2 if vD % 2 == 0 else 1, restarts)

        if val_or_inf(m.a6, p) < 2:
            return ReductionData(p, ADDITIVE, "II", vD, vD, 1, restarts)
        if val_or_inf(m.b8, p) < 3:
            return ReductionData(p, ADDITIVE, "III", vD, vD - 1, 2, restarts)
        if val_or_inf(m.b6, p) < 3:
            c = 3 if _quad_has_root(1, m.a3 // p, -(m.a6 // p**2), p) else 1
            return ReductionData(p, ADDITIVE, "IV", vD, vD - 2, c, restarts)

        # Arrange p | a1, a2; p^2 | a3, a4; p^3 | a6.
        if p == 2:
            s = m.a2 % 2
            t = 2 * ((m.a6 // 4) % 2)
        elif p == 3:
            s, t = m.a1, m.a3
        else:
            s, t = -m.a1 * half, -m.a3 * half
        m = m.rst(0, s, t)

        # The cubic T^3 + b T^2 + c T + d.
        b, c, d = m.a2 // p, m.a4 // p**2, m.a6 // p**3
        w = 27 * d * d - b * b * c * c + 4 * b**3 * d - 18 * b * c * d + 4 * c**3
        x = 3 * c - b * b
        if w % p != 0:
            cp = 1 + count_roots_mod_p([1, b, c, d], p)
            return ReductionData(p, ADDITIVE, "I0*", vD, vD - 4, cp, restarts)

        if x % p != 0:
            # Double root: translate it to 0, then peel off I_n* one step at a time.
            if p == 2:
                r = c % 2
            elif p == 3:
                r = (c * b) % 3
            else:
                r = ((b * c - 9 * d) * pow(2 * x, -1, p)) % p
            m = m.rst(p * r, 0, 0)
            ix = iy = 3
            mx = my = p * p
            while True:
                a2t, a3t = m.a2 // p, m.a3 // my
                a4t, a6t = m.a4 // (p * mx), m.a6 // (mx * my)
                if (a3t * a3t + 4 * a6t) % p != 0:
                    cp = 4 if _quad_has_root(1, a3t, -a6t, p) else 2
                    break
                t = my * (a6t % 2) if p == 2 else my * ((-a3t * half) % p)
                m = m.rst(0, 0, t)
                my *= p
                iy += 1
                a2t, a3t = m.a2 // p, m.a3 // my
                a4t, a6t = m.a4 // (p * mx), m.a6 // (mx * my)
                if (a4t * a4t - 4 * a6t * a2t) % p != 0:
                    cp = 4 if _quad_has_root(a2t, a4t, a6t, p) else 2
                    break
                if p == 2:
                    r = mx * (a6t % 2)
                else:
                    r = mx * ((-a4t * pow(2 * a2t, -1, p)) % p)
                m = m.rst(r, 0, 0)
                mx *= p
                ix += 1
            n = ix + iy - 5
            return ReductionData(p, ADDITIVE, f"I{n}*", vD, vD - ix - iy + 1, cp, restarts)

        # Triple root: move it to 0.
        if p == 2:
            r = b % 2
        elif p == 3:
            r = (-d) % 3
        else:
            r = (-b * pow(3, -1, p)) % p
        m = m.rst(p * r, 0, 0)
        a3t, a6t = m.a3 // p**2, m.a6 // p**4
        if (a3t * a3t + 4 * a6t) % p != 0:
            cp = 3 if _quad_has_root(1, a3t, -a6t, p) else 1
            return ReductionData(p, ADDITIVE, "IV*", vD, vD - 6, cp, restarts)
        t = p * p * (a6t % 2) if p == 2 else p * p * ((-a3t * half) % p)
        m = m.rst(0, 0, t)
        if val_or_inf(m.a4, p) < 4:
            return ReductionData(p, ADDITIVE, "III*", vD, vD - 7, 2, restarts)
        if val_or_inf(m.a6, p) < 6:
            return ReductionData(p, ADDITIVE, "II*", vD, vD - 8, 1, restarts)
        # Non-minimal at p: rescale by u = p and start over.
        m = m.scale_down(p)
        restarts += 1


def tate_local(c: CurveModel, ell: int) -> ReductionData:
    return tate(Weierstrass.short(c.A, c.B), ell)
