import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iwasawa_census.arith import valuation
from iwasawa_census.curve_model import new_curve
from iwasawa_census.enumeration import HeightBound, enumerate_curves
from iwasawa_census.iwasawa_criterion import ingest_reference_reduction
from iwasawa_census.reduction import bad_primes
from iwasawa_census.tate import ADDITIVE, GOOD, NONSPLIT, SPLIT, Weierstrass, tate, tate_local

import oracles

from conftest import DATA

CORPUS = DATA / "reference_reduction.csv"
KODAIRA = re.compile(r"I0|I[1-9]\d*|II|III|IV|I0\*|I[1-9]\d*\*|IV\*|III\*|II\*")
COMPONENTS = {"II": 1, "III": 2, "IV": 3, "I0*": 5, "IV*": 7, "III*": 8, "II*": 9}


def components(kod: str) -> int:
    if kod in COMPONENTS:
        return COMPONENTS[kod]
    m = re.fullmatch(r"I(\d+)(\*?)", kod)
    n = int(m.group(1))
    return n + 5 if m.group(2) else n


@pytest.mark.parametrize(
    "A,B,p,expect",
    [
        (1, 1, 2, ("II", 4, 1)),
        (1, 1, 31, ("I1", 1, 1)),
        (-1, 0, 2, ("III", 5, 2)),
        (0, 1, 2, ("IV", 2, 3)),
        (0, 1, 3, ("III", 2, 2)),
        (0, -432, 3, ("IV*", 3, 3)),
        (0, -432, 2, ("I0", 0, 1)),
        (-13392, -1080432, 11, ("I5", 1, 5)),
        (-13392, -1080432, 2, ("I0", 0, 1)),
    ],
)
def test_known_local_data(A, B, p, expect):
    d = tate_local(new_curve(A, B), p)
    assert (d.kodaira, d.f, d.c) == expect


def test_split_and_nonsplit():
    # 11a1 is split at 11; (1,1) has a_31 = -1, nonsplit.
    assert tate_local(new_curve(-13392, -1080432), 11).type == SPLIT
    assert tate_local(new_curve(1, 1), 31).type == NONSPLIT


def _check_invariants(curve, d):
    disc = curve.discriminant
    assert KODAIRA.fullmatch(d.kodaira), d
    assert valuation(disc, d.ell) == d.v_min + 12 * d.restarts
    assert d.c >= 1
    if d.type == GOOD:
        assert (d.kodaira, d.f, d.c, d.v_min) == ("I0", 0, 1, 0)
    elif d.type in (SPLIT, NONSPLIT):
        assert d.f == 1 and d.kodaira == f"I{d.v_min}"
        if d.type == SPLIT:
            assert d.c == d.v_min
        else:
            assert d.c == (2 if d.v_min % 2 == 0 else 1)
    else:
        assert d.type == ADDITIVE
        assert d.f >= 2
        if d.ell >= 5:
            assert d.f == 2
        assert d.f <= {2: 8, 3: 5}.get(d.ell, 2)
        # Ogg: v(Delta_min) = f + m - 1
        assert d.v_min == d.f + components(d.kodaira) - 1


def test_invariants_on_all_small_curves():
    for curve in enumerate_curves(HeightBound(10**4)):
        for p in bad_primes(curve):
            _check_invariants(curve, tate_local(curve, p))


@given(st.integers(-10**6, 10**6), st.integers(-10**6, 10**6),
       st.integers(-50, 50), st.integers(-50, 50), st.integers(-50, 50),
       st.sampled_from([2, 3, 5, 7]))
@settings(max_examples=150)
def test_invariant_under_coordinate_change(A, B, r, s, t, p):
    if 4 * A**3 + 27 * B * B == 0:
        return
    w = Weierstrass.short(A, B)
    a = tate(w, p)
    b = tate(w.rst(r, s, t), p)
    assert (a.kodaira, a.f, a.c, a.type, a.v_min) == (b.kodaira, b.f, b.c, b.type, b.v_min)


@given(st.integers(-2000, 2000), st.integers(-2000, 2000), st.sampled_from([2, 3, 5]))
@settings(max_examples=60)
def test_scaling_up_forces_one_restart(A, B, p):
    if 4 * A**3 + 27 * B * B == 0:
        return
    w = Weierstrass.short(A, B)
    big = Weierstrass.short(A * p**4, B * p**6)
    a, b = tate(w, p), tate(big, p)
    assert b.restarts == a.restarts + 1
    assert (a.kodaira, a.f, a.c) == (b.kodaira, b.f, b.c)


SAMPLE = [(1, 1), (-1, 0), (0, 1), (0, -432), (2, 3), (-2, 5), (4, -4), (-7, 6),
          (12, 8), (-11, 14), (3, 0), (0, 2), (-3, 1), (6, -10), (16, 16), (-4, 8)]


@pytest.mark.parametrize("A,B", SAMPLE)
def test_against_independent_oracle(A, B):
    info = oracles.local_oracle(A, B)
    assert info is not None
    for p, row in info.items():
        d = tate_local(new_curve(A, B), p)
        assert (d.kodaira, d.f, d.c) == (row["kodaira"], row["f"], row["c"]), p


@pytest.mark.skipif(not CORPUS.exists(), reason="reference corpus not built")
def test_reference_corpus():
    ref = ingest_reference_reduction(CORPUS)
    assert len(ref) >= 100
    bad = []
    for (A, B, ell), r in ref.items():
        d = tate_local(new_curve(A, B), ell)
        if (d.kodaira, d.f, d.c) != (r.kodaira, r.f, r.c):
            bad.append((A, B, ell, d, r))
    assert not bad
