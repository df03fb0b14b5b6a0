import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from aquarium.arithmetic import continued_fraction, diophantine_profile

GOLDEN = (math.sqrt(5) - 1) / 2


def test_continued_fraction_examples():
    assert list(continued_fraction(0.5).quotients) == [0, 2]
    assert list(continued_fraction(3 / 7).quotients) == [0, 2, 3]
    assert list(continued_fraction(math.sqrt(2)).quotients[:6]) == [1, 2, 2, 2, 2, 2]
    g = continued_fraction(GOLDEN)
    assert g.quotients[0] == 0 and set(g.quotients[1:-1]) == {1}


def test_golden_convergents_are_fibonacci():
    conv = continued_fraction(GOLDEN).convergents()
    fib = [1, 1]
    while len(fib) < 25:
        fib.append(fib[-1] + fib[-2])
    qs = [q for _, q in conv][1:20]
    assert qs == fib[1:20]


@given(st.integers(0, 200), st.integers(1, 200))
def test_rationals_terminate(p, q):
    cf = continued_fraction(p / q)
    pp, qq = cf.convergents()[-1]
    assert Fraction(pp, qq) == Fraction(p, q)


@given(st.floats(0.001, 0.999))
def test_convergents_match_limit_denominator(x):
    # best approximations: every convergent is the best with denominator <= q
    for p, q in continued_fraction(x).convergents()[:8]:
        if q > 10**6:
            break
        best = Fraction(x).limit_denominator(q)
        assert abs(x - best) <= abs(x - p / q) + 1e-15


def test_golden_profile():
    prof = diophantine_profile(GOLDEN, 10_000)
    assert not prof.is_resonant
    assert prof.beta < 0.02
    assert prof.c == pytest.approx(1 - GOLDEN, rel=1e-9)
    d = prof.to_dict()
    assert "q <= 10000" in d["scale_note"]


def test_resonant_profile():
    prof = diophantine_profile(0.5, 100)
    assert prof.is_resonant and prof.resonance == (1, 2) and prof.c == 0.0
    near = diophantine_profile(0.5 + 1e-9, 100)
    assert near.c == pytest.approx(4e-9, rel=1e-3)


@given(st.floats(0.01, 0.99))
def test_profile_bound_holds(x):
    prof = diophantine_profile(x, 500)
    if prof.is_resonant:
        return
    q = np.arange(1, 501)
    dist = np.abs(q * x - np.rint(q * x))
    assert np.all(q ** (1 + prof.beta) * dist >= prof.c * (1 - 1e-12))


def test_profile_validation():
    with pytest.raises(ValueError):
        diophantine_profile(0.3, 1)
