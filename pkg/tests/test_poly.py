from __future__ import annotations

import random

import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from bvtate.poly import Context, ContextMismatch, DegreeError, GradedPoly, GradedVariable, deriv
from helpers import random_homogeneous, random_mixed, rational_case2_context

CTX = rational_case2_context()
seeds = st.integers(min_value=0, max_value=10**9)


def test_variable_validation():
    with pytest.raises(ValueError):
        GradedVariable("x", 1, 0)
    with pytest.raises(ValueError):
        Context([GradedVariable("x", 0, 0), GradedVariable("x", 0, 0)])
    v = GradedVariable("C", 1, 1)
    assert v.role == "ghost"


def test_odd_variables_anticommute_and_square_to_zero():
    C1, C2, Ms1 = CTX.vars("C1", "C2", "Ms1")
    assert C1 * C2 == -(C2 * C1)
    assert not C1 * C1
    assert Ms1 * C1 == -(C1 * Ms1)
    assert C1**2 == CTX.zero()
    E, M1 = CTX.vars("E", "M1")
    assert E * C1 == C1 * E
    assert M1 * Ms1 == Ms1 * M1


def test_canonical_order_and_printing():
    Ms1, Ms2, M1 = CTX.vars("Ms1", "Ms2", "M1")
    assert str(Ms2 * Ms1) == "-Ms1*Ms2"
    assert str(M1**2 * 3 - M1 / 2) == "3*M1^2 - 1/2*M1"
    assert str(CTX.zero()) == "0"


def test_degrees():
    M1, Ms1, C1, E, Es = CTX.vars("M1", "Ms1", "C1", "E", "Es")
    p = M1 * Ms1 * C1 + Es * E * C1
    assert p.ghost_degree() == 0
    assert p.parity() == 0
    with pytest.raises(DegreeError):
        CTX.zero().ghost_degree()
    with pytest.raises(DegreeError):
        (M1 + C1).ghost_degree()
    assert (M1 + C1).homogeneous_parts().keys() == {0, 1}


def test_context_mismatch():
    other = Context([GradedVariable("x", 0, 0)])
    with pytest.raises(ContextMismatch):
        CTX.var("M1") + other.var("x")


def test_embed_reorders_with_sign():
    small = Context([GradedVariable("C2", 1, 1), GradedVariable("C1", 1, 1)])
    p = small.var("C2") * small.var("C1")
    assert CTX.embed(p) == CTX.var("C2") * CTX.var("C1")
    assert CTX.embed(p) == -(CTX.var("C1") * CTX.var("C2"))


def test_subs_is_simultaneous():
    M1, M2 = CTX.vars("M1", "M2")
    p = M1 * M2**2
    assert p.subs({"M1": M2, "M2": M1}) == M2 * M1**2


def test_division_by_constant():
    M1 = CTX.var("M1")
    assert (M1 * 3) / 6 == M1 * mpq(1, 2)
    with pytest.raises(ZeroDivisionError):
        M1 / 0


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_graded_commutativity(seed):
    rng = random.Random(seed)
    da, db = rng.randint(-3, 2), rng.randint(-3, 2)
    a = random_homogeneous(CTX, rng, da, 4)
    b = random_homogeneous(CTX, rng, db, 4)
    sign = -1 if (da * db) % 2 else 1
    assert a * b == (b * a) * sign


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_ring_axioms(seed):
    rng = random.Random(seed)
    a, b, c = (random_mixed(CTX, rng, 4) for _ in range(3))
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert (a + b) - b == a
    assert a * CTX.one() == a


@settings(max_examples=60, deadline=None)
@given(seeds, st.sampled_from(CTX.names))
def test_graded_leibniz_for_derivatives(seed, name):
    rng = random.Random(seed)
    da = rng.randint(-3, 2)
    a = random_homogeneous(CTX, rng, da, 4)
    b = random_mixed(CTX, rng, 4)
    pv = CTX.variable(name).parity
    left = deriv(a, name, "left") * b + a * deriv(b, name, "left") * (-1 if (pv * da) % 2 else 1)
    assert deriv(a * b, name, "left") == left
    db = rng.randint(-3, 2)
    b = random_homogeneous(CTX, rng, db, 4)
    right = a * deriv(b, name, "right") + deriv(a, name, "right") * b * (-1 if (pv * db) % 2 else 1)
    assert deriv(a * b, name, "right") == right


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_left_and_right_derivatives_differ_by_parity(seed):
    rng = random.Random(seed)
    d = rng.randint(-3, 2)
    a = random_homogeneous(CTX, rng, d, 5)
    for name in ("C1", "Ms2", "Es", "M3"):
        pv = CTX.variable(name).parity
        sign = -1 if (pv * (d + pv)) % 2 else 1
        assert deriv(a, name, "right") == deriv(a, name, "left") * sign


def test_hash_and_equality():
    M1 = CTX.var("M1")
    assert hash(M1 * 2) == hash(M1 + M1)
    assert {M1 * 2, M1 + M1} == {M1 * 2}
    assert GradedPoly(CTX, {}) == 0
