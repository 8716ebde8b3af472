"""Seeded random polynomials for the property suites."""

from __future__ import annotations

import random

from gmpy2 import mpq

from bvtate.poly import Context, GradedPoly
from bvtate.u2 import extended_context_case2


def rational_case2_context() -> Context:
    """The coprime-case extended roster (degrees -3..2) over the rationals."""
    return Context(extended_context_case2().variables, ())


def random_monomial(ctx: Context, rng: random.Random, degree: int, max_factors: int = 4):
    """A random monomial of the given ghost degree, or None after too many tries."""
    for _ in range(50):
        exps = [0] * ctx.nvars
        for _ in range(rng.randint(0, max_factors)):
            i = rng.randrange(ctx.nvars)
            if ctx.is_odd[i] and exps[i]:
                continue
            exps[i] += 1
        deg = sum(e * d for e, d in zip(exps, ctx.degrees))
        # repair the degree with single factors
        for _ in range(8):
            if deg == degree:
                return tuple(exps)
            want = degree - deg
            choices = [
                i for i, d in enumerate(ctx.degrees)
                if d != 0 and (d > 0) == (want > 0) and abs(d) <= abs(want)
                and not (ctx.is_odd[i] and exps[i])
            ]
            if not choices:
                break
            i = rng.choice(choices)
            exps[i] += 1
            deg += ctx.degrees[i]
    return None


def random_coefficient(rng: random.Random, height: int = 10):
    c = 0
    while c == 0:
        c = rng.randint(-height, height)
    if rng.random() < 0.3:
        return mpq(c, rng.randint(1, height))
    return mpq(c)


def random_homogeneous(ctx: Context, rng: random.Random, degree: int, max_terms: int = 8, height: int = 10) -> GradedPoly:
    terms = {}
    for _ in range(rng.randint(1, max_terms)):
        m = random_monomial(ctx, rng, degree)
        if m is not None:
            terms[m] = ctx.domain(random_coefficient(rng, height))
    return GradedPoly(ctx, terms)


def random_mixed(ctx: Context, rng: random.Random, max_terms: int = 6, degrees=range(-3, 3)) -> GradedPoly:
    out = ctx.zero()
    for _ in range(rng.randint(1, 3)):
        out = out + random_homogeneous(ctx, rng, rng.choice(list(degrees)), max_terms)
    return out


# lines recorded by the acceptance suite, printed in the terminal summary
ACCEPTANCE: list[str] = []
