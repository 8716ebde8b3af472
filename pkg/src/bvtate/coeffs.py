"""Exact coefficient fields: plain rationals, or rational functions in parameters."""

from __future__ import annotations

from fractions import Fraction

from gmpy2 import mpq
from sympy import QQ
from sympy.polys.fields import field


class RationalField:
    """The field Q, with gmpy2 rationals as element type."""

    params: tuple[str, ...] = ()

    def __init__(self):
        self.zero = mpq(0)
        self.one = mpq(1)

    def __call__(self, x) -> mpq:
        if isinstance(x, Fraction):
            return mpq(x.numerator, x.denominator)
        return mpq(x)

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash(())

    def is_constant(self, c) -> bool:
        return True

    def to_rational(self, c) -> mpq:
        return c

    def param(self, name: str):
        raise KeyError(f"unknown parameter {name!r}")

    def format(self, c) -> str:
        return str(c)

    def sort_key(self, c):
        return (c,)


class ParamField:
    """Q(p1, ..., pn): reduced fractions of polynomials in the declared parameters."""

    def __init__(self, params):
        self.params = tuple(params)
        if not self.params:
            raise ValueError("ParamField needs at least one parameter; use RationalField")
        self.K, *gens = field(",".join(self.params), QQ)
        self._gens = dict(zip(self.params, gens))
        self.zero = self.K.zero
        self.one = self.K.one

    def __call__(self, x):
        if isinstance(x, Fraction):
            x = mpq(x.numerator, x.denominator)
        return self.K(x)

    def __eq__(self, other):
        return isinstance(other, ParamField) and other.params == self.params

    def __hash__(self):
        return hash(self.params)

    def param(self, name: str):
        return self._gens[name]

    def is_constant(self, c) -> bool:
        return c.numer.is_ground and c.denom.is_ground

    def to_rational(self, c) -> mpq:
        if not self.is_constant(c):
            raise ValueError(f"coefficient {self.format(c)} depends on parameters")
        return mpq(c.numer.LC) / mpq(c.denom.LC) if c.numer else mpq(0)

    def _format_poly(self, p) -> str:
        parts = []
        for exps, c in sorted(p.terms(), reverse=True):
            mono = "*".join(
                name if e == 1 else f"{name}^{e}"
                for name, e in zip(self.params, exps)
                if e
            )
            c = mpq(c)
            if not mono:
                s = str(abs(c))
            elif abs(c) == 1:
                s = mono
            else:
                s = f"{abs(c)}*{mono}"
            parts.append(("-" if c < 0 else "+", s))
        out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, s in parts[1:]:
            out += f" {sign} {s}"
        return out

    def format(self, c) -> str:
        if not c.numer:
            return "0"
        num = self._format_poly(c.numer)
        if c.denom == 1:
            return num
        return f"({num})/({self._format_poly(c.denom)})"

    def sort_key(self, c):
        return (sorted(c.numer.terms()), sorted(c.denom.terms()))


def make_domain(params=()):
    params = tuple(params)
    return ParamField(params) if params else RationalField()


def promote(value, domain):
    """Move a coefficient from a smaller domain into ``domain``."""
    if isinstance(domain, RationalField):
        return value
    if isinstance(value, mpq):
        return domain.K(value)
    # a FracElement from a field whose parameters are a subset of ours
    return domain.K.from_expr(value.as_expr())
