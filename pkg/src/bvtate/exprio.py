"""Text forms of graded polynomials and JSON model files.

Grammar: integer literals, declared variable and parameter names, the binary
operators ``+ - * / ^`` and parentheses.  ``/`` only divides by constants
(parameters allowed); ``^`` takes a non-negative integer literal.  Two atoms
next to each other are a syntax error, not a product.  Anti-fields are
spelled with an ``s`` suffix (``Ms1`` for M*_1, ``Cs2``, ``Es``, ``Ks``).
"""

from __future__ import annotations

import json
import re
import warnings
from dataclasses import dataclass, field
from pathlib import Path

from gmpy2 import mpq

from bvtate.coeffs import ParamField
from bvtate.poly import Context, GradedPoly, GradedVariable


class ParseError(ValueError):
    def __init__(self, message: str, position: int | None = None):
        self.position = position
        where = f" at position {position}" if position is not None else ""
        super().__init__(f"{message}{where}")


class GrassmannSquareWarning(UserWarning):
    pass


# ---------------------------------------------------------------------------
# printing


def _param_poly_text(domain: ParamField, p) -> tuple[int, str, bool]:
    """(sign, text without sign, single_term) for a sympy polynomial numerator."""
    terms = sorted(p.terms(), reverse=True)
    if len(terms) == 1:
        text = domain._format_poly(p)
        if text.startswith("-"):
            return -1, text[1:], True
        return 1, text, True
    return 1, domain._format_poly(p), False


def coefficient_text(c, domain) -> tuple[int, str | None]:
    """Split a nonzero coefficient into (sign, magnitude text); text None means 1."""
    if not isinstance(domain, ParamField):
        sign = -1 if c < 0 else 1
        a = abs(mpq(c))
        return sign, (None if a == 1 else str(a))
    if domain.is_constant(c):
        return coefficient_text(domain.to_rational(c), None)
    num, den = c.numer, c.denom
    sign, ntext, single = _param_poly_text(domain, num)
    if den == 1:
        if ntext == "1":
            return sign, None
        if num.is_ground:
            return sign, ntext
        return sign, ntext if single else f"({ntext})"
    dsign, dtext, dsingle = _param_poly_text(domain, den)
    sign *= dsign
    if not single:
        ntext = f"({ntext})"
    return sign, f"{ntext}/({dtext})"


def monomial_text(ctx: Context, m: tuple) -> str:
    parts = []
    for i, e in enumerate(m):
        if e == 1:
            parts.append(ctx.names[i])
        elif e:
            parts.append(f"{ctx.names[i]}^{e}")
    return "*".join(parts)


def sorted_terms(p: GradedPoly):
    """Terms in descending lexicographic order of exponent tuples (global variable order)."""
    return sorted(p.terms.items(), key=lambda t: t[0], reverse=True)


def format_poly(p: GradedPoly) -> str:
    if not p.terms:
        return "0"
    out = []
    for m, c in sorted_terms(p):
        sign, ctext = coefficient_text(c, p.ctx.domain)
        mtext = monomial_text(p.ctx, m)
        if not mtext:
            body = ctext or "1"
        elif ctext is None:
            body = mtext
        else:
            body = f"{ctext}*{mtext}"
        if not out:
            out.append(("-" if sign < 0 else "") + body)
        else:
            out.append((" - " if sign < 0 else " + ") + body)
    return "".join(out)


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^()]))")


def _tokenize(text: str):
    pos = 0
    toks = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            j = pos
            while j < len(text) and text[j].isspace():
                j += 1
            raise ParseError(f"unexpected character {text[j]!r}", j)
        start = m.start(m.lastgroup)
        kind = m.lastgroup
        toks.append((kind, m.group(kind), start))
        pos = m.end()
    toks.append(("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str, ctx: Context):
        self.toks = _tokenize(text)
        self.i = 0
        self.ctx = ctx

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, value):
        kind, v, pos = self.take()
        if v != value:
            raise ParseError(f"expected {value!r}, found {v or 'end of input'!r}", pos)

    def parse(self) -> GradedPoly:
        if self.peek()[0] == "end":
            raise ParseError("empty expression", 0)
        out = self.expr()
        kind, v, pos = self.peek()
        if kind != "end":
            if kind in ("num", "name") or v == "(":
                raise ParseError("missing operator between factors (juxtaposition is not multiplication)", pos)
            raise ParseError(f"unexpected {v!r}", pos)
        return out

    def expr(self):
        acc = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def term(self):
        acc = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in ("*", "/"):
            _, op, pos = self.take()
            rhs = self.unary()
            if op == "*":
                acc = acc * rhs
            else:
                if not rhs.is_constant():
                    raise ParseError("division by a non-constant expression", pos)
                if not rhs:
                    raise ParseError("division by zero", pos)
                acc = acc / rhs
        return acc

    def unary(self):
        kind, v, pos = self.peek()
        if kind == "op" and v in ("-", "+"):
            self.take()
            inner = self.unary()
            return -inner if v == "-" else inner
        return self.power()

    def power(self):
        base, name, bpos = self.atom()
        if self.peek()[1] == "^" and self.peek()[0] == "op":
            self.take()
            kind, v, pos = self.take()
            if kind != "num":
                raise ParseError("exponent must be a non-negative integer literal", pos)
            n = int(v)
            if n > 1 and name is not None and self.ctx.is_odd[self.ctx.index[name]]:
                warnings.warn(
                    f"{name}^{n} vanishes: {name} is a Grassmann variable",
                    GrassmannSquareWarning,
                    stacklevel=4,
                )
            return base**n
        return base

    def atom(self):
        kind, v, pos = self.take()
        if kind == "num":
            return self.ctx.const(int(v)), None, pos
        if kind == "name":
            if v in self.ctx.index:
                return self.ctx.var(v), v, pos
            if v in self.ctx.params:
                return self.ctx.param(v), None, pos
            raise ParseError(f"unknown symbol {v!r}", pos)
        if v == "(":
            inner = self.expr()
            self.expect(")")
            return inner, None, pos
        raise ParseError(f"unexpected {v or 'end of input'!r}", pos)


def parse_poly(text: str, ctx: Context) -> GradedPoly:
    return _Parser(text, ctx).parse()


# ---------------------------------------------------------------------------
# model files

_MODEL_FIELDS = {"variables", "parameters", "action", "options"}
_VAR_FIELDS = {"name", "ghost_degree", "parity", "partner"}
_OPTION_FIELDS = {"cap", "max_q", "T"}


class ModelError(ValueError):
    pass


@dataclass
class SolverOptions:
    cap: int = 8
    max_q: int = 8
    T: str | None = None


@dataclass
class ModelSpec:
    variables: list[GradedVariable]
    parameters: list[str]
    action_text: str
    options: SolverOptions = field(default_factory=SolverOptions)
    context: Context | None = None
    action: GradedPoly | None = None

    @property
    def fields_only(self) -> bool:
        return all(v.ghost_degree == 0 for v in self.variables)


def _check_keys(obj, allowed, what):
    if not isinstance(obj, dict):
        raise ModelError(f"{what} must be a JSON object")
    extra = set(obj) - allowed
    if extra:
        raise ModelError(f"unknown field(s) in {what}: {', '.join(sorted(extra))}")


def model_from_dict(doc: dict) -> ModelSpec:
    _check_keys(doc, _MODEL_FIELDS, "model")
    for key in ("variables", "action"):
        if key not in doc:
            raise ModelError(f"model is missing {key!r}")
    variables = []
    for entry in doc["variables"]:
        _check_keys(entry, _VAR_FIELDS, "variable")
        try:
            name = entry["name"]
            deg = int(entry.get("ghost_degree", 0))
            parity = int(entry.get("parity", deg % 2))
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelError(f"bad variable entry {entry!r}") from exc
        try:
            variables.append(GradedVariable(name, deg, parity, partner=entry.get("partner")))
        except ValueError as exc:
            raise ModelError(str(exc)) from exc
    params = list(doc.get("parameters", []))
    opts = doc.get("options", {})
    _check_keys(opts, _OPTION_FIELDS, "options")
    options = SolverOptions(
        cap=int(opts.get("cap", 8)), max_q=int(opts.get("max_q", 8)), T=opts.get("T")
    )
    try:
        ctx = Context(variables, params)
    except ValueError as exc:
        raise ModelError(str(exc)) from exc
    text = doc["action"]
    if not isinstance(text, str):
        raise ModelError("action must be an expression string")
    action = parse_poly(text, ctx)
    return ModelSpec(variables, params, text, options, ctx, action)


def load_model(path) -> ModelSpec:
    with open(Path(path), encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelError(f"invalid JSON: {exc}") from exc
    return model_from_dict(doc)


def model_to_dict(spec: ModelSpec) -> dict:
    out = {
        "variables": [
            {k: v for k, v in (
                ("name", var.name),
                ("ghost_degree", var.ghost_degree),
                ("parity", var.parity),
                ("partner", var.partner),
            ) if v is not None}
            for var in spec.variables
        ],
        "parameters": list(spec.parameters),
        "action": spec.action_text,
    }
    opts = {"cap": spec.options.cap, "max_q": spec.options.max_q}
    if spec.options.T is not None:
        opts["T"] = spec.options.T
    out["options"] = opts
    return out
