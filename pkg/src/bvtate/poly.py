"""Graded-commutative polynomials in bosonic and Grassmann variables.

A :class:`Context` fixes an ordered roster of graded variables and a coefficient
field.  Monomials are dense exponent tuples over that roster; odd variables
carry exponent 0 or 1 and are kept in roster order, so the Koszul sign of a
product is the parity of the merge permutation of the odd factors.
"""

from __future__ import annotations

from dataclasses import dataclass

from bvtate.coeffs import RationalField, make_domain, promote

ROLES = ("field", "ghost", "antifield", "antighost")


class ContextMismatch(ValueError):
    pass


class DegreeError(ValueError):
    """Ghost degree requested for a zero or inhomogeneous polynomial."""


@dataclass(frozen=True)
class GradedVariable:
    name: str
    ghost_degree: int
    parity: int
    role: str = ""
    partner: str | None = None

    def __post_init__(self):
        if self.parity not in (0, 1):
            raise ValueError(f"{self.name}: parity must be 0 or 1")
        if (self.ghost_degree - self.parity) % 2:
            raise ValueError(f"{self.name}: parity must match ghost degree mod 2")
        if not self.role:
            object.__setattr__(self, "role", default_role(self.ghost_degree))
        if self.role not in ROLES:
            raise ValueError(f"{self.name}: unknown role {self.role!r}")


def default_role(degree: int) -> str:
    if degree == 0:
        return "field"
    if degree > 0:
        return "ghost"
    return "antifield" if degree == -1 else "antighost"


class Context:
    """Ordered variable roster plus coefficient field; the order is the global order."""

    def __init__(self, variables, params=()):
        self.variables = tuple(variables)
        self.params = tuple(params)
        self.domain = make_domain(self.params)
        self.names = tuple(v.name for v in self.variables)
        if len(set(self.names)) != len(self.names):
            raise ValueError("duplicate variable names")
        self.index = {n: i for i, n in enumerate(self.names)}
        self.degrees = tuple(v.ghost_degree for v in self.variables)
        self.odd = tuple(i for i, v in enumerate(self.variables) if v.parity)
        self.is_odd = tuple(bool(v.parity) for v in self.variables)
        self.nvars = len(self.variables)
        self.unit = (0,) * self.nvars
        self.key = (self.variables, self.params)
        for v in self.variables:
            if v.partner is not None and v.partner in self.index:
                w = self.variables[self.index[v.partner]]
                if w.ghost_degree != -v.ghost_degree - 1 or w.parity == v.parity:
                    raise ValueError(f"bad pairing {v.name} <-> {w.name}")
                if w.partner not in (None, v.name):
                    raise ValueError(f"pairing of {v.name} is not involutive")

    def __eq__(self, other):
        return self is other or (isinstance(other, Context) and self.key == other.key)

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"Context({', '.join(self.names)}; params={self.params})"

    def var(self, name: str) -> GradedPoly:
        i = self.index[name]
        e = [0] * self.nvars
        e[i] = 1
        return GradedPoly(self, {tuple(e): self.domain.one})

    def vars(self, *names):
        return [self.var(n) for n in names]

    def param(self, name: str) -> GradedPoly:
        return self.const(self.domain.param(name))

    def const(self, c) -> GradedPoly:
        c = self.domain(c) if not _is_domain_elem(c, self.domain) else c
        return GradedPoly(self, {self.unit: c} if c else {})

    def zero(self) -> GradedPoly:
        return GradedPoly(self, {})

    def one(self) -> GradedPoly:
        return self.const(1)

    def variable(self, name: str) -> GradedVariable:
        return self.variables[self.index[name]]

    def field_indices(self):
        return tuple(i for i, d in enumerate(self.degrees) if d == 0)

    def extend(self, variables=(), params=()) -> Context:
        """A context with extra variables appended and extra parameters."""
        newparams = self.params + tuple(p for p in params if p not in self.params)
        return Context(self.variables + tuple(variables), newparams)

    def embed(self, p: GradedPoly) -> GradedPoly:
        """Re-express ``p`` (from another context) in this one, matching by name."""
        if p.ctx == self:
            return p
        src = p.ctx
        idx = [self.index[n] if n in self.index else None for n in src.names]
        out = {}
        for m, c in p.terms.items():
            e = [0] * self.nvars
            odd_targets = []
            for i, k in enumerate(m):
                if not k:
                    continue
                j = idx[i]
                if j is None:
                    raise ContextMismatch(f"variable {src.names[i]} not in target context")
                e[j] = k
                if src.is_odd[i]:
                    odd_targets.append(j)
            sign = _perm_sign(odd_targets)
            out[tuple(e)] = sign * promote(c, self.domain)
        return GradedPoly(self, out)


def _is_domain_elem(c, domain):
    if isinstance(domain, RationalField):
        return False
    return getattr(c, "field", None) is domain.K


def _perm_sign(seq) -> int:
    inv = 0
    for a in range(len(seq)):
        for b in range(a + 1, len(seq)):
            if seq[a] > seq[b]:
                inv += 1
    return -1 if inv % 2 else 1


def mono_mul(ctx: Context, a: tuple, b: tuple):
    """Product of two monomials: (sign, monomial), sign 0 for a repeated odd factor."""
    inv = 0
    seen_b = 0
    for i in ctx.odd:
        ai, bi = a[i], b[i]
        if ai and bi:
            return 0, None
        if ai:
            inv += seen_b
        elif bi:
            seen_b += 1
    return (-1 if inv & 1 else 1), tuple(x + y for x, y in zip(a, b))


def mono_degree(ctx: Context, m: tuple) -> int:
    return sum(e * d for e, d in zip(m, ctx.degrees) if e)


def mono_parity(ctx: Context, m: tuple) -> int:
    return sum(m[i] for i in ctx.odd) & 1


class GradedPoly:
    """Immutable polynomial; ``terms`` maps monomial tuples to nonzero coefficients."""

    __slots__ = ("ctx", "terms", "_hash")

    def __init__(self, ctx: Context, terms=None):
        self.ctx = ctx
        self.terms = terms if terms is not None else {}
        self._hash = None

    # -- construction helpers -------------------------------------------------

    def _coerce(self, other) -> GradedPoly:
        if isinstance(other, GradedPoly):
            if other.ctx is not self.ctx and other.ctx != self.ctx:
                raise ContextMismatch(f"{self.ctx!r} vs {other.ctx!r}")
            return other
        return self.ctx.const(other)

    # -- arithmetic -------------------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m)
            if s is None:
                out[m] = c
            else:
                s = s + c
                if s:
                    out[m] = s
                else:
                    del out[m]
        return GradedPoly(self.ctx, out)

    __radd__ = __add__

    def __neg__(self):
        return GradedPoly(self.ctx, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, GradedPoly):
            c = self.ctx.domain(other) if not _is_domain_elem(other, self.ctx.domain) else other
            if not c:
                return self.ctx.zero()
            return GradedPoly(self.ctx, {m: v * c for m, v in self.terms.items()})
        other = self._coerce(other)
        ctx = self.ctx
        out = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                sign, m = mono_mul(ctx, ma, mb)
                if not sign:
                    continue
                v = ca * cb if sign > 0 else -(ca * cb)
                s = out.get(m)
                if s is None:
                    out[m] = v
                else:
                    s = s + v
                    if s:
                        out[m] = s
                    else:
                        del out[m]
        return GradedPoly(ctx, out)

    def __rmul__(self, other):
        # scalars commute with everything
        return self * other

    def __truediv__(self, other):
        if isinstance(other, GradedPoly):
            if not other.is_constant():
                raise ValueError("division by a non-constant polynomial")
            other = other.constant_term()
        c = self.ctx.domain(other) if not _is_domain_elem(other, self.ctx.domain) else other
        return self * (self.ctx.domain.one / c)

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative exponent")
        out = self.ctx.one()
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # -- comparison -------------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, GradedPoly):
            return self.ctx == other.ctx and self.terms == other.terms
        try:
            return self == self.ctx.const(other)
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ctx, frozenset(self.terms.items())))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        from bvtate.exprio import format_poly

        return f"GradedPoly({format_poly(self)!r})"

    def __str__(self):
        from bvtate.exprio import format_poly

        return format_poly(self)

    # -- queries ----------------------------------------------------------------

    def is_constant(self) -> bool:
        return all(not any(m) for m in self.terms)

    def constant_term(self):
        return self.terms.get(self.ctx.unit, self.ctx.domain.zero)

    def term_degrees(self) -> set[int]:
        return {mono_degree(self.ctx, m) for m in self.terms}

    def is_homogeneous(self) -> bool:
        return len(self.term_degrees()) <= 1

    def ghost_degree(self) -> int:
        if not self.terms:
            raise DegreeError("ghost degree of the zero polynomial is undefined")
        degs = self.term_degrees()
        if len(degs) != 1:
            raise DegreeError(f"inhomogeneous polynomial with degrees {sorted(degs)}")
        return degs.pop()

    def parity(self) -> int:
        pars = {mono_parity(self.ctx, m) for m in self.terms}
        if len(pars) > 1:
            raise DegreeError("polynomial of mixed parity")
        return pars.pop() if pars else 0

    def variables_used(self) -> set[str]:
        used = set()
        for m in self.terms:
            used.update(self.ctx.names[i] for i, e in enumerate(m) if e)
        return used

    def homogeneous_parts(self) -> dict[int, GradedPoly]:
        parts: dict[int, dict] = {}
        for m, c in self.terms.items():
            parts.setdefault(mono_degree(self.ctx, m), {})[m] = c
        return {d: GradedPoly(self.ctx, t) for d, t in parts.items()}

    def filter_terms(self, pred) -> GradedPoly:
        """Keep the terms whose monomial satisfies ``pred``."""
        return GradedPoly(self.ctx, {m: c for m, c in self.terms.items() if pred(m)})

    def restrict_to(self, names) -> GradedPoly:
        """Set every variable not in ``names`` to zero."""
        keep = {self.ctx.index[n] for n in names}
        return self.filter_terms(lambda m: all(i in keep for i, e in enumerate(m) if e))

    def map_coefficients(self, f) -> GradedPoly:
        out = {}
        for m, c in self.terms.items():
            v = f(c)
            if v:
                out[m] = v
        return GradedPoly(self.ctx, out)

    def subs(self, images: dict[str, GradedPoly]) -> GradedPoly:
        """Substitute variables by polynomials of the same parity (an algebra map)."""
        ctx = self.ctx
        result = ctx.zero()
        for m, c in self.terms.items():
            term = ctx.const(c)
            for i, e in enumerate(m):
                if not e:
                    continue
                name = ctx.names[i]
                img = images.get(name)
                if img is None:
                    e1 = [0] * ctx.nvars
                    e1[i] = e
                    factor = GradedPoly(ctx, {tuple(e1): ctx.domain.one})
                else:
                    factor = img ** e
                term = term * factor
            result = result + term
        return result


def deriv(p: GradedPoly, v: str, side: str = "left") -> GradedPoly:
    """Graded partial derivative of ``p`` with respect to the variable named ``v``."""
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    ctx = p.ctx
    i = ctx.index[v]
    out = {}
    if not ctx.is_odd[i]:
        for m, c in p.terms.items():
            e = m[i]
            if e:
                n = list(m)
                n[i] = e - 1
                out[tuple(n)] = c * e
        return GradedPoly(ctx, out)
    for m, c in p.terms.items():
        if not m[i]:
            continue
        if side == "left":
            k = sum(m[j] for j in ctx.odd if j < i)
        else:
            k = sum(m[j] for j in ctx.odd if j > i)
        n = list(m)
        n[i] = 0
        out[tuple(n)] = -c if k & 1 else c
    return GradedPoly(ctx, out)


def ghost_degree(p: GradedPoly) -> int:
    return p.ghost_degree()


def mul(a: GradedPoly, b: GradedPoly) -> GradedPoly:
    return a * b
