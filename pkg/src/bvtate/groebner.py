"""Buchberger's algorithm for submodules of free modules over a polynomial ring.

Elements are :class:`FreeModuleElement` values: sparse maps from
``(slot, exponent tuple)`` to coefficients.  Coefficients are any exact field
elements (gmpy2 rationals or sympy fraction-field elements), so the same code
runs over Q and over Q(parameters).

The bridge to :class:`~bvtate.poly.GradedPoly` is :class:`BosonicRing`, which
projects polynomials in the degree-0 variables of a context onto exponent
tuples.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm

from gmpy2 import mpq

from bvtate.poly import Context, GradedPoly


class NotBosonic(ValueError):
    pass


# ---------------------------------------------------------------------------
# term orders


class Order:
    """A term order on (slot, monomial) pairs; larger key means larger term."""

    def __init__(self, kind: str = "pot"):
        if kind not in ("pot", "top", "elim"):
            raise ValueError(f"unknown order {kind!r}")
        self.kind = kind

    def key(self, term):
        pos, m = term
        rev = tuple(-e for e in reversed(m))
        if self.kind == "pot":
            return (-pos, sum(m), rev)
        if self.kind == "top":
            return (sum(m), rev, -pos)
        # elimination of the first variable: its exponent dominates
        return (-pos, m[0], sum(m) - m[0], rev)

    def mono_key(self, m):
        return self.key((0, m))

    def __repr__(self):
        return f"Order({self.kind!r})"

    def __eq__(self, other):
        return isinstance(other, Order) and other.kind == self.kind

    def __hash__(self):
        return hash(self.kind)


POT = Order("pot")
TOP = Order("top")
ELIM = Order("elim")


# ---------------------------------------------------------------------------
# module elements


def _divides(a, b) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _mdiff(b, a):
    return tuple(y - x for x, y in zip(a, b))


def _madd(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _mlcm(a, b):
    return tuple(max(x, y) for x, y in zip(a, b))


class FreeModuleElement:
    """Sparse element of R^rank, R a polynomial ring in ``nvars`` variables."""

    __slots__ = ("rank", "nvars", "terms")

    def __init__(self, rank: int, nvars: int, terms=None):
        self.rank = rank
        self.nvars = nvars
        self.terms = terms if terms is not None else {}

    @classmethod
    def from_coords(cls, coords, nvars: int, rank: int | None = None):
        """Build from a list (or slot->poly dict) of exponent-tuple polynomials."""
        if not isinstance(coords, dict):
            coords = dict(enumerate(coords))
        if rank is None:
            rank = max(coords, default=-1) + 1
        terms = {}
        for pos, poly in coords.items():
            if not 0 <= pos < rank:
                raise IndexError(f"slot {pos} out of range for rank {rank}")
            for m, c in poly.items():
                if c:
                    terms[(pos, m)] = c
        return cls(rank, nvars, terms)

    @classmethod
    def unit(cls, i: int, rank: int, nvars: int, one=None):
        return cls(rank, nvars, {(i, (0,) * nvars): one if one is not None else mpq(1)})

    def copy(self):
        return FreeModuleElement(self.rank, self.nvars, dict(self.terms))

    def coordinate(self, i: int) -> dict:
        return {m: c for (p, m), c in self.terms.items() if p == i}

    def coords(self) -> list[dict]:
        out = [dict() for _ in range(self.rank)]
        for (p, m), c in self.terms.items():
            out[p][m] = c
        return out

    def support(self) -> set[int]:
        return {p for p, _ in self.terms}

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        return (
            isinstance(other, FreeModuleElement)
            and self.rank == other.rank
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.rank, frozenset(self.terms.items())))

    def __repr__(self):
        parts = []
        for pos in sorted(self.support()):
            parts.append(f"{pos}: {self.coordinate(pos)}")
        return f"FreeModuleElement(rank={self.rank}, {{{', '.join(parts)}}})"

    def _check(self, other):
        if self.rank != other.rank or self.nvars != other.nvars:
            raise ValueError("rank or variable count mismatch")

    def __add__(self, other):
        self._check(other)
        out = dict(self.terms)
        _axpy(out, other.terms, None, None)
        return FreeModuleElement(self.rank, self.nvars, out)

    def __sub__(self, other):
        self._check(other)
        out = dict(self.terms)
        _axpy(out, other.terms, -1, None)
        return FreeModuleElement(self.rank, self.nvars, out)

    def __neg__(self):
        return FreeModuleElement(self.rank, self.nvars, {t: -c for t, c in self.terms.items()})

    def scale(self, c, mono=None) -> FreeModuleElement:
        """Multiply by the term ``c * x^mono``."""
        if not c:
            return FreeModuleElement(self.rank, self.nvars, {})
        if mono is None or not any(mono):
            return FreeModuleElement(self.rank, self.nvars, {t: v * c for t, v in self.terms.items()})
        return FreeModuleElement(
            self.rank,
            self.nvars,
            {(p, _madd(m, mono)): v * c for (p, m), v in self.terms.items()},
        )

    def mul_poly(self, poly: dict) -> FreeModuleElement:
        out: dict = {}
        for mono, c in poly.items():
            _axpy(out, self.terms, c, mono)
        return FreeModuleElement(self.rank, self.nvars, out)

    def leading_term(self, order: Order = POT):
        return max(self.terms, key=order.key)


def _axpy(out: dict, terms: dict, c, mono):
    """out += c * x^mono * terms, in place (c None means 1)."""
    for (p, m), v in terms.items():
        t = (p, _madd(m, mono)) if mono is not None else (p, m)
        if c is not None:
            v = v * c
        s = out.get(t)
        if s is None:
            out[t] = v
        else:
            s = s + v
            if s:
                out[t] = s
            else:
                del out[t]


def poly_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            m = _madd(ma, mb)
            s = out.get(m)
            v = ca * cb
            if s is None:
                out[m] = v
            else:
                s = s + v
                if s:
                    out[m] = s
                else:
                    del out[m]
    return out


# ---------------------------------------------------------------------------
# Buchberger


@dataclass
class ModuleBasis:
    generators: list
    order: Order = POT
    reduced: bool = False
    reps: list | None = None  # each basis element in terms of the source generators
    nsource: int = 0
    rank: int = 0
    nvars: int = 0
    _lts: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        self._lts = [g.leading_term(self.order) for g in self.generators]

    def __len__(self):
        return len(self.generators)


class _Elem:
    """Basis element under construction: terms, leading term, coefficient, rep."""

    __slots__ = ("terms", "lt", "lc", "rep")

    def __init__(self, terms, order, rep):
        self.terms = terms
        self.lt = max(terms, key=order.key)
        self.lc = terms[self.lt]
        self.rep = rep


def _reduce(terms: dict, basis: list, order: Order, full: bool = True):
    """Divide ``terms`` by ``basis`` (list of _Elem).

    Returns (remainder, quotients) with quotients a dict index -> poly dict.
    """
    p = dict(terms)
    rem: dict = {}
    quot: dict = {}
    key = order.key
    while p:
        t = max(p, key=key)
        c = p[t]
        pos, m = t
        for idx, g in enumerate(basis):
            gpos, gm = g.lt
            if gpos == pos and _divides(gm, m):
                q = c / g.lc
                mono = _mdiff(m, gm)
                _axpy(p, g.terms, -q, mono)
                qd = quot.setdefault(idx, {})
                s = qd.get(mono)
                qd[mono] = q if s is None else s + q
                break
        else:
            if not full:
                rem.update(p)
                return rem, quot
            rem[t] = c
            del p[t]
    return rem, quot


def _combine_reps(quot: dict, basis: list, base=None):
    """base - sum_q q_idx * rep_idx."""
    out = dict(base.terms) if base is not None else {}
    for idx, qd in quot.items():
        rep = basis[idx].rep
        for mono, c in qd.items():
            _axpy(out, rep.terms, -c, mono)
    return out


def _inv(c):
    if hasattr(c, "field"):
        return c.field.one / c
    return mpq(1) / c


def _gb(gens, order: Order, track: bool, collect_syz: bool, use_criteria: bool = True):
    """Core Buchberger loop with the normal selection strategy.

    Returns (basis elements, syzygies as rep-space term dicts).
    """
    nsrc = len(gens)
    rank = gens[0].rank if gens else 0
    nvars = gens[0].nvars if gens else 0
    unit = (0,) * nvars
    G: list[_Elem] = []
    syz: list[dict] = []
    one = None
    for i, g in enumerate(gens):
        if g.rank != rank or g.nvars != nvars:
            raise ValueError("generators must share rank and variable count")
        if one is None and g.terms:
            c = next(iter(g.terms.values()))
            one = c / c
    if one is None:
        one = mpq(1)
    for i, g in enumerate(gens):
        rep = FreeModuleElement(nsrc, nvars, {(i, unit): one}) if (track or collect_syz) else None
        if not g.terms:
            if collect_syz:
                syz.append({(i, unit): one})
            continue
        G.append(_Elem(dict(g.terms), order, rep))

    pairs = []

    def add_pairs(j):
        gj = G[j]
        for i in range(j):
            gi = G[i]
            if gi.lt[0] != gj.lt[0]:
                continue
            l = _mlcm(gi.lt[1], gj.lt[1])
            pairs.append((order.key((gi.lt[0], l)), i, j, l))

    for j in range(len(G)):
        add_pairs(j)

    done = set()
    while pairs:
        # normal selection: smallest lcm first, ties by index
        best = min(range(len(pairs)), key=lambda k: (pairs[k][0], pairs[k][1], pairs[k][2]))
        _, i, j, l = pairs.pop(best)
        done.add((i, j))
        gi, gj = G[i], G[j]
        if use_criteria and not collect_syz:
            # product criterion (only meaningful when both sit in one slot with coprime heads)
            if all(a == 0 or b == 0 for a, b in zip(gi.lt[1], gj.lt[1])) and rank == 1:
                continue
            # chain criterion
            skip = False
            for k, gk in enumerate(G):
                if k in (i, j) or gk.lt[0] != gi.lt[0]:
                    continue
                if not _divides(gk.lt[1], l):
                    continue
                a, b = (min(i, k), max(i, k)), (min(j, k), max(j, k))
                if a in done and b in done:
                    skip = True
                    break
            if skip:
                continue
        ua, ub = _mdiff(l, gi.lt[1]), _mdiff(l, gj.lt[1])
        ca, cb = _inv(gi.lc), _inv(gj.lc)
        s: dict = {}
        _axpy(s, gi.terms, ca, ua)
        _axpy(s, gj.terms, -cb, ub)
        rem, quot = _reduce(s, G, order)
        rep_terms = None
        if track or collect_syz:
            base: dict = {}
            _axpy(base, gi.rep.terms, ca, ua)
            _axpy(base, gj.rep.terms, -cb, ub)
            rep_terms = _combine_reps(quot, G, FreeModuleElement(nsrc, nvars, base))
        if not rem:
            if collect_syz and rep_terms:
                syz.append(rep_terms)
            continue
        rep = FreeModuleElement(nsrc, nvars, rep_terms) if rep_terms is not None else None
        G.append(_Elem(rem, order, rep))
        add_pairs(len(G) - 1)
    return G, syz


def _minimalize(G: list, order: Order, reduce: bool):
    """Drop redundant heads, then (optionally) inter-reduce tails and make monic."""
    keep = []
    for idx, g in enumerate(G):
        redundant = False
        for jdx, h in enumerate(G):
            if jdx == idx or h.lt[0] != g.lt[0] or not _divides(h.lt[1], g.lt[1]):
                continue
            if h.lt[1] != g.lt[1] or jdx < idx:
                redundant = True
                break
        if not redundant:
            keep.append(g)
    if not reduce:
        return keep
    out = []
    for idx, g in enumerate(keep):
        others = [h for jdx, h in enumerate(keep) if jdx != idx]
        head = {g.lt: g.lc}
        tail = {t: c for t, c in g.terms.items() if t != g.lt}
        rem, quot = _reduce(tail, others, order)
        rep = None
        if g.rep is not None:
            rep = FreeModuleElement(g.rep.rank, g.rep.nvars, _combine_reps(quot, others, g.rep))
        terms = dict(rem)
        terms.update(head)
        inv = _inv(g.lc)
        terms = {t: c * inv for t, c in terms.items()}
        if rep is not None:
            rep = rep.scale(inv)
        out.append(_Elem(terms, order, rep))
    out.sort(key=lambda e: order.key(e.lt), reverse=True)
    return out


def buchberger(gens, order: Order = POT, track: bool = False, reduce: bool = True) -> ModuleBasis:
    """Gröbner basis of the submodule generated by ``gens``.

    With ``track`` the basis remembers each element as a combination of the
    input generators, so :func:`normal_form` can report witnesses in those terms.
    """
    gens = list(gens)
    G, _ = _gb(gens, order, track, False)
    G = _minimalize(G, order, reduce)
    rank = gens[0].rank if gens else 0
    nvars = gens[0].nvars if gens else 0
    elems = [FreeModuleElement(rank, nvars, g.terms) for g in G]
    reps = [g.rep for g in G] if track else None
    return ModuleBasis(elems, order, reduce, reps, len(gens), rank, nvars)


def normal_form(f: FreeModuleElement, basis: ModuleBasis):
    """Fully reduce ``f``; returns (remainder, witness).

    The witness is a list of polynomial dicts, one per source generator when the
    basis was built with ``track=True`` and one per basis element otherwise, with
    ``f = sum(witness[i] * gen[i]) + remainder``.
    """
    if basis.generators and f.rank != basis.rank:
        raise ValueError("rank mismatch")
    elems = [_Elem(g.terms, basis.order, None) for g in basis.generators]
    rem, quot = _reduce(f.terms, elems, basis.order)
    remainder = FreeModuleElement(f.rank, f.nvars, rem)
    if basis.reps is not None:
        acc: dict = {}
        for idx, qd in quot.items():
            for mono, c in qd.items():
                _axpy(acc, basis.reps[idx].terms, c, mono)
        wit = FreeModuleElement(basis.nsource, f.nvars, acc).coords()
        if len(wit) < basis.nsource:
            wit += [dict() for _ in range(basis.nsource - len(wit))]
    else:
        wit = [dict(quot.get(i, {})) for i in range(len(elems))]
        wit = [{m: c for m, c in w.items() if c} for w in wit]
    return remainder, wit


def reduces_to_zero(f: FreeModuleElement, basis: ModuleBasis) -> bool:
    elems = [_Elem(g.terms, basis.order, None) for g in basis.generators]
    rem, _ = _reduce(f.terms, elems, basis.order, full=False)
    return not rem


def syzygies(gens, order: Order = POT, prune: bool = True) -> list[FreeModuleElement]:
    """Generators of the module of relations sum a_i * gens[i] = 0."""
    gens = list(gens)
    if not gens:
        return []
    nsrc, nvars = len(gens), gens[0].nvars
    _, raw = _gb(gens, order, True, True, use_criteria=False)
    cands = [FreeModuleElement(nsrc, nvars, t) for t in raw if t]
    if not cands:
        return []
    return interreduce(cands, order) if prune else cands


def interreduce(elems, order: Order = POT) -> list[FreeModuleElement]:
    """A small generating set of the same module: reduced basis, then greedy pruning."""
    elems = [e for e in elems if e.terms]
    if not elems:
        return []
    basis = buchberger(elems, order)
    cands = list(basis.generators)
    return prune_redundant(cands, order)


def prune_redundant(cands, order: Order = POT, extra=()) -> list[FreeModuleElement]:
    """Drop, largest first, any element lying in the span of the rest plus ``extra``."""
    cands = sorted(cands, key=lambda e: order.key(e.leading_term(order)), reverse=True)
    extra = list(extra)
    i = 0
    while i < len(cands):
        others = cands[:i] + cands[i + 1 :] + extra
        if others and reduces_to_zero(cands[i], buchberger(others, order, reduce=False)):
            cands.pop(i)
        else:
            i += 1
    return cands


# ---------------------------------------------------------------------------
# bridge to graded polynomials


class BosonicRing:
    """The polynomial ring in the degree-0 variables of a context."""

    def __init__(self, ctx: Context):
        self.ctx = ctx
        self.indices = ctx.field_indices()
        self.nvars = len(self.indices)
        self.domain = ctx.domain
        self.names = tuple(ctx.names[i] for i in self.indices)
        self._pos = {i: k for k, i in enumerate(self.indices)}

    def to_dict(self, p: GradedPoly) -> dict:
        if p.ctx != self.ctx:
            p = self.ctx.embed(p)
        out = {}
        idx = self.indices
        for m, c in p.terms.items():
            if any(e for i, e in enumerate(m) if i not in self._pos):
                raise NotBosonic("polynomial involves non-field variables")
            out[tuple(m[i] for i in idx)] = c
        return out

    def from_dict(self, d: dict) -> GradedPoly:
        out = {}
        n = self.ctx.nvars
        for m, c in d.items():
            if not c:
                continue
            e = [0] * n
            for k, i in enumerate(self.indices):
                e[i] = m[k]
            out[tuple(e)] = c
        return GradedPoly(self.ctx, out)

    def element(self, coords) -> FreeModuleElement:
        """Module element from a list of bosonic GradedPolys."""
        return FreeModuleElement.from_coords([self.to_dict(p) for p in coords], self.nvars, len(coords))

    def coords(self, v: FreeModuleElement) -> list[GradedPoly]:
        return [self.from_dict(c) for c in v.coords()]


def _ideal_elems(polys: list[dict], nvars: int):
    return [FreeModuleElement(1, nvars, {(0, m): c for m, c in p.items()}) for p in polys]


def _as_ring(polys):
    polys = list(polys)
    ctxs = {p.ctx for p in polys}
    if len(ctxs) > 1:
        raise ValueError("polynomials from different contexts")
    return BosonicRing(polys[0].ctx) if polys else None


def ideal_intersect(I, J) -> list[GradedPoly]:
    """Generators of I ∩ J, by eliminating t from t*I + (1 - t)*J."""
    I, J = list(I), list(J)
    ring = _as_ring(I + J)
    if ring is None:
        return []
    I = [p for p in I if p]
    J = [p for p in J if p]
    if not I or not J:
        return []
    n = ring.nvars
    tI, tJ = [], []
    for p in I:
        d = ring.to_dict(p)
        tI.append({(1,) + m: c for m, c in d.items()})
    for p in J:
        d = ring.to_dict(p)
        e = {}
        for m, c in d.items():
            e[(0,) + m] = c
            e[(1,) + m] = -c
        tJ.append(e)
    gb = buchberger(_ideal_elems(tI + tJ, n + 1), ELIM)
    out = []
    for g in gb.generators:
        if all(m[0] == 0 for _, m in g.terms):
            out.append({m[1:]: c for (_, m), c in g.terms.items()})
    return [ring.from_dict(d) for d in out]


def _to_fraction(c) -> Fraction:
    c = mpq(c)
    return Fraction(int(c.numerator), int(c.denominator))


def normalize_content(p: GradedPoly) -> GradedPoly:
    """Scale to integer coefficients with gcd 1 and a positive lex-leading coefficient."""
    if not p:
        return p
    fr = {m: _to_fraction(p.ctx.domain.to_rational(c)) for m, c in p.terms.items()}
    den = lcm(*(f.denominator for f in fr.values()))
    nums = [int(f * den) for f in fr.values()]
    g = gcd(*nums)
    lead = max(fr)  # lex order on exponent tuples follows the global variable order
    scale = Fraction(den, g)
    if fr[lead] < 0:
        scale = -scale
    return p * p.ctx.domain(scale)


def exact_divide(f: GradedPoly, g: GradedPoly) -> GradedPoly:
    """f / g, raising ValueError if g does not divide f."""
    ring = _as_ring([f, g])
    fd, gd = ring.to_dict(f), ring.to_dict(g)
    basis = buchberger(_ideal_elems([gd], ring.nvars), POT, track=True)
    rem, wit = normal_form(_ideal_elems([fd], ring.nvars)[0], basis)
    if rem:
        raise ValueError("not divisible")
    return ring.from_dict(wit[0])


def gcd_poly(*polys: GradedPoly) -> GradedPoly:
    """Greatest common divisor via f*g / lcm(f, g); units are reported as 1."""
    if not polys:
        raise ValueError("gcd of nothing")
    if all(not p for p in polys):
        raise ValueError("gcd of zero polynomials is undefined")
    acc = None
    for p in polys:
        if not p:
            continue
        if acc is None:
            acc = p
            continue
        inter = ideal_intersect([acc], [p])
        # the intersection of principal ideals is principal; its reduced basis has one element
        if len(inter) != 1:
            raise ArithmeticError("intersection of principal ideals is not principal")
        acc = exact_divide(acc * p, inter[0])
    acc = normalize_content(acc)
    if acc.is_constant():
        return acc.ctx.one()
    return acc
