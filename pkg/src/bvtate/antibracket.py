"""The antibracket, the BRST differential, and positive/negative degree bookkeeping.

Closed form used here, summing over pairs (phi, phi*) with phi of degree >= 0:

    {a, b} = sum  (a d_r/d phi)(d_l/d phi* b) - (a d_r/d phi*)(d_l/d phi b)

so that {phi, phi*} = 1 and {phi*, phi} = -1.  The axiom suite in the tests
(graded symmetry, Leibniz rule, Jacobi identity) is what pins this choice.
"""

from __future__ import annotations

from dataclasses import dataclass

from bvtate.poly import Context, DegreeError, GradedPoly, deriv


class UnpairedVariable(ValueError):
    pass


class MixedStratum(ValueError):
    pass


@dataclass(frozen=True)
class PairingTable:
    pairs: tuple[tuple[str, str], ...]  # (field or ghost, its anti-partner)

    def partner(self, name: str) -> str:
        for a, b in self.pairs:
            if a == name:
                return b
            if b == name:
                return a
        raise KeyError(name)


_PAIRINGS: dict = {}


def pairing_table(ctx: Context) -> PairingTable:
    table = _PAIRINGS.get(ctx)
    if table is not None:
        return table
    pairs = []
    for v in ctx.variables:
        if v.partner is None or v.partner not in ctx.index:
            raise UnpairedVariable(f"variable {v.name} has no partner in the context")
        w = ctx.variable(v.partner)
        if w.partner != v.name:
            raise UnpairedVariable(f"pairing {v.name} <-> {w.name} is not involutive")
        if v.ghost_degree >= 0:
            pairs.append((v.name, w.name))
    table = PairingTable(tuple(pairs))
    _PAIRINGS[ctx] = table
    return table


def bracket(a: GradedPoly, b: GradedPoly) -> GradedPoly:
    if a.ctx != b.ctx:
        b = a.ctx.embed(b)
    table = pairing_table(a.ctx)
    out = a.ctx.zero()
    if not a or not b:
        return out
    ua, ub = a.variables_used(), b.variables_used()
    for phi, star in table.pairs:
        if phi in ua and star in ub:
            out = out + deriv(a, phi, "right") * deriv(b, star, "left")
        if star in ua and phi in ub:
            out = out - deriv(a, star, "right") * deriv(b, phi, "left")
    return out


def brst_diff(S: GradedPoly, phi: GradedPoly) -> GradedPoly:
    """d_S(phi) = {S, phi}."""
    if S and S.ghost_degree() != 0:
        raise DegreeError("the action must have ghost degree 0")
    return bracket(S, phi)


# ---------------------------------------------------------------------------
# degree split, filtration, ghost-count strata


@dataclass(frozen=True)
class DegreeSplit:
    deg_n: int
    deg_p: int


def term_split(ctx: Context, m: tuple) -> tuple[int, int]:
    n = p = 0
    for e, d in zip(m, ctx.degrees):
        if e:
            if d > 0:
                p += e * d
            else:
                n += e * d
    return n, p


def ghost_count(ctx: Context, m: tuple) -> int:
    return sum(e for e, d in zip(m, ctx.degrees) if e and d > 0)


def degree_split(phi: GradedPoly) -> DegreeSplit:
    if not phi:
        raise DegreeError("degree split of the zero polynomial is undefined")
    splits = [term_split(phi.ctx, m) for m in phi.terms]
    return DegreeSplit(max(n for n, _ in splits), min(p for _, p in splits))


def in_filtration(phi: GradedPoly, r: int) -> bool:
    """phi in F^r: zero, or every term has positive degree >= r."""
    return all(term_split(phi.ctx, m)[1] >= r for m in phi.terms)


def truncate_filtration(phi: GradedPoly, r: int) -> GradedPoly:
    """Projection dropping every term in F^r (i.e. phi mod F^r)."""
    return phi.filter_terms(lambda m: term_split(phi.ctx, m)[1] < r)


def positive_part(phi: GradedPoly, r: int) -> GradedPoly:
    """The terms of positive degree exactly r."""
    return phi.filter_terms(lambda m: term_split(phi.ctx, m)[1] == r)


def in_I_module(phi: GradedPoly, q: int, mode: str = "exact") -> bool:
    if mode not in ("exact", "at_least"):
        raise ValueError("mode must be 'exact' or 'at_least'")
    ctx = phi.ctx
    if mode == "exact":
        return all(ghost_count(ctx, m) == q for m in phi.terms)
    return all(ghost_count(ctx, m) >= q for m in phi.terms)


def g_complex_diff(phi: GradedPoly, tate) -> GradedPoly:
    """(delta (x) Id): the Tate differential on the non-positive factors only."""
    from bvtate.tate import tate_delta

    if phi:
        ps = {term_split(phi.ctx, m)[1] for m in phi.terms}
        if len(ps) > 1:
            raise MixedStratum(f"terms of positive degrees {sorted(ps)} mixed")
    return tate_delta(tate, phi)


def delta_id(phi: GradedPoly, tate) -> GradedPoly:
    """(delta (x) Id) without the single-stratum check."""
    from bvtate.tate import tate_delta

    return tate_delta(tate, phi)
