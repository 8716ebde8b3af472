"""Solving the classical master equation order by order in the positive degree.

Starting from the linear action, each step computes the obstruction {S, S}
modulo F^{q+2}, splits its positive-degree-(q+1) part by ghost monomial, and
lifts every coefficient through the Tate differential: (delta (x) Id) nu =
-1/2 * obstruction.  Each lift is a membership problem with witness in one
stratum of the resolution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from gmpy2 import mpq

from bvtate.antibracket import (
    bracket,
    delta_id,
    in_filtration,
    in_I_module,
    positive_part,
    term_split,
    truncate_filtration,
)
from bvtate.groebner import POT, FreeModuleElement, buchberger, normal_form
from bvtate.poly import DegreeError, GradedPoly
from bvtate.tate import ExtendedSpace, NotACocycle, stratum, tate_delta


class NotLiftable(ValueError):
    """The obstruction is a cocycle but not a boundary in the available strata."""

    def __init__(self, message, q=None, ghost_monomial=None, certificate=None, trace=None):
        super().__init__(message)
        self.q = q
        self.ghost_monomial = ghost_monomial
        self.certificate = certificate
        self.trace = trace or []


class ContractViolation(AssertionError):
    pass


@dataclass
class StepRecord:
    q: int
    obstruction: GradedPoly
    nu: GradedPoly
    injected: GradedPoly | None
    tiers: dict = field(default_factory=dict)  # ghost monomial text -> tier used
    residual_zero: bool = False


@dataclass
class ExtendedTheory:
    space: ExtendedSpace
    action: GradedPoly
    trace: list[StepRecord]
    status: str  # success | max_q
    residual: GradedPoly

    @property
    def success(self) -> bool:
        return self.status == "success"


def linear_action(space: ExtendedSpace, tate=None) -> GradedPoly:
    """S_lin = S0 + sum over anti-ghosts A of delta(A) * ghost(A)."""
    tate = tate or space.tate
    ctx = space.ctx
    out = ctx.embed(tate.S0)
    images = tate.images_in(ctx)
    for a, g in zip(space.antighosts, space.ghosts):
        img = images.get(a)
        if img:
            out = out + img * ctx.var(g)
    return out


def obstruction(S: GradedPoly, q: int) -> GradedPoly:
    """{S, S} with every term of positive degree >= q + 2 dropped."""
    if S and S.ghost_degree() != 0:
        raise DegreeError("the action must have ghost degree 0")
    return truncate_filtration(bracket(S, S), q + 2)


@dataclass
class CMECheck:
    residual: GradedPoly

    @property
    def holds(self) -> bool:
        return not self.residual


def check_cme(S: GradedPoly) -> CMECheck:
    if S and S.ghost_degree() != 0:
        raise DegreeError("the action must have ghost degree 0")
    return CMECheck(bracket(S, S))


# ---------------------------------------------------------------------------
# lifting


def _split_by_ghosts(space: ExtendedSpace, phi: GradedPoly) -> dict[tuple, GradedPoly]:
    """phi = sum_g a_g * g with g a ghost monomial; returns {g: a_g} (a_g in the Tate context)."""
    tctx = space.tate.ctx
    n = tctx.nvars
    ext = space.ctx
    if ext.names[:n] != tctx.names:
        raise ValueError("the Tate context must be a prefix of the extended context")
    parts: dict[tuple, dict] = {}
    for m, c in phi.terms.items():
        g = m[n:]
        parts.setdefault(g, {})[m[:n]] = c
    return {g: GradedPoly(tctx, t) for g, t in parts.items()}


def _ghost_poly(space: ExtendedSpace, g: tuple) -> GradedPoly:
    n = space.tate.ctx.nvars
    return GradedPoly(space.ctx, {(0,) * n + g: space.ctx.domain.one})


def _lift_in_prefix(space: ExtendedSpace, a: GradedPoly) -> GradedPoly:
    ext = space.ctx
    pad = (0,) * (ext.nvars - a.ctx.nvars)
    return GradedPoly(ext, {m + pad: c for m, c in a.terms.items()})


class _Lifter:
    """Cached membership machinery for delta: A_{-(d)} -> A_{-(d-1)}, by tier."""

    def __init__(self, tate):
        self.tate = tate
        self.cache = {}

    def basis(self, depth: int, tier: int):
        key = (depth, tier)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        src, dst = stratum(self.tate, depth), stratum(self.tate, depth - 1)
        if tier == 1:
            slots = [k for k, m in enumerate(src.slots) if sum(m) == 1]
        else:
            slots = list(range(len(src)))
        gens = []
        for s in slots:
            img = tate_delta(self.tate, src.slot_poly(s))
            gens.append(dst.to_module(img) if img else FreeModuleElement(len(dst), dst.ring.nvars, {}))
        basis = buchberger(gens, POT, track=True) if gens else None
        hit = (slots, basis, src, dst)
        self.cache[key] = hit
        return hit

    def lift(self, a: GradedPoly, tiers=(1, 2)):
        """Some b with delta(b) = a, or (None, remainder certificate)."""
        depth = -a.ghost_degree() + 1
        last_rem = None
        for tier in tiers:
            slots, basis, src, dst = self.basis(depth, tier)
            v = dst.to_module(a)
            if basis is None:
                last_rem = a
                continue
            rem, wit = normal_form(v, basis)
            if rem:
                last_rem = dst.from_module(rem)
                continue
            acc = FreeModuleElement(len(src), src.ring.nvars, {})
            for s, w in zip(slots, wit):
                if w:
                    for mono, c in w.items():
                        acc.terms[(s, mono)] = acc.terms.get((s, mono), 0) + c
            acc.terms = {t: c for t, c in acc.terms.items() if c}
            return src.from_module(acc), tier
        return None, last_rem


def _check_kernel_element(space, nu_h: GradedPoly, q: int):
    if not nu_h:
        return
    if nu_h.ghost_degree() != 0:
        raise ValueError("injected element must have ghost degree 0")
    if not in_I_module(nu_h, 2, "at_least") or not in_filtration(nu_h, q + 1):
        raise ValueError("injected element must lie in I^{>=2} and F^{q+1}")
    if truncate_filtration(delta_id(nu_h, space.tate), q + 2):
        raise ValueError("injected element is not (delta (x) Id)-closed modulo F^{q+2}")


def solve_correction(obstr: GradedPoly, space: ExtendedSpace, q: int, injection=None, lifter=None):
    """nu in I^{>=2} cap F^{q+1} cap O^0 with (delta (x) Id) nu = -1/2 obstr mod F^{q+2}.

    ``injection`` is an optional kernel element added to the default solution
    (the normal-form witness with every free direction set to zero).
    Returns (nu, record of tiers used).
    """
    tate = space.tate
    obstr = space.ctx.embed(obstr)
    if not in_filtration(obstr, q + 1) or not in_I_module(obstr, 2, "at_least"):
        raise NotACocycle(f"obstruction at q={q} is not in I^(>=2) cap F^{q + 1}")
    if truncate_filtration(delta_id(obstr, tate), q + 2):
        raise NotACocycle(f"obstruction at q={q} is not closed under (delta (x) Id)")
    target = positive_part(obstr, q + 1) * mpq(-1, 2)
    lifter = lifter or _Lifter(tate)
    nu = space.ctx.zero()
    tiers = {}
    for g, a in sorted(_split_by_ghosts(space, target).items(), reverse=True):
        gpoly = _ghost_poly(space, g)
        b, info = lifter.lift(a)
        if b is None:
            raise NotLiftable(
                f"obstruction coefficient of {gpoly} is not a boundary",
                q=q,
                ghost_monomial=gpoly,
                certificate=_lift_in_prefix(space, info) * gpoly,
            )
        tiers[str(gpoly)] = info
        nu = nu + _lift_in_prefix(space, b) * gpoly
    if injection is not None:
        nu_h = space.ctx.embed(injection)
        _check_kernel_element(space, nu_h, q)
        nu = nu + nu_h
    # the lift is exact on the positive-degree-(q+1) part
    if positive_part(delta_id(nu, tate), q + 1) != target:
        raise ContractViolation("lift does not reproduce the obstruction")
    return nu, tiers


def check_contract(S: GradedPoly, S_lin: GradedPoly, S0: GradedPoly, q: int) -> list[str]:
    """The three inductive properties of S_{<=q}; returns the violated ones."""
    bad = []
    ctx = S.ctx
    bos = [ctx.names[i] for i in ctx.field_indices()]
    if S.restrict_to(bos) != ctx.embed(S0):
        bad.append("restriction to X0 differs from S0")
    if not in_I_module(S - S_lin, 2, "at_least"):
        bad.append("S - S_lin not in I^(>=2)")
    bb = bracket(S, S)
    if not (in_I_module(bb, 2, "at_least") and in_filtration(bb, q + 1)):
        bad.append(f"{{S,S}} not in I^(>=2) cap F^{q + 1}")
    return bad


def extend_action(space: ExtendedSpace, max_q: int = 8, injection=None, check: bool = True) -> ExtendedTheory:
    """Iterate S_{<=q+1} = S_{<=q} + nu until {S, S} = 0 or q exceeds max_q.

    ``injection`` maps q to an extra kernel element (or is a callable of q
    returning one, or None).
    """
    if max_q < 1:
        raise ValueError("max_q must be at least 1")
    S_lin = linear_action(space)
    S = S_lin
    trace: list[StepRecord] = []
    lifter = _Lifter(space.tate)
    q = 1
    while True:
        full = bracket(S, S)
        if not full:
            return ExtendedTheory(space, S, trace, "success", full)
        if q > max_q:
            return ExtendedTheory(space, S, trace, "max_q", full)
        if check:
            bad = check_contract(S, S_lin, space.tate.S0, q)
            if bad:
                raise ContractViolation(f"q={q}: " + "; ".join(bad))
        ob = truncate_filtration(full, q + 2)
        extra = injection(q) if callable(injection) else (injection or {}).get(q)
        try:
            nu, tiers = solve_correction(ob, space, q, extra, lifter)
        except NotLiftable as exc:
            exc.trace = trace
            raise
        injected = space.ctx.embed(extra) if extra is not None else None
        S = S + nu
        trace.append(StepRecord(q, ob, nu, injected, tiers, not bracket(S, S)))
        q += 1


# ---------------------------------------------------------------------------
# gauge transformations


@dataclass
class GaugeAlgebraElement:
    g: GradedPoly

    def __post_init__(self):
        if self.g and self.g.ghost_degree() != -1:
            raise ValueError("a gauge algebra element has ghost degree -1")
        if not in_I_module(self.g, 2, "at_least"):
            raise ValueError("a gauge algebra element lies in I^(>=2)")


@dataclass
class GaugeResult:
    action: GradedPoly
    exact: bool
    terms_used: int

    @property
    def label(self) -> str:
        return "exact" if self.exact else "truncated"


def gauge_transform(g: GaugeAlgebraElement, S: GradedPoly, truncation_order: int = 6) -> GaugeResult:
    """exp(ad_g) S = sum_n ad_g^n(S) / n!, stopping early once a term vanishes."""
    if truncation_order < 1:
        raise ValueError("truncation order must be positive")
    out = S
    term = S
    for n in range(1, truncation_order + 1):
        term = bracket(g.g, term) * mpq(1, n)
        if not term:
            return GaugeResult(out, True, n - 1)
        out = out + term
    # one more application decides whether the series happened to stop here
    nxt = bracket(g.g, term)
    return GaugeResult(out, not nxt, truncation_order)


def positive_degree_profile(phi: GradedPoly) -> dict[int, int]:
    """Number of terms per positive degree (diagnostics for reports)."""
    out: dict[int, int] = {}
    for m in phi.terms:
        p = term_split(phi.ctx, m)[1]
        out[p] = out.get(p, 0) + 1
    return dict(sorted(out.items()))

