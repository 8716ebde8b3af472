"""The U(2)-invariant matrix model on four real fields M1..M4.

Actions have the form S0 = sum_k (M1^2 + M2^2 + M3^2)^k g_k(M4).  Their
partial derivatives factor as dS0/dMi = Mi*A*D (i <= 3) and dS0/dM4 = B*D
with D the gcd of all four, which splits the model into three cases with
different anti-ghost towers.  This module builds such models, writes down the
closed-form generators and extended action known for them, and aligns the
engine's resolution with that closed form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations

from bvtate.groebner import exact_divide, gcd_poly
from bvtate.poly import Context, GradedPoly, GradedVariable, deriv
from bvtate.tate import (
    ExtendedSpace,
    Generator,
    ResolutionError,
    TateState,
    build_extended_space,
    tate_delta,
    transform_generators,
)

FIELDS = ("M1", "M2", "M3", "M4")
PARAMS = ("a1", "a2", "a3", "b")

# shipped sample actions, one per case
SAMPLES = {
    1: "M4^2",
    2: "(M1^2 + M2^2 + M3^2)^2 + M4^4",
    3: "2*(M1^2 + M2^2 + M3^2)*M4^2 + M4^4",
}
SAMPLE_G = {
    1: ["M4^2"],
    2: ["M4^4", "0", "1"],
    3: ["M4^4", "2*M4^2"],
}


def eps(i: int, j: int, k: int) -> int:
    """Levi-Civita symbol on {1, 2, 3} with eps(1, 2, 3) = 1."""
    if len({i, j, k}) < 3:
        return 0
    perm = (i, j, k)
    inv = sum(1 for a in range(3) for b in range(a + 1, 3) if perm[a] > perm[b])
    return -1 if inv % 2 else 1


def triples():
    return [p for p in permutations((1, 2, 3))]


def field_context(params=()) -> Context:
    return Context([GradedVariable(n, 0, 0) for n in FIELDS], params)


@dataclass
class U2ModelSpec:
    g: list[GradedPoly]
    S0: GradedPoly
    partials: list[GradedPoly]
    D: GradedPoly | None
    A: GradedPoly
    B: GradedPoly
    case: int
    notes: list[str] = field(default_factory=list)

    @property
    def ctx(self) -> Context:
        return self.S0.ctx


def _as_poly(x, ctx: Context) -> GradedPoly:
    from bvtate.exprio import parse_poly

    if isinstance(x, GradedPoly):
        return ctx.embed(x)
    return parse_poly(str(x), ctx)


def build_u2(g_coeffs, ctx: Context | None = None) -> U2ModelSpec:
    """S0 = sum_k rho^k g_k(M4), rho = M1^2 + M2^2 + M3^2, with D, A, B and the case."""
    ctx = ctx or field_context()
    g = [_as_poly(x, ctx) for x in g_coeffs]
    if not any(g):
        raise ValueError("at least one g_k must be nonzero")
    for gk in g:
        if gk.variables_used() - {"M4"}:
            raise ValueError("each g_k must be a polynomial in M4 alone")
    M1, M2, M3, M4 = ctx.vars(*FIELDS)
    rho = M1**2 + M2**2 + M3**2
    S0 = ctx.zero()
    for k, gk in enumerate(g):
        S0 = S0 + rho**k * gk
    spec = classify(S0)
    spec.g = g
    return spec


def classify(S0: GradedPoly) -> U2ModelSpec:
    """Derived data for an action in the four fields: partials, D, A, B and the case tag."""
    ctx = S0.ctx
    partials = [deriv(S0, n) for n in FIELDS]
    notes = []
    if not any(partials[:3]):
        case = 1
    D = gcd_poly(*partials) if any(partials) else None
    if any(partials[:3]):
        case = 2 if D.is_constant() else 3
    Mv = ctx.vars(*FIELDS)
    if any(partials[:3]):
        A = exact_divide(partials[0], Mv[0] * D)
    else:
        A = ctx.zero()
    B = exact_divide(partials[3], D) if partials[3] else ctx.zero()
    return U2ModelSpec([], S0, partials, D, A, B, case, notes)


@dataclass
class RelationReport:
    residuals: dict[str, GradedPoly]

    @property
    def holds(self) -> bool:
        return not any(self.residuals.values())


def verify_relations(spec_or_S0) -> RelationReport:
    """Mi * d_j S0 = Mj * d_i S0 for the three pairs among M1, M2, M3."""
    S0 = spec_or_S0.S0 if isinstance(spec_or_S0, U2ModelSpec) else spec_or_S0
    ctx = S0.ctx
    d = {n: deriv(S0, n) for n in FIELDS}
    out = {}
    for i, j in ((1, 2), (1, 3), (2, 3)):
        Mi, Mj = ctx.var(f"M{i}"), ctx.var(f"M{j}")
        out[f"M{i}*d{j} - M{j}*d{i}"] = Mi * d[f"M{j}"] - Mj * d[f"M{i}"]
    return RelationReport(out)


# ---------------------------------------------------------------------------
# closed-form rosters


ROSTERS = {
    1: {-1: 4, 0: 4},
    2: {-3: 1, -2: 3, -1: 4, 0: 4, 1: 3, 2: 1},
    3: {-4: 1, -3: 4, -2: 6, -1: 4, 0: 4, 1: 6, 2: 4, 3: 1},
}


@dataclass
class ExpectedExtension:
    case: int
    strata: dict[int, list[str]]

    def sizes(self) -> dict[int, int]:
        return {d: len(v) for d, v in sorted(self.strata.items())}

    @property
    def reducibility_level(self) -> int:
        pos = [d for d in self.strata if d > 0]
        return max(pos) - 1 if pos else -1


def expected_extension(case: int) -> ExpectedExtension:
    names = {
        1: {-1: ["Ms1", "Ms2", "Ms3", "Ms4"], 0: list(FIELDS)},
        2: {
            -3: ["Es"],
            -2: ["Cs1", "Cs2", "Cs3"],
            -1: ["Ms1", "Ms2", "Ms3", "Ms4"],
            0: list(FIELDS),
            1: ["C1", "C2", "C3"],
            2: ["E"],
        },
        3: {
            -4: ["Ks"],
            -3: [f"Es{i}" for i in range(1, 5)],
            -2: [f"Cs{i}" for i in range(1, 7)],
            -1: ["Ms1", "Ms2", "Ms3", "Ms4"],
            0: list(FIELDS),
            1: [f"C{i}" for i in range(1, 7)],
            2: [f"E{i}" for i in range(1, 5)],
            3: ["K"],
        },
    }
    if case not in names:
        raise ValueError("case must be 1, 2 or 3")
    return ExpectedExtension(case, dict(sorted(names[case].items())))


def staged_context(case: int, params=()) -> Context:
    """The resolution context M, Ms, Cs, Es, Ks for the given case (no ghosts)."""
    strata = expected_extension(case).strata
    variables = [GradedVariable(n, 0, 0, "field", f"Ms{n[1:]}") for n in FIELDS]
    variables += [GradedVariable(f"Ms{i}", -1, 1, "antifield", f"M{i}") for i in range(1, 5)]
    for d in (-2, -3, -4):
        for n in strata.get(d, []):
            variables.append(GradedVariable(n, d, (-d) % 2, "antighost"))
    return Context(variables, params)


@dataclass
class ClosedFormGenerators:
    case: int
    cocycles: dict[str, GradedPoly]  # named cocycles (beta_i, gamma_p, xi, alpha_l)
    state: TateState  # resolution with these cocycles as differentials
    flags: list[str]  # inconsistencies found while checking the printed formulas


def _beta(ctx: Context, i: int) -> GradedPoly:
    out = ctx.zero()
    for j in (1, 2, 3):
        for k in (1, 2, 3):
            e = eps(i, j, k)
            if e:
                out = out + ctx.var(f"M{j}") * ctx.var(f"Ms{k}") * e
    return out


def closed_form_generators(spec: U2ModelSpec, gamma_sign: int = -1) -> ClosedFormGenerators:
    """Closed-form cocycles for each case, assembled into a resolution.

    In the non-coprime case the differential of the last three degree -2
    generators is ``gamma_sign * gamma_p``.  The printed formulas for the
    degree -3 cocycles are only closed for ``gamma_sign = -1``; with ``+1``
    the mismatch is recorded in ``flags``.
    """
    case = spec.case
    ctx = staged_context(case, spec.ctx.params)
    S0 = ctx.embed(spec.S0)
    A, B = ctx.embed(spec.A), ctx.embed(spec.B)
    M = {i: ctx.var(f"M{i}") for i in range(1, 5)}
    named: dict[str, GradedPoly] = {}
    table: list[tuple[str, GradedPoly]] = [(f"Ms{a}", ctx.embed(spec.partials[a - 1])) for a in range(1, 5)]
    flags = []
    if case >= 2:
        for i in (1, 2, 3):
            named[f"beta{i}"] = _beta(ctx, i)
    if case == 2:
        for i in (1, 2, 3):
            table.append((f"Cs{i}", named[f"beta{i}"]))
        xi = sum((M[i] * ctx.var(f"Cs{i}") for i in (1, 2, 3)), ctx.zero())
        named["xi"] = xi
        table.append(("Es", xi))
    if case == 3:
        for p in (1, 2, 3):
            named[f"gamma{p}"] = B * ctx.var(f"Ms{p}") - M[p] * A * ctx.var("Ms4")
        for i in (1, 2, 3):
            table.append((f"Cs{i}", named[f"beta{i}"]))
        for p in (1, 2, 3):
            table.append((f"Cs{p + 3}", named[f"gamma{p}"] * gamma_sign))
        C = {j: ctx.var(f"Cs{j}") for j in range(1, 7)}
        named["alpha1"] = sum((M[i] * C[i] for i in (1, 2, 3)), ctx.zero())
        for i in (1, 2, 3):
            a = -B * C[i]
            for j in (1, 2, 3):
                for k in (1, 2, 3):
                    e = eps(i, j, k)
                    if e:
                        a = a - M[j] * C[k + 3] * e
            named[f"alpha{i + 1}"] = a
        for l in range(1, 5):
            table.append((f"Es{l}", named[f"alpha{l}"]))
        named["xi"] = B * ctx.var("Es1") + sum((M[i] * ctx.var(f"Es{i + 1}") for i in (1, 2, 3)), ctx.zero())
        table.append(("Ks", named["xi"]))
    gens = [Generator(n, ctx.variable(n).ghost_degree, True, img) for n, img in table]
    state = TateState(ctx, S0, gens, status="terminated")
    for name, c in named.items():
        if tate_delta(state, c):
            flags.append(f"{name} is not a cocycle (gamma sign {gamma_sign:+d})")
    return ClosedFormGenerators(case, named, state, flags)


# ---------------------------------------------------------------------------
# aligning the engine's resolution to the closed form


class AlignmentError(ValueError):
    pass


def _scalar_ratio(p: GradedPoly, q: GradedPoly):
    """c with p = c * q, or None."""
    if not p or not q or set(p.terms) != set(q.terms):
        return None
    m = next(iter(q.terms))
    c = p.terms[m] / q.terms[m]
    for mono, v in q.terms.items():
        if p.terms[mono] != v * c:
            return None
    return c


def align_generators(engine: TateState, target: TateState) -> TateState:
    """Permute and rescale engine generators, degree by degree, to match ``target``'s table."""
    state = engine
    for depth in range(2, engine.depth + 1):
        ours = state.roster(depth)
        theirs = target.roster(depth)
        if len(ours) != len(theirs):
            raise AlignmentError(f"degree {-depth}: {len(ours)} vs {len(theirs)} generators")
        mapping = {}
        used = set()
        for g in ours:
            mine = target.ctx.embed(g.delta) if _names_subset(g.delta, target.ctx) else None
            match = None
            for t in theirs:
                if t.name in used or mine is None:
                    continue
                c = _scalar_ratio(mine, t.delta)
                if c is not None:
                    match = (t.name, c)
                    break
            if match is None:
                raise AlignmentError(f"no closed-form generator proportional to delta({g.name})")
            used.add(match[0])
            # new generator = old / c has exactly the closed-form differential
            mapping[match[0]] = (g.name, state.ctx.domain(1) / _to_domain(state, match[1]))
        state = transform_generators(state, mapping)
    return state


def _names_subset(p: GradedPoly, ctx: Context) -> bool:
    return p.variables_used() <= set(ctx.names)


def _to_domain(state: TateState, c):
    if hasattr(c, "field"):
        return state.ctx.domain.to_rational(c) if not state.ctx.params else c
    return state.ctx.domain(c)


def alpha_normalize(state: TateState) -> TateState:
    """Rescale the coprime-case generators: Cs_k -> -a_k Cs_k and Es -> -b a1 a2 a3 Es.

    In this frame the linear action carries the parameters a1, a2, a3, b of
    the general extended action.
    """
    if [g.name for g in state.roster(2)] != ["Cs1", "Cs2", "Cs3"] or [g.name for g in state.roster(3)] != ["Es"]:
        raise ResolutionError("alpha normalization needs the coprime-case roster")
    ctx = state.ctx.extend(params=PARAMS)
    a1, a2, a3, b = (ctx.domain.param(p) for p in PARAMS)
    mapping = {
        "Cs1": ("Cs1", -a1),
        "Cs2": ("Cs2", -a2),
        "Cs3": ("Cs3", -a3),
        "Es": ("Es", -b * a1 * a2 * a3),
    }
    return transform_generators(state, mapping, params=PARAMS)


def case2_space(spec: U2ModelSpec, engine: TateState | None = None) -> ExtendedSpace:
    """Extended space of a coprime-case model in the alpha-normalized closed-form frame."""
    if spec.case != 2:
        raise ValueError("the closed-form action is only known in the coprime case")
    frame = closed_form_generators(spec).state
    if engine is not None:
        frame = align_generators(engine, frame)
    return build_extended_space(alpha_normalize(frame))


def extended_context_case2() -> Context:
    """The extended context of the coprime case, with parameters a1, a2, a3, b."""
    variables = [GradedVariable(n, 0, 0, "field", f"Ms{n[1:]}") for n in FIELDS]
    variables += [GradedVariable(f"Ms{i}", -1, 1, "antifield", f"M{i}") for i in range(1, 5)]
    variables += [GradedVariable(f"Cs{i}", -2, 0, "antighost", f"C{i}") for i in (1, 2, 3)]
    variables += [GradedVariable("Es", -3, 1, "antighost", "E")]
    variables += [GradedVariable(f"C{i}", 1, 1, "ghost", f"Cs{i}") for i in (1, 2, 3)]
    variables += [GradedVariable("E", 2, 0, "ghost", "Es")]
    return Context(variables, PARAMS)


def _parts(ctx: Context):
    a = {i: ctx.param(f"a{i}") for i in (1, 2, 3)}
    return a, ctx.param("b")


def s_le1(spec: U2ModelSpec, ctx: Context | None = None) -> GradedPoly:
    """The action linear in the ghosts, with parameters a_i and b."""
    ctx = ctx or extended_context_case2()
    a, b = _parts(ctx)
    v = ctx.var
    out = ctx.embed(spec.S0)
    for i, j, k in triples():
        out = out + v(f"Ms{i}") * v(f"M{j}") * v(f"C{k}") * a[k] * eps(i, j, k)
    for i, j, k in triples():
        # ordered pairs (j, k) of the two other indices: each contributes one half
        out = out + v(f"Cs{i}") * v(f"M{i}") * v("E") * (a[j] * a[k] * b / 2)
    return out


def closed_form_action(spec: U2ModelSpec, T, ctx: Context | None = None) -> GradedPoly:
    """The general coprime-case solution, linear in anti-fields, quadratic in ghosts."""
    if spec.case != 2:
        raise ValueError("the closed-form action needs the coprime case")
    ctx = ctx or extended_context_case2()
    T = _as_poly(T, ctx)
    a, b = _parts(ctx)
    v = ctx.var
    out = s_le1(spec, ctx)
    for i, j, k in triples():
        out = out + v(f"Cs{i}") * v(f"C{j}") * v(f"C{k}") * (a[j] * a[k] / (2 * a[i]) * eps(i, j, k))
    if T:
        for i in (1, 2, 3):
            inner = ctx.zero()
            for x, y, z in triples():
                inner = inner + v(f"M{x}") * v(f"C{y}") * v(f"C{z}") * (a[y] * a[z] / (2 * a[i]) * eps(x, y, z))
            out = out + v(f"Cs{i}") * v(f"M{i}") * T * inner
    return out


def first_obstruction_closed_form(spec: U2ModelSpec, ctx: Context | None = None) -> GradedPoly:
    """2 [sum a_i a_j M_i Ms_j C_i C_j + sum b eps_ijk a_j a_k^2 M_j C_k Cs_i E]."""
    ctx = ctx or extended_context_case2()
    a, b = _parts(ctx)
    v = ctx.var
    out = ctx.zero()
    for i in (1, 2, 3):
        for j in (1, 2, 3):
            out = out + v(f"M{i}") * v(f"Ms{j}") * v(f"C{i}") * v(f"C{j}") * (a[i] * a[j])
    for i, j, k in triples():
        out = out + v(f"M{j}") * v(f"C{k}") * v(f"Cs{i}") * v("E") * (b * a[j] * a[k] ** 2 * eps(i, j, k))
    return out * 2


def p_family(T, ctx: Context | None = None, P=None) -> GradedPoly:
    """The free part of the quadratic correction for polynomials P_k (default P_k = M_k T).

    g_i^{ij} = eps_ijk a_j M_i P_k, g_j^{ij} = eps_ijk a_i M_j P_k and
    g_k^{ij} = eps_ijk (a_i a_j / a_k) M_k P_k, summed as g * Cs * C_i C_j over i < j.
    """
    ctx = ctx or extended_context_case2()
    a, _ = _parts(ctx)
    v = ctx.var
    if P is None:
        T = _as_poly(T, ctx)
        P = {k: v(f"M{k}") * T for k in (1, 2, 3)}
    else:
        P = {k: _as_poly(p, ctx) for k, p in P.items()}
    out = ctx.zero()
    for i, j in ((1, 2), (1, 3), (2, 3)):
        k = 6 - i - j
        e = eps(i, j, k)
        g = (
            v(f"Cs{i}") * v(f"M{i}") * (a[j] * e)
            + v(f"Cs{j}") * v(f"M{j}") * (a[i] * e)
            + v(f"Cs{k}") * v(f"M{k}") * (a[i] * a[j] / a[k] * e)
        )
        out = out + g * P[k] * v(f"C{i}") * v(f"C{j}")
    return out
