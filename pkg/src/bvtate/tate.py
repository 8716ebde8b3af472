"""Tate resolution of the Jacobian ring, type-beta selection, and the extended space.

Every stratum A_{-k} of the resolution algebra is a free module over the
field polynomial ring with basis the monomials of total degree -k in the
adjoined generators.  Fields come first in the variable order, so a term
splits into (field monomial) * (generator monomial) without a sign, and
homology questions become syzygy and membership problems in
:mod:`bvtate.groebner`.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from bvtate.groebner import (
    POT,
    BosonicRing,
    FreeModuleElement,
    ModuleBasis,
    buchberger,
    normal_form,
    prune_redundant,
    reduces_to_zero,
    syzygies,
)
from bvtate.poly import Context, GradedPoly, GradedVariable, deriv


class NotACocycle(ValueError):
    pass


class ResolutionError(ValueError):
    pass


def antighost_name(depth: int, index: int, count: int) -> str:
    """Name of the index-th (1-based) generator of degree -depth, depth >= 2."""
    letter = {2: "C", 3: "E", 4: "K"}.get(depth)
    if letter is None:
        return f"G{depth}s_{index}"
    return f"{letter}s" if count == 1 else f"{letter}s{index}"


def antifield_name(field_name: str) -> str:
    """M1 -> Ms1: the suffix "s" goes before any trailing index digits."""
    stem = field_name.rstrip("0123456789")
    return f"{stem}s{field_name[len(stem):]}"


def ghost_name(antighost: str) -> str:
    if antighost.startswith("G") and "s_" in antighost:
        return antighost.replace("s_", "_", 1)
    head, _, tail = antighost.partition("s")
    return head + tail


@dataclass(frozen=True)
class Generator:
    name: str
    degree: int
    beta: bool
    delta: GradedPoly

    @property
    def depth(self) -> int:
        return -self.degree


@dataclass
class TateState:
    ctx: Context
    S0: GradedPoly
    generators: list[Generator]
    cap: int = 8
    status: str = "open"  # open | terminated | cap
    history: dict = field(default_factory=dict)  # depth -> cocycles killed at that depth
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def delta(self) -> dict[str, GradedPoly]:
        return {g.name: g.delta for g in self.generators}

    @property
    def depth(self) -> int:
        return max((g.depth for g in self.generators), default=0)

    @property
    def fields(self) -> tuple[str, ...]:
        return tuple(self.ctx.names[i] for i in self.ctx.field_indices())

    @property
    def terminated(self) -> bool:
        return self.status == "terminated"

    def roster(self, depth: int) -> list[Generator]:
        return [g for g in self.generators if g.depth == depth]

    def roster_sizes(self) -> tuple[int, ...]:
        return tuple(len(self.roster(d)) for d in range(1, self.depth + 1))

    def generator(self, name: str) -> Generator:
        for g in self.generators:
            if g.name == name:
                return g
        raise KeyError(name)

    def ring(self) -> BosonicRing:
        r = self._cache.get("ring")
        if r is None:
            r = self._cache["ring"] = BosonicRing(self.ctx)
        return r

    def images_in(self, ctx: Context) -> dict[str, GradedPoly]:
        """The differential table embedded into ``ctx`` (cached per context)."""
        key = ("images", ctx)
        out = self._cache.get(key)
        if out is None:
            out = {g.name: ctx.embed(g.delta) for g in self.generators if g.delta}
            self._cache[key] = out
        return out


def tate_delta(state: TateState, p: GradedPoly) -> GradedPoly:
    """The Tate differential, extended as an odd derivation that kills fields and ghosts."""
    images = state.images_in(p.ctx)
    out = p.ctx.zero()
    used = p.variables_used()
    for name, img in images.items():
        if name in used:
            out = out + img * deriv(p, name, "left")
    return out


# ---------------------------------------------------------------------------
# construction


def _check_bosonic(S0: GradedPoly):
    for m in S0.terms:
        for i, e in enumerate(m):
            if e and S0.ctx.degrees[i] != 0:
                raise ResolutionError("S0 must be a polynomial in the degree-0 fields")


def init_resolution(S0: GradedPoly, ctx: Context | None = None, cap: int = 8) -> TateState:
    """Degree -1: one anti-field per field with delta(x*) = dS0/dx."""
    ctx = ctx or S0.ctx
    S0 = ctx.embed(S0)
    _check_bosonic(S0)
    fields = [v for v in ctx.variables if v.ghost_degree == 0]
    if len(fields) != ctx.nvars:
        raise ResolutionError("the starting context must contain only degree-0 fields")
    names = [antifield_name(f.name) for f in fields]
    new_fields = [replace(f, partner=n, role="field") for f, n in zip(fields, names)]
    anti = [GradedVariable(n, -1, 1, "antifield", f.name) for f, n in zip(fields, names)]
    tctx = Context(new_fields + anti, ctx.params)
    S0 = tctx.embed(S0)
    gens = [
        Generator(n, -1, True, tctx.embed(deriv(S0, f.name)))
        for f, n in zip(fields, names)
    ]
    return TateState(tctx, S0, gens, cap=cap)


def adjoin_step(state: TateState, cocycles, check: bool = True) -> TateState:
    """Adjoin one generator per cocycle, one degree below the cocycles' degree."""
    cocycles = [state.ctx.embed(c) for c in cocycles]
    if not cocycles:
        return replace(state, status="terminated")
    degs = set()
    for c in cocycles:
        if not c:
            raise NotACocycle("cannot adjoin a generator for the zero cocycle")
        degs.add(c.ghost_degree())
        if check and tate_delta(state, c):
            raise NotACocycle(f"delta({c}) is not zero")
    if len(degs) != 1:
        raise ResolutionError("cocycles of mixed degree")
    depth = 1 - degs.pop()
    if depth < 2:
        raise ResolutionError("cocycles must have negative degree")
    if state.roster(depth):
        raise ResolutionError(f"degree {-depth} already has generators")
    n = len(cocycles)
    newvars = [
        GradedVariable(antighost_name(depth, i + 1, n), -depth, depth % 2, "antighost")
        for i in range(n)
    ]
    ctx = state.ctx.extend(newvars)
    gens = [replace(g, delta=ctx.embed(g.delta)) for g in state.generators]
    gens += [Generator(v.name, -depth, True, ctx.embed(c)) for v, c in zip(newvars, cocycles)]
    hist = dict(state.history)
    hist[depth - 1] = [ctx.embed(c) for c in cocycles]
    return TateState(ctx, ctx.embed(state.S0), gens, state.cap, "open", hist)


# ---------------------------------------------------------------------------
# strata as free modules


def _stratum_monomials(state: TateState, depth: int):
    gens = [(state.ctx.index[g.name], g.depth) for g in state.generators]
    nv = state.ctx.nvars
    out = []

    def rec(i, left, expo):
        if left == 0:
            out.append(tuple(expo))
            return
        if i == len(gens):
            return
        idx, d = gens[i]
        maxe = 1 if state.ctx.is_odd[idx] else left // d
        for e in range(min(maxe, left // d), -1, -1):
            expo[idx] = e
            rec(i + 1, left - e * d, expo)
        expo[idx] = 0

    rec(0, depth, [0] * nv)
    return out


class Stratum:
    """Monomial basis of A_{-depth}; products first, single generators last."""

    def __init__(self, state: TateState, depth: int):
        self.state = state
        self.depth = depth
        monos = _stratum_monomials(state, depth) if depth > 0 else [state.ctx.unit]
        linear = [m for m in monos if sum(m) == 1]
        products = [m for m in monos if sum(m) != 1]
        self.slots = sorted(products, reverse=True) + sorted(linear, reverse=True)
        self.index = {m: i for i, m in enumerate(self.slots)}
        self.ring = state.ring()
        self._fidx = state.ctx.field_indices()
        self._fset = set(self._fidx)

    def __len__(self):
        return len(self.slots)

    def linear_slot(self, name: str) -> int:
        e = [0] * self.state.ctx.nvars
        e[self.state.ctx.index[name]] = 1
        return self.index[tuple(e)]

    def to_module(self, p: GradedPoly) -> FreeModuleElement:
        if p.ctx != self.state.ctx:
            p = self.state.ctx.embed(p)
        terms = {}
        fidx, fset = self._fidx, self._fset
        for m, c in p.terms.items():
            gm = tuple(0 if i in fset else e for i, e in enumerate(m))
            slot = self.index.get(gm)
            if slot is None:
                raise ResolutionError(f"term outside degree {-self.depth}")
            terms[(slot, tuple(m[i] for i in fidx))] = c
        return FreeModuleElement(len(self.slots), self.ring.nvars, terms)

    def from_module(self, v: FreeModuleElement) -> GradedPoly:
        out = {}
        fidx = self._fidx
        for (slot, fm), c in v.terms.items():
            m = list(self.slots[slot])
            for k, i in enumerate(fidx):
                m[i] = fm[k]
            out[tuple(m)] = c
        return GradedPoly(self.state.ctx, out)

    def slot_poly(self, slot: int) -> GradedPoly:
        return GradedPoly(self.state.ctx, {self.slots[slot]: self.state.ctx.domain.one})


def stratum(state: TateState, depth: int) -> Stratum:
    key = ("stratum", depth)
    s = state._cache.get(key)
    if s is None:
        s = state._cache[key] = Stratum(state, depth)
    return s


def image_generators(state: TateState, depth: int) -> list[FreeModuleElement]:
    """delta of every basis monomial of A_{-depth-1}, as elements of A_{-depth}."""
    key = ("image", depth)
    out = state._cache.get(key)
    if out is None:
        src, dst = stratum(state, depth + 1), stratum(state, depth)
        out = []
        for k in range(len(src)):
            img = tate_delta(state, src.slot_poly(k))
            if img:
                out.append(dst.to_module(img))
        state._cache[key] = out
    return out


def image_basis(state: TateState, depth: int) -> ModuleBasis:
    key = ("image_basis", depth)
    b = state._cache.get(key)
    if b is None:
        b = state._cache[key] = buchberger(image_generators(state, depth), POT)
    return b


def in_image(state: TateState, p: GradedPoly) -> bool:
    """Is the homogeneous element p a boundary of the already-built algebra?"""
    if not p:
        return True
    depth = -p.ghost_degree()
    return reduces_to_zero(stratum(state, depth).to_module(p), image_basis(state, depth))


def _sort_cocycles(vecs, st: Stratum):
    return sorted(vecs, key=lambda v: POT.key(v.leading_term(POT)))


def _kernel(state: TateState, depth: int, slots: list[int]) -> list[FreeModuleElement]:
    """Kernel of delta restricted to the span of the given slots of A_{-depth}."""
    src, dst = stratum(state, depth), stratum(state, depth - 1)
    imgs = []
    for s in slots:
        img = tate_delta(state, src.slot_poly(s))
        imgs.append(dst.to_module(img) if img else FreeModuleElement(len(dst), src.ring.nvars, {}))
    out = []
    for z in syzygies(imgs, POT):
        terms = {(slots[p], m): c for (p, m), c in z.terms.items()}
        out.append(FreeModuleElement(len(src), src.ring.nvars, terms))
    return out


def _prune_mod_image(cands, state: TateState, depth: int, keep=()):
    """Greedy pruning of classes: drop any candidate in Im + span(others, keep)."""
    if not cands:
        return []
    base = list(image_basis(state, depth).generators) + list(keep)
    base_gb = buchberger(base, POT, reduce=False) if base else None
    cands = [c for c in cands if base_gb is None or not reduces_to_zero(c, base_gb)]
    return prune_redundant(cands, POT, extra=base)


def homology_generators(state: TateState, depth: int, beta_only: bool = False) -> list[GradedPoly]:
    """Generating cocycles of H^{-depth}, interreduced and pruned against boundaries.

    With ``beta_only`` only cocycles in the span of the type-beta generators of
    that degree are produced; otherwise the remaining classes of the full
    stratum follow the beta part.
    """
    if depth < 1 or depth > state.depth:
        raise ResolutionError(f"degree {-depth} is not built yet")
    st = stratum(state, depth)
    beta_slots = [st.linear_slot(g.name) for g in state.roster(depth) if g.beta]
    beta_part = _prune_mod_image(_kernel(state, depth, beta_slots), state, depth)
    beta_part = _sort_cocycles(beta_part, st)
    out = list(beta_part)
    if not beta_only:
        rest = _kernel(state, depth, list(range(len(st))))
        rest = _prune_mod_image(rest, state, depth, keep=beta_part)
        out += _sort_cocycles(rest, st)
    return [st.from_module(v) for v in out]


@dataclass
class BetaVerdict:
    cocycle: GradedPoly
    is_beta: bool
    representative: GradedPoly | None  # cohomologous element in the beta span


def beta_verdicts(state: TateState, cocycles) -> list[BetaVerdict]:
    out = []
    for c in cocycles:
        c = state.ctx.embed(c)
        if not c:
            out.append(BetaVerdict(c, False, None))
            continue
        depth = -c.ghost_degree()
        st = stratum(state, depth)
        if depth == 1:
            out.append(BetaVerdict(c, True, c))
            continue
        imgs = image_generators(state, depth)
        slots = [st.linear_slot(g.name) for g in state.roster(depth) if g.beta]
        units = [FreeModuleElement(len(st), st.ring.nvars, {(s, (0,) * st.ring.nvars): state.ctx.domain.one}) for s in slots]
        gens = imgs + units
        if not gens:
            out.append(BetaVerdict(c, False, None))
            continue
        basis = buchberger(gens, POT, track=True)
        v = st.to_module(c)
        rem, wit = normal_form(v, basis)
        if rem:
            out.append(BetaVerdict(c, False, None))
            continue
        acc = FreeModuleElement(len(st), st.ring.nvars, {})
        for w, u in zip(wit[len(imgs):], units):
            if w:
                acc = acc + u.mul_poly(w)
        out.append(BetaVerdict(c, True, st.from_module(acc)))
    return out


def beta_filter(state: TateState, cocycles) -> list[GradedPoly]:
    """The cocycles that are, up to boundaries, R-combinations of type-beta generators.

    Returned elements are the beta-span representatives.
    """
    return [v.representative for v in beta_verdicts(state, cocycles) if v.is_beta]


def build_resolution(S0: GradedPoly, ctx: Context | None = None, cap: int = 8, on_step=None) -> TateState:
    """Iterate homology -> beta filter -> adjoin until no new beta generators appear.

    ``on_step`` is called with the state after every adjoin step.
    """
    if cap < 1:
        raise ValueError("cap must be at least 1")
    state = init_resolution(S0, ctx, cap)
    depth = 1
    while True:
        cocycles = homology_generators(state, depth, beta_only=True)
        chosen = beta_filter(state, cocycles)
        if not chosen:
            return adjoin_step(state, [])
        if depth + 1 > cap:
            return replace(state, status="cap")
        state = adjoin_step(state, chosen)
        if on_step is not None:
            on_step(state)
        depth += 1


def truncate_state(state: TateState, depth: int) -> TateState:
    """The sub-resolution generated by the generators of degree >= -depth."""
    keep = [g for g in state.generators if g.depth <= depth]
    names = {g.name for g in keep}
    variables = [v for v in state.ctx.variables if v.ghost_degree == 0 or v.name in names]
    ctx = Context(variables, state.ctx.params)
    gens = [replace(g, delta=ctx.embed(g.delta)) for g in keep]
    hist = {d: [ctx.embed(c) for c in cs] for d, cs in state.history.items() if d < depth}
    return TateState(ctx, ctx.embed(state.S0), gens, state.cap, "open", hist)


def drop_generators(state: TateState, names) -> TateState:
    """Remove the named generators and every generator whose differential needs one of them."""
    gone = set(names)
    unknown = gone - {g.name for g in state.generators}
    if unknown:
        raise KeyError(f"no generator named {', '.join(sorted(unknown))}")
    for g in sorted(state.generators, key=lambda g: g.depth):
        if g.delta.variables_used() & gone:
            gone.add(g.name)
    keep = [g for g in state.generators if g.name not in gone]
    variables = [v for v in state.ctx.variables if v.name not in gone]
    ctx = Context(variables, state.ctx.params)
    gens = [replace(g, delta=ctx.embed(g.delta)) for g in keep]
    return TateState(ctx, ctx.embed(state.S0), gens, state.cap, state.status, {})


def delta_squared_defects(state: TateState) -> dict[str, GradedPoly]:
    """Generators whose delta(delta(T)) is nonzero (empty when the resolution is sound)."""
    out = {}
    for g in state.generators:
        dd = tate_delta(state, g.delta)
        if dd:
            out[g.name] = dd
    return out


def exactness_defects(state: TateState) -> list[GradedPoly]:
    """Previously killed cocycles that are not boundaries in the current algebra."""
    out = []
    for depth, cocycles in sorted(state.history.items()):
        for c in cocycles:
            if not in_image(state, c):
                out.append(c)
    return out


def same_classes(state: TateState, xs, ys) -> bool:
    """Do xs and ys span the same submodule of A_{-k} modulo boundaries?"""
    xs = [state.ctx.embed(x) for x in xs if x]
    ys = [state.ctx.embed(y) for y in ys if y]
    if not xs and not ys:
        return True
    depth = -(xs or ys)[0].ghost_degree()
    st = stratum(state, depth)
    im = list(image_basis(state, depth).generators)

    def contained(a, b):
        gens = im + [st.to_module(p) for p in b]
        if not gens:
            return all(not p for p in a)
        basis = buchberger(gens, POT, reduce=False)
        return all(reduces_to_zero(st.to_module(p), basis) for p in a)

    return contained(xs, ys) and contained(ys, xs)


# ---------------------------------------------------------------------------
# change of generators


def transform_generators(state: TateState, mapping: dict, params=()) -> TateState:
    """Replace generators by permuted, rescaled copies.

    ``mapping[new_name] = (old_name, factor)`` within one degree means the new
    generator equals ``factor * old``; names not mentioned stay put.  The
    differential is rewritten in the new generators.
    """
    ctx = state.ctx.extend(params=params) if params else state.ctx
    dom = ctx.domain
    table = {g.name: (g.name, dom.one) for g in state.generators}
    for new, (old, lam) in mapping.items():
        lam = dom(lam) if not hasattr(lam, "field") else lam
        if state.generator(new).degree != state.generator(old).degree:
            raise ResolutionError("generators can only be exchanged within one degree")
        table[new] = (old, lam)
    olds = [v[0] for v in table.values()]
    if sorted(olds) != sorted(table):
        raise ResolutionError("mapping must be a bijection")
    # old generator in terms of new ones: old = new / factor
    subs = {old: ctx.var(new) * (dom.one / lam) for new, (old, lam) in table.items()}
    gens = []
    for g in state.generators:
        old, lam = table[g.name]
        img = ctx.embed(state.generator(old).delta).subs(subs) * lam
        gens.append(Generator(g.name, g.degree, g.beta, img))
    hist = {d: [ctx.embed(c).subs(subs) for c in cs] for d, cs in state.history.items()}
    return TateState(ctx, ctx.embed(state.S0), gens, state.cap, state.status, hist)


# ---------------------------------------------------------------------------
# extended space


@dataclass
class ExtendedSpace:
    ctx: Context
    tate: TateState
    fields: tuple[str, ...]
    antifields: tuple[str, ...]
    antighosts: tuple[str, ...]
    ghosts: tuple[str, ...]
    pairing: dict[str, str]

    @property
    def reducibility_level(self) -> int:
        degs = [self.ctx.variable(g).ghost_degree for g in self.ghosts]
        return max(degs) - 1 if degs else -1

    @property
    def has_gauge_directions(self) -> bool:
        return bool(self.ghosts)

    def strata(self) -> dict[int, list[str]]:
        out: dict[int, list[str]] = {}
        for v in self.ctx.variables:
            out.setdefault(v.ghost_degree, []).append(v.name)
        return dict(sorted(out.items()))

    def stratum_sizes(self) -> dict[int, int]:
        return {d: len(n) for d, n in self.strata().items()}

    def embed(self, p: GradedPoly) -> GradedPoly:
        return self.ctx.embed(p)


def build_extended_space(state: TateState) -> ExtendedSpace:
    """Mirror every type-beta generator of degree <= -2 by a ghost of opposite parity."""
    anti = [g for g in state.generators if g.degree <= -2 and g.beta]
    ghosts = {g.name: ghost_name(g.name) for g in anti}
    variables = []
    for v in state.ctx.variables:
        if v.ghost_degree <= -2:
            if v.name not in ghosts:
                continue  # non-beta generators do not enter the extended space
            variables.append(replace(v, partner=ghosts[v.name]))
        else:
            variables.append(v)
    by_degree = sorted(anti, key=lambda g: (g.depth, state.ctx.index[g.name]))
    for g in by_degree:
        d = g.depth - 1
        variables.append(GradedVariable(ghosts[g.name], d, d % 2, "ghost", g.name))
    ctx = Context(variables, state.ctx.params)
    pairing = {}
    for v in variables:
        if v.partner is not None:
            pairing[v.name] = v.partner
    fields = tuple(v.name for v in variables if v.ghost_degree == 0)
    antifields = tuple(v.name for v in variables if v.ghost_degree == -1)
    return ExtendedSpace(
        ctx,
        state,
        fields,
        antifields,
        tuple(g.name for g in by_degree),
        tuple(ghosts[g.name] for g in by_degree),
        pairing,
    )
