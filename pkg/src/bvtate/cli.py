"""Command-line front end: jacobian, tate, extend, check-cme, brst, u2.

Every command builds a plain report dict; text output is rendered from it and
``--json`` prints the same dict.  Exit codes: 0 success, 1 usage or parse
error, 2 obstruction not liftable, 3 iteration cap reached, 4 a check failed
(nonzero CME residual or a golden-fixture mismatch).
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from importlib import resources

from bvtate import u2
from bvtate.antibracket import bracket, brst_diff
from bvtate.cme import NotLiftable, check_cme, extend_action, linear_action
from bvtate.exprio import ModelError, ModelSpec, ParseError, load_model, model_from_dict, model_to_dict, parse_poly
from bvtate.groebner import exact_divide, gcd_poly
from bvtate.poly import DegreeError, GradedPoly, deriv
from bvtate.tate import (
    ResolutionError,
    build_extended_space,
    build_resolution,
    delta_squared_defects,
    drop_generators,
    homology_generators,
    same_classes,
    truncate_state,
)

EXIT_OK, EXIT_USAGE, EXIT_NOT_LIFTABLE, EXIT_CAP, EXIT_CHECK = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


# ---------------------------------------------------------------------------
# shared helpers


def _text(p: GradedPoly | None) -> str | None:
    return None if p is None else str(p)


def _is_u2(model: ModelSpec) -> bool:
    return model.fields_only and [v.name for v in model.variables] == list(u2.FIELDS)


def _load(args) -> ModelSpec:
    if not args.model:
        raise UsageError("--model is required")
    return load_model(args.model)


def _read_action(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read().strip()


def _resolve(model: ModelSpec, cap: int | None):
    cap = cap if cap is not None else model.options.cap
    if not model.fields_only:
        raise ModelError("resolution needs a model declaring fields of degree 0 only")
    return build_resolution(model.action, model.context, cap)


def _roster_report(state) -> list[dict]:
    out = []
    for depth in range(1, state.depth + 1):
        out.append({
            "degree": -depth,
            "generators": [{"name": g.name, "delta": str(g.delta)} for g in state.roster(depth)],
        })
    return out


def _space_for(model: ModelSpec, cap: int | None, drop=()):
    """(extended space, frame label); the closed-form frame for coprime two-field-sector models."""
    state = _resolve(model, cap)
    if state.status == "cap":
        return None, state, "engine"
    if drop:
        state = drop_generators(state, drop)
    if not drop and _is_u2(model) and set(u2.PARAMS) <= set(model.parameters):
        spec = u2.classify(model.action)
        if spec.case == 2:
            return u2.case2_space(spec, state), state, "closed-form"
    return build_extended_space(state), state, "engine"


# ---------------------------------------------------------------------------
# commands


def cmd_jacobian(args) -> tuple[dict, int]:
    model = _load(args)
    S0 = model.action
    names = [v.name for v in model.variables if v.ghost_degree == 0]
    partials = {n: deriv(S0, n) for n in names}
    report = {"command": "jacobian", "action": str(S0), "partials": {n: str(p) for n, p in partials.items()}}
    nonzero = [p for p in partials.values() if p]
    if nonzero:
        D = gcd_poly(*nonzero)
        report["gcd"] = str(D)
        report["cofactors"] = {n: str(exact_divide(p, D)) if p else "0" for n, p in partials.items()}
    else:
        report["gcd"] = None
        report["cofactors"] = {}
    if _is_u2(model):
        spec = u2.classify(S0)
        report["u2"] = {
            "case": spec.case,
            "D": _text(spec.D),
            "A": str(spec.A),
            "B": str(spec.B),
            "relations_hold": u2.verify_relations(spec).holds,
        }
    return report, EXIT_OK


def cmd_tate(args) -> tuple[dict, int]:
    model = _load(args)
    state = _resolve(model, args.cap)
    report = {
        "command": "tate",
        "status": state.status,
        "roster_sizes": list(state.roster_sizes()),
        "roster": _roster_report(state),
        "delta_squared_zero": not delta_squared_defects(state),
    }
    return report, EXIT_CAP if state.status == "cap" else EXIT_OK


def cmd_extend(args) -> tuple[dict, int]:
    model = _load(args)
    T = model.options.T
    if T is not None and args.drop:
        raise UsageError("--drop cannot be combined with an injected T")
    if T is not None:
        if not _is_u2(model) or u2.classify(model.action).case != 2:
            raise ModelError("option T is only meaningful for a coprime-case model in M1..M4")
        model = model_from_dict({**model_to_dict(model), "parameters": sorted(set(model.parameters) | set(u2.PARAMS))})
    space, state, frame = _space_for(model, args.cap, args.drop or ())
    report = {"command": "extend", "frame": frame, "roster_sizes": list(state.roster_sizes()), "dropped": args.drop or []}
    if space is None:
        report["status"] = "cap"
        return report, EXIT_CAP
    report["strata"] = {str(d): names for d, names in sorted(space.strata().items())}
    report["reducibility_level"] = space.reducibility_level
    report["linear_action"] = str(linear_action(space))
    injection = None
    if T is not None:
        injection = {1: u2.p_family(parse_poly(T, space.ctx), space.ctx)}
        report["T"] = T
    max_q = args.max_q if args.max_q is not None else model.options.max_q
    try:
        theory = extend_action(space, max_q=max_q, injection=injection)
    except NotLiftable as exc:
        report.update({
            "status": "not_liftable",
            "q": exc.q,
            "ghost_monomial": _text(exc.ghost_monomial),
            "certificate": _text(exc.certificate),
            "message": str(exc),
        })
        return report, EXIT_NOT_LIFTABLE
    report["status"] = theory.status
    report["steps"] = [
        {"q": r.q, "obstruction": str(r.obstruction), "correction": str(r.nu), "tiers": r.tiers}
        for r in theory.trace
    ]
    report["action"] = str(theory.action)
    report["residual"] = str(theory.residual)
    return report, EXIT_OK if theory.success else EXIT_CAP


def _action_in_context(args):
    model = _load(args)
    if not args.action:
        raise UsageError("--action is required")
    text = _read_action(args.action)
    if not model.fields_only:
        return parse_poly(text, model.context), "declared"
    space, _, frame = _space_for(model, args.cap)
    if space is None:
        raise ResolutionError("resolution hit the cap; no extended context available")
    return parse_poly(text, space.ctx), frame


def cmd_check_cme(args) -> tuple[dict, int]:
    S, frame = _action_in_context(args)
    res = check_cme(S)
    report = {"command": "check-cme", "frame": frame, "action": str(S), "residual": str(res.residual), "holds": res.holds}
    return report, EXIT_OK if res.holds else EXIT_CHECK


def cmd_brst(args) -> tuple[dict, int]:
    S, frame = _action_in_context(args)
    if not args.target:
        raise UsageError("--target is required")
    target = parse_poly(args.target, S.ctx)
    d1 = brst_diff(S, target)
    d2 = brst_diff(S, d1)
    report = {
        "command": "brst",
        "frame": frame,
        "target": str(target),
        "d_target": str(d1),
        "d2_target": str(d2),
        "cme_holds": not bracket(S, S),
    }
    return report, EXIT_OK


def _shipped_model(case: int) -> ModelSpec:
    ref = resources.files("bvtate") / "models" / f"u2_case{case}.json"
    return model_from_dict(json.loads(ref.read_text(encoding="utf-8")))


def _random_poly(ctx, rng: random.Random, nterms: int = 3, max_exp: int = 2) -> GradedPoly:
    out = ctx.zero()
    for _ in range(nterms):
        term = ctx.const(rng.randint(-3, 3))
        for name in rng.sample(ctx.names, rng.randint(1, 3)):
            term = term * ctx.var(name) ** rng.randint(1, max_exp)
        out = out + term
    return out


def _closed_form_matches(spec) -> bool:
    """Homology of each partial closed-form resolution is spanned by the next closed-form generators."""
    table = u2.closed_form_generators(spec)
    if table.flags:
        return False
    full = table.state
    for depth in range(1, full.depth):
        part = truncate_state(full, depth)
        ours = homology_generators(part, depth, beta_only=True)
        theirs = [part.ctx.embed(g.delta) for g in full.roster(depth + 1)]
        if not same_classes(part, ours, theirs):
            return False
    return not delta_squared_defects(full)


def cmd_u2(args) -> tuple[dict, int]:
    case = args.case
    model = _shipped_model(case)
    spec = u2.classify(model.action)
    expected = u2.expected_extension(case)
    state = build_resolution(model.action, model.context, args.cap or model.options.cap)
    checks: dict[str, bool] = {}
    checks["classification"] = spec.case == case
    checks["relations"] = u2.verify_relations(spec).holds
    checks["resolution_terminates"] = state.status == "terminated"
    sizes = [expected.sizes().get(-d, 0) for d in range(1, max(-k for k in expected.strata) + 1)]
    checks["roster_matches_closed_form"] = list(state.roster_sizes()) == sizes
    if checks["resolution_terminates"]:
        got = build_extended_space(state).stratum_sizes()
        checks["extended_strata_match"] = got == expected.sizes()
    if case in (2, 3):
        checks["closed_form_generators_match"] = _closed_form_matches(spec)
    report = {
        "command": "u2",
        "case": case,
        "action": str(model.action),
        "D": _text(spec.D),
        "A": str(spec.A),
        "B": str(spec.B),
        "roster_sizes": list(state.roster_sizes()),
        "expected_roster_sizes": sizes,
        "roster": _roster_report(state),
    }
    if case == 2 and checks["resolution_terminates"]:
        space = u2.case2_space(spec, state)
        checks["linear_action_closed_form"] = linear_action(space) == u2.s_le1(spec, space.ctx)
        closed = {}
        for T in ("0", "M4"):
            S = u2.closed_form_action(spec, T, space.ctx)
            ok = check_cme(S).holds
            theory = extend_action(space, injection={1: u2.p_family(parse_poly(T, space.ctx), space.ctx)})
            closed[T] = {"cme_holds": ok, "solver_matches": theory.success and theory.action == S}
            checks[f"closed_form_T={T}"] = ok and closed[T]["solver_matches"]
        report["closed_form"] = closed
        rng = random.Random(args.seed)
        S = u2.closed_form_action(spec, "M4", space.ctx)
        samples = [_random_poly(space.ctx, rng) for _ in range(5)]
        checks["brst_nilpotent"] = all(not brst_diff(S, brst_diff(S, p)) for p in samples)
        report["seed"] = args.seed
    report["checks"] = checks
    return report, EXIT_OK if all(checks.values()) else EXIT_CHECK


# ---------------------------------------------------------------------------
# rendering and entry point


def _render(report: dict, indent: str = "") -> list[str]:
    lines = []
    for key, value in report.items():
        if isinstance(value, dict):
            lines.append(f"{indent}{key}:")
            lines.extend(_render(value, indent + "  "))
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            lines.append(f"{indent}{key}:")
            for item in value:
                sub = _render(item, indent + "    ")
                sub[0] = indent + "  - " + sub[0].lstrip()
                lines.extend(sub)
        else:
            lines.append(f"{indent}{key}: {value}")
    return lines


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bvtate", description="Tate resolutions and extended actions for polynomial actions.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def common(p, action=False, target=False):
        p.add_argument("--model", help="model JSON file")
        p.add_argument("--cap", type=int, help="maximal resolution depth")
        p.add_argument("--json", action="store_true", help="print the report as JSON")
        p.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
        if action:
            p.add_argument("--action", help="file holding an action expression")
        if target:
            p.add_argument("--target", help="expression to apply the BRST differential to")

    common(sub.add_parser("jacobian", help="partial derivatives, their gcd and cofactors"))
    common(sub.add_parser("tate", help="compute the Tate resolution"))
    p = sub.add_parser("extend", help="solve the classical master equation")
    common(p)
    p.add_argument("--max-q", type=int, dest="max_q", help="highest correction order to solve for")
    p.add_argument("--drop", action="append", metavar="NAME", help="remove a generator before extending")
    common(sub.add_parser("check-cme", help="evaluate {S, S}"), action=True)
    common(sub.add_parser("brst", help="apply the BRST differential"), action=True, target=True)
    p = sub.add_parser("u2", help="run a shipped two-sector sample model")
    common(p)
    p.add_argument("--case", type=int, choices=(1, 2, 3), required=True)
    return parser


_COMMANDS = {
    "jacobian": cmd_jacobian,
    "tate": cmd_tate,
    "extend": cmd_extend,
    "check-cme": cmd_check_cme,
    "brst": cmd_brst,
    "u2": cmd_u2,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            raise UsageError("a command is required")
        if getattr(args, "cap", None) is not None and args.cap < 1:
            raise UsageError("--cap must be positive")
        if getattr(args, "max_q", None) is not None and args.max_q < 1:
            raise UsageError("--max-q must be positive")
        report, code = _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, ModelError, DegreeError, ResolutionError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.json:
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        print("\n".join(_render(report)))
    return code


if __name__ == "__main__":
    sys.exit(main())
