from __future__ import annotations

import pytest

from bvtate.antibracket import bracket
from bvtate.cme import check_cme, extend_action, linear_action, obstruction
from bvtate.exprio import parse_poly
from bvtate.tate import build_resolution, tate_delta
from bvtate.u2 import (
    SAMPLE_G,
    SAMPLES,
    AlignmentError,
    align_generators,
    build_u2,
    case2_space,
    classify,
    eps,
    first_obstruction_closed_form,
    expected_extension,
    field_context,
    p_family,
    closed_form_generators,
    s_le1,
    closed_form_action,
    verify_relations,
)


def test_levi_civita():
    assert eps(1, 2, 3) == 1
    assert eps(2, 1, 3) == -1
    assert eps(3, 1, 2) == 1
    assert eps(1, 1, 2) == 0


@pytest.mark.parametrize("case", [1, 2, 3])
def test_samples_build_to_shipped_actions(case):
    spec = build_u2(SAMPLE_G[case])
    assert spec.S0 == parse_poly(SAMPLES[case], field_context())
    assert spec.case == case
    assert len(spec.g) == len(SAMPLE_G[case])
    assert verify_relations(spec).holds


def test_derived_data():
    spec = build_u2(SAMPLE_G[2])
    assert spec.D.is_constant()
    assert str(spec.A) == "4*M1^2 + 4*M2^2 + 4*M3^2"
    assert str(spec.B) == "4*M4^3"
    spec = build_u2(SAMPLE_G[3])
    assert str(spec.D) == "M4"
    assert str(spec.A) == "4*M4"
    M = spec.ctx.vars("M1", "M2", "M3", "M4")
    for i in range(3):
        assert spec.partials[i] == M[i] * spec.D * spec.A
    assert spec.partials[3] == spec.D * spec.B


def test_build_errors():
    with pytest.raises(ValueError):
        build_u2(["0"])
    with pytest.raises(ValueError):
        build_u2(["M1"])


def test_relations_fail_without_rotation_symmetry():
    S0 = parse_poly("M1^2 + 2*M2^2", field_context())
    assert not verify_relations(S0).holds


def test_expected_extension():
    e = expected_extension(3)
    assert e.sizes() == {-4: 1, -3: 4, -2: 6, -1: 4, 0: 4, 1: 6, 2: 4, 3: 1}
    assert e.reducibility_level == 2
    assert expected_extension(1).reducibility_level == -1
    with pytest.raises(ValueError):
        expected_extension(4)


def test_alignment_to_closed_form():
    spec = build_u2(SAMPLE_G[2])
    engine = build_resolution(spec.S0)
    target = closed_form_generators(spec).state
    aligned = align_generators(engine, target)
    for g in target.generators:
        assert aligned.ctx.embed(g.delta) == aligned.generator(g.name).delta
    other = closed_form_generators(build_u2(SAMPLE_G[3])).state
    with pytest.raises(AlignmentError):
        align_generators(engine, other)


@pytest.fixture(scope="module")
def case2():
    spec = build_u2(SAMPLE_G[2])
    return spec, case2_space(spec, build_resolution(spec.S0))


def test_linear_action_in_normalized_frame(case2):
    spec, space = case2
    assert linear_action(space) == s_le1(spec, space.ctx)


def test_first_obstruction_closed_form(case2):
    spec, space = case2
    S = s_le1(spec, space.ctx)
    full = first_obstruction_closed_form(spec, space.ctx)
    assert bracket(S, S) == full
    # the solver only sees positive degree <= 2; the E-terms have positive degree 3
    assert obstruction(S, 1) == full.filter_terms(lambda m: m[space.ctx.index["E"]] == 0)


@pytest.mark.parametrize("T", ["0", "1", "M4", "M1*M2", "M4^3"])
def test_closed_form_solution(case2, T):
    spec, space = case2
    assert check_cme(closed_form_action(spec, T, space.ctx)).holds


def test_free_directions_are_closed(case2):
    spec, space = case2
    for T in ("1", "M4", "M1*M3 + 2"):
        assert not tate_delta(space.tate, p_family(T, space.ctx))
    P = {1: "M2", 2: "-M1", 3: "0"}
    assert not tate_delta(space.tate, p_family(None, space.ctx, P))


@pytest.mark.parametrize("T", ["0", "M4"])
def test_solver_reproduces_closed_form(case2, T):
    spec, space = case2
    theory = extend_action(space, injection={1: p_family(T, space.ctx)})
    assert theory.success
    assert theory.action == closed_form_action(spec, T, space.ctx)


def test_closed_form_needs_coprime_case():
    with pytest.raises(ValueError):
        closed_form_action(build_u2(SAMPLE_G[3]), "0")
    with pytest.raises(ValueError):
        case2_space(build_u2(SAMPLE_G[1]))


def test_classify_single_field():
    spec = classify(parse_poly("M4^3", field_context()))
    assert spec.case == 1
    assert str(spec.D) == "M4^2"
    assert str(spec.B) == "3"
