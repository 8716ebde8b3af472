from __future__ import annotations

import pytest

from bvtate.poly import Context, GradedVariable
from bvtate.tate import (
    NotACocycle,
    ResolutionError,
    adjoin_step,
    antifield_name,
    antighost_name,
    beta_filter,
    build_extended_space,
    build_resolution,
    delta_squared_defects,
    drop_generators,
    exactness_defects,
    ghost_name,
    homology_generators,
    in_image,
    init_resolution,
    same_classes,
    tate_delta,
    truncate_state,
)
from bvtate.u2 import SAMPLE_G, build_u2, field_context, closed_form_generators


def _S0(text):
    from bvtate.exprio import parse_poly

    return parse_poly(text, field_context())


def test_names():
    assert antifield_name("M1") == "Ms1"
    assert antifield_name("x") == "xs"
    assert antighost_name(2, 1, 3) == "Cs1"
    assert antighost_name(3, 1, 1) == "Es"
    assert antighost_name(5, 2, 2) == "G5s_2"
    assert ghost_name("Cs1") == "C1"
    assert ghost_name("Es") == "E"
    assert ghost_name("G5s_2") == "G5_2"


def test_degree_minus_one_is_the_jacobian():
    state = init_resolution(_S0("M1^2*M2 + M4^3"))
    assert [g.name for g in state.roster(1)] == ["Ms1", "Ms2", "Ms3", "Ms4"]
    assert str(state.generator("Ms1").delta) == "2*M1*M2"
    assert str(state.generator("Ms3").delta) == "0"
    assert state.ctx.variable("M1").partner == "Ms1"


def test_init_rejects_non_field_context():
    ctx = Context([GradedVariable("x", 0, 0), GradedVariable("c", 1, 1)])
    with pytest.raises(ResolutionError):
        init_resolution(ctx.var("x") ** 2, ctx)


def test_regular_sequence_needs_nothing_more():
    state = build_resolution(_S0("M1^2 + M2^2 + M3^2 + M4^3"))
    assert state.terminated
    assert state.roster_sizes() == (4,)
    assert homology_generators(state, 1) == []


def test_single_field_potential():
    state = build_resolution(_S0("M4"))
    assert state.roster_sizes() == (4,)
    assert state.terminated


def test_coprime_sample_roster_and_differentials():
    spec = build_u2(SAMPLE_G[2])
    state = build_resolution(spec.S0)
    assert state.roster_sizes() == (4, 3, 1)
    assert str(state.generator("Cs3").delta) == "-M1*Ms2 + M2*Ms1"
    assert str(state.generator("Es").delta) == "M1*Cs1 - M2*Cs2 + M3*Cs3"
    assert not delta_squared_defects(state)
    assert not exactness_defects(state)


def test_non_coprime_sample_roster():
    spec = build_u2(SAMPLE_G[3])
    state = build_resolution(spec.S0)
    assert state.roster_sizes() == (4, 6, 4, 1)
    assert state.terminated
    assert not delta_squared_defects(state)


def test_quadratic_single_field_action():
    # three free anti-fields give a degree -2 layer; the engine does not stop at (4)
    state = build_resolution(_S0("M4^2"))
    assert state.roster_sizes() == (4, 3)
    assert sorted(str(g.delta) for g in state.roster(2)) == ["Ms1", "Ms2", "Ms3"]


def test_cap_status():
    state = build_resolution(build_u2(SAMPLE_G[3]).S0, cap=2)
    assert state.status == "cap"
    assert state.roster_sizes() == (4, 6)
    with pytest.raises(ValueError):
        build_resolution(_S0("M4"), cap=0)


@pytest.mark.parametrize("case", [1, 2, 3])
def test_every_step_keeps_delta_squared_zero_and_exactness(case):
    states = []
    build_resolution(build_u2(SAMPLE_G[case]).S0, on_step=states.append)
    assert states
    for st in states:
        assert not delta_squared_defects(st)
        assert not exactness_defects(st)
        for cocycles in st.history.values():
            for c in cocycles:
                assert in_image(st, c)


def test_adjoin_rejects_non_cocycles():
    state = init_resolution(build_u2(SAMPLE_G[2]).S0)
    with pytest.raises(NotACocycle):
        adjoin_step(state, [state.ctx.var("Ms1")])
    with pytest.raises(NotACocycle):
        adjoin_step(state, [state.ctx.zero()])
    with pytest.raises(ResolutionError):
        adjoin_step(state, [state.ctx.var("M1")])
    assert adjoin_step(state, []).terminated


def test_homology_classes_match_closed_form():
    for case in (2, 3):
        spec = build_u2(SAMPLE_G[case])
        table = closed_form_generators(spec)
        assert not table.flags
        full = table.state
        for depth in range(1, full.depth):
            part = truncate_state(full, depth)
            ours = homology_generators(part, depth, beta_only=True)
            theirs = [part.ctx.embed(g.delta) for g in full.roster(depth + 1)]
            assert same_classes(part, ours, theirs)
        assert homology_generators(full, full.depth, beta_only=True) == []


def test_printed_gamma_sign_breaks_cocycle_condition():
    table = closed_form_generators(build_u2(SAMPLE_G[3]), gamma_sign=1)
    assert {f.split()[0] for f in table.flags} == {"alpha2", "alpha3", "alpha4"}


def test_beta_filter_keeps_linear_combinations():
    state = init_resolution(build_u2(SAMPLE_G[2]).S0)
    cocycles = homology_generators(state, 1, beta_only=True)
    chosen = beta_filter(state, cocycles)
    assert len(chosen) == 3
    for c in chosen:
        assert not tate_delta(state, c)


def test_drop_generators_removes_dependents():
    state = build_resolution(build_u2(SAMPLE_G[2]).S0)
    cut = drop_generators(state, ["Cs1"])
    assert [g.name for g in cut.generators if g.depth > 1] == ["Cs2", "Cs3"]
    with pytest.raises(KeyError):
        drop_generators(state, ["nope"])


def test_extended_space_layout():
    state = build_resolution(build_u2(SAMPLE_G[2]).S0)
    space = build_extended_space(state)
    assert space.stratum_sizes() == {-3: 1, -2: 3, -1: 4, 0: 4, 1: 3, 2: 1}
    assert space.reducibility_level == 1
    assert space.ghosts == ("C1", "C2", "C3", "E")
    assert space.ctx.names[: state.ctx.nvars] == state.ctx.names
    assert space.ctx.variable("E").partner == "Es"
    assert not build_extended_space(build_resolution(_S0("M4"))).has_gauge_directions
