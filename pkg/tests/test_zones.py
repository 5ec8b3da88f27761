from fractions import Fraction

import pytest

from zonewatch import (
    Interval,
    TFA,
    Transition,
    build_zone_automaton,
    build_zones,
    input_transitions_at,
    output_transitions_at,
    parse_interval,
    regions,
    to_dot,
)
from zonewatch.model import TAU
from zonewatch.zones import ExtendedState
from zonewatch.oracle import RandomModelConfig, random_model

I = parse_interval
F = Fraction


def ivs(texts: str) -> list[Interval]:
    return [I(t) for t in texts.split()]


# -- regions ----------------------------------------------------------------------

def test_regions_reference_state(fig1):
    assert regions(fig1, "x0") == ivs("[0,0] (0,1) [1,1] (1,2) [2,2] (2,3) [3,3]")


def test_regions_isolated_state():
    model = TFA(
        states=frozenset({"x0", "lone"}),
        alphabet=frozenset({"a"}),
        observable=frozenset({"a"}),
        transitions=(),
        initial=frozenset({"x0"}),
    )
    assert regions(model, "lone") == ivs("[0,0]")


def test_regions_x4_endpoints_from_guard_and_reset(fig1):
    # endpoints {0,1}: the outgoing guard [0,1] and the incoming reset [0,1]
    assert regions(fig1, "x4") == ivs("[0,0] (0,1) [1,1]")


def test_regions_unknown_state(fig1):
    with pytest.raises(ValueError):
        regions(fig1, "zz")


# -- transition sets at a region -----------------------------------------------------

def triples(transitions) -> set:
    return {(t.source, t.event, t.target) for t in transitions}


def test_output_at(fig1):
    assert triples(output_transitions_at(fig1, "x0", I("[1,1]"))) == {
        ("x0", "c", "x1"),
        ("x0", "b", "x2"),
    }
    assert output_transitions_at(fig1, "x0", I("(3,inf)")) == set()
    assert triples(output_transitions_at(fig1, "x2", I("(1,2)"))) == {("x2", "c", "x3")}


def test_input_at(fig1):
    assert triples(input_transitions_at(fig1, "x2", I("[0,0]"))) == {
        ("x0", "b", "x2"),
        ("x3", "a", "x2"),
    }
    assert input_transitions_at(fig1, "x2", I("(1,2)")) == set()
    assert triples(input_transitions_at(fig1, "x1", I("[1,1]"))) == {("x0", "c", "x1")}


# -- zones ------------------------------------------------------------------------

def test_zones_reference_model(fig1):
    assert build_zones(fig1, "x0") == ivs("[0,0] (0,1) [1,1] (1,3] (3,inf)")
    assert build_zones(fig1, "x4") == ivs("[0,1] (1,inf)")
    assert build_zones(fig1, "x2") == ivs("[0,0] (0,1) [1,1] (1,2) [2,2] (2,inf)")
    assert build_zones(fig1, "x1") == ivs("[0,1) [1,1] (1,3] (3,inf)")
    assert build_zones(fig1, "x3") == ivs("[0,0] (0,1) [1,1] (1,2) [2,2] (2,inf)")


def test_initial_state_keeps_point_zero_zone():
    # With no constraints below 3, the regions under the guard merge; the
    # initial state still needs [0,0] on its own because the clock starts there.
    model = TFA(
        states=frozenset({"s", "t"}),
        alphabet=frozenset({"a"}),
        observable=frozenset({"a"}),
        transitions=(
            Transition("s", "a", "t", Interval.closed(3, 3), Interval.closed(0, 0)),
        ),
        initial=frozenset({"s"}),
    )
    assert build_zones(model, "s") == ivs("[0,0] (0,3) [3,3] (3,inf)")
    assert build_zones(model, "t") == ivs("[0,0] (0,inf)")


def random_models(n: int, **kw):
    for seed in range(n):
        yield random_model(RandomModelConfig(rng_seed=500 + seed, **kw))


def test_zone_partition_property(fig1):
    for model in [fig1] + list(random_models(8, state_count=5)):
        for x in model.states:
            zones = build_zones(model, x)
            top = max(int(z.lower.value) for z in zones) + 2
            for k in range(4 * top + 1):
                theta = F(k, 4)
                assert sum(1 for z in zones if theta in z) == 1


def test_zone_region_refinement(fig1):
    from zonewatch.intervals import intersect, subset

    for model in [fig1] + list(random_models(8, state_count=5)):
        for x in model.states:
            for z in build_zones(model, x):
                assert isinstance(z.lower.value, int)
                for t in model.outgoing(x):
                    assert subset(z, t.guard) or intersect(z, t.guard) is None


def test_zone_count_bound(fig1):
    for model in [fig1] + list(random_models(8, state_count=5)):
        for x in model.states:
            zones = build_zones(model, x)
            high = max(int(z.lower.value) for z in zones)
            assert len(zones) <= 2 * high + 2


# -- zone automaton ------------------------------------------------------------------

def test_tau_edges_total(fig1_za):
    for v in fig1_za.states:
        succ = fig1_za.tau_successor(v)
        if v.zone.is_bounded:
            assert succ is not None and succ.state == v.state
        else:
            assert succ is None


def test_golden_edges(fig1_za):
    assert fig1_za.tau_successor(ExtendedState("x0", I("[0,0]"))) == ExtendedState(
        "x0", I("(0,1)")
    )
    b_edges = sorted(
        (str(e.source.zone), str(e.target.zone))
        for e in fig1_za.edges
        if e.label == "b" and e.source.state == "x0"
    )
    assert b_edges == [("(0,1)", "(0,1)"), ("[0,0]", "[0,0]"), ("[1,1]", "[1,1]")]
    assert all(
        e.target.state == "x2"
        for e in fig1_za.edges
        if e.label == "b" and e.source.state == "x0"
    )


def test_initial_extended_states(fig1_za):
    assert fig1_za.initial == frozenset({ExtendedState("x0", I("[0,0]"))})


def test_event_edges_respect_guard_and_reset(fig1, fig1_za):
    from zonewatch.intervals import subset

    for e in fig1_za.edges:
        if e.transition is None:
            assert e.label == TAU
            continue
        assert subset(e.source.zone, e.transition.guard)
        if e.transition.resets_clock:
            assert subset(e.target.zone, e.transition.reset)
        else:
            assert e.target.zone == e.source.zone


def test_no_diagnostics_on_well_formed_models(fig1):
    assert build_zone_automaton(fig1).diagnostics == ()
    for model in random_models(10, state_count=5):
        assert build_zone_automaton(model).diagnostics == ()


def test_reset_target_zones_tile_reset_interval(fig1):
    # The zones inside a reset range cover it exactly: event edges lose nothing.
    from zonewatch.intervals import contains, subset

    for model in [fig1] + list(random_models(6, state_count=4)):
        za = build_zone_automaton(model)
        for t in model.transitions:
            if not t.resets_clock:
                continue
            covered = [z for z in za.zones(t.target) if subset(z, t.reset)]
            for k in range(0, 4 * (int(t.reset.upper.value) + 1) + 1):
                theta = F(k, 4)
                if contains(t.reset, theta):
                    assert sum(1 for z in covered if theta in z) == 1


# -- DOT export -----------------------------------------------------------------------

def test_dot_export(fig1_za):
    dot = to_dot(fig1_za)
    assert dot == to_dot(fig1_za)  # deterministic
    assert '"x0 [0,0]"' in dot
    assert '"x0 [0,0]" -> "x0 (0,1)" [style=dashed];' in dot
    assert '"x0 [1,1]" -> "x2 [1,1]" [label="b"];' in dot
    lines = dot.splitlines()
    assert lines[0] == "digraph zone_automaton {"
    assert lines[-1] == "}"
