"""Clock regions, zones and the zone automaton of a timed finite automaton.

The clock axis at each state is first cut into unit regions (integer points
and open unit segments).  Consecutive regions whose enabled input/output
transitions coincide, and involve no clock-preserving transition, merge into
zones; together with the unbounded tail the zones partition ``[0, inf)``.
The zone automaton is an NFA over (state, zone) pairs whose ``tau`` edges
model time elapsing into the next zone and whose event edges follow the
guards and reset policies of the underlying model.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .intervals import Bound, Interval, subset
from .model import TAU, TFA, Transition, require_valid


class ExtendedState(NamedTuple):
    state: str
    zone: Interval

    def __str__(self) -> str:
        return f"({self.state},{self.zone})"


@dataclass(frozen=True, slots=True)
class Edge:
    source: ExtendedState
    label: str  # an event name, or TAU for time elapse
    target: ExtendedState
    transition: Optional[Transition]  # None exactly for TAU edges


def regions(model: TFA, state: str) -> list[Interval]:
    """The ordered unit regions of a state, from ``[0,0]`` to ``[M,M]``.

    ``M`` is the largest integer endpoint among the guards of output
    transitions, the guards of clock-preserving input transitions and the
    reset ranges of clock-resetting input transitions.  The low end is
    clamped to 0 so the regions always start at the initial clock value.
    """
    if state not in model.states:
        raise ValueError(f"unknown state {state!r}")
    high = 0
    for t in model.outgoing(state):
        high = max(high, int(t.guard.upper.value))
    for t in model.incoming(state):
        relevant = t.reset if t.resets_clock else t.guard
        high = max(high, int(relevant.upper.value))
    out: list[Interval] = [Interval.point(0)]
    for k in range(high):
        out.append(Interval.open(k, k + 1))
        out.append(Interval.point(k + 1))
    return out


def output_transitions_at(model: TFA, state: str, r: Interval) -> set[Transition]:
    """Transitions that can fire from ``state`` with any clock value in ``r``."""
    return {t for t in model.outgoing(state) if subset(r, t.guard)}


def input_transitions_at(model: TFA, state: str, r: Interval) -> set[Transition]:
    """Transitions that can land in ``state`` with any clock value in ``r``.

    A clock-resetting transition reaches ``(state, r)`` when ``r`` lies in its
    reset range; a clock-preserving one when ``r`` lies in its guard.
    """
    out = set()
    for t in model.incoming(state):
        relevant = t.reset if t.resets_clock else t.guard
        if subset(r, relevant):
            out.add(t)
    return out


def build_zones(model: TFA, state: str) -> list[Interval]:
    """Merge regions into the ordered zone partition of ``[0, inf)``.

    Consecutive regions merge while their input and output transition sets
    are equal and none of those transitions preserves the clock.  The
    unbounded tail zone is appended last.  For initial states the point zone
    ``[0,0]`` is always kept separate: the clock starts at exactly 0, and the
    initial extended state must carry that information.
    """
    regs = regions(model, state)
    zones: list[Interval] = []
    cur = regs[0]
    cur_out = output_transitions_at(model, state, regs[0])
    cur_in = input_transitions_at(model, state, regs[0])
    for nxt in regs[1:]:
        nxt_out = output_transitions_at(model, state, nxt)
        nxt_in = input_transitions_at(model, state, nxt)
        mergeable = (
            cur_out == nxt_out
            and cur_in == nxt_in
            and all(t.resets_clock for t in nxt_out | nxt_in)
        )
        if mergeable:
            cur = Interval(cur.lower, nxt.upper)
        else:
            zones.append(cur)
            cur = nxt
        cur_out, cur_in = nxt_out, nxt_in
    zones.append(cur)
    zones.append(Interval.above(int(regs[-1].upper.value)))
    if state in model.initial and not zones[0].is_point:
        first = zones[0]
        zones[0:1] = [Interval.point(0), Interval(Bound(0, False), first.upper)]
    return zones


@dataclass(frozen=True)
class ZoneAutomaton:
    """NFA over extended states with time-elapse and event edges."""

    states: frozenset[ExtendedState]
    edges: tuple[Edge, ...]
    initial: frozenset[ExtendedState]
    zones_by_state: dict[str, tuple[Interval, ...]]
    diagnostics: tuple[str, ...] = ()
    _succ: dict = field(default_factory=dict, repr=False, compare=False)
    _event_out: dict = field(default_factory=dict, repr=False, compare=False)

    def zones(self, state: str) -> tuple[Interval, ...]:
        return self.zones_by_state[state]

    def tau_successor(self, v: ExtendedState) -> Optional[ExtendedState]:
        return self._succ.get(v)

    def event_edges(self, v: ExtendedState, event: Optional[str] = None) -> tuple[Edge, ...]:
        if event is None:
            return tuple(
                e for edges in self._event_out.get(v, {}).values() for e in edges
            )
        return self._event_out.get(v, {}).get(event, ())

    def zone_of(self, state: str, clock) -> Interval:
        for z in self.zones_by_state[state]:
            if clock in z:
                return z
        raise ValueError(f"no zone of {state!r} contains {clock}")  # unreachable: zones partition


def build_zone_automaton(model: TFA) -> ZoneAutomaton:
    """Construct the zone automaton of a well-formed model.

    Event edges follow each transition from every source zone inside its
    guard: a clock-resetting transition fans out to every target zone inside
    its reset range, while a clock-preserving one keeps the zone unchanged.
    A clock-preserving edge whose zone is missing at the target state is
    dropped and reported as a diagnostic.
    """
    require_valid(model)
    zones_by_state = {x: tuple(build_zones(model, x)) for x in model.states}
    states = frozenset(
        ExtendedState(x, z) for x, zs in zones_by_state.items() for z in zs
    )
    edges: list[Edge] = []
    succ: dict[ExtendedState, ExtendedState] = {}
    for x, zs in zones_by_state.items():
        for z, z_next in zip(zs, zs[1:]):
            e = Edge(ExtendedState(x, z), TAU, ExtendedState(x, z_next), None)
            edges.append(e)
            succ[e.source] = e.target
    diagnostics: list[str] = []
    for t in model.transitions:
        for z in zones_by_state[t.source]:
            if not subset(z, t.guard):
                continue
            src = ExtendedState(t.source, z)
            if t.resets_clock:
                for z2 in zones_by_state[t.target]:
                    if subset(z2, t.reset):
                        edges.append(Edge(src, t.event, ExtendedState(t.target, z2), t))
            elif z in zones_by_state[t.target]:
                edges.append(Edge(src, t.event, ExtendedState(t.target, z), t))
            else:
                diagnostics.append(
                    f"clock-preserving transition {t}: source zone {z} is not a zone of {t.target!r}"
                )
    event_out: dict[ExtendedState, dict[str, tuple[Edge, ...]]] = {}
    for e in edges:
        if e.label != TAU:
            per = event_out.setdefault(e.source, {})
            per[e.label] = per.get(e.label, ()) + (e,)
    return ZoneAutomaton(
        states=states,
        edges=tuple(edges),
        initial=frozenset(ExtendedState(x, Interval.point(0)) for x in model.initial),
        zones_by_state=zones_by_state,
        diagnostics=tuple(diagnostics),
        _succ=succ,
        _event_out=event_out,
    )


def to_dot(za: ZoneAutomaton) -> str:
    """Render the zone automaton as Graphviz DOT with deterministic ordering."""

    def node_id(v: ExtendedState) -> str:
        return f"{v.state} {v.zone}"

    def key(v: ExtendedState) -> tuple:
        return (v.state,) + v.zone.sort_key()

    lines = ["digraph zone_automaton {", "  rankdir=LR;"]
    for v in sorted(za.states, key=key):
        attrs = ' shape=doublecircle' if v in za.initial else ""
        lines.append(f'  "{node_id(v)}"{attrs};')
    def edge_key(e: Edge) -> tuple:
        return key(e.source) + (e.label,) + key(e.target)

    for e in sorted(za.edges, key=edge_key):
        if e.label == TAU:
            lines.append(f'  "{node_id(e.source)}" -> "{node_id(e.target)}" [style=dashed];')
        else:
            lines.append(
                f'  "{node_id(e.source)}" -> "{node_id(e.target)}" [label="{e.label}"];'
            )
    lines.append("}")
    return "\n".join(lines) + "\n"
