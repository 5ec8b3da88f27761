"""State estimation over the zone automaton.

The central routine explores runs of the zone automaton while tracking the
exact window of total elapsed times each run can realize.  A run alternates
time elapse inside a state (``tau`` steps) with event steps.  Clock-resetting
events decouple the clock from the past, so durations compose by interval
addition across them.  Clock-preserving events do not: the clock keeps
running through them, so the whole stretch between two resets contributes a
single distance range from the interval where the stretch began to the
interval where it ends.  Collapsing each stretch to one distance is what
keeps the windows exact; summing per-segment (or per-edge) distances would
over-approximate.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .intervals import (
    INF,
    Interval,
    Rational,
    add,
    cap_upper,
    contains,
    distance,
    format_time,
)
from .model import TAU, TFA, TimedObservation, TimedRun, RunStep, require_valid
from .zones import ExtendedState, ZoneAutomaton


def ext_sort_key(v: ExtendedState) -> tuple:
    return (v.state,) + v.zone.sort_key()


@dataclass(frozen=True)
class Estimate:
    """The extended states consistent with an observation, and their states."""

    extended: frozenset[ExtendedState]
    discrete: frozenset[str]

    @staticmethod
    def from_extended(extended: Iterable[ExtendedState]) -> "Estimate":
        ext = frozenset(extended)
        return Estimate(extended=ext, discrete=frozenset(v.state for v in ext))

    @property
    def empty(self) -> bool:
        return not self.extended

    def to_json_dict(self, anchor: Rational = 0) -> dict:
        return {
            "discrete": sorted(self.discrete),
            "extended": [[v.state, str(v.zone)] for v in sorted(self.extended, key=ext_sort_key)],
            "anchor": format_time(anchor),
        }


# -- duration-tracking search -------------------------------------------------

# A search node: current extended state, the clock interval at the start of
# the current reset-free stretch, and the (capped) sum of completed stretch
# durations.
_Node = tuple[ExtendedState, Interval, Interval]

_ZERO = Interval.point(0)


def _lower_exceeds(window: Interval, dt: Fraction) -> bool:
    lo = window.lower
    return lo.value > dt or (lo.value == dt and not lo.closed)


@dataclass
class _SearchOutcome:
    hits: dict  # ExtendedState -> _Node that realized dt there
    parents: dict  # _Node -> (parent _Node, (label, Transition|None)) | None
    goal: Optional[_Node]


def _duration_reach(
    za: ZoneAutomaton,
    starts: Iterable[ExtendedState],
    dt: Fraction,
    allowed_events: frozenset[str],
    target_state: Optional[str] = None,
    want_parents: bool = False,
) -> _SearchOutcome:
    """All extended states reachable by an allowed-event run of duration dt.

    The duration window of a node is ``acc (+) D(entry, position zone)``.
    Windows whose lower bound already exceeds ``dt`` can never recover (both
    components only grow), so such nodes are pruned.  Accumulated sums are
    capped just above ``ceil(dt)``, which preserves membership of ``dt`` and
    makes the node space finite even under unobservable cycles.
    """
    ceiling = max(0, math.ceil(dt))
    hits: dict[ExtendedState, _Node] = {}
    parents: dict[_Node, Optional[tuple]] = {}
    queue: deque[_Node] = deque()
    seen: set[_Node] = set()

    def push(node: _Node, parent: Optional[tuple]) -> None:
        if node in seen:
            return
        seen.add(node)
        if want_parents:
            parents[node] = parent
        queue.append(node)

    for v in starts:
        push((v, v.zone, _ZERO), None)

    goal: Optional[_Node] = None
    while queue:
        node = queue.popleft()
        v, entry, acc = node
        window = add(acc, distance(entry, v.zone))
        if _lower_exceeds(window, dt):
            continue
        if contains(window, dt):
            if v not in hits:
                hits[v] = node
            if target_state is not None and v.state == target_state:
                goal = node
                break
        nxt = za.tau_successor(v)
        if nxt is not None:
            push((nxt, entry, acc), (node, (TAU, None)))
        for edge in za.event_edges(v):
            if edge.label not in allowed_events:
                continue
            tr = edge.transition
            if tr is not None and tr.resets_clock:
                new_acc = cap_upper(window, ceiling)
                child = (edge.target, edge.target.zone, new_acc)
            else:
                child = (edge.target, entry, acc)
            push(child, (node, (edge.label, tr)))
    return _SearchOutcome(hits=hits, parents=parents, goal=goal)


# -- lambda-estimation and tau reachability -----------------------------------


def tau_reach(za: ZoneAutomaton, v: ExtendedState) -> list[tuple[ExtendedState, Interval]]:
    """Extended states reachable from ``v`` by time elapse alone, with the
    window of elapsed times realizing each (the distance from the starting
    zone to the ending zone, never a sum over intermediate hops)."""
    if v not in za.states:
        raise ValueError(f"unknown extended state {v}")
    zones = za.zones(v.state)
    out: list[tuple[ExtendedState, Interval]] = []
    started = False
    for z in zones:
        if z == v.zone:
            started = True
        if started:
            out.append((ExtendedState(v.state, z), distance(v.zone, z)))
    return out


def lambda_estimation(
    za: ZoneAutomaton, model: TFA, v: ExtendedState, dt: Rational
) -> frozenset[ExtendedState]:
    """Extended states reachable from ``v`` in exactly ``dt`` time units while
    producing no observation."""
    dt = Fraction(dt)
    if dt < 0:
        raise ValueError("elapsed time must be non-negative")
    if v not in za.states:
        raise ValueError(f"unknown extended state {v}")
    outcome = _duration_reach(za, [v], dt, frozenset(model.unobservable))
    return frozenset(outcome.hits)


def _lambda_union(
    za: ZoneAutomaton, model: TFA, support: Iterable[ExtendedState], dt: Fraction
) -> frozenset[ExtendedState]:
    outcome = _duration_reach(za, sorted(support, key=ext_sort_key), dt, frozenset(model.unobservable))
    return frozenset(outcome.hits)


def _event_step(
    za: ZoneAutomaton, support: Iterable[ExtendedState], event: str
) -> frozenset[ExtendedState]:
    out = set()
    for v in support:
        for edge in za.event_edges(v, event):
            out.add(edge.target)
    return frozenset(out)


# -- T-reachability with witnesses --------------------------------------------


@dataclass(frozen=True)
class Witness:
    """A zone-automaton run witnessing T-reachability, plus a concrete replay.

    ``steps`` lists the labels along the run; ``run`` is a legal timed run of
    the underlying model realizing the duration (``run`` ends at the last
    event; ``trailing_dwell`` is the remaining wait at the final state)."""

    start: ExtendedState
    steps: tuple[tuple[str, ExtendedState], ...]
    duration: Fraction
    run: TimedRun
    trailing_dwell: Fraction
    final_zone: Interval

    def describe(self) -> str:
        bits = [str(self.start)]
        for label, v in self.steps:
            bits.append(f"-{label}-> {v}")
        lines = ["zone run: " + " ".join(bits)]
        lines.append(f"timed run: {self.run}")
        lines.append(
            f"then wait {format_time(self.trailing_dwell)} "
            f"(total duration {format_time(self.duration)})"
        )
        return "\n".join(lines)


def t_reachable(
    za: ZoneAutomaton,
    model: TFA,
    source: str,
    target: str,
    duration: Rational,
) -> tuple[bool, Optional[Witness]]:
    """Decide whether ``target`` can be reached from ``source`` (starting at
    any clock value) by an evolution of exactly the given duration, over any
    events.  On success, also return a witness with a concrete legal run."""
    duration = Fraction(duration)
    if duration < 0:
        raise ValueError("duration must be non-negative")
    for x in (source, target):
        if x not in model.states:
            raise ValueError(f"unknown state {x!r}")
    starts = [ExtendedState(source, z) for z in za.zones(source)]
    outcome = _duration_reach(
        za,
        starts,
        duration,
        frozenset(model.alphabet),
        target_state=target,
        want_parents=True,
    )
    if outcome.goal is None:
        return False, None
    path = _unwind(outcome.parents, outcome.goal)
    witness = _realize(path, duration)
    return True, witness


def _unwind(parents: dict, goal: _Node) -> list[tuple[_Node, Optional[tuple]]]:
    chain: list[tuple[_Node, Optional[tuple]]] = []
    node: Optional[_Node] = goal
    while node is not None:
        link = parents[node]
        if link is None:
            chain.append((node, None))
            node = None
        else:
            parent, action = link
            chain.append((node, action))
            node = parent
    chain.reverse()
    return chain


# Feasibility ranges during witness realization carry rational (not integer)
# endpoints, so they live outside the Interval type: (lo, lo_closed, hi,
# hi_closed) with lo possibly -inf and hi possibly +inf.
_Range = tuple


def _rng(iv: Interval) -> _Range:
    return (iv.lower.value, iv.lower.closed, iv.upper.value, iv.upper.closed)


def _rng_intersect(a: _Range, b: _Range) -> Optional[_Range]:
    lo, lo_c = (a[0], a[1]) if a[0] > b[0] else (b[0], b[1]) if b[0] > a[0] else (a[0], a[1] and b[1])
    hi, hi_c = (a[2], a[3]) if a[2] < b[2] else (b[2], b[3]) if b[2] < a[2] else (a[2], a[3] and b[3])
    if lo > hi or (lo == hi and not (lo_c and hi_c)):
        return None
    return (lo, lo_c, hi, hi_c)


def _rng_shift(r: _Range, delta: Fraction) -> _Range:
    lo = r[0] if r[0] == -INF else r[0] + delta
    hi = r[2] if r[2] == INF else r[2] + delta
    return (lo, r[1], hi, r[3])


def _rng_sub_from(total: Fraction, r: _Range) -> _Range:
    """The range {total - s : s in r}."""
    lo = -INF if r[2] == INF else total - r[2]
    hi = INF if r[0] == -INF else total - r[0]
    return (lo, r[3], hi, r[1])


def _rng_pick(r: _Range) -> Fraction:
    lo, lo_c, hi, _ = r
    if lo_c:
        return Fraction(lo)
    if hi == INF:
        return Fraction(lo) + 1
    return (Fraction(lo) + Fraction(hi)) / 2


def _realize(path: Sequence[tuple[_Node, Optional[tuple]]], total: Fraction) -> Witness:
    """Extract a concrete legal timed run from a zone-run search path.

    First splits the path into reset-free stretches and fixes each stretch's
    duration so they sum to ``total`` (always feasible: the search certified
    ``total`` is in the interval sum of the stretch windows).  Then picks the
    entry clock of each stretch and monotone firing clocks for the
    clock-preserving events inside it.
    """
    steps_out: list[tuple[str, ExtendedState]] = []
    for node, action in path[1:]:
        steps_out.append((action[0], node[0]))

    # Split into stretches: (entry zone, [(event, firing zone, target state)...],
    # exit zone, terminal reset transition or None).
    stretches: list[dict] = []
    cur = {"entry": path[0][0][0].zone, "events": [], "exit": path[0][0][0].zone, "state0": path[0][0][0].state}
    for (node, action), (prev_node, _) in zip(path[1:], path[:-1]):
        label, tr = action
        v = node[0]
        if label == TAU:
            cur["exit"] = v.zone
        elif tr is not None and tr.resets_clock:
            cur["exit"] = prev_node[0].zone
            cur["terminal"] = (label, v.state)
            stretches.append(cur)
            cur = {"entry": v.zone, "events": [], "exit": v.zone, "state0": v.state}
        else:
            cur["events"].append((label, prev_node[0].zone, v.state))
            cur["exit"] = v.zone
    stretches.append(cur)

    windows = [distance(s["entry"], s["exit"]) for s in stretches]
    suffix: list[Interval] = [None] * len(windows)  # type: ignore[list-item]
    acc = _ZERO
    for i in range(len(windows) - 1, -1, -1):
        suffix[i] = acc
        acc = add(windows[i], acc)

    durations: list[Fraction] = []
    remaining = total
    for i, w in enumerate(windows):
        feasible = _rng_intersect(_rng(w), _rng_sub_from(remaining, _rng(suffix[i])))
        assert feasible is not None, "search certified an unrealizable duration split"
        d = _rng_pick(feasible)
        durations.append(d)
        remaining -= d

    run_steps: list[RunStep] = []
    stretch_start_time = Fraction(0)
    entry_clock: Fraction = Fraction(0)
    start_clock: Optional[Fraction] = None
    for i, (s, d) in enumerate(zip(stretches, durations)):
        feas = _rng_intersect(_rng(s["entry"]), _rng_shift(_rng(s["exit"]), -d))
        assert feas is not None, "stretch duration outside its distance window"
        entry_clock = _rng_pick(feas)
        if i == 0:
            start_clock = entry_clock
        else:
            # Rewrite the pending reset step with the clock actually chosen.
            last = run_steps[-1]
            run_steps[-1] = RunStep(last.event, last.time, last.state, entry_clock)
        exit_clock = entry_clock + d
        c_prev = entry_clock
        for event, firing_zone, tgt in s["events"]:
            feas_c = _rng_intersect(_rng(firing_zone), (c_prev, True, exit_clock, True))
            assert feas_c is not None, "no firing clock inside the stretch"
            c = _rng_pick(feas_c)
            run_steps.append(RunStep(event, stretch_start_time + (c - entry_clock), tgt, c))
            c_prev = c
        if "terminal" in s:
            event, tgt = s["terminal"]
            # Clock placeholder; the next iteration fills in the reset value.
            run_steps.append(RunStep(event, stretch_start_time + d, tgt, Fraction(0)))
        stretch_start_time += d

    assert start_clock is not None
    run = TimedRun(
        start_state=stretches[0]["state0"],
        start_clock=start_clock,
        start_time=Fraction(0),
        steps=tuple(run_steps),
    )
    return Witness(
        start=path[0][0][0],
        steps=tuple(steps_out),
        duration=total,
        run=run,
        trailing_dwell=total - run.end_time,
        final_zone=stretches[-1]["exit"],
    )


# -- observation-driven estimation (batch and incremental) ---------------------


def _check_observation(model: TFA, obs: TimedObservation) -> None:
    for name, _ in obs.events:
        if name not in model.observable:
            raise ValueError(f"event {name!r} is not observable")


def estimate(za: ZoneAutomaton, model: TFA, obs: TimedObservation) -> Estimate:
    """The discrete states (with clock zones) consistent with an observation.

    Alternates no-observation estimation over each inter-observation gap with
    an event step over every matching observable edge.  Requires the model to
    reset its clock on observable events; an inconsistent observation yields
    an empty estimate rather than an error.
    """
    require_valid(model, require_ro=True)
    _check_observation(model, obs)
    support: frozenset[ExtendedState] = za.initial
    anchor = Fraction(0)
    for event, ts in obs.events:
        reachable = _lambda_union(za, model, support, ts - anchor)
        support = _event_step(za, reachable, event)
        anchor = ts
        if not support:
            return Estimate.from_extended(())
    final = _lambda_union(za, model, support, obs.query_time - anchor)
    return Estimate.from_extended(final)


@dataclass(frozen=True)
class BeliefState:
    """Everything the online estimator remembers: the extended states
    consistent with the observations so far, and the time of the last one."""

    support: frozenset[ExtendedState]
    anchor_time: Fraction


def belief_init(za: ZoneAutomaton) -> BeliefState:
    return BeliefState(support=za.initial, anchor_time=Fraction(0))


def belief_advance(
    za: ZoneAutomaton, model: TFA, belief: BeliefState, event: str, time: Rational
) -> BeliefState:
    """Consume one observed event, returning the belief just after it."""
    time = Fraction(time)
    if time < belief.anchor_time:
        raise ValueError("observation time precedes the belief anchor")
    if event not in model.observable:
        raise ValueError(f"event {event!r} is not observable")
    require_valid(model, require_ro=True)
    reachable = _lambda_union(za, model, belief.support, time - belief.anchor_time)
    return BeliefState(support=_event_step(za, reachable, event), anchor_time=time)


def belief_query(
    za: ZoneAutomaton, model: TFA, belief: BeliefState, time: Rational
) -> Estimate:
    """The estimate at ``time`` given the belief, without consuming anything."""
    time = Fraction(time)
    if time < belief.anchor_time:
        raise ValueError("query time precedes the belief anchor")
    return Estimate.from_extended(
        _lambda_union(za, model, belief.support, time - belief.anchor_time)
    )
