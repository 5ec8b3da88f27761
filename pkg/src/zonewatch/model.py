"""Timed finite automata: the model, timed runs, observations and projections.

A model is a finite automaton over a single clock.  Each transition carries a
guard (the closed interval of clock values at which it may fire) and a reset
policy: either a closed interval of values the clock may take after firing,
or ``id`` meaning the clock keeps running.  The alphabet is split into
observable and unobservable events.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

from .intervals import Interval, format_time, parse_interval, parse_time

ID_RESET = "id"

TAU = "τ"


@dataclass(frozen=True, slots=True)
class Transition:
    source: str
    event: str
    target: str
    guard: Interval
    reset: Union[Interval, str]  # an Interval or ID_RESET

    @property
    def resets_clock(self) -> bool:
        return self.reset != ID_RESET

    def __str__(self) -> str:
        return f"({self.source},{self.event},{self.target})"


@dataclass(frozen=True, eq=False)
class TFA:
    """A single-clock timed finite automaton with an observable sub-alphabet.

    ``transitions`` is stored as a tuple for deterministic iteration but the
    transition relation is a set: equality ignores declaration order.
    """

    states: frozenset[str]
    alphabet: frozenset[str]
    observable: frozenset[str]
    transitions: tuple[Transition, ...]
    initial: frozenset[str]

    def _key(self) -> tuple:
        return (
            self.states,
            self.alphabet,
            self.observable,
            frozenset(self.transitions),
            self.initial,
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TFA):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    @property
    def unobservable(self) -> frozenset[str]:
        return self.alphabet - self.observable

    def outgoing(self, state: str) -> tuple[Transition, ...]:
        return self._by_source().get(state, ())

    def incoming(self, state: str) -> tuple[Transition, ...]:
        return self._by_target().get(state, ())

    def lookup(self, source: str, event: str, target: str) -> Optional[Transition]:
        return self._by_triple().get((source, event, target))

    def max_constant(self) -> int:
        best = 0
        for t in self.transitions:
            best = max(best, int(t.guard.upper.value))
            if isinstance(t.reset, Interval):
                best = max(best, int(t.reset.upper.value))
        return best

    # Index maps are derived lazily and cached on the instance.
    def _by_source(self) -> dict:
        return self._index()[0]

    def _by_target(self) -> dict:
        return self._index()[1]

    def _by_triple(self) -> dict:
        return self._index()[2]

    def _index(self) -> tuple:
        cached = getattr(self, "_idx", None)
        if cached is None:
            by_src: dict = {}
            by_tgt: dict = {}
            by_triple: dict = {}
            for t in self.transitions:
                by_src.setdefault(t.source, []).append(t)
                by_tgt.setdefault(t.target, []).append(t)
                by_triple[(t.source, t.event, t.target)] = t
            cached = (
                {k: tuple(v) for k, v in by_src.items()},
                {k: tuple(v) for k, v in by_tgt.items()},
                by_triple,
            )
            object.__setattr__(self, "_idx", cached)
        return cached


@dataclass(frozen=True, slots=True)
class Diagnostic:
    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


def validate(model: TFA, require_ro: bool = False) -> list[Diagnostic]:
    """Check model well-formedness; returns one diagnostic per violation.

    With ``require_ro`` the model must also reset the clock on every
    transition labelled by an observable event.
    """
    out: list[Diagnostic] = []
    if not model.initial:
        out.append(Diagnostic("empty-initial", "the set of initial states is empty"))
    for x in sorted(model.initial - model.states):
        out.append(Diagnostic("unknown-initial", f"initial state {x!r} is not a state"))
    for e in sorted(model.observable - model.alphabet):
        out.append(Diagnostic("unknown-observable", f"observable event {e!r} is not in the alphabet"))
    if TAU in model.alphabet:
        out.append(Diagnostic("reserved-event", f"event name {TAU!r} is reserved"))
    seen: set = set()
    for t in model.transitions:
        if t.source not in model.states:
            out.append(Diagnostic("unknown-state", f"transition {t} leaves unknown state {t.source!r}"))
        if t.target not in model.states:
            out.append(Diagnostic("unknown-state", f"transition {t} enters unknown state {t.target!r}"))
        if t.event not in model.alphabet:
            out.append(Diagnostic("unknown-event", f"transition {t} uses unknown event {t.event!r}"))
        if not (t.guard.lower.closed and t.guard.upper.closed and t.guard.is_bounded):
            out.append(Diagnostic("guard-not-closed", f"guard {t.guard} of {t} must be closed and bounded"))
        if isinstance(t.reset, Interval):
            if not (t.reset.lower.closed and t.reset.upper.closed and t.reset.is_bounded):
                out.append(Diagnostic("reset-not-closed", f"reset {t.reset} of {t} must be closed and bounded"))
        elif t.reset != ID_RESET:
            out.append(Diagnostic("bad-reset", f"reset of {t} must be an interval or {ID_RESET!r}"))
        key = (t.source, t.event, t.target)
        if key in seen:
            out.append(Diagnostic("duplicate-transition", f"transition {t} appears more than once"))
        seen.add(key)
        if require_ro and t.event in model.observable and not t.resets_clock:
            out.append(
                Diagnostic("ro-violation", f"observable transition {t} does not reset the clock")
            )
    return out


class ModelError(ValueError):
    """Raised when an operation requires a well-formed model and gets diagnostics."""

    def __init__(self, diagnostics: Sequence[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in diagnostics))


def require_valid(model: TFA, require_ro: bool = False) -> None:
    diags = validate(model, require_ro=require_ro)
    if diags:
        raise ModelError(diags)


# -- timed runs --------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class RunStep:
    event: str
    time: Fraction
    state: str
    clock: Fraction


@dataclass(frozen=True)
class TimedRun:
    """A run: a start timed state plus the steps taken, with absolute times."""

    start_state: str
    start_clock: Fraction
    start_time: Fraction
    steps: tuple[RunStep, ...] = ()

    @property
    def end_state(self) -> str:
        return self.steps[-1].state if self.steps else self.start_state

    @property
    def end_clock(self) -> Fraction:
        return self.steps[-1].clock if self.steps else self.start_clock

    @property
    def end_time(self) -> Fraction:
        return self.steps[-1].time if self.steps else self.start_time

    def word(self) -> tuple[tuple[str, Fraction], ...]:
        """The timed word generated by the run."""
        return tuple((s.event, s.time) for s in self.steps)

    def __str__(self) -> str:
        bits = [f"({self.start_state},{format_time(self.start_clock)})"]
        for s in self.steps:
            bits.append(f"--({s.event},{format_time(s.time)})--> ({s.state},{format_time(s.clock)})")
        return " ".join(bits)


def check_run(model: TFA, run: TimedRun) -> bool:
    """Decide run legality step by step.

    Each step must use a declared transition, fire with the aged clock inside
    the guard, and either land the clock in the reset interval or, for ``id``
    transitions, carry the aged clock over unchanged.  Times may not decrease.
    """
    if run.start_state not in model.states or run.start_clock < 0:
        return False
    state, clock, time = run.start_state, run.start_clock, run.start_time
    for step in run.steps:
        tr = model.lookup(state, step.event, step.state)
        if tr is None or step.time < time:
            return False
        aged = clock + (step.time - time)
        if aged not in tr.guard:
            return False
        if tr.resets_clock:
            if step.clock not in tr.reset:
                return False
        elif step.clock != aged:
            return False
        state, clock, time = step.state, step.clock, step.time
    return True


# -- observations and projections --------------------------------------------


@dataclass(frozen=True)
class TimedObservation:
    """Observable events with their timestamps, plus the current time."""

    events: tuple[tuple[str, Fraction], ...]
    query_time: Fraction

    def __post_init__(self) -> None:
        last = Fraction(0)
        for name, ts in self.events:
            if ts < last:
                raise ValueError(f"observation timestamps decrease at ({name},{format_time(ts)})")
            last = ts
        if self.events and self.events[-1][1] > self.query_time:
            raise ValueError("query time precedes the last observation")
        if self.query_time < 0:
            raise ValueError("query time must be non-negative")


def project(word: Iterable[tuple[str, Fraction]], model: TFA) -> tuple[tuple[str, Fraction], ...]:
    """Erase unobservable pairs from a timed word, keeping order and times."""
    return tuple((e, t) for e, t in word if e in model.observable)


def project_logical(word: Iterable[str], model: TFA) -> tuple[str, ...]:
    """Erase unobservable events from a logical word."""
    return tuple(e for e in word if e in model.observable)


# -- JSON document form -------------------------------------------------------


def model_to_dict(model: TFA) -> dict:
    return {
        "states": sorted(model.states),
        "alphabet": sorted(model.alphabet),
        "observable": sorted(model.observable),
        "initial": sorted(model.initial),
        "transitions": [
            {
                "from": t.source,
                "event": t.event,
                "to": t.target,
                "guard": str(t.guard),
                "reset": str(t.reset) if isinstance(t.reset, Interval) else ID_RESET,
            }
            for t in sorted(model.transitions, key=lambda t: (t.source, t.event, t.target))
        ],
    }


def model_from_dict(doc: dict) -> TFA:
    try:
        transitions = tuple(
            Transition(
                source=tr["from"],
                event=tr["event"],
                target=tr["to"],
                guard=parse_interval(tr["guard"]),
                reset=ID_RESET if tr["reset"] == ID_RESET else parse_interval(tr["reset"]),
            )
            for tr in doc["transitions"]
        )
        return TFA(
            states=frozenset(doc["states"]),
            alphabet=frozenset(doc["alphabet"]),
            observable=frozenset(doc["observable"]),
            transitions=transitions,
            initial=frozenset(doc["initial"]),
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed model document: {exc}") from exc


def dump_model(model: TFA) -> str:
    return json.dumps(model_to_dict(model), indent=2, sort_keys=False) + "\n"


def load_model(path: str) -> TFA:
    with open(path, "r", encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))


def parse_observation(text: str, time: Fraction) -> TimedObservation:
    """Parse ``e@t`` pairs separated by commas; the empty string is no events."""
    text = text.strip()
    events: list[tuple[str, Fraction]] = []
    if text:
        for chunk in text.split(","):
            chunk = chunk.strip()
            if "@" not in chunk:
                raise ValueError(f"malformed observation pair {chunk!r} (expected event@time)")
            name, _, stamp = chunk.rpartition("@")
            if not name:
                raise ValueError(f"malformed observation pair {chunk!r} (empty event)")
            events.append((name, parse_time(stamp)))
    return TimedObservation(events=tuple(events), query_time=time)
