import os

import pytest

from zonewatch import (
    ID_RESET,
    Interval,
    TFA,
    Transition,
    build_zone_automaton,
    load_model,
)

MODEL_PATH = os.path.join(os.path.dirname(__file__), "..", "models", "fig1.json")


def make_fig1() -> TFA:
    """The five-state reference model used throughout the tests."""
    return TFA(
        states=frozenset({"x0", "x1", "x2", "x3", "x4"}),
        alphabet=frozenset({"a", "b", "c"}),
        observable=frozenset({"a"}),
        transitions=(
            Transition("x0", "c", "x1", Interval.closed(1, 3), Interval.closed(1, 1)),
            Transition("x0", "b", "x2", Interval.closed(0, 1), ID_RESET),
            Transition("x1", "a", "x4", Interval.closed(1, 3), Interval.closed(0, 1)),
            Transition("x2", "c", "x3", Interval.closed(1, 2), ID_RESET),
            Transition("x3", "a", "x2", Interval.closed(0, 2), Interval.closed(0, 0)),
            Transition("x4", "b", "x3", Interval.closed(0, 1), Interval.closed(0, 0)),
        ),
        initial=frozenset({"x0"}),
    )


@pytest.fixture(scope="session")
def fig1() -> TFA:
    return make_fig1()


@pytest.fixture(scope="session")
def fig1_za(fig1):
    return build_zone_automaton(fig1)


@pytest.fixture(scope="session")
def fig1_path() -> str:
    return MODEL_PATH


@pytest.fixture(scope="session")
def fig1_from_file() -> TFA:
    return load_model(MODEL_PATH)
