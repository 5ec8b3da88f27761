"""Exact interval arithmetic on the non-negative time axis.

Intervals have integer (or +infinity) endpoints that are independently open
or closed.  They are used for transition guards, clock resetting ranges,
clock zones and duration ranges alike.  Time points are exact rationals
(``fractions.Fraction``), never floats: whether a clock value sits on an
integer boundary must be decided exactly.

Empty intervals are unrepresentable; operations whose result may be empty
(``intersect``) return ``None`` instead.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

INF = math.inf

TimePoint = Fraction
Rational = Union[int, Fraction]

_DECIMAL_RE = re.compile(r"^\d+(\.\d+)?$")
_FRACTION_RE = re.compile(r"^\d+/\d+$")


def parse_time(text: str) -> Fraction:
    """Parse a non-negative decimal (or ``a/b``) time point exactly."""
    text = text.strip()
    if _DECIMAL_RE.match(text) or _FRACTION_RE.match(text):
        return Fraction(text)
    raise ValueError(f"not a non-negative decimal time point: {text!r}")


def format_time(t: Rational) -> str:
    """Render a time point as exact decimal text (``1.0``, ``0.5``, ``0.25``)."""
    t = Fraction(t)
    den = t.denominator
    k = 0
    while den % 2 == 0:
        den //= 2
        k += 1
    m = 0
    while den % 5 == 0:
        den //= 5
        m += 1
    if den != 1:
        return f"{t.numerator}/{t.denominator}"
    digits = max(k, m, 1)
    scaled = t * 10**digits
    whole, frac = divmod(int(scaled), 10**digits)
    return f"{whole}.{str(frac).rjust(digits, '0').rstrip('0') or '0'}"


@dataclass(frozen=True, slots=True)
class Bound:
    """One interval endpoint: a non-negative integer or ``INF``, open or closed.

    Infinity is only legal as an open endpoint.
    """

    value: Union[int, float]
    closed: bool

    def __post_init__(self) -> None:
        if self.value is INF:
            if self.closed:
                raise ValueError("infinity must be an open bound")
        elif not isinstance(self.value, int) or self.value < 0:
            raise ValueError(f"bound value must be a non-negative integer: {self.value!r}")


@dataclass(frozen=True, slots=True)
class Interval:
    """A nonempty time interval with open/closed integer endpoints."""

    lower: Bound
    upper: Bound

    def __post_init__(self) -> None:
        if self.lower.value is INF:
            raise ValueError("lower bound cannot be infinite")
        if self.lower.value > self.upper.value:
            raise ValueError(f"empty interval: lower {self.lower} above upper {self.upper}")
        if self.lower.value == self.upper.value and not (self.lower.closed and self.upper.closed):
            raise ValueError("degenerate interval must be a closed point")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def closed(a: int, b: int) -> "Interval":
        return Interval(Bound(a, True), Bound(b, True))

    @staticmethod
    def open(a: int, b: Union[int, float]) -> "Interval":
        return Interval(Bound(a, False), Bound(b, False))

    @staticmethod
    def open_closed(a: int, b: int) -> "Interval":
        return Interval(Bound(a, False), Bound(b, True))

    @staticmethod
    def closed_open(a: int, b: int) -> "Interval":
        return Interval(Bound(a, True), Bound(b, False))

    @staticmethod
    def point(k: int) -> "Interval":
        return Interval(Bound(k, True), Bound(k, True))

    @staticmethod
    def above(k: int) -> "Interval":
        """The unbounded interval ``(k, inf)``."""
        return Interval(Bound(k, False), Bound(INF, False))

    # -- predicates --------------------------------------------------------

    @property
    def is_point(self) -> bool:
        return self.lower.value == self.upper.value

    @property
    def is_bounded(self) -> bool:
        return self.upper.value is not INF

    def __contains__(self, t: Rational) -> bool:
        return contains(self, t)

    def __str__(self) -> str:
        lo = "[" if self.lower.closed else "("
        hi = "]" if self.upper.closed else ")"
        up = "inf" if self.upper.value is INF else str(self.upper.value)
        return f"{lo}{self.lower.value},{up}{hi}"

    def sort_key(self) -> tuple:
        return (self.lower.value, not self.lower.closed, self.upper.value, self.upper.closed)


_INTERVAL_RE = re.compile(r"^([\[(])\s*(\d+)\s*,\s*(\d+|inf)\s*([\])])$")


def parse_interval(text: str) -> Interval:
    """Parse the text form ``[a,b]``, ``(a,b)``, ``[a,b)``, ``(a,b]``, ``(a,inf)``."""
    m = _INTERVAL_RE.match(text.strip())
    if not m:
        raise ValueError(f"not an interval: {text!r}")
    lo_closed = m.group(1) == "["
    hi_closed = m.group(4) == "]"
    lo = int(m.group(2))
    hi: Union[int, float] = INF if m.group(3) == "inf" else int(m.group(3))
    return Interval(Bound(lo, lo_closed), Bound(hi, hi_closed))


# -- operations -------------------------------------------------------------


def contains(a: Interval, t: Rational) -> bool:
    """Exact membership of a time point, respecting openness."""
    if t < a.lower.value or (t == a.lower.value and not a.lower.closed):
        return False
    if a.upper.value is INF:
        return True
    if t > a.upper.value or (t == a.upper.value and not a.upper.closed):
        return False
    return True


def subset(a: Interval, b: Interval) -> bool:
    """True iff every point of ``a`` lies in ``b``."""
    lo_ok = b.lower.value < a.lower.value or (
        b.lower.value == a.lower.value and (b.lower.closed or not a.lower.closed)
    )
    up_ok = b.upper.value > a.upper.value or (
        b.upper.value == a.upper.value and (b.upper.closed or not a.upper.closed)
    )
    return lo_ok and up_ok


def add(a: Interval, b: Interval) -> Interval:
    """Pointwise sum ``{t1 + t2 | t1 in a, t2 in b}``."""
    lower = Bound(a.lower.value + b.lower.value, a.lower.closed and b.lower.closed)
    if a.upper.value is INF or b.upper.value is INF:
        upper = Bound(INF, False)
    else:
        upper = Bound(a.upper.value + b.upper.value, a.upper.closed and b.upper.closed)
    return Interval(lower, upper)


def intersect(a: Interval, b: Interval) -> Optional[Interval]:
    """Intersection, or ``None`` when the intervals are disjoint."""
    if a.lower.value > b.lower.value:
        lo = a.lower
    elif b.lower.value > a.lower.value:
        lo = b.lower
    else:
        lo = Bound(a.lower.value, a.lower.closed and b.lower.closed)
    if a.upper.value < b.upper.value:
        hi = a.upper
    elif b.upper.value < a.upper.value:
        hi = b.upper
    else:
        closed = a.upper.closed and b.upper.closed
        hi = Bound(a.upper.value, closed) if a.upper.value is not INF else Bound(INF, False)
    if lo.value > hi.value:
        return None
    if lo.value == hi.value and not (lo.closed and hi.closed):
        return None
    return Interval(lo, hi)


def distance(a: Interval, b: Interval) -> Interval:
    """Distance range ``{|t1 - t2| | t1 in a, t2 in b}``.

    If the intervals intersect the lower bound is a closed 0; otherwise it is
    the gap between the nearer endpoints, open when either contributing
    endpoint is open.  The upper bound is the larger of the two far-endpoint
    differences, open when either contributing endpoint is open.
    """
    if intersect(a, b) is not None:
        lower = Bound(0, True)
    else:
        left, right = (a, b) if a.upper.value <= b.lower.value else (b, a)
        gap = right.lower.value - left.upper.value
        lower = Bound(gap, left.upper.closed and right.lower.closed)

    # Candidate suprema: b.upper - a.lower and a.upper - b.lower.
    def far(upper: Bound, low: Bound) -> tuple:
        if upper.value is INF:
            return (INF, False)
        return (upper.value - low.value, upper.closed and low.closed)

    v1, c1 = far(b.upper, a.lower)
    v2, c2 = far(a.upper, b.lower)
    if v1 > v2:
        upper = Bound(v1, c1)
    elif v2 > v1:
        upper = Bound(v2, c2)
    else:
        upper = Bound(v1, c1 or c2) if v1 is not INF else Bound(INF, False)
    return Interval(lower, upper)


def cap_upper(a: Interval, ceiling: int) -> Interval:
    """Clamp an interval's upper bound just above ``ceiling``.

    Returns ``a`` unchanged if its upper value is at most ``ceiling``;
    otherwise replaces the upper bound by ``ceiling + 1`` closed.  Membership
    of any point t <= ceiling is unchanged.  The caller must not pass an
    interval lying entirely above ``ceiling + 1``.
    """
    if ceiling < 0:
        raise ValueError("ceiling must be non-negative")
    if a.upper.value is not INF and a.upper.value <= ceiling:
        return a
    new_upper = ceiling + 1
    if a.lower.value > new_upper or (a.lower.value == new_upper and not a.lower.closed):
        raise ValueError(f"cannot cap {a} at {ceiling}: interval lies above the cap")
    return Interval(a.lower, Bound(new_upper, True))
