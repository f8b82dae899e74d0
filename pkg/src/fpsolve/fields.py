"""Intervals and evaluatable scalar fields with closed-form derivatives."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import EvalAtSingularity

Func = Callable[[np.ndarray], np.ndarray]

# default sampling window used when a field lives on an unbounded interval
DEFAULT_HALF_WIDTH = 10.0
POLE_TOL = 1e-12


@dataclass(frozen=True)
class Interval:
    """Open real interval ``(lo, hi)``; endpoints may be infinite."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"empty interval ({self.lo}, {self.hi})")

    def __iter__(self):
        yield self.lo
        yield self.hi

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.lo) and math.isfinite(self.hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, x, closed: bool = False):
        x = np.asarray(x)
        if closed:
            return (x >= self.lo) & (x <= self.hi)
        return (x > self.lo) & (x < self.hi)

    def contains_interval(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def intersect(self, other: "Interval") -> "Interval":
        return Interval(max(self.lo, other.lo), min(self.hi, other.hi))

    def finite_part(self, half_width: float = DEFAULT_HALF_WIDTH) -> "Interval":
        """Clip infinite endpoints to a finite box."""
        lo, hi = self.lo, self.hi
        if math.isinf(lo) and math.isinf(hi):
            return Interval(-half_width, half_width)
        if math.isinf(lo):
            return Interval(hi - 2 * half_width, hi)
        if math.isinf(hi):
            return Interval(lo, lo + 2 * half_width)
        return self

    def to_json(self) -> list:
        return [_endpoint_to_json(self.lo), _endpoint_to_json(self.hi)]

    @classmethod
    def from_json(cls, pair: Sequence) -> "Interval":
        return cls(_endpoint_from_json(pair[0]), _endpoint_from_json(pair[1]))

    def __repr__(self):
        return f"Interval({self.lo!r}, {self.hi!r})"


REAL_LINE = Interval(-math.inf, math.inf)


def _endpoint_to_json(v: float):
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return float(v)


def _endpoint_from_json(v) -> float:
    if isinstance(v, str):
        return float(v)
    return float(v)


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Real function on an interval together with its first two derivatives.

    All callables accept numpy arrays and are evaluated elementwise.
    ``window`` is a finite sub-interval where the field carries its
    interesting structure; it is the default sampling region for
    residual checks on unbounded domains.  ``poles`` lists points where the
    field is singular; evaluating within ``POLE_TOL`` of one raises
    :class:`EvalAtSingularity`.
    """

    domain: Interval
    f: Func
    df: Optional[Func] = None
    d2f: Optional[Func] = None
    window: Optional[Interval] = None
    poles: tuple = field(default_factory=tuple)

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        if self.poles:
            for p in self.poles:
                if np.any(np.abs(x - p) < POLE_TOL):
                    raise EvalAtSingularity(f"evaluation within {POLE_TOL} of singularity at {p}")
        return x

    def eval(self, x):
        x = self._check(x)
        with np.errstate(all="ignore"):
            return self.f(x)

    __call__ = eval

    def d1(self, x):
        if self.df is None:
            raise NotImplementedError("first derivative not available for this field")
        x = self._check(x)
        with np.errstate(all="ignore"):
            return self.df(x)

    def d2(self, x):
        if self.d2f is None:
            raise NotImplementedError("second derivative not available for this field")
        x = self._check(x)
        with np.errstate(all="ignore"):
            return self.d2f(x)

    @property
    def sample_window(self) -> Interval:
        if self.window is not None:
            return self.window
        return self.domain.finite_part()


def constant_field(c: float, domain: Interval = REAL_LINE) -> ScalarField:
    return ScalarField(
        domain,
        lambda x: np.full_like(np.asarray(x, dtype=float), c),
        lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        lambda x: np.zeros_like(np.asarray(x, dtype=float)),
    )


def sample_grid(window: Interval, poles=(), n_points: int = 2001, margin: float = 1e-3,
                avoid_endpoints: bool = True) -> np.ndarray:
    """Uniform sample of ``window`` with pole neighbourhoods removed.

    Finite endpoints are pulled in by ``margin`` when ``avoid_endpoints``;
    points within ``margin`` of any pole are dropped.
    """
    lo, hi = window.lo, window.hi
    if avoid_endpoints:
        lo, hi = lo + margin, hi - margin
    x = np.linspace(lo, hi, n_points)
    keep = np.ones_like(x, dtype=bool)
    for p in poles:
        keep &= np.abs(x - p) > margin
    return x[keep]

