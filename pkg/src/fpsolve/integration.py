"""Adaptive Gauss-Kronrod integration over possibly unbounded intervals.

Infinite endpoints are removed with the substitution ``x = c + s*artanh(u)``;
the mapped integrand is handed to QUADPACK on a finite interval.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy import integrate as _spi

from .fields import Interval

ABS_TOL = 1e-10
REL_TOL = 1e-10


class QuadratureFailed(ArithmeticError):
    pass


def _mapped(fn, interval: Interval, scale: float, center: float):
    lo, hi = interval.lo, interval.hi
    if math.isinf(lo) and math.isinf(hi):
        def g(u):
            return fn(center + scale * math.atanh(u)) * scale / (1.0 - u * u)
        return g, -1.0, 1.0
    if math.isinf(hi):
        def g(u):
            return fn(lo + scale * math.atanh(u)) * scale / (1.0 - u * u)
        return g, 0.0, 1.0
    if math.isinf(lo):
        def g(u):
            return fn(hi + scale * math.atanh(u)) * scale / (1.0 - u * u)
        return g, -1.0, 0.0
    return fn, lo, hi


def integrate(fn, interval: Interval, scale: float = 1.0, center: float = 0.0,
              points=None, epsabs: float = ABS_TOL, epsrel: float = REL_TOL,
              limit: int = 400) -> float:
    """Integral of scalar ``fn`` over ``interval``.

    ``points`` (finite intervals only) are interior break points.  Raises
    :class:`QuadratureFailed` on non-finite values or QUADPACK warnings.
    """
    g, a, b = _mapped(fn, interval, scale, center)

    def safe(u):
        # QUADPACK only subdivides down to u = +-1 (x = +-inf) when the
        # integrand fails to decay
        try:
            with np.errstate(all="ignore"):
                v = float(g(u))
        except (ValueError, OverflowError, ZeroDivisionError) as exc:
            raise QuadratureFailed(f"integrand not evaluable at mapped point {u}: {exc}") from exc
        if not math.isfinite(v):
            raise QuadratureFailed(f"integrand not finite at mapped point {u}")
        return v

    kw = {}
    if points is not None and interval.is_finite:
        inner = [p for p in points if a < p < b]
        if inner:
            kw["points"] = inner
    with warnings.catch_warnings():
        warnings.simplefilter("error", _spi.IntegrationWarning)
        try:
            val, _ = _spi.quad(safe, a, b, epsabs=epsabs, epsrel=epsrel, limit=limit, **kw)
        except _spi.IntegrationWarning as exc:
            raise QuadratureFailed(str(exc)) from exc
    return val
