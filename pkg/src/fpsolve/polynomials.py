"""Three-term recurrences for the classical polynomials used by the catalog.

Each function returns the whole sequence ``[P_0(x), ..., P_n(x)]`` because
closed-form derivatives need lower-degree neighbours.  Degrees below zero
evaluate to zero so derivative formulas need no special cases.
"""

from __future__ import annotations

import math

import numpy as np


def hermite_normalized(n: int, x):
    """Orthonormal Hermite polynomials ``H_k(x) / sqrt(2^k k!)``, k = 0..n.

    With the weight ``exp(-x^2) / sqrt(pi)`` these are orthonormal; the
    recurrence avoids factorials entirely.
    """
    x = np.asarray(x, dtype=float)
    seq = [np.ones_like(x)]
    if n >= 1:
        seq.append(math.sqrt(2.0) * x)
    for k in range(1, n):
        seq.append(math.sqrt(2.0 / (k + 1)) * x * seq[k] - math.sqrt(k / (k + 1)) * seq[k - 1])
    return seq


def gegenbauer(n: int, alpha: float, t):
    """Gegenbauer polynomials ``C_k^(alpha)(t)``, k = 0..n."""
    t = np.asarray(t, dtype=float)
    seq = [np.ones_like(t)]
    if n >= 1:
        seq.append(2.0 * alpha * t)
    for k in range(1, n):
        seq.append((2.0 * t * (k + alpha) * seq[k] - (k + 2.0 * alpha - 1.0) * seq[k - 1]) / (k + 1))
    return seq


def laguerre(n: int, alpha: float, z):
    """Generalized Laguerre polynomials ``L_k^(alpha)(z)``, k = 0..n."""
    z = np.asarray(z, dtype=float)
    seq = [np.ones_like(z)]
    if n >= 1:
        seq.append(1.0 + alpha - z)
    for k in range(1, n):
        seq.append(((2 * k + 1 + alpha - z) * seq[k] - (k + alpha) * seq[k - 1]) / (k + 1))
    return seq


def top(seq, k: int):
    """``seq[k]`` with the convention that negative degrees vanish."""
    if k < 0:
        return np.zeros_like(seq[0])
    return seq[k]
