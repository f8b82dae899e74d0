"""Euler-Maruyama sampler for ``dX = -U'(X) dt + dB``.

With diffusion constant 1/2 the noise amplitude is exactly one, and the
stationary law of the chain (as ``dt -> 0``) is ``exp(-2U)/Z``.  Each chain
draws from its own Philox stream spawned from one ``SeedSequence``, so chain
``c`` produces the same path regardless of how many chains run beside it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import (EmptyBins, SingularStart, SingularityInsideDomain, StepTooLarge,
                     UnstableStep)
from .fields import Interval
from .solutions import SteadyState
from .susy import DriftPotential

STABILITY_LIMIT = 0.5
NOISE_BLOCK = 256
MIN_SAMPLES = 100_000
MIN_PER_BIN = 5


@dataclass(frozen=True)
class SamplerConfig:
    dt: float
    steps: int
    burn_in: int
    seed: int
    chains: int
    reflection_bounds: Interval
    x0: Optional[float] = None

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError("dt must be positive")
        if self.burn_in < 0 or self.steps <= self.burn_in:
            raise ValueError("need 0 <= burn_in < steps")
        if self.chains < 1:
            raise ValueError("chains must be >= 1")
        if not self.reflection_bounds.is_finite:
            raise ValueError("reflection bounds must be finite")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def n_recorded(self) -> int:
        return self.steps - self.burn_in


class SampleStats(NamedTuple):
    edges: np.ndarray
    counts: np.ndarray
    expected: np.ndarray  # bin probabilities times the sample count
    tv_distance: float
    n_effective: float


def _generators(seed: int, chains: int):
    root = np.random.SeedSequence(int(seed))
    return [np.random.Generator(np.random.Philox(s)) for s in root.spawn(chains)]


def barrier_points(U: DriftPotential, bounds: Interval) -> np.ndarray:
    """Singularities of ``U`` in the closed bounds, plus any bound where ``U`` is infinite."""
    pts = [s for s in U.singularities if bounds.lo <= s <= bounds.hi]
    with np.errstate(all="ignore"):
        for e in bounds:
            if not np.isfinite(U.U(np.asarray([e]))[0]):
                pts.append(e)
    return np.array(sorted(set(pts)))


def max_drift(U: DriftPotential, bounds: Interval, dt: float, n: int = 20001) -> float:
    """``max|U'|`` on ``bounds`` outside a ``sqrt(dt)`` zone around barriers."""
    x = np.linspace(bounds.lo, bounds.hi, n)
    keep = np.ones(x.size, dtype=bool)
    for s in barrier_points(U, bounds):
        keep &= np.abs(x - s) > math.sqrt(dt)
    with np.errstate(all="ignore"):
        d = np.abs(U.U.d1(x[keep]))
    d = d[np.isfinite(d)]
    return float(d.max()) if d.size else 0.0


def _start(U: DriftPotential, cfg: SamplerConfig) -> float:
    b = cfg.reflection_bounds
    if cfg.x0 is None:
        x = np.linspace(b.lo, b.hi, 20001)[1:-1]
        with np.errstate(all="ignore"):
            u = np.asarray(U.U(x), dtype=float)
        u = np.where(np.isfinite(u), u, np.inf)
        x0 = float(x[int(np.argmin(u))])
    else:
        x0 = float(cfg.x0)
    if any(abs(x0 - s) < 1e-12 for s in U.singularities) or not np.isfinite(U.U(np.asarray(x0))):
        raise SingularStart(f"start point {x0} is at a singularity of U")
    if not b.lo <= x0 <= b.hi:
        raise ValueError(f"start point {x0} outside the reflection bounds {b}")
    return x0


def _reflect(y, lo, hi):
    for _ in range(64):
        below, above = y < lo, y > hi
        if not (below.any() or above.any()):
            return y
        y = np.where(below, 2 * lo - y, y)
        y = np.where(above, 2 * hi - y, y)
    return np.clip(y, lo, hi)


def simulate(U: DriftPotential, cfg: SamplerConfig) -> np.ndarray:
    """Run ``cfg.chains`` independent chains; return ``(chains, steps - burn_in)`` samples.

    A proposal that reaches or crosses a barrier (a singularity of ``U``, or
    a bound where ``U`` is infinite) is rejected and the chain stays put;
    anything else leaving the bounds is reflected back.  Inside the
    ``sqrt(dt)`` zones around barriers the drift is clipped to the maximum
    used by the stability check; without the clip a chain that lands very
    close to one barrier proposes a jump past the opposite one on every
    step and never moves again.
    """
    b = cfg.reflection_bounds
    sing = barrier_points(U, b)
    if any(b.lo < s < b.hi for s in sing):
        raise SingularityInsideDomain(f"reflection bounds {b} straddle a singularity of U")
    m = max_drift(U, b, cfg.dt)
    if cfg.dt * m > STABILITY_LIMIT:
        raise StepTooLarge(f"dt*max|U'| = {cfg.dt * m:.3g} > {STABILITY_LIMIT}")
    x = np.full(cfg.chains, _start(U, cfg))
    gens = _generators(cfg.seed, cfg.chains)
    out = np.empty((cfg.chains, cfg.n_recorded))
    sq = math.sqrt(cfg.dt)
    noise = None
    for step in range(cfg.steps):
        k = step % NOISE_BLOCK
        if k == 0:
            width = min(NOISE_BLOCK, cfg.steps - step)
            noise = np.stack([g.standard_normal(width) for g in gens])
        drift = np.clip(U.U.d1(x), -m, m)
        prop = x - drift * cfg.dt + sq * noise[:, k]
        if sing.size:
            lo_xp, hi_xp = np.minimum(x, prop), np.maximum(x, prop)
            cross = np.any((lo_xp[:, None] <= sing[None, :]) & (sing[None, :] <= hi_xp[:, None]), axis=1)
            prop = np.where(cross, x, prop)
        x = _reflect(prop, b.lo, b.hi)
        if not np.all(np.isfinite(x)):
            raise UnstableStep(f"non-finite position at step {step}")
        if step >= cfg.burn_in:
            out[:, step - cfg.burn_in] = x
    return out


def _bin_probabilities(steady: SteadyState, edges: np.ndarray) -> np.ndarray:
    return np.array([steady.mass(a, b) for a, b in zip(edges[:-1], edges[1:])])


def effective_sample_size(samples: np.ndarray, n_batches: int = 20) -> float:
    """Batch-means estimate, pooling batches across chains."""
    s = np.atleast_2d(np.asarray(samples, dtype=float))
    C, M = s.shape
    size = M // n_batches
    if size < 1:
        return float(s.size)
    means = s[:, : size * n_batches].reshape(C, n_batches, size).mean(axis=2).ravel()
    var = s.var()
    var_bm = size * means.var(ddof=1)
    if var_bm <= 0:
        return float(s.size)
    return float(min(s.size, s.size * var / var_bm))


def histogram_tv(samples, steady: SteadyState, bins: int = 100, range: Optional[tuple] = None,
                 min_samples: int = MIN_SAMPLES) -> SampleStats:
    """Histogram of ``samples`` against the bin masses of ``steady``.

    The default range is the density's sampling window, widened to cover
    every sample, so ``counts.sum()`` equals the sample count.  Probability
    mass of ``steady`` outside the range enters the TV distance as one more
    cell.
    """
    s = np.asarray(samples, dtype=float)
    flat = s.ravel()
    n = flat.size
    if n < min_samples:
        raise ValueError(f"need at least {min_samples} samples, got {n}")
    if bins < 1 or n / bins < MIN_PER_BIN:
        raise EmptyBins(f"{bins} bins for {n} samples leaves fewer than {MIN_PER_BIN} per bin")
    if range is None:
        win = steady.density.sample_window.intersect(steady.domain)
        range = (min(win.lo, float(flat.min())), max(win.hi, float(flat.max())))
    edges = np.linspace(range[0], range[1], bins + 1)
    counts, _ = np.histogram(flat, bins=edges)
    p = _bin_probabilities(steady, edges)
    p_hat = counts / n
    out_hat = 1.0 - p_hat.sum()
    out_p = max(0.0, 1.0 - p.sum())
    tv = 0.5 * (float(np.abs(p_hat - p).sum()) + abs(out_hat - out_p))
    return SampleStats(edges, counts, p * n, min(1.0, tv), effective_sample_size(s))


def sample_steady(steady: SteadyState, size: int, rng: np.random.Generator,
                  n_table: int = 20001) -> np.ndarray:
    """Draw i.i.d. points from ``steady`` by inverting a tabulated CDF."""
    win = steady.density.sample_window.intersect(steady.domain)
    x = np.linspace(win.lo, win.hi, n_table)
    rho = np.nan_to_num(np.asarray(steady.density(x), dtype=float))
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (rho[1:] + rho[:-1]) * np.diff(x))])
    cdf /= cdf[-1]
    return np.interp(rng.random(size), cdf, x)
