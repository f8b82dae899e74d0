"""Closed-form Fokker-Planck solutions generated by a solvable potential.

For the drift ``U_n = -log|psi_n|`` every catalog eigenstate ``psi_i`` gives a
relaxation mode

    f_i(x, t) = psi_n(x) psi_i(x) exp(-(E_i - E_n) t),

and ``i = n`` is the steady state ``psi_n^2``.  When ``psi_n`` has nodes the
drift has logarithmic barriers there and the problem splits into independent
nodal domains; a mode belongs to a nodal domain ("is admissible there") only
if ``psi_i`` also vanishes at that domain's interior-node endpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .catalog import SolvableFamily, eigenpair
from .errors import (EvalOutsideDomain, NonNormalizable, SingularityInsideDomain,
                     UnboundedRatio)
from .fields import Interval, ScalarField
from .integration import QuadratureFailed, integrate
from .susy import DriftPotential, drift_from_state

NODE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class SteadyState:
    """Normalized ``exp(-2U)/Z`` on one interval."""

    density: ScalarField
    log_Z: float
    domain: Interval
    drift: Optional[DriftPotential] = field(default=None, repr=False)

    def mass(self, a: float, b: float) -> float:
        """Probability of ``(a, b)`` under the density."""
        lo, hi = max(a, self.domain.lo), min(b, self.domain.hi)
        if not lo < hi:
            return 0.0
        return integrate(lambda x: float(self.density(x)), Interval(lo, hi),
                         scale=_scale(self.density.sample_window), center=_center(self.density.sample_window))


@dataclass(frozen=True, eq=False)
class FPMode:
    """Relaxation mode ``profile(x) * exp(-rate * t)``.

    ``profile = scale * psi_n * psi_i`` with ``scale`` chosen so that
    ``max|profile| = 1``.
    """

    level: int
    index: int
    rate: float
    profile: ScalarField
    admissible_domains: tuple
    drift: DriftPotential = field(repr=False)
    family: SolvableFamily = field(repr=False)
    scale: float = 1.0

    @property
    def is_steady(self) -> bool:
        return self.index == self.level


def _scale(win: Interval) -> float:
    return max(1.0, 0.25 * win.width)


def _center(win: Interval) -> float:
    return 0.5 * (win.lo + win.hi)


def _probe_points_infinite(anchor: float, direction: float, n: int = 13):
    return anchor + direction * 2.0 ** np.arange(n)


def _check_normalizable(U: ScalarField, domain: Interval, log_peak: float):
    """Raise NonNormalizable if ``exp(-2U)`` is not integrable at an end."""
    try:
        win = U.sample_window.intersect(domain)
    except ValueError:
        win = domain.finite_part()
    span = win.width
    d = span * 10.0 ** -np.arange(1, 13)
    ends = []
    if math.isinf(domain.hi):
        x = _probe_points_infinite(win.hi, 1.0)
        ends.append(("right", -2.0 * U(x) + 2.0 * np.log(np.abs(x) + 1.0)))
    else:
        ends.append(("right", -2.0 * U(domain.hi - d) + np.log(d)))
    if math.isinf(domain.lo):
        x = _probe_points_infinite(win.lo, -1.0)
        ends.append(("left", -2.0 * U(x) + 2.0 * np.log(np.abs(x) + 1.0)))
    else:
        ends.append(("left", -2.0 * U(domain.lo + d) + np.log(d)))
    for side, logw in ends:
        logw = np.where(np.isnan(logw), np.inf, logw)
        tail = logw[-3:]
        if np.any(tail == np.inf) or not (tail[-1] < log_peak - 30.0 and tail[-1] <= tail[0]):
            raise NonNormalizable(f"exp(-2U) is not integrable at the {side} end of {domain}")


def steady_state(U: DriftPotential, domain: Optional[Interval] = None) -> SteadyState:
    """Normalized stationary density ``exp(-2U)/Z`` on ``domain``."""
    domain = U.domain if domain is None else domain
    if not U.domain.contains_interval(domain):
        raise SingularityInsideDomain(f"{domain} is not inside the drift domain {U.domain}")
    for s in U.singularities:
        if domain.lo < s < domain.hi:
            raise SingularityInsideDomain(f"singularity at {s} inside {domain}; use nodal_domains()")
    u = U.U
    win = u.sample_window
    try:
        win = win.intersect(domain)
    except ValueError:
        win = domain.finite_part()
    xs = np.linspace(win.lo, win.hi, 4001)[1:-1]
    uv = u(xs)
    finite = np.isfinite(uv)
    if not np.any(finite):
        raise NonNormalizable("U is not finite anywhere on the sample window")
    u_ref = float(np.min(uv[finite]))
    _check_normalizable(u, domain, -2.0 * u_ref)

    def weight(x):
        v = u(x)
        return np.exp(-2.0 * (v - u_ref))

    try:
        Z = integrate(lambda x: float(weight(x)), domain, scale=_scale(win), center=_center(win))
    except QuadratureFailed as exc:
        raise NonNormalizable(str(exc)) from exc
    if not (math.isfinite(Z) and Z > 0.0):
        raise NonNormalizable(f"normalization integral is {Z}")
    log_Z = math.log(Z) - 2.0 * u_ref

    def rho(x):
        return np.exp(-2.0 * u(x) - log_Z)

    def drho(x):
        r = rho(x)
        return np.where(r == 0.0, 0.0, -2.0 * u.df(x) * r)

    def d2rho(x):
        r = rho(x)
        d1 = u.df(x)
        return np.where(r == 0.0, 0.0, (4.0 * d1 * d1 - 2.0 * u.d2f(x)) * r)

    density = ScalarField(domain, rho, drho, d2rho, window=win)
    return SteadyState(density, log_Z, domain, U)


def nodal_domains(U: DriftPotential) -> list:
    """Maximal open subintervals of the drift domain between singularities."""
    lo, hi = U.domain
    cuts = [s for s in sorted(U.singularities) if lo < s < hi]
    edges = [lo, *cuts, hi]
    return [Interval(a, b) for a, b in zip(edges[:-1], edges[1:])]


def _interior_node_ends(dom: Interval, nodes) -> list:
    return [e for e in (dom.lo, dom.hi) if any(abs(e - z) < NODE_TOL for z in nodes)]


def _is_admissible(psi_i: ScalarField, dom: Interval, nodes) -> bool:
    ends = _interior_node_ends(dom, nodes)
    return all(abs(float(psi_i(e))) <= NODE_TOL for e in ends)


def mode(family: SolvableFamily, n: int, i: int) -> FPMode:
    """Relaxation mode generated by level ``n`` with mode index ``i``.

    Modes with ``i < n`` are still returned; they carry no admissible
    domain because ``psi_i`` cannot vanish at every node of ``psi_n``.
    """
    sn, si = eigenpair(family, n), eigenpair(family, i)
    U = drift_from_state(sn, 0.0)
    pn, pi = sn.wavefunction, si.wavefunction

    def raw(x):
        return pn.f(x) * pi.f(x)

    win = Interval(min(sn.window.lo, si.window.lo), max(sn.window.hi, si.window.hi)).intersect(family.domain)
    xs = np.linspace(win.lo, win.hi, 20001)
    vals = np.abs(raw(xs))
    k = int(np.argmax(vals))
    peak = float(vals[k])
    if 0 < k < xs.size - 1:
        opt = minimize_scalar(lambda t: -abs(float(raw(t))), bounds=(xs[k - 1], xs[k + 1]),
                              method="bounded", options={"xatol": 1e-12})
        peak = max(peak, -float(opt.fun))
    c = 1.0 / peak

    def prof(x):
        return c * pn.f(x) * pi.f(x)

    def dprof(x):
        return c * (pn.df(x) * pi.f(x) + pn.f(x) * pi.df(x))

    def d2prof(x):
        return c * (pn.d2f(x) * pi.f(x) + 2.0 * pn.df(x) * pi.df(x) + pn.f(x) * pi.d2f(x))

    profile = ScalarField(family.domain, prof, dprof, d2prof, window=win)
    doms = tuple(d for d in nodal_domains(U) if _is_admissible(pi, d, sn.nodes))
    return FPMode(n, i, si.energy - sn.energy, profile, doms, U, family, c)


def evaluate_solution(m: FPMode, x, t: float):
    """``profile(x) * exp(-rate * t)``; ``x`` must lie in an admissible domain."""
    if t < 0:
        raise ValueError("t must be non-negative")
    xa = np.asarray(x, dtype=float)
    doms = m.admissible_domains
    if m.is_steady:
        doms = tuple(nodal_domains(m.drift))
    inside = np.zeros(xa.shape, dtype=bool)
    for d in doms:
        inside |= d.contains(xa)
    if not np.all(inside):
        raise EvalOutsideDomain(f"x outside the admissible domains {doms} of mode (n={m.level}, i={m.index})")
    return m.profile(xa) * math.exp(-m.rate * t)


def _ratio_fn(num, den):
    """``psi_num / psi_den`` via the product form (no underflow)."""
    pa, ga = num.amplitude, num.log_envelope
    pb, gb = den.amplitude, den.log_envelope

    def r(x):
        return pa.f(x) / pb.f(x) * np.exp(ga.f(x) - gb.f(x))

    return r


def _check_ratio_bounded(f0, sn, dom: Interval):
    pn = sn.wavefunction
    win = sn.window.intersect(dom)
    bulk_x = np.linspace(win.lo, win.hi, 203)[1:-1]
    bulk_x = bulk_x[np.all(np.abs(bulk_x[:, None] - np.array(sn.nodes or [np.inf])[None, :]) > 1e-3, axis=1)]
    with np.errstate(all="ignore"):
        bulk = np.abs(np.asarray(f0(bulk_x), dtype=float) / pn.f(bulk_x))
    bulk = bulk[np.isfinite(bulk)]
    ref = float(bulk.max()) if bulk.size else 1.0
    probes = []
    for end, inward in ((dom.lo, 1.0), (dom.hi, -1.0)):
        if math.isfinite(end):
            probes.append(end + inward * win.width * 10.0 ** -np.arange(2, 9))
        else:
            edge = win.lo if inward > 0 else win.hi
            probes.append(edge - inward * 0.5 * win.width * np.arange(0, 4))
    for x in probes:
        with np.errstate(all="ignore"):
            fv = np.asarray(f0(x), dtype=float)
            pv = pn.f(x)
            r = np.where((fv == 0.0), 0.0, np.abs(fv / pv))
        if not np.all(np.isfinite(r)) or np.max(r) > 1e3 * max(ref, 1e-300):
            raise UnboundedRatio(f"f0/psi_n is unbounded near an end of {dom}")


def spectral_expand(f0, family: SolvableFamily, n: int, domain: Interval, i_max: int) -> list:
    """Coefficients of ``f0 = sum_i c_i psi_n psi_i`` over admissible ``i <= i_max``.

    ``c_i = int f0 psi_i/psi_n dx / int psi_i^2 dx`` over ``domain``; the
    denominator is 1 on a full-line family and corrects for restriction to
    a nodal domain.
    """
    sn = eigenpair(family, n)
    for z in sn.nodes:
        if domain.lo < z < domain.hi:
            raise SingularityInsideDomain(f"node {z} of psi_{n} inside {domain}")
    _check_ratio_bounded(f0, sn, domain)
    win = sn.window
    out = []
    top = int(min(i_max, family.bound_state_count - 1))
    for i in range(top + 1):
        si = eigenpair(family, i)
        if not _is_admissible(si.wavefunction, domain, sn.nodes):
            continue
        ratio = _ratio_fn(si, sn)
        psi_i = si.wavefunction

        def integrand(x, ratio=ratio):
            fv = float(f0(x))
            return 0.0 if fv == 0.0 else fv * float(ratio(x))

        num = integrate(integrand, domain, scale=_scale(win), center=_center(win))
        den = integrate(lambda x, p=psi_i: float(p(x)) ** 2, domain, scale=_scale(win), center=_center(win))
        out.append((i, num / den))
    return out


def reconstruct(coeffs, family: SolvableFamily, n: int) -> ScalarField:
    """``sum_i c_i psi_n psi_i`` as a field (value only)."""
    pn = eigenpair(family, n).wavefunction
    terms = [(c, eigenpair(family, i).wavefunction) for i, c in coeffs]

    def f(x):
        acc = np.zeros_like(np.asarray(x, dtype=float))
        for c, p in terms:
            acc = acc + c * p.f(x)
        return pn.f(x) * acc

    return ScalarField(family.domain, f)
