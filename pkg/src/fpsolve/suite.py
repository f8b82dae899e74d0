"""Per-nodal-domain verification suite shared by the CLI and the tests."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .catalog import SolvableFamily, eigenpair
from .errors import FPSolveError
from .fields import Interval, sample_grid
from .langevin import STABILITY_LIMIT, SamplerConfig, histogram_tv, max_drift, simulate
from .oracle import (DiscreteProblem, build_grid, discrete_equilibrium, evolve_fp,
                     richardson_spectrum, fit_decay_rate, fp_residual)
from .solutions import FPMode, SteadyState, mode, nodal_domains, steady_state
from .susy import (DriftPotential, drift_from_state, factorization_check, quantum_potential,
                   riccati_residual, superpotential_of_state)

DEFAULT_TOLERANCES = {
    "riccati": 1e-8,
    "quantum_potential": 1e-9,
    "factorization": 1e-5,
    "fp_residual": 1e-6,
    "rate_rel": 1e-2,
    "r_squared": 0.999,
    "steady_l1": 1e-3,
    "tv": 0.05,
    "spectrum": 1e-3,
    "negative_eig": 1e-6,
    "order_rel": 0.15,
}

# distance kept from singular ends when a check needs U finite on the closed grid
SINGULAR_MARGIN = 1e-3
PERTURBATION = 0.1
STEPS_ACROSS = 10
# the zero-mode residual is O(h^2) with a curvature-dependent constant; steep
# drifts need a finer grid than the evolution does
FACTORIZATION_REFINE = 8
ROUNDOFF_MARGIN = 1e3


@dataclass
class Check:
    name: str
    measured: float
    tolerance: float
    passed: bool
    domain: Optional[int] = None
    detail: str = ""

    def to_json(self) -> dict:
        return {"name": self.name, "domain": self.domain, "measured": _finite_or_str(self.measured),
                "tolerance": self.tolerance, "pass": bool(self.passed), "detail": self.detail}


def _finite_or_str(v: float):
    return float(v) if math.isfinite(v) else repr(float(v))


def _upper(name, measured, tol, dom=None, detail="") -> Check:
    # NaN never passes
    return Check(name, float(measured), float(tol), bool(measured <= tol), dom, detail)


def _lower(name, measured, tol, dom=None, detail="") -> Check:
    return Check(name, float(measured), float(tol), bool(measured >= tol), dom, detail)


@dataclass
class Settings:
    N: int = 2000
    eps: float = 1e-12
    bounds: Optional[tuple] = None
    dt: float = 1e-3
    T: float = 8.0
    seed: int = 42
    chains: int = 1000
    steps: int = 1250
    burn_in: int = 250
    langevin_dt: float = 0.02
    n_modes: int = 8
    bins: int = 100
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))


def singular_end(U: DriftPotential, end: float) -> bool:
    """True if ``exp(-2U)`` vanishes at the finite endpoint ``end``."""
    if not math.isfinite(end):
        return False
    if any(abs(end - s) < 1e-12 for s in U.singularities):
        return True
    with np.errstate(all="ignore"):
        return not bool(np.isfinite(U.U(np.asarray([end]))[0]))


def domain_problem(U: DriftPotential, dom: Interval, N: int = 2000, eps: float = 1e-12,
                   bounds: Optional[tuple] = None, reference=None) -> DiscreteProblem:
    """Grid for one nodal domain.

    Singular finite ends get a Dirichlet condition, all other ends no-flux.
    Infinite ends are truncated at the ``reference`` density (default: the
    steady density of the domain), unless ``bounds`` supplies them.
    """
    bc = tuple("dirichlet" if singular_end(U, e) else "no_flux" for e in dom)
    lo, hi = dom
    if bounds is not None:
        if math.isinf(lo):
            lo = float(bounds[0])
        if math.isinf(hi):
            hi = float(bounds[1])
    target = Interval(lo, hi)
    if reference is None and not target.is_finite:
        reference = steady_state(U, dom).density
    return build_grid(target, N, reference, eps, bc)


def shrink(dp: DiscreteProblem, U: DriftPotential, margin: float = SINGULAR_MARGIN) -> DiscreteProblem:
    """Same point count, pulled in by ``margin`` at singular ends."""
    lo, hi = dp.x[0], dp.x[-1]
    if singular_end(U, lo):
        lo += margin
    if singular_end(U, hi):
        hi -= margin
    return DiscreteProblem(np.linspace(lo, hi, dp.N + 1), dp.bc, dp.source_domain, dp.truncation_epsilon)


def refine(dp: DiscreteProblem, factor: int) -> DiscreteProblem:
    x = np.linspace(dp.x[0], dp.x[-1], factor * dp.N + 1)
    return DiscreteProblem(x, dp.bc, dp.source_domain, dp.truncation_epsilon)


def mode_indices(family: SolvableFamily, n_modes: int) -> range:
    return range(int(min(n_modes, family.bound_state_count)))


def admissible_modes(family: SolvableFamily, n: int, dom: Interval, n_modes: int) -> list:
    out = []
    for i in mode_indices(family, n_modes):
        m = mode(family, n, i)
        if any(d == dom for d in m.admissible_domains):
            out.append(m)
    return out


def perturbed_start(st: SteadyState, m: FPMode, dp: DiscreteProblem) -> np.ndarray:
    return st.density(dp.x) + PERTURBATION * m.profile(dp.x)


def generic_start(st: SteadyState, dp: DiscreteProblem) -> np.ndarray:
    """Positive start with the steady density's support but skewed shape."""
    x = dp.x
    c, w = 0.5 * (x[0] + x[-1]), 0.25 * (x[-1] - x[0])
    f = st.density(x) * (1.0 + 0.5 * np.tanh((x - c) / w))
    return f / (dp.h * f.sum())


def steady_l1(U: DriftPotential, st: SteadyState, dp: DiscreteProblem, gap: float, dt: float) -> float:
    T = math.ceil(20.0 / gap / dt) * dt
    res = evolve_fp(U, generic_start(st, dp), dp, dt, T, save_every=int(round(T / dt)))
    return float(dp.h * np.sum(np.abs(res.snapshots[-1] - st.density(dp.x))))


def spectrum_problem(U: DriftPotential, family: SolvableFamily, dom: Interval, modes: list,
                     N: int, eps: float, bounds=None) -> DiscreteProblem:
    """Dirichlet grid wide enough for every compared eigenstate."""
    states = [eigenpair(family, m.index) for m in modes]

    def ref(x):
        return sum(s.wavefunction(x) ** 2 for s in states)

    dp = domain_problem(U, dom, N, eps, bounds, reference=ref if not dom.is_finite else None)
    return dp.with_bc("dirichlet")


def oracle_spectrum(family: SolvableFamily, n: int, dp: DiscreteProblem, k: int) -> np.ndarray:
    En = eigenpair(family, n).energy
    V = family.potential

    def shifted(x):
        return V(x) - En

    return richardson_spectrum(shifted, dp, k)


def match_spectrum(lams, eigs) -> float:
    """Largest distance from an analytic rate to the nearest oracle eigenvalue."""
    eigs = np.asarray(eigs)
    return float(max(np.min(np.abs(eigs - lam)) for lam in lams))


def run_checks(family: SolvableFamily, n: int, offset: float = 0.0, s: Optional[Settings] = None,
               langevin: bool = True, dynamics: bool = True) -> list:
    s = s or Settings()
    tol = {**DEFAULT_TOLERANCES, **s.tolerances}
    state = eigenpair(family, n)
    U = drift_from_state(state, offset)
    checks = []

    W = superpotential_of_state(state)
    rep = riccati_residual(W, family.potential, state.energy)
    checks.append(_upper("riccati", rep.residual_sup, tol["riccati"]))

    vq = quantum_potential(U)
    x = sample_grid(state.window, state.nodes)
    diff = np.abs(vq(x) - (family.potential(x) - state.energy))
    checks.append(_upper("quantum_potential", float(np.max(diff)), tol["quantum_potential"]))

    lams_all = [mode(family, n, i) for i in mode_indices(family, s.n_modes)]
    for k, dom in enumerate(nodal_domains(U)):
        st = steady_state(U, dom)
        dp = domain_problem(U, dom, s.N, s.eps, s.bounds)
        fgrid = shrink(refine(dp, FACTORIZATION_REFINE), U)
        fine = factorization_check(U, fgrid)
        coarse = factorization_check(U, shrink(refine(dp, FACTORIZATION_REFINE // 2), U))
        checks.append(_upper("factorization", fine, tol["factorization"], k, f"N={fgrid.N}"))
        # second differences carry ~eps/h^2 of round-off; only a residual well
        # above that level says anything about the truncation order
        if coarse > ROUNDOFF_MARGIN * np.finfo(float).eps / fgrid.h ** 2:
            ratio = coarse / fine
            checks.append(_upper("factorization_order", abs(ratio / 4.0 - 1.0), tol["order_rel"], k,
                                 f"h-halving ratio {ratio:.4g}"))
        modes = [m for m in lams_all if any(d == dom for d in m.admissible_domains)]
        worst = max(fp_residual(U, m, dp) for m in modes)
        checks.append(_upper("fp_residual", worst, tol["fp_residual"], k,
                             f"modes {[m.index for m in modes]}"))
        decaying = [m for m in modes if m.rate > 0]
        if dynamics and decaying:
            m1 = min(decaying, key=lambda m: m.rate)
            try:
                res = evolve_fp(U, perturbed_start(st, m1, dp), dp, s.dt, s.T)
                fit = fit_decay_rate(res, discrete_equilibrium(U, dp, res.mass_history[0]))
                rel = abs(fit.rate - m1.rate) / m1.rate
                checks.append(_upper("decay_rate", rel, tol["rate_rel"], k,
                                     f"fitted {fit.rate:.6g}, expected {m1.rate:.6g}"))
                checks.append(_lower("decay_r_squared", fit.r_squared, tol["r_squared"], k))
            except FPSolveError as exc:
                checks.append(Check("decay_rate", math.nan, tol["rate_rel"], False, k, str(exc)))
            checks.append(_upper("steady_l1", steady_l1(U, st, dp, m1.rate, s.dt), tol["steady_l1"], k))
        if langevin:
            checks.append(langevin_check(U, st, dp, s, k, tol["tv"]))
        sdp = spectrum_problem(U, family, dom, modes, s.N, s.eps, s.bounds)
        kk = min(sdp.N // 4, max(len(modes) + 4, 2 * len(modes)))
        eigs = oracle_spectrum(family, n, sdp, kk)
        checks.append(_upper("spectrum", match_spectrum([m.rate for m in modes], eigs), tol["spectrum"], k,
                             f"rates {[round(m.rate, 6) for m in modes]}"))
        checks.append(_upper("negative_eig", max(0.0, -float(eigs[0])), tol["negative_eig"], k))
    return checks


def sampler_config(U: DriftPotential, st: SteadyState, dp: DiscreteProblem, s: Settings,
                   k: int = 0) -> SamplerConfig:
    """Reflecting sampler on the grid span.

    ``dt`` is capped so that one noise step ``sqrt(dt)`` stays below
    1/``STEPS_ACROSS`` of four standard deviations of the target law, and so
    that the stability rule holds; the step counts are scaled up to keep the
    simulated time of the nominal run.
    """
    b = Interval(float(dp.x[0]), float(dp.x[-1]))
    rho = np.nan_to_num(st.density(dp.x))
    w = rho / rho.sum()
    mean = float(np.sum(w * dp.x))
    sd = math.sqrt(float(np.sum(w * (dp.x - mean) ** 2)))
    dt = min(s.langevin_dt, (4.0 * sd / STEPS_ACROSS) ** 2)
    for _ in range(40):
        if dt * max_drift(U, b, dt) <= STABILITY_LIMIT:
            break
        dt *= 0.5
    stretch = s.langevin_dt / dt
    seed = int(np.random.SeedSequence([int(s.seed), k]).generate_state(1, np.uint64)[0])
    return SamplerConfig(dt, int(math.ceil(s.steps * stretch)), int(math.ceil(s.burn_in * stretch)),
                         seed, s.chains, b)


def langevin_check(U, st, dp, s: Settings, k: int, tol: float) -> Check:
    cfg = sampler_config(U, st, dp, s, k)
    stats = histogram_tv(simulate(U, cfg), st, s.bins)
    return _upper("langevin_tv", stats.tv_distance, tol, k,
                  f"dt={cfg.dt:g}, n_eff={stats.n_effective:.0f}")

