"""Independent finite-difference checks of the closed-form objects.

Nothing here uses the analytic eigenvalues: the Schrodinger eigensolver works
from the potential alone, and the Fokker-Planck integrator from the drift.

Fokker-Planck discretization
----------------------------
``df/dt = dJ/dx`` with ``J = f/2' + f U' = 1/2 exp(-2U) (f exp(2U))'``.  On a
uniform grid the interface value between nodes ``k`` and ``k+1`` is

    J_k = (exp(dU_k) f_{k+1} - exp(-dU_k) f_k) / (2h),    dU_k = U_{k+1} - U_k

(geometric-mean weights).  ``f ~ exp(-2U)`` makes every ``J_k`` vanish
identically, so the discrete steady state is exact, and with zero boundary
fluxes the column sums of the operator vanish, so mass ``h * sum(f)`` is
conserved to round-off.  A Dirichlet end fixes ``f = 0`` there; at a
logarithmic barrier (``U = +inf``) its interface weight is zero as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy import integrate as _spi
from scipy import sparse
from scipy.linalg import LinAlgError, eigh_tridiagonal
from scipy.optimize import brentq
from scipy.sparse.linalg import splu

from .errors import (ConvergenceFailure, FitWindowEmpty, NoDecay, NonFiniteState,
                     NonFiniteValue, NonMonotoneDecay, SingularityInsideGrid)
from .fields import Interval
from .susy import DriftPotential

BC_KINDS = ("dirichlet", "no_flux")
MIN_POINTS = 100


@dataclass(frozen=True, eq=False)
class DiscreteProblem:
    """Uniform grid ``x_0..x_N`` with boundary-condition kinds per end."""

    x: np.ndarray
    bc: tuple
    source_domain: Interval
    truncation_epsilon: Optional[float] = None

    @property
    def N(self) -> int:
        return self.x.size - 1

    @property
    def h(self) -> float:
        return (self.x[-1] - self.x[0]) / self.N

    @property
    def domain(self) -> Interval:
        return Interval(float(self.x[0]), float(self.x[-1]))

    def with_bc(self, bc) -> "DiscreteProblem":
        return DiscreteProblem(self.x, _normalize_bc(bc), self.source_domain, self.truncation_epsilon)


class EvolutionResult(NamedTuple):
    times: np.ndarray
    snapshots: np.ndarray  # (len(times), N+1)
    mass_history: np.ndarray
    x: np.ndarray
    h: float


class DecayFit(NamedTuple):
    rate: float
    r_squared: float


def _normalize_bc(bc) -> tuple:
    if isinstance(bc, str):
        bc = (bc, bc)
    bc = tuple(bc)
    if len(bc) != 2 or any(b not in BC_KINDS for b in bc):
        raise ValueError(f"boundary conditions must be among {BC_KINDS}, got {bc!r}")
    return bc


def _outer_point(rho, anchor: float, direction: float, eps: float, limit: float) -> float:
    d = np.linspace(0.0, limit, 400001)
    x = anchor + direction * d
    with np.errstate(all="ignore"):
        v = np.nan_to_num(np.asarray(rho(x), dtype=float), nan=0.0)
    above = np.flatnonzero(v >= eps)
    if above.size == 0:
        raise NoDecay(f"reference density never reaches {eps} near {anchor}")
    k = int(above[-1])
    if k == d.size - 1:
        raise NoDecay(f"reference density is still >= {eps} at distance {limit}")
    a, b = x[k], x[k + 1]
    return brentq(lambda s: float(rho(np.asarray(s))) - eps, a, b, xtol=1e-12)


def build_grid(domain: Interval, N: int, reference_density=None, eps: float = 1e-12,
               bc="no_flux", scan_limit: float = 1000.0) -> DiscreteProblem:
    """Uniform grid on ``domain``; infinite ends are truncated.

    An infinite end is replaced by the outermost point where
    ``reference_density >= eps``, pushed 20% further out (distance measured
    from the finite end, or from the density maximum on the full line).
    """
    if N < MIN_POINTS:
        raise ValueError(f"N must be >= {MIN_POINTS}")
    lo, hi = domain.lo, domain.hi
    if math.isinf(lo) or math.isinf(hi):
        if reference_density is None:
            raise ValueError("an infinite domain needs a reference density for truncation")
        rho = reference_density
        if math.isfinite(lo):
            anchor = lo
        elif math.isfinite(hi):
            anchor = hi
        else:
            xs = np.linspace(-scan_limit, scan_limit, 400001)
            with np.errstate(all="ignore"):
                v = np.nan_to_num(np.asarray(rho(xs), dtype=float), nan=0.0)
            anchor = float(xs[int(np.argmax(v))])
        if math.isinf(hi):
            hi = anchor + 1.2 * (_outer_point(rho, anchor, 1.0, eps, scan_limit) - anchor)
        if math.isinf(lo):
            lo = anchor - 1.2 * (anchor - _outer_point(rho, anchor, -1.0, eps, scan_limit))
    x = np.linspace(lo, hi, N + 1)
    return DiscreteProblem(x, _normalize_bc(bc), domain, eps if not domain.is_finite else None)


def eigensolve_schrodinger(V, dp: DiscreteProblem, k: int) -> list:
    """Lowest ``k`` eigenpairs of ``-1/2 d^2/dx^2 + V`` with Dirichlet ends.

    Returns ``[(energy, vector), ...]`` ascending; vectors span the full grid
    (zeros at the ends), satisfy ``h * sum(v^2) = 1`` and are positive just
    right of the left end.
    """
    if dp.bc != ("dirichlet", "dirichlet"):
        raise ValueError("the Schrodinger eigensolver needs Dirichlet conditions at both ends")
    if not 1 <= k <= dp.N // 4:
        raise ValueError(f"k must be in [1, N/4], got {k}")
    h = dp.h
    xi = dp.x[1:-1]
    v = np.asarray(V(xi), dtype=float)
    if not np.all(np.isfinite(v)):
        raise NonFiniteValue("potential not finite on the grid interior")
    d = 1.0 / (h * h) + v
    e = np.full(xi.size - 1, -0.5 / (h * h))
    try:
        w, vec = eigh_tridiagonal(d, e, select="i", select_range=(0, k - 1))
    except LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    out = []
    for j in range(k):
        u = np.zeros(dp.N + 1)
        u[1:-1] = vec[:, j] / math.sqrt(h)
        first = u[np.flatnonzero(np.abs(u) > 1e-8 * np.abs(u).max())[0]]
        if first < 0:
            u = -u
        out.append((float(w[j]), u))
    return out


def richardson_spectrum(V, dp: DiscreteProblem, k: int) -> np.ndarray:
    """Lowest ``k`` energies extrapolated from grids ``h`` and ``h/2``.

    The three-point Laplacian has an ``h^2`` leading error, so
    ``(4 E_{h/2} - E_h) / 3`` removes it.
    """
    fine = DiscreteProblem(np.linspace(dp.x[0], dp.x[-1], 2 * dp.N + 1), dp.bc,
                           dp.source_domain, dp.truncation_epsilon)
    e1 = np.array([e for e, _ in eigensolve_schrodinger(V, dp, k)])
    e2 = np.array([e for e, _ in eigensolve_schrodinger(V, fine, k)])
    return (4.0 * e2 - e1) / 3.0


def _check_grid_singularities(U: DriftPotential, x: np.ndarray):
    for s in U.singularities:
        if x[0] < s < x[-1]:
            raise SingularityInsideGrid(f"singularity {s} strictly inside [{x[0]}, {x[-1]}]; split the domain")


def drift_on_grid(U: DriftPotential, x: np.ndarray) -> np.ndarray:
    """``U`` at the grid nodes, exactly ``+inf`` on listed singularities.

    A node found by root refinement leaves ``|psi| ~ 1e-16`` rather than 0,
    which would turn the barrier into a weakly leaking wall.
    """
    with np.errstate(divide="ignore"):
        u = np.asarray(U.U(x), dtype=float).copy()
    for s in U.singularities:
        u[np.abs(x - s) <= 1e-12 * max(1.0, abs(s))] = np.inf
    return u


def fp_operator(U: DriftPotential, dp: DiscreteProblem):
    """Sparse FP generator on the unknown nodes and their index range."""
    x = dp.x
    _check_grid_singularities(U, x)
    h = dp.h
    N = dp.N
    u = drift_on_grid(U, x)
    j0 = 1 if dp.bc[0] == "dirichlet" else 0
    j1 = N - 1 if dp.bc[1] == "dirichlet" else N
    for j, side in ((0, 0), (N, 1)):
        if dp.bc[side] == "no_flux" and not np.isfinite(u[j]):
            raise SingularityInsideGrid("U is singular at a no-flux end; use a Dirichlet condition there")
    interior = u[j0:j1 + 1]
    if not np.all(np.isfinite(interior)):
        raise SingularityInsideGrid("U is not finite at an unknown grid node")
    with np.errstate(over="ignore", invalid="ignore"):
        du = u[1:] - u[:-1]
        a = np.exp(du)   # weight of f_{k+1} in J_k
        b = np.exp(-du)  # weight of f_k in J_k
    c = 0.5 / (h * h)
    n = j1 - j0 + 1
    diag = np.zeros(n)
    upper = np.zeros(n - 1)
    lower = np.zeros(n - 1)
    for r, j in enumerate(range(j0, j1 + 1)):
        if j < N:  # interface j (j, j+1)
            diag[r] -= c * b[j]
            if r < n - 1:
                upper[r] = c * a[j]
        if j > 0:  # interface j-1 (j-1, j)
            diag[r] -= c * a[j - 1]
            if r > 0:
                lower[r - 1] = c * b[j - 1]
    # no-flux ends: the missing outer interface simply contributes nothing
    A = sparse.diags([lower, diag, upper], [-1, 0, 1], format="csc")
    return A, j0, j1


def evolve_fp(U: DriftPotential, f0, dp: DiscreteProblem, dt: float, T: float,
              save_every: Optional[int] = None) -> EvolutionResult:
    """Crank-Nicolson integration of ``f_t = f''/2 + (f U')'`` up to ``T``.

    ``f0`` is sampled on the full grid; Dirichlet ends are forced to zero.
    Snapshots are stored every ``save_every`` steps (default: about 200
    snapshots per run) plus the initial state.
    """
    if dt <= 0 or T <= 0:
        raise ValueError("dt and T must be positive")
    steps = int(round(T / dt))
    if steps < 1 or abs(steps * dt - T) > 1e-9 * max(1.0, T):
        raise ValueError("T must be an integer multiple of dt")
    A, j0, j1 = fp_operator(U, dp)
    f = np.array(f0, dtype=float, copy=True)
    if f.shape != dp.x.shape:
        raise ValueError("f0 must be sampled on the grid")
    if not np.all(np.isfinite(f)):
        raise NonFiniteState("initial state is not finite")
    if j0 == 1:
        f[0] = 0.0
    if j1 == dp.N - 1:
        f[-1] = 0.0
    n = j1 - j0 + 1
    eye = sparse.identity(n, format="csc")
    lhs = splu((eye - 0.5 * dt * A).tocsc())
    rhs = (eye + 0.5 * dt * A).tocsr()
    if save_every is None:
        save_every = max(1, steps // 200)
    h = dp.h
    times, snaps, masses = [0.0], [f.copy()], [h * f.sum()]
    v = f[j0:j1 + 1]
    for s in range(1, steps + 1):
        v = lhs.solve(rhs @ v)
        if s % save_every == 0 or s == steps:
            if not np.all(np.isfinite(v)):
                raise NonFiniteState(f"non-finite state at t={s * dt}")
            f = np.zeros_like(f)
            f[j0:j1 + 1] = v
            times.append(s * dt)
            snaps.append(f)
            masses.append(h * f.sum())
    return EvolutionResult(np.array(times), np.array(snaps), np.array(masses), dp.x, h)


def discrete_equilibrium(U: DriftPotential, dp: DiscreteProblem, mass: float = 1.0) -> np.ndarray:
    """Exact null vector ``exp(-2U_j)`` of the discrete operator, given mass."""
    u = drift_on_grid(U, dp.x)
    with np.errstate(over="ignore"):
        w = np.exp(-2.0 * (u - np.min(u[np.isfinite(u)])))
    w = np.where(np.isfinite(w), w, 0.0)
    return w * (mass / (dp.h * w.sum()))


def fp_residual(U: DriftPotential, m, dp: DiscreteProblem, rate: Optional[float] = None) -> float:
    """Sup-norm of ``f''/2 + (f U')' + rate f`` at interior nodes, over ``max|f|``.

    ``f`` is the mode profile; all derivatives are closed form.  ``rate``
    defaults to the mode's own rate.
    """
    x = dp.x
    _check_grid_singularities(U, x)
    xi = x[1:-1]
    lam = m.rate if rate is None else float(rate)
    p = m.profile
    f, f1, f2 = p(xi), p.d1(xi), p.d2(xi)
    u1, u2 = U.U.d1(xi), U.U.d2(xi)
    res = 0.5 * f2 + f1 * u1 + f * u2 + lam * f
    scale = np.max(np.abs(p(x[np.isfinite(p(x))])))
    if not np.all(np.isfinite(res)):
        raise NonFiniteValue("residual not finite on the grid interior")
    return float(np.max(np.abs(res)) / scale)


def fit_decay_rate(res: EvolutionResult, reference, lo: float = 1e-8, hi: float = 1e-2,
                   min_points: int = 3) -> DecayFit:
    """Exponential rate of ``||f(t) - reference||_2`` from a log-linear fit.

    Only snapshots up to the smallest distance, with relative distance in
    ``[lo, hi]`` (relative to the initial distance), enter the fit.
    """
    ref = np.asarray(reference, dtype=float)
    if len(res.times) < 10:
        raise FitWindowEmpty("need at least 10 snapshots")
    dist = np.sqrt(res.h * np.sum((res.snapshots - ref[None, :]) ** 2, axis=1))
    ref_norm = math.sqrt(res.h * float(np.sum(ref * ref)))
    d0 = dist[0]
    if d0 <= 1e-12 * max(ref_norm, 1e-300):
        raise FitWindowEmpty("initial state equals the reference; nothing decays")
    if not dist[-1] < d0:
        raise NonMonotoneDecay("distance to the reference did not decrease")
    rel = dist / d0
    # only the descending branch: past the minimum the distance sits on a
    # round-off floor and may creep back into the window
    sel = (rel >= lo) & (rel <= hi) & (np.arange(rel.size) <= int(np.argmin(rel)))
    if np.count_nonzero(sel) < min_points:
        raise FitWindowEmpty(f"fewer than {min_points} snapshots with relative distance in [{lo}, {hi}]")
    t = res.times[sel]
    y = np.log(dist[sel])
    slope, intercept = np.polyfit(t, y, 1)
    pred = slope * t + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return DecayFit(-float(slope), r2)


def quadrature(field, dp: DiscreteProblem) -> float:
    """Composite Simpson integral of ``field`` sampled on the grid."""
    v = np.asarray(field(dp.x), dtype=float)
    if not np.all(np.isfinite(v)):
        raise NonFiniteValue("integrand not finite on the grid")
    return float(_spi.simpson(v, x=dp.x))
