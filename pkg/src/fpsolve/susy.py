"""Maps between drift potentials, superpotentials and quantum eigenstates.

Units: hbar = m = 1 and diffusion constant D = 1/2, so the Fokker-Planck
operator is ``L f = f''/2 + (f U')'`` with steady density ``exp(-2U)``.

Sign convention for the generated drift: ``U_n = U_0 - log|psi_n|``.  This is
the sign for which ``U_n' = W = -psi_n'/psi_n`` and for which the steady
density ``exp(-2 U_n)`` is proportional to ``psi_n^2`` (normalizable).  The
opposite sign gives ``exp(-2U) ~ 1/psi_n^2``, which is not integrable; see
``tests/test_acceptance.py`` for the regression check.

Every derivative here is a chain-rule composition of closed forms; nothing
is differentiated numerically.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

import numpy as np

from .catalog import Eigenstate, SolvableFamily
from .errors import DomainMismatch, SingularityInsideGrid
from .fields import Interval, ScalarField, sample_grid

if TYPE_CHECKING:
    from .oracle import DiscreteProblem

RESIDUAL_POINTS = 2001
RESIDUAL_MARGIN = 1e-3


@dataclass(frozen=True)
class Provenance:
    family: SolvableFamily
    level: int
    offset: float


@dataclass(frozen=True, eq=False)
class DriftPotential:
    """Diffusion potential ``U`` with its logarithmic singularities."""

    U: ScalarField
    domain: Interval
    singularities: tuple = ()
    provenance: Optional[Provenance] = None

    @property
    def window(self) -> Interval:
        return self.U.sample_window


@dataclass(frozen=True, eq=False)
class RiccatiReport:
    residual_sup: float
    residual_field: ScalarField
    energy_shift: float
    grid: np.ndarray


def drift(U: ScalarField, singularities=()) -> DriftPotential:
    """Wrap a user-supplied potential field as a :class:`DriftPotential`."""
    return DriftPotential(U, U.domain, tuple(sorted(singularities)))


def quantum_potential(U: DriftPotential) -> ScalarField:
    """``V_q = U'^2/2 - U''/2``.

    Only the value is provided; the returned field has no derivatives.
    """
    u = U.U

    def vq(x):
        d1 = u.df(x)
        return 0.5 * d1 * d1 - 0.5 * u.d2f(x)

    return ScalarField(U.domain, vq, window=u.window, poles=tuple(U.singularities))


def superpotential_of_state(state: Eigenstate) -> ScalarField:
    """``W = -psi'/psi``, with simple poles at the nodes of ``psi``.

    ``W'`` is supplied as the first derivative; no second derivative.
    """
    p, g = state.amplitude, state.log_envelope

    def w(x):
        return -(p.df(x) / p.f(x) + g.df(x))

    def dw(x):
        pv = p.f(x)
        r = p.df(x) / pv
        return -(p.d2f(x) / pv - r * r + g.d2f(x))

    return ScalarField(state.wavefunction.domain, w, dw, window=state.window, poles=state.nodes)


def log_modulus(state: Eigenstate) -> ScalarField:
    """``log|psi|`` in closed form, with derivatives ``-W`` and ``-W'``."""
    p, g = state.amplitude, state.log_envelope
    W = superpotential_of_state(state)

    def logabs(x):
        gv = g.f(x)
        lp = np.log(np.abs(p.f(x)))
        # an overflowed amplitude only happens where the envelope dominates
        return np.where((gv == -np.inf) | (lp == np.inf), -np.inf, lp + gv)

    return ScalarField(
        state.wavefunction.domain,
        logabs,
        lambda x: -W.f(x),
        lambda x: -W.df(x),
        window=state.window,
    )


def drift_from_state(state: Eigenstate, offset: float = 0.0) -> DriftPotential:
    """Generated diffusion potential ``U_n = U_0 - log|psi_n|``."""
    offset = float(offset)
    if not np.isfinite(offset):
        raise ValueError("offset must be finite")
    logmod = log_modulus(state)
    U = ScalarField(
        logmod.domain,
        lambda x: offset - logmod.f(x),
        lambda x: -logmod.df(x),
        lambda x: -logmod.d2f(x),
        window=state.window,
    )
    return DriftPotential(U, logmod.domain, tuple(state.nodes),
                          Provenance(state.family, state.index, offset))


def riccati_residual(W: ScalarField, V_s: ScalarField, E_shift: float,
                     window: Optional[Interval] = None, n_points: int = RESIDUAL_POINTS,
                     margin: float = RESIDUAL_MARGIN) -> RiccatiReport:
    """Residual of ``W' - W^2 = -2 (V_s - E_shift)`` on a sampled grid.

    The grid has ``n_points`` points on ``window`` (default: the sample
    window of ``W``), with finite endpoints pulled in by ``margin`` and any
    point within ``margin`` of a pole of ``W`` dropped.
    """
    if not V_s.domain.contains_interval(W.domain):
        raise DomainMismatch(f"W lives on {W.domain}, V_s on {V_s.domain}")
    E_shift = float(E_shift)

    if W.df is None:
        raise ValueError("W needs a closed-form first derivative")

    def res(x):
        w = W.f(x)
        return W.df(x) - w * w + 2.0 * (V_s.f(x) - E_shift)

    field = ScalarField(W.domain, res, window=W.window, poles=W.poles)
    win = window if window is not None else W.sample_window
    x = sample_grid(win, W.poles, n_points, margin)
    sup = float(np.max(np.abs(field(x))))
    return RiccatiReport(sup, field, E_shift, x)


def factorization_check(U: DriftPotential, grid: "DiscreteProblem") -> float:
    """Discrete ``H_- exp(-U)`` on the grid interior, relative to ``max exp(-U)``.

    ``H_- = -1/2 d^2/dx^2 + V_q`` is applied with the three-point Laplacian,
    so the result is the second-order truncation error of the zero mode.
    """
    x = grid.x
    for s in U.singularities:
        if x[0] <= s <= x[-1]:
            raise SingularityInsideGrid(f"singularity {s} inside [{x[0]}, {x[-1]}]")
    u = U.U(x)
    if not np.all(np.isfinite(u)):
        raise SingularityInsideGrid("U is not finite on the grid")
    f = np.exp(-(u - u.min()))
    h = grid.h
    lap = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / (h * h)
    vq = quantum_potential(U)(x[1:-1])
    res = -0.5 * lap + vq * f[1:-1]
    return float(np.max(np.abs(res)) / np.max(np.abs(f)))
