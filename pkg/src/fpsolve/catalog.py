"""Exactly solvable one-dimensional quantum potentials.

Convention: ``H = -1/2 d^2/dx^2 + V(x)`` (hbar = m = 1).  Every eigenfunction
is stored in product form

    psi(x) = p(x) * exp(g(x))

with a polynomial-type *amplitude* ``p`` carrying all the nodes and a smooth
*log-envelope* ``g`` carrying the decay.  Log-derivatives such as
``psi'/psi = p'/p + g'`` are then available in closed form far into the
tails, where ``psi`` itself underflows to zero.

Families
--------
harmonic       V = omega^2 x^2 / 2 on the real line, E_i = omega (i + 1/2)
infinite_well  V = 0 on (0, L) with Dirichlet walls, E_i = ((i+1) pi / L)^2 / 2
poschl_teller  V = -lam (lam+1)/2 sech^2 x, E_i = -(lam - i)^2 / 2 for i < lam
morse          V = depth (exp(-2 a x) - 2 exp(-a x)), a = width,
               E_i = -(a^2/2) (nu - i - 1/2)^2 with nu = sqrt(2 depth)/a
               ("extended": exercised by tests, not by acceptance criteria)
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Callable, Mapping, Optional

import numpy as np
from scipy.optimize import brentq
from scipy.special import roots_genlaguerre, roots_jacobi

from . import polynomials as poly
from .errors import IndexAboveSpectrum, ParamOutOfRange, UnknownFamily
from .fields import REAL_LINE, Interval, ScalarField

Triple = Callable[[np.ndarray], tuple]


@dataclass(frozen=True)
class ParamRange:
    name: str
    default: float
    lower: float
    inclusive: bool
    doc: str

    def validate(self, value: float) -> float:
        value = float(value)
        ok = value >= self.lower if self.inclusive else value > self.lower
        if not (ok and math.isfinite(value)):
            op = ">=" if self.inclusive else ">"
            raise ParamOutOfRange(self.name, value, f"{self.name} {op} {self.lower}")
        return value

    def describe(self) -> str:
        op = ">=" if self.inclusive else ">"
        return f"{self.name} {op} {self.lower:g} (default {self.default:g}): {self.doc}"


@dataclass(frozen=True, eq=False)
class SolvableFamily:
    """A named solvable potential with validated parameters."""

    name: str
    params: Mapping[str, float]
    potential: ScalarField
    bound_state_count: float  # int, or math.inf
    domain: Interval
    extended: bool = False
    _builder: Optional[Callable] = field(default=None, repr=False)

    @property
    def key(self) -> tuple:
        return (self.name, tuple(sorted(self.params.items())))

    def __eq__(self, other):
        return isinstance(other, SolvableFamily) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        args = ", ".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"SolvableFamily({self.name}: {args})"


@dataclass(frozen=True, eq=False)
class Eigenstate:
    """Normalized bound state ``psi_i`` with energy ``E_i``.

    The sign is fixed so that ``psi_i > 0`` just right of the left boundary.
    ``amplitude`` and ``log_envelope`` are the factors of the product form.
    """

    family: SolvableFamily
    index: int
    energy: float
    wavefunction: ScalarField
    nodes: tuple
    amplitude: ScalarField
    log_envelope: ScalarField

    @property
    def window(self) -> Interval:
        return self.wavefunction.sample_window

    def __repr__(self):
        return f"Eigenstate({self.family!r}, i={self.index}, E={self.energy:.12g})"


# ---------------------------------------------------------------------------
# product-form assembly


def _dead(env, *parts):
    # far tails: the envelope underflowed, or the amplitude overflowed first
    out = env == 0.0
    for q in parts:
        out = out | ~np.isfinite(q)
    return out


def _assemble(family, index, energy, domain, window, pfun: Triple, gfun: Triple) -> Eigenstate:
    def psi(x):
        p, _, _ = pfun(x)
        g, _, _ = gfun(x)
        env = np.exp(g)
        return np.where(_dead(env, p), 0.0, p * env)

    def dpsi(x):
        p, p1, _ = pfun(x)
        g, g1, _ = gfun(x)
        env = np.exp(g)
        return np.where(_dead(env, p, p1), 0.0, (p1 + p * g1) * env)

    def d2psi(x):
        p, p1, p2 = pfun(x)
        g, g1, g2 = gfun(x)
        env = np.exp(g)
        return np.where(_dead(env, p, p1, p2), 0.0, (p2 + 2 * p1 * g1 + p * g2 + p * g1 * g1) * env)

    amplitude = ScalarField(domain, lambda x: pfun(x)[0], lambda x: pfun(x)[1],
                            lambda x: pfun(x)[2], window=window)
    envelope = ScalarField(domain, lambda x: gfun(x)[0], lambda x: gfun(x)[1],
                           lambda x: gfun(x)[2], window=window)
    wave = ScalarField(domain, psi, dpsi, d2psi, window=window)
    nodes = _find_nodes(amplitude, window, index)
    return Eigenstate(family, index, float(energy), wave, nodes, amplitude, envelope)


def _find_nodes(amplitude: ScalarField, window: Interval, expected: int, n_scan: int = 20001) -> tuple:
    if expected == 0:
        return ()
    lo, hi = window.lo, window.hi
    x = np.linspace(lo, hi, n_scan)[1:-1]
    p = amplitude(x)
    roots = []
    nz = np.flatnonzero(p != 0.0)
    for a, b in zip(nz[:-1], nz[1:]):
        if np.sign(p[a]) == np.sign(p[b]):
            continue
        if b - a > 1:
            roots.append(float(x[a + 1]))  # exact zero sampled
        else:
            roots.append(brentq(lambda s: float(amplitude(s)), x[a], x[b], xtol=1e-15, rtol=1e-15, maxiter=200))
    if len(roots) != expected:
        raise RuntimeError(f"found {len(roots)} nodes, expected {expected}")
    return tuple(sorted(roots))


def node_locations(state: Eigenstate) -> list:
    """Interior zeros of ``psi_i``; exactly ``i`` of them, sorted."""
    return list(state.nodes)


# ---------------------------------------------------------------------------
# family builders


def _harmonic(family: SolvableFamily, i: int) -> Eigenstate:
    w = family.params["omega"]
    rw = math.sqrt(w)
    c = (w / math.pi) ** 0.25 * (-1) ** i

    def pfun(x):
        xi = rw * x
        h = poly.hermite_normalized(i, xi)
        p = c * h[i]
        p1 = c * rw * math.sqrt(2 * i) * poly.top(h, i - 1)
        p2 = c * w * math.sqrt(2 * i) * math.sqrt(2 * max(i - 1, 0)) * poly.top(h, i - 2)
        return p, p1, p2

    def gfun(x):
        return -0.5 * w * x * x, -w * x, np.full_like(x, -w)

    half = (math.sqrt(2 * i + 1) + 6.0) / rw
    return _assemble(family, i, w * (i + 0.5), REAL_LINE, Interval(-half, half), pfun, gfun)


def _infinite_well(family: SolvableFamily, i: int) -> Eigenstate:
    L = family.params["L"]
    k = (i + 1) * math.pi / L
    c = math.sqrt(2.0 / L)

    def pfun(x):
        # exact zeros on and beyond the walls (sin(k L) is only ~1e-16)
        s = np.where((x <= 0.0) | (x >= L), 0.0, np.sin(k * x))
        return c * s, c * k * np.cos(k * x), -c * k * k * s

    def gfun(x):
        z = np.zeros_like(x)
        return z, z, z

    dom = Interval(0.0, L)
    return _assemble(family, i, 0.5 * k * k, dom, dom, pfun, gfun)


def _log_cosh(x):
    ax = np.abs(x)
    return ax + np.log1p(np.exp(-2.0 * ax)) - math.log(2.0)


def _poschl_teller(family: SolvableFamily, i: int) -> Eigenstate:
    lam = family.params["lam"]
    s = lam - i
    a = s + 0.5
    # norm: int C_i(t)^2 (1-t^2)^(s-1) dt, exact by Gauss-Jacobi
    nodes_t, weights = roots_jacobi(i + 2, s - 1.0, s - 1.0)
    c_vals = poly.gegenbauer(i, a, nodes_t)[i]
    norm = math.sqrt(float(np.sum(weights * c_vals ** 2)))
    c = (-1) ** i / norm

    def pfun(x):
        t = np.tanh(x)
        sech2 = 1.0 - t * t
        c0 = poly.gegenbauer(i, a, t)[i]
        c1 = poly.top(poly.gegenbauer(max(i - 1, 0), a + 1, t), i - 1)
        c2 = poly.top(poly.gegenbauer(max(i - 2, 0), a + 2, t), i - 2)
        dC = 2 * a * c1
        d2C = 4 * a * (a + 1) * c2
        p = c * c0
        p1 = c * dC * sech2
        p2 = c * (d2C * sech2 * sech2 - 2.0 * dC * t * sech2)
        return p, p1, p2

    def gfun(x):
        t = np.tanh(x)
        return -s * _log_cosh(x), -s * t, -s * (1.0 - t * t)

    half = max(6.0, 18.4 / s + 0.7)
    return _assemble(family, i, -0.5 * s * s, REAL_LINE, Interval(-half, half), pfun, gfun)


def _morse(family: SolvableFamily, i: int) -> Eigenstate:
    depth, a = family.params["depth"], family.params["width"]
    nu = math.sqrt(2.0 * depth) / a
    s = nu - i - 0.5
    alpha = 2.0 * s
    # norm: (1/a) int z^(2s-1) e^-z L_i^(2s)(z)^2 dz, exact by Gauss-Laguerre
    zq, wq = roots_genlaguerre(i + 2, alpha - 1.0)
    l_vals = poly.laguerre(i, alpha, zq)[i]
    norm = math.sqrt(float(np.sum(wq * l_vals ** 2)) / a)
    c = (-1) ** i / norm
    log2nu = math.log(2.0 * nu)

    def zfun(x):
        return np.exp(log2nu - a * x)

    def pfun(x):
        z = zfun(x)
        l0 = poly.laguerre(i, alpha, z)[i]
        l1 = -poly.top(poly.laguerre(max(i - 1, 0), alpha + 1, z), i - 1)
        l2 = poly.top(poly.laguerre(max(i - 2, 0), alpha + 2, z), i - 2)
        return c * l0, -c * a * z * l1, c * a * a * (z * z * l2 + z * l1)

    def gfun(x):
        z = zfun(x)
        return s * (log2nu - a * x) - 0.5 * z, -a * s + 0.5 * a * z, -0.5 * a * a * z

    left = -math.log((4.0 * nu + 80.0) / (2.0 * nu)) / a
    right = (18.4 / s + log2nu) / a + 2.0 / a
    return _assemble(family, i, -0.5 * a * a * s * s, REAL_LINE, Interval(left, right), pfun, gfun)


# ---------------------------------------------------------------------------
# registry


@dataclass(frozen=True)
class _FamilyDef:
    ranges: tuple
    builder: Callable
    extended: bool = False


_REGISTRY = {
    "harmonic": _FamilyDef(
        (ParamRange("omega", 1.0, 0.0, False, "oscillator frequency"),), _harmonic),
    "infinite_well": _FamilyDef(
        (ParamRange("L", math.pi, 0.0, False, "well width, walls at 0 and L"),), _infinite_well),
    "poschl_teller": _FamilyDef(
        (ParamRange("lam", 1.0, 1.0, True, "strength, V = -lam(lam+1)/2 sech^2 x"),), _poschl_teller),
    "morse": _FamilyDef(
        (ParamRange("depth", 21.125, 0.0, False, "well depth D (needs sqrt(2D)/width > 1/2)"),
         ParamRange("width", 1.0, 0.0, False, "inverse range a")), _morse, extended=True),
}

FAMILY_NAMES = tuple(_REGISTRY)


def family_ranges(name: str) -> tuple:
    if name not in _REGISTRY:
        raise UnknownFamily(name)
    return _REGISTRY[name].ranges


def is_extended(name: str) -> bool:
    return _REGISTRY[name].extended


def make_family(name: str, params: Optional[Mapping[str, float]] = None, **kwargs) -> SolvableFamily:
    """Instantiate a catalog family; missing parameters take their defaults."""
    if name not in _REGISTRY:
        raise UnknownFamily(name)
    spec = _REGISTRY[name]
    given = dict(params or {}, **kwargs)
    known = {r.name for r in spec.ranges}
    for k in given:
        if k not in known:
            raise ParamOutOfRange(k, given[k], f"known parameters of {name}: {sorted(known)}")
    values = {r.name: r.validate(given.get(r.name, r.default)) for r in spec.ranges}

    if name == "harmonic":
        w = values["omega"]
        dom = REAL_LINE
        half = (math.sqrt(17.0) + 6.0) / math.sqrt(w)
        pot = ScalarField(dom, lambda x: 0.5 * w * w * x * x, lambda x: w * w * x,
                          lambda x: np.full_like(x, w * w), window=Interval(-half, half))
        count = math.inf
    elif name == "infinite_well":
        L = values["L"]
        dom = Interval(0.0, L)
        zero = lambda x: np.zeros_like(x)  # noqa: E731
        pot = ScalarField(dom, zero, zero, zero, window=dom)
        count = math.inf
    elif name == "poschl_teller":
        lam = values["lam"]
        k = 0.5 * lam * (lam + 1.0)
        dom = REAL_LINE

        def v(x):
            return -k / np.cosh(x) ** 2

        def dv(x):
            return 2.0 * k * np.tanh(x) / np.cosh(x) ** 2

        def d2v(x):
            t = np.tanh(x)
            sech2 = 1.0 - t * t
            return 2.0 * k * sech2 * (sech2 - 2.0 * t * t)

        half = max(6.0, 18.4 / lam + 0.7)
        pot = ScalarField(dom, v, dv, d2v, window=Interval(-half, half))
        count = math.ceil(lam)
    else:
        depth, a = values["depth"], values["width"]
        nu = math.sqrt(2.0 * depth) / a
        if nu <= 0.5:
            raise ParamOutOfRange("depth", depth, "sqrt(2 depth)/width > 1/2 (at least one bound state)")
        dom = REAL_LINE

        def v(x):
            e = np.exp(-a * x)
            return depth * (e * e - 2.0 * e)

        def dv(x):
            e = np.exp(-a * x)
            return depth * (-2.0 * a * e * e + 2.0 * a * e)

        def d2v(x):
            e = np.exp(-a * x)
            return depth * (4.0 * a * a * e * e - 2.0 * a * a * e)

        pot = ScalarField(dom, v, dv, d2v, window=Interval(-math.log(3.0) / a, 12.0 / a))
        count = math.ceil(nu - 0.5)

    return SolvableFamily(name, MappingProxyType(values), pot, count, dom, spec.extended, spec.builder)


@functools.lru_cache(maxsize=512)
def eigenpair(family: SolvableFamily, i: int) -> Eigenstate:
    """Closed-form ``(E_i, psi_i)`` of a catalog family."""
    i = int(i)
    if i < 0 or i >= family.bound_state_count:
        raise IndexAboveSpectrum(f"{family!r} has {family.bound_state_count} bound states; asked for i={i}")
    return family._builder(family, i)
