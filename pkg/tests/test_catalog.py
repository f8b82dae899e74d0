import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from fpsolve import REAL_LINE, Interval, build_grid, eigenpair, eigensolve_schrodinger, make_family
from fpsolve.catalog import FAMILY_NAMES, node_locations
from fpsolve.errors import IndexAboveSpectrum, ParamOutOfRange, UnknownFamily
from fpsolve.oracle import richardson_spectrum

# (family name, params, indices) exercised by the invariant tests
CASES = [
    ("harmonic", {}, range(9)),
    ("infinite_well", {}, range(9)),
    ("poschl_teller", {"lam": 6}, range(6)),
    ("poschl_teller", {}, range(1)),
    ("morse", {}, range(6)),
]
STATES = [(name, p, i) for name, p, idx in CASES for i in idx]


def _state(name, params, i):
    return eigenpair(make_family(name, params), i)


def _ids(case):
    name, p, i = case
    tag = ",".join(f"{k}={v}" for k, v in p.items())
    return f"{name}[{tag}]-{i}" if tag else f"{name}-{i}"


def _dense(state, n=40001):
    w = state.window
    return np.linspace(w.lo, w.hi, n)


# -- make_family examples ----------------------------------------------------

def test_harmonic_potential_closed_form():
    F = make_family("harmonic", omega=1.0)
    x = np.linspace(-5, 5, 11)
    assert F.domain == REAL_LINE
    np.testing.assert_allclose(F.potential(x), x ** 2 / 2, rtol=0, atol=1e-15)


def test_infinite_well_potential_zero_on_box():
    F = make_family("infinite_well", L=math.pi)
    assert F.domain == Interval(0.0, math.pi)
    assert np.all(F.potential(np.linspace(0.1, 3.0, 7)) == 0.0)


def test_poschl_teller_unit_strength():
    F = make_family("poschl_teller", lam=1)
    x = np.linspace(-4, 4, 9)
    np.testing.assert_allclose(F.potential(x), -1 / np.cosh(x) ** 2, atol=1e-15)
    assert F.bound_state_count == 1


def test_unknown_family():
    with pytest.raises(UnknownFamily):
        make_family("hydrogen")


@pytest.mark.parametrize("name,params,bad", [
    ("harmonic", {"omega": 0.0}, "omega"),
    ("infinite_well", {"L": -1.0}, "L"),
    ("poschl_teller", {"lam": 0.5}, "lam"),
    ("morse", {"width": 0.0}, "width"),
    ("harmonic", {"frequency": 2.0}, "frequency"),
])
def test_param_out_of_range_names_parameter(name, params, bad):
    with pytest.raises(ParamOutOfRange) as exc:
        make_family(name, params)
    assert exc.value.param == bad


def test_morse_needs_a_bound_state():
    with pytest.raises(ParamOutOfRange):
        make_family("morse", depth=0.1, width=1.0)


def test_families_are_values():
    assert make_family("harmonic") == make_family("harmonic", omega=1.0)
    assert hash(make_family("poschl_teller", lam=2)) == hash(make_family("poschl_teller", {"lam": 2.0}))
    assert FAMILY_NAMES == ("harmonic", "infinite_well", "poschl_teller", "morse")


# -- eigenpair examples against the eigensolver oracle -----------------------

def test_harmonic_ground_state_matches_oracle(harmonic):
    s = eigenpair(harmonic, 0)
    x = np.linspace(-3, 3, 13)
    np.testing.assert_allclose(s.wavefunction(x), math.pi ** -0.25 * np.exp(-x ** 2 / 2), atol=1e-15)
    dp = build_grid(Interval(-10, 10), 2000, bc="dirichlet")
    (E, _), = eigensolve_schrodinger(harmonic.potential, dp, 1)
    assert s.energy == 0.5
    assert abs(E - s.energy) <= 1e-4


def test_well_first_excited_matches_oracle(well):
    s = eigenpair(well, 1)
    x = np.linspace(0.1, 3.0, 8)
    np.testing.assert_allclose(s.wavefunction(x), math.sqrt(2 / math.pi) * np.sin(2 * x), atol=1e-15)
    dp = build_grid(well.domain, 2000, bc="dirichlet")
    E = eigensolve_schrodinger(well.potential, dp, 2)[1][0]
    assert s.energy == pytest.approx(2.0, abs=1e-15)
    assert abs(E - 2.0) <= 1e-4


def test_poschl_teller_ground_state_matches_oracle(pt1):
    s = eigenpair(pt1, 0)
    x = np.linspace(-5, 5, 11)
    np.testing.assert_allclose(s.wavefunction(x), 1 / np.cosh(x) / math.sqrt(2), atol=1e-15)
    dp = build_grid(Interval(-12, 12), 3000, bc="dirichlet")
    (E, _), = eigensolve_schrodinger(pt1.potential, dp, 1)
    assert abs(E - (-0.5)) <= 1e-4


def test_index_above_spectrum(pt1, morse):
    with pytest.raises(IndexAboveSpectrum):
        eigenpair(pt1, 1)
    with pytest.raises(IndexAboveSpectrum):
        eigenpair(morse, 6)
    with pytest.raises(IndexAboveSpectrum):
        eigenpair(pt1, -1)


# -- node_locations examples -------------------------------------------------

def test_nodes_examples(harmonic, well):
    assert node_locations(eigenpair(harmonic, 0)) == []
    (z,) = node_locations(eigenpair(harmonic, 1))
    assert abs(z) <= 1e-12
    np.testing.assert_allclose(node_locations(eigenpair(well, 2)), [math.pi / 3, 2 * math.pi / 3],
                               atol=1e-12)


# -- invariants --------------------------------------------------------------

@pytest.mark.parametrize("case", STATES, ids=_ids)
def test_node_count_and_refinement(case):
    s = _state(*case)
    nodes = node_locations(s)
    assert len(nodes) == s.index
    assert nodes == sorted(nodes)
    psi = s.wavefunction
    amp = np.max(np.abs(psi(_dense(s))))
    for z in nodes:
        assert abs(float(psi(np.asarray(z)))) < 1e-12 * max(1.0, amp)
    # a sign change at each node, and no other sign change on the window
    x = _dense(s)
    v = psi(x)
    v = v[np.abs(v) > 1e-8 * amp]
    assert np.count_nonzero(np.diff(np.sign(v))) == s.index


@pytest.mark.parametrize("case", STATES, ids=_ids)
def test_normalized(case):
    s = _state(*case)
    d = s.family.domain
    pts = list(s.nodes) or None
    lo, hi = (s.window.lo, s.window.hi) if not d.is_finite else (d.lo, d.hi)
    val, _ = quad(lambda x: float(s.wavefunction(x)) ** 2, lo, hi, points=pts, limit=400,
                  epsabs=1e-13, epsrel=1e-12)
    assert abs(val - 1.0) <= 1e-8


@pytest.mark.parametrize("case", STATES, ids=_ids)
def test_schrodinger_residual(case):
    s = _state(*case)
    x = _dense(s, 2001)
    psi = s.wavefunction
    V = s.family.potential
    res = 0.5 * psi.d2(x) + (s.energy - V(x)) * psi(x)
    assert np.max(np.abs(res)) <= 1e-9 * np.max(np.abs(psi(x)))


@pytest.mark.parametrize("case", STATES, ids=_ids)
def test_positive_right_of_left_boundary(case):
    s = _state(*case)
    lo = s.window.lo if math.isinf(s.family.domain.lo) else s.family.domain.lo
    first = s.nodes[0] if s.nodes else s.window.hi
    x = np.linspace(lo, first, 1001)[1:-1]
    v = s.wavefunction(x)
    assert np.all(v[np.abs(v) > 0] > 0)


@pytest.mark.parametrize("name,params,idx", CASES, ids=[c[0] + str(c[1]) for c in CASES])
def test_energies_strictly_increasing(name, params, idx):
    F = make_family(name, params)
    E = [eigenpair(F, i).energy for i in idx]
    assert all(b > a for a, b in zip(E, E[1:]))


@pytest.mark.parametrize("name,params", [("harmonic", {}), ("infinite_well", {}),
                                         ("poschl_teller", {"lam": 6}), ("morse", {})])
def test_orthogonality(name, params):
    F = make_family(name, params)
    k = min(6, F.bound_state_count)
    S = [eigenpair(F, i) for i in range(k)]
    lo = S[-1].window.lo if math.isinf(F.domain.lo) else F.domain.lo
    hi = S[-1].window.hi if math.isinf(F.domain.hi) else F.domain.hi
    for a in range(k):
        for b in range(a + 1, k):
            val, _ = quad(lambda x: float(S[a].wavefunction(x) * S[b].wavefunction(x)), lo, hi,
                          limit=400, epsabs=1e-12)
            assert abs(val) <= 1e-7, (a, b, val)


# oracle equivalence: (family, params, truncation box)
ORACLE_BOXES = [
    ("harmonic", {}, (-10, 10)),
    ("infinite_well", {}, None),
    ("poschl_teller", {"lam": 6}, (-15, 15)),
    ("morse", {}, (-2.5, 25)),
]


@pytest.mark.parametrize("name,params,box", ORACLE_BOXES, ids=[b[0] for b in ORACLE_BOXES])
def test_first_five_energies_match_oracle(name, params, box):
    F = make_family(name, params)
    dom = F.domain if box is None else Interval(*box)
    # plain h^2 error reaches ~5e-4 in the deep wells; extrapolate it away
    dp = build_grid(dom, 2000, bc="dirichlet")
    E = richardson_spectrum(F.potential, dp, 5)
    closed = [eigenpair(F, i).energy for i in range(5)]
    np.testing.assert_allclose(E, closed, rtol=0, atol=1e-4)


def test_closed_form_energies(harmonic, well, pt6, morse):
    assert [eigenpair(harmonic, i).energy for i in range(4)] == [0.5, 1.5, 2.5, 3.5]
    np.testing.assert_allclose([eigenpair(well, i).energy for i in range(4)], [0.5, 2, 4.5, 8])
    np.testing.assert_allclose([eigenpair(pt6, i).energy for i in range(6)],
                               [-(6 - i) ** 2 / 2 for i in range(6)])
    # Morse: E_i = -(nu - i - 1/2)^2 / 2 with nu = sqrt(2 D) = 6.5
    np.testing.assert_allclose([eigenpair(morse, i).energy for i in range(6)],
                               [-(6.0 - i) ** 2 / 2 for i in range(6)])


def test_morse_is_marked_extended(morse, harmonic):
    assert morse.extended and not harmonic.extended


def test_richardson_tightens_oracle(harmonic):
    dp = build_grid(Interval(-10, 10), 1000, bc="dirichlet")
    plain = np.array([e for e, _ in eigensolve_schrodinger(harmonic.potential, dp, 3)])
    rich = richardson_spectrum(harmonic.potential, dp, 3)
    exact = np.array([0.5, 1.5, 2.5])
    assert np.all(np.abs(rich - exact) < 0.05 * np.abs(plain - exact))


def test_far_tails_are_exact_zeros(harmonic, morse, pt6):
    for F, x in ((harmonic, [-60.0, 60.0]), (pt6, [-800.0, 800.0]), (morse, [-40.0, 900.0])):
        s = eigenpair(F, 2)
        v = s.wavefunction(np.array(x))
        assert np.all(v == 0.0) and np.all(np.isfinite(s.wavefunction.d2(np.array(x))))


# -- closed-form derivatives against finite differences -----------------------

@given(case=st.sampled_from(STATES), u=st.floats(0.02, 0.98))
def test_derivatives_match_finite_differences(case, u):
    s = _state(*case)
    w = s.window
    x = w.lo + u * w.width
    h = 1e-4 * max(1.0, w.width / 10)
    psi = s.wavefunction
    xs = np.array([x - 2 * h, x - h, x, x + h, x + 2 * h])
    f = psi(xs)
    d1 = (-f[4] + 8 * f[3] - 8 * f[1] + f[0]) / (12 * h)
    d2 = (-f[4] + 16 * f[3] - 30 * f[2] + 16 * f[1] - f[0]) / (12 * h * h)
    scale = np.max(np.abs(psi(_dense(s, 2001))))
    assert abs(float(psi.d1(np.asarray(x))) - d1) <= 1e-6 * scale * max(1.0, abs(s.energy))
    assert abs(float(psi.d2(np.asarray(x))) - d2) <= 1e-4 * scale * max(1.0, abs(s.energy))


@given(omega=st.floats(0.3, 4.0), i=st.integers(0, 6))
def test_harmonic_scaling(omega, i):
    F = make_family("harmonic", omega=omega)
    s = eigenpair(F, i)
    assert s.energy == pytest.approx(omega * (i + 0.5), rel=1e-14)
    x = _dense(s, 1001)
    res = 0.5 * s.wavefunction.d2(x) + (s.energy - F.potential(x)) * s.wavefunction(x)
    assert np.max(np.abs(res)) <= 1e-9 * np.max(np.abs(s.wavefunction(x))) * max(1.0, omega)


@given(L=st.floats(0.5, 20.0), i=st.integers(0, 6))
def test_well_scaling(L, i):
    F = make_family("infinite_well", L=L)
    s = eigenpair(F, i)
    assert s.energy == pytest.approx(((i + 1) * math.pi / L) ** 2 / 2, rel=1e-13)
    np.testing.assert_allclose(node_locations(s), [L * k / (i + 1) for k in range(1, i + 1)],
                               atol=1e-11 * L)
