import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from penning_control.errors import AxisError, DomainError, NormError, PhysicsError
from penning_control.states import (
    AngLabel,
    Axis,
    ControlParams,
    CoupledState,
    Kinematics,
    ProductState,
    Superposition,
    couple,
    he_li_product_state,
    hopf_state,
    random_superposition,
    rotate_axis,
    superposition_from_vector,
    to_center_of_mass,
)

TOL = 1e-12
seeds = st.integers(0, 2**32 - 1)


def amps(state):
    return state.amplitudes()


def test_hopf_examples():
    s = hopf_state(ControlParams(math.pi / 2, 1.234))
    assert s.axis is Axis.X
    assert abs(s.amplitude(0) - 1) < TOL and abs(s.amplitude(4)) < TOL

    s = hopf_state(ControlParams(0.0, 0.0))
    assert s.amplitude(4) == 1 and s.amplitude(0) == 0

    s = hopf_state(ControlParams(math.pi / 4, math.pi))
    r = 1 / math.sqrt(2)
    assert abs(s.amplitude(0) - r) < TOL
    assert abs(s.amplitude(4) + r) < TOL


def test_hopf_unit_norm_grid():
    for eta in np.linspace(0, math.pi, 10):
        for xi in np.linspace(0, 2 * math.pi, 10, endpoint=False):
            assert abs(hopf_state(ControlParams(eta, xi)).norm2() - 1) <= TOL


def test_control_params_range():
    with pytest.raises(DomainError):
        ControlParams(-0.1, 0.0)
    with pytest.raises(DomainError):
        ControlParams(0.0, 2 * math.pi)
    w = ControlParams.wrapped(math.pi + 0.25, -0.5)
    assert w.eta == pytest.approx(0.25) and w.xi == pytest.approx(2 * math.pi - 0.5)


def test_rotate_m0_x_to_z():
    z = rotate_axis(Superposition.ket(4, 0, Axis.X), Axis.X, Axis.Z)
    r = math.sqrt(3 / 8)
    want = {4: r, 2: 0, 0: -0.5, -2: 0, -4: r}
    for m2, a in want.items():
        assert abs(z.amplitude(m2) - a) <= TOL


def test_rotate_m2_x_weights():
    z = rotate_axis(Superposition.ket(4, 4, Axis.X), Axis.X, Axis.Z)
    weights = [abs(z.amplitude(m2)) ** 2 for m2 in (4, 2, 0, -2, -4)]
    assert np.allclose(weights, [1 / 16, 1 / 4, 3 / 8, 1 / 4, 1 / 16], atol=TOL, rtol=0)


@settings(max_examples=100, deadline=None)
@given(seed=seeds, j2=st.integers(0, 4))
def test_round_trip(seed, j2):
    s = random_superposition(np.random.default_rng(seed), j2, Axis.X)
    back = rotate_axis(rotate_axis(s, Axis.X, Axis.Z), Axis.Z, Axis.X)
    for m2, a in s.amplitudes().items():
        assert abs(back.amplitude(m2) - a) <= TOL


@settings(max_examples=100, deadline=None)
@given(seed=seeds, j2=st.integers(0, 4))
def test_rotation_unitary(seed, j2):
    rng = np.random.default_rng(seed)
    a, b = random_superposition(rng, j2, Axis.X), random_superposition(rng, j2, Axis.X)
    za, zb = rotate_axis(a, "X", "Z"), rotate_axis(b, "X", "Z")
    assert abs(za.inner(zb) - a.inner(b)) <= TOL
    assert abs(za.norm2() - 1) <= TOL


def test_rotate_wrong_axis():
    with pytest.raises(AxisError):
        rotate_axis(Superposition.ket(2, 0, Axis.Z), Axis.X, Axis.Z)
    with pytest.raises(ValueError):
        rotate_axis(Superposition.ket(2, 0, Axis.Z), Axis.Z, "Y")


def test_superposition_invariants():
    with pytest.raises(PhysicsError):
        Superposition(((AngLabel(2, 0), 0.5), (AngLabel(2, 0), 0.5)))
    with pytest.raises(PhysicsError):
        Superposition(((AngLabel(2, 0), 0.5), (AngLabel(4, 0), 0.5)))
    with pytest.raises(NormError):
        Superposition.from_amplitudes(2, {0: 1.0, 2: 0.5})
    with pytest.raises(NormError):
        Superposition.from_amplitudes(2, {0: 0.0})
    with pytest.raises(DomainError):
        AngLabel(2, 3)
    # projected states may be sub-normalized
    assert Superposition.from_amplitudes(2, {0: 0.5}).norm2() == 0.25
    with pytest.raises(NormError):
        ProductState(Superposition.from_amplitudes(2, {0: 0.5}), Superposition.ket(1, 1))
    with pytest.raises(DomainError):
        superposition_from_vector(2, [1.0])


def test_couple_stretched():
    c = couple(ProductState(Superposition.ket(2, 2), Superposition.ket(1, 1)))
    assert abs(c.project(3, 3) - 1) <= TOL
    assert abs(c.norm2() - 1) <= TOL


@pytest.mark.parametrize("beta", [0.0, math.pi / 4, math.pi / 2, math.pi, 3 * math.pi / 2, 0.77])
def test_couple_he_li(beta):
    c = couple(he_li_product_state(beta))
    want = 0.25 - math.cos(beta) / (3 * math.sqrt(2))
    assert abs(abs(c.project(1, 1)) ** 2 - want) <= TOL
    assert abs(abs(c.project(1, -1)) ** 2 - 1 / 12) <= TOL
    assert abs(c.norm2() - 1) <= TOL


@settings(max_examples=100, deadline=None)
@given(seed=seeds, ja=st.integers(0, 4), jb=st.integers(0, 4))
def test_couple_preserves_norm(seed, ja, jb):
    rng = np.random.default_rng(seed)
    p = ProductState(random_superposition(rng, ja), random_superposition(rng, jb))
    c = couple(p)
    assert abs(c.norm2() - p.norm2()) <= TOL
    # projecting on every |S, M> and resumming recovers the norm
    total = sum(abs(c.project(s2, m2)) ** 2 for (s2, m2) in c.amplitudes())
    assert abs(total - 1) <= TOL


def test_couple_axis_mismatch():
    with pytest.raises(AxisError):
        couple(ProductState(Superposition.ket(2, 0, Axis.X), Superposition.ket(1, 1)))


def test_coupled_state_invariants():
    c = CoupledState((((1, -1), 0.6), ((1, 1), 0.8j)))
    assert [k for k, _ in c.terms] == [(1, 1), (1, -1)]
    assert c.project(3, 1) == 0
    with pytest.raises(PhysicsError):
        CoupledState((((1, 1), 0.5), ((1, 1), 0.5)))
    with pytest.raises(NormError):
        CoupledState((((1, 1), 1.0), ((1, -1), 1.0)))


def test_kinematics_examples():
    k = to_center_of_mass(Kinematics(1.0, 1.0, np.zeros(3), np.ones(3), np.array([1.0, 2, 3]), -np.array([1.0, 2, 3])))
    assert np.array_equal(k.K, np.zeros(3))

    k = to_center_of_mass(Kinematics(4.0, 7.0, np.array([1.0, 2, 3]), np.array([1.0, 2, 3]), np.zeros(3), np.zeros(3)))
    assert np.array_equal(k.r, np.zeros(3))

    with pytest.raises(PhysicsError):
        to_center_of_mass(Kinematics(0.0, 7.0, np.zeros(3), np.zeros(3), np.zeros(3), np.zeros(3)))


@settings(max_examples=100, deadline=None)
@given(seed=seeds)
def test_kinematics_generic(seed):
    rng = np.random.default_rng(seed)
    ma, mb = rng.uniform(0.5, 50, size=2)
    ra, rb, ka, kb = rng.normal(size=(4, 3))
    k = to_center_of_mass(Kinematics(ma, mb, ra, rb, ka, kb))
    # R lies on the A-B segment at the mass-weighted position
    t = mb / (ma + mb)
    assert np.allclose(k.R, ra + t * (rb - ra), atol=1e-12)
    assert np.array_equal(k.K, ka + kb)
    # kinetic energy splits into CM and relative parts
    mu = ma * mb / (ma + mb)
    e_lab = ka @ ka / (2 * ma) + kb @ kb / (2 * mb)
    e_cm = k.K @ k.K / (2 * (ma + mb)) + k.k @ k.k / (2 * mu)
    assert e_lab == pytest.approx(e_cm, rel=1e-12)
    # the boost removes K and leaves k alone
    b = to_center_of_mass(Kinematics(ma, mb, ra, rb, ka, kb), boost=True)
    assert np.allclose(b.K, 0, atol=1e-12)
    assert np.allclose(b.k, k.k, atol=1e-12)


def test_phase_factor_beta():
    p = he_li_product_state(0.3)
    assert abs(p.atom_b.amplitude(-1) - cmath.exp(0.3j) / math.sqrt(2)) <= TOL
