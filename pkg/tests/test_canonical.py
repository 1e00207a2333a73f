from math import pi

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import minimize

from lnnqec import canonical as kak
from lnnqec.gates import CNOT, H, I2, SWAP, XZ, Z, inverse_name, rz, standard_gate
from lnnqec.statevector import prepare_test_state, apply_1q, fidelity
from conftest import random_unitary

PI8 = kak.u_d(pi / 8, pi / 8, 0)


def _locals(rng):
    return np.kron(random_unitary(rng, 2), random_unitary(rng, 2))


def brute_force_distance(U, c, rng, starts=6):
    """min over local gates of 1 - |tr((A⊗B) u_d(c) (C⊗D))^† U)|/4, by direct optimisation."""
    core = kak.u_d(*c)

    def cost(x):
        L = np.kron(kak._su2(*x[0:3]), kak._su2(*x[3:6]))
        R = np.kron(kak._su2(*x[6:9]), kak._su2(*x[9:12]))
        return 1 - abs(np.trace((L @ core @ R).conj().T @ U)) / 4

    best = 1.0
    for _ in range(starts):
        res = minimize(cost, rng.uniform(-pi, pi, 12), method="BFGS")
        best = min(best, res.fun)
    return best


def test_gate_library():
    assert np.allclose(H @ H, I2)
    rzpi = rz(pi)
    phase = rzpi[0, 0] / Z[0, 0]
    assert np.allclose(rzpi, phase * Z)
    psi = prepare_test_state()
    assert fidelity(psi, apply_1q(psi, XZ, 0)) == pytest.approx(0, abs=1e-15)
    assert np.allclose(standard_gate("Rz(pi/2)"), rz(pi / 2))
    assert inverse_name("S") == "SDG" and inverse_name("SDG") == "S" and inverse_name("H") == "H"
    with pytest.raises(ValueError):
        standard_gate("FOO")


def test_u_d_examples():
    assert np.allclose(kak.u_d(0, 0, 0), np.eye(4))
    assert kak.canonical_invariants(PI8).isclose(kak.CanonicalClass(pi / 8, pi / 8, 0))
    assert kak.is_locally_equivalent(kak.u_d(pi / 4, pi / 4, pi / 4), SWAP)


def test_named_classes():
    assert kak.canonical_invariants(CNOT).isclose(kak.CanonicalClass(pi / 4, 0, 0))
    assert kak.canonical_invariants(SWAP).isclose(kak.CanonicalClass(pi / 4, pi / 4, pi / 4))
    assert str(kak.canonical_invariants(CNOT)) == "(pi/4, 0, 0)"
    assert not kak.is_locally_equivalent(CNOT, SWAP)
    assert not kak.is_locally_equivalent(CNOT @ SWAP, CNOT)


def test_named_classes_against_brute_force(rng):
    # the brute-force optimum sits at the claimed chamber point and not at a nearby one
    for U, c in ((CNOT, (pi / 4, 0, 0)), (SWAP, (pi / 4, pi / 4, pi / 4))):
        assert brute_force_distance(U, c, rng) < 1e-8
        assert brute_force_distance(U, (c[0] - 0.2, c[1], c[2]), rng) > 1e-3


def test_local_gates_are_trivial(rng):
    for _ in range(20):
        assert kak.canonical_invariants(_locals(rng)).isclose(kak.CanonicalClass(0, 0, 0), 1e-7)


def test_invariance_under_local_dressing(rng):
    for _ in range(100):
        U = random_unitary(rng, 4)
        V = _locals(rng) @ U @ _locals(rng)
        assert kak.canonical_invariants(U).isclose(kak.canonical_invariants(V), 1e-8)


@given(seed=st.integers(0, 2**32 - 1))
def test_self_consistency_on_chamber_points(seed):
    rng = np.random.default_rng(seed)
    ax = rng.uniform(0, pi / 4)
    ay = rng.uniform(0, ax)
    az = rng.uniform(-ay, ay)
    expected = kak.reduce_to_chamber(ax, ay, az)
    got = kak.canonical_invariants(_locals(rng) @ kak.u_d(ax, ay, az) @ _locals(rng))
    assert got.isclose(expected, 1e-7)


@given(seed=st.integers(0, 2**32 - 1))
def test_reduction_respects_symmetries(seed):
    rng = np.random.default_rng(seed)
    c = rng.uniform(-2, 2, 3)
    base = kak.reduce_to_chamber(*c)
    shifted = c + (pi / 2) * rng.integers(-2, 3, 3)
    flipped = c * np.array([-1, -1, 1])
    perm = c[rng.permutation(3)]
    for other in (shifted, flipped, perm):
        assert kak.reduce_to_chamber(*other).isclose(base, 1e-9)


def test_chamber_rejects_outside_points():
    with pytest.raises(ValueError):
        kak.CanonicalClass(0.1, 0.2, 0)
    with pytest.raises(ValueError):
        kak.CanonicalClass(pi / 4, 0.1, -0.05)


def test_synthesis_trivial_and_cnot():
    same = kak.synthesize_from_interaction(PI8, PI8, 3)
    assert same.layer_count == 1 and same.residual_infidelity < 1e-9
    res = kak.synthesize_from_interaction(CNOT, PI8, 3, seed=0)
    assert res.layer_count == 2 and res.residual_infidelity < 1e-6
    assert abs(res.check() - res.residual_infidelity) < 1e-9


def test_synthesis_compound_costs_no_more():
    cnot = kak.synthesize_from_interaction(CNOT, PI8, 4).layer_count
    swap = kak.synthesize_from_interaction(SWAP, PI8, 4).layer_count
    both = kak.synthesize_from_interaction(CNOT @ SWAP, PI8, 4)
    assert both.residual_infidelity < 1e-6
    assert both.layer_count <= cnot + swap
    assert both.layer_count == cnot  # the SWAP rides along for free


def test_synthesis_is_deterministic():
    a = kak.synthesize_from_interaction(CNOT, PI8, 2, seed=3)
    b = kak.synthesize_from_interaction(CNOT, PI8, 2, seed=3)
    assert a.residual_infidelity == b.residual_infidelity
    assert all(np.array_equal(x, y) for p, q in zip(a.local_unitaries, b.local_unitaries) for x, y in zip(p, q))


def test_synthesis_rejects_local_interaction():
    with pytest.raises(ValueError):
        kak.synthesize_from_interaction(CNOT, np.eye(4), 2)
