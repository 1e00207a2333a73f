import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lnnqec import error_models as em
from lnnqec.statevector import prepare_test_state


def enumerate_composition(p, n):
    """Oracle: sum over all 4**n letter sequences of the product of probabilities."""
    single = em.discrete_channel(p).by_code()
    out = np.zeros(4)
    for seq in itertools.product(range(4), repeat=n):
        code, prob = 0, 1.0
        for c in seq:
            code ^= c
            prob *= single[c]
        out[code] += prob
    return out


def test_compose_examples():
    assert np.allclose(em.compose_discrete_steps(0.3, 0).as_array(), [1, 0, 0, 0])
    assert np.allclose(em.compose_discrete_steps(0.3, 1).as_array(), [0.7, 0.1, 0.1, 0.1])
    five = em.compose_discrete_steps(0.3, 5)
    assert five.p_i == pytest.approx(0.25 + 0.75 * 0.6**5, abs=1e-14)
    assert np.allclose(five.by_code(), enumerate_composition(0.3, 5), atol=1e-14)


@given(p=st.floats(0, 1), m=st.integers(0, 60), n=st.integers(0, 60))
def test_compose_semigroup(p, m, n):
    lhs = em.compose_discrete_steps(p, m + n).as_array()
    rhs = em.convolve(em.compose_discrete_steps(p, m), em.compose_discrete_steps(p, n)).as_array()
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_compose_limit_and_precision():
    assert np.allclose(em.compose_discrete_steps(0.2, 10**6).as_array(), 0.25, atol=1e-9)
    tiny = em.compose_discrete_steps(1e-12, 3)
    assert tiny.error_probability() == pytest.approx(3e-12, rel=1e-9)


def test_channel_validation():
    with pytest.raises(ValueError):
        em.PauliChannelDist(0.5, 0.5, 0.5, 0)
    with pytest.raises(ValueError):
        em.DiscreteModel(1.5)
    with pytest.raises(ValueError):
        em.ContinuousModel(-0.1)
    with pytest.raises(ValueError):
        em.compose_discrete_steps(0.1, -1)


def test_sample_discrete_frequencies():
    rng = np.random.default_rng(11)
    assert {em.sample_discrete(em.DiscreteModel(0.0), rng) for _ in range(1000)} == {"I"}
    n = 100_000
    codes = em.discrete_codes_from_uniform(np.random.default_rng(12).random(n), 1.0)
    se = np.sqrt((1 / 3) * (2 / 3) / n)
    for c in (1, 2, 3):
        assert abs(np.mean(codes == c) - 1 / 3) < 4 * se
    codes = em.discrete_codes_from_uniform(np.random.default_rng(13).random(n), 0.3)
    assert abs(np.mean(codes == 0) - 0.7) < 4 * np.sqrt(0.21 / n)


def test_sample_discrete_is_seeded():
    a = [em.sample_discrete(em.DiscreteModel(0.5), np.random.default_rng(5)) for _ in range(3)]
    b = [em.sample_discrete(em.DiscreteModel(0.5), np.random.default_rng(5)) for _ in range(3)]
    assert a == b


def test_continuous_unitary_examples():
    assert np.allclose(em.continuous_unitary(0, 0, 0), np.eye(2))
    flip = em.continuous_unitary(0, 0, np.pi)
    assert np.allclose(np.diag(flip), 0, atol=1e-15)
    assert np.allclose(np.abs(flip[[0, 1], [1, 0]]), 1)
    assert abs(flip @ np.array([1, 0]))[0] < 1e-15


@given(a=st.floats(-10, 10), b=st.floats(-10, 10), t=st.floats(-10, 10))
def test_continuous_unitary_is_unitary(a, b, t):
    U = em.continuous_unitary(a, b, t)
    assert np.allclose(U @ U.conj().T, np.eye(2), atol=1e-12)
    assert abs(abs(np.linalg.det(U)) - 1) < 1e-12
    assert np.allclose(em.continuous_unitaries(np.array([a, b, t])), U)


def test_continuous_sigma_zero_is_identity():
    rng = np.random.default_rng(0)
    assert np.allclose(em.sample_continuous(em.ContinuousModel(0.0), rng), np.eye(2))


def test_continuous_sampler_matches_quadrature():
    sigma, n = 0.1, 1_000_000
    rng = np.random.default_rng(2024)
    angles = em.sample_angles(em.ContinuousModel(sigma), rng, size=n)
    assert abs(angles.std() / sigma - 1) < 0.02
    psi = prepare_test_state().amplitudes
    U = em.continuous_unitaries(angles)
    amp = np.einsum("i,nij,j->n", psi.conj(), U, psi)
    vals = 1 - np.abs(amp) ** 2
    ref = em.mean_infidelity_quadrature(sigma)
    assert abs(vals.mean() - ref) < 3 * vals.std() / np.sqrt(n)


def test_quadrature_small_sigma_scaling():
    sig = np.array([0.02, 0.05, 0.1])
    vals = [em.mean_infidelity_quadrature(s) for s in sig]
    slope = np.polyfit(np.log(sig), np.log(vals), 1)[0]
    assert 1.9 <= slope <= 2.1
