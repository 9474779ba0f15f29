from __future__ import annotations

import math

import numpy as np
import pytest

from steerkit.errors import InvalidScenario, NTooLarge, ParameterOutOfRange
from steerkit.qstate import concurrence, partial_trace, pauli_decompose
from steerkit.scenarios import (
    Kind,
    PairRole,
    Scenario,
    bob_bob_params,
    build_full_state,
    entanglement_threshold,
    reduced_pair_state,
    reduced_params,
    signed_concurrence,
)


def _pure_pair(alpha, mu):
    """(1 - mu) |psi_alpha><psi_alpha| + mu I/4 built from scratch."""
    v = np.zeros(4)
    v[0], v[3] = math.sqrt(1 - alpha), math.sqrt(alpha)
    return (1 - mu) * np.outer(v, v) + mu * np.eye(4) / 4


def test_srpe_reduced_state_by_hand():
    al, mu, n = 0.2, 0.1, 5
    z0 = np.diag([1.0, 0.0])
    pair = _pure_pair(al, mu)
    half = pair.reshape(2, 2, 2, 2).trace(axis1=1, axis2=3)  # the hub's half of its own pair
    expected = pair / (n - 1) + (n - 2) / (n - 1) * np.kron(half, z0)
    x = reduced_pair_state(Scenario("srpe", n, al, mu))
    assert np.allclose(x.matrix(), expected, atol=1e-14)


def test_rpe_reduced_state_by_hand():
    al, mu, n = 0.3, 0.05, 4
    z0 = np.diag([1.0, 0.0])
    pair = _pure_pair(al, mu)
    half = pair.reshape(2, 2, 2, 2).trace(axis1=0, axis2=2)
    N = n * (n - 1)
    w_pair, w_one = 2 / N, 2 * (n - 2) / N
    w_none = 1 - w_pair - 2 * w_one
    expected = w_pair * pair + w_one * (np.kron(half, z0) + np.kron(z0, half)) + w_none * np.kron(z0, z0)
    x = reduced_pair_state(Scenario("rpe", n, al, mu))
    assert np.allclose(x.matrix(), expected, atol=1e-14)


def test_rhalfpe_reduced_state_by_hand():
    al, mu, n = 0.15, 0.2, 6
    pair = _pure_pair(al, mu)
    half = pair.reshape(2, 2, 2, 2).trace(axis1=0, axis2=2)
    s = 1 / (n - 1)
    expected = s * pair + (1 - s) * np.kron(half, half)
    x = reduced_pair_state(Scenario("rhalfpe", n, al, mu))
    assert np.allclose(x.matrix(), expected, atol=1e-14)


@pytest.mark.parametrize("kind,n", [("srpe", 3), ("srpe", 4), ("rpe", 3), ("rpe", 4), ("rhalfpe", 4)])
def test_full_state_is_a_density_matrix(kind, n):
    full = build_full_state(Scenario(kind, n, 0.3, 0.1))
    assert full.min_eigenvalue() > -1e-12
    assert np.trace(full.rho).real == pytest.approx(1.0)


def test_full_state_reductions_agree():
    sc = Scenario("srpe", 4, 0.27, 0.07)
    full = build_full_state(sc)
    assert np.allclose(full.reduce(0, 1).rho, reduced_pair_state(sc).matrix(), atol=1e-12)
    assert np.allclose(full.reduce(1, 0).rho, reduced_pair_state(sc, "ba").matrix(), atol=1e-12)
    assert np.allclose(full.reduce(2, 3).rho, bob_bob_params(sc).matrix(), atol=1e-12)


def test_full_state_size_guard():
    with pytest.raises(NTooLarge):
        build_full_state(Scenario("rpe", 9, 0.3))


def test_scenario_validation():
    with pytest.raises(InvalidScenario):
        Scenario("rhalfpe", 5, 0.3)
    with pytest.raises(InvalidScenario):
        Scenario("rpe", 2, 0.3)
    with pytest.raises(InvalidScenario):
        Scenario("bogus", 4, 0.3)
    with pytest.raises(ParameterOutOfRange):
        Scenario("srpe", 4, 0.6)
    with pytest.raises(ParameterOutOfRange):
        Scenario("srpe", 4, 0.3, -0.1)


def test_real_n_allowed_in_reduced_params():
    x = reduced_params(Kind.SRPE, 3.5, 0.2)
    assert x.t_perp == pytest.approx(2 * math.sqrt(0.16) / 2.5)


def test_direction_swaps_roles():
    sc = Scenario("srpe", 5, 0.2, 0.0)
    ab, ba = reduced_pair_state(sc, PairRole.ALICE_TO_BOB), reduced_pair_state(sc, PairRole.BOB_TO_ALICE)
    assert (ab.a, ab.b) == pytest.approx((ba.b, ba.a))


def test_concurrence_of_reduced_states_matches_closed_form():
    for n in (4, 6, 10):
        x = reduced_pair_state(Scenario("rhalfpe", n, 0.02))
        s = 2 * math.sqrt(0.02 * 0.98)
        x11, x22, x33, x44, _, _ = x.entries()
        expected = max(0.0, s / (n - 1) - 2 * math.sqrt(x22 * x33))
        assert concurrence(x.to_state()) == pytest.approx(expected)


def test_entanglement_intervals():
    iv = entanglement_threshold("rpe", 5)
    assert iv.upper == pytest.approx(1 / 10)
    assert iv.contains(0.05) and not iv.contains(0.2)
    iv = entanglement_threshold("rhalfpe", 4)
    assert iv.upper == pytest.approx(0.5)
    iv = entanglement_threshold("srpe", 7)
    assert iv.contains(0.5)


def test_entanglement_bisect_matches_closed_form():
    for kind, n in (("rpe", 3), ("rpe", 8), ("rhalfpe", 6), ("rhalfpe", 12)):
        a = entanglement_threshold(kind, n).upper
        b = entanglement_threshold(kind, n, method="bisect").upper
        assert a == pytest.approx(b, abs=1e-9)


def test_noise_shrinks_entangled_range():
    clean = entanglement_threshold("rpe", 4, 0.0).upper
    noisy = entanglement_threshold("rpe", 4, 0.05)
    assert noisy is None or noisy.upper < clean


def test_signed_concurrence_vectorised():
    al = np.linspace(0.01, 0.5, 7)
    c = signed_concurrence("srpe", 4, al)
    assert c.shape == al.shape and np.all(c > 0)
