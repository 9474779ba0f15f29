from __future__ import annotations

import numpy as np
import pytest
from conftest import random_x_entries, wootters

from steerkit.errors import InvalidState, NotXState, ParameterOutOfRange
from steerkit.qstate import (
    PauliForm,
    SingleQubitState,
    TwoQubitState,
    XStateParams,
    canonicalize_x,
    concurrence,
    depolarize,
    partial_trace,
    pauli_decompose,
    pauli_reconstruct,
    psi_alpha,
    rho_zero,
)


def test_bell_state_pauli_form():
    form = pauli_decompose(psi_alpha(0.5))
    assert np.allclose(form.a, 0) and np.allclose(form.b, 0)
    assert np.allclose(form.T, np.diag([1.0, -1.0, 1.0]))


def test_psi_alpha_local_bloch_vectors():
    al = 0.2
    form = pauli_decompose(psi_alpha(al))
    assert np.allclose(form.a, [0, 0, 1 - 2 * al])
    assert np.allclose(form.b, [0, 0, 1 - 2 * al])
    s = 2 * np.sqrt(al * (1 - al))
    assert np.allclose(np.diag(form.T), [s, -s, 1])


def test_psi_alpha_rejects_out_of_range():
    for bad in (0.0, -0.1, 0.51):
        with pytest.raises(ParameterOutOfRange):
            psi_alpha(bad)


def test_pauli_round_trip_random_states(rng):
    for _ in range(30):
        g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        rho = g @ g.conj().T
        rho /= np.trace(rho)
        st = TwoQubitState(rho)
        back = pauli_reconstruct(pauli_decompose(st))
        assert np.allclose(back.rho, rho, atol=1e-13)


def test_invalid_states_rejected():
    with pytest.raises(InvalidState):
        TwoQubitState(np.diag([0.5, 0.5, 0.5, -0.5]))
    with pytest.raises(InvalidState):
        TwoQubitState(np.eye(4) / 2)
    nonherm = np.eye(4, dtype=complex) / 4
    nonherm[0, 1] = 0.1
    with pytest.raises(InvalidState):
        TwoQubitState(nonherm)
    with pytest.raises(InvalidState):
        TwoQubitState(np.eye(3) / 3)


def test_partial_trace_product_state():
    a = np.array([[0.7, 0.1], [0.1, 0.3]])
    b = np.array([[0.4, 0.2j], [-0.2j, 0.6]])
    st = TwoQubitState(np.kron(a, b))
    assert np.allclose(partial_trace(st, "A").rho, a)
    assert np.allclose(partial_trace(st, "B").rho, b)
    with pytest.raises(ValueError):
        partial_trace(st, "C")


def test_partial_trace_matches_bloch_vectors(rng):
    for _ in range(10):
        x = XStateParams.from_entries(*random_x_entries(rng, equal_perp=False))
        st = x.to_state()
        assert np.allclose(partial_trace(st, "A").bloch, [0, 0, x.a])
        assert np.allclose(partial_trace(st, "B").bloch, [0, 0, x.b])


def test_concurrence_matches_wootters(rng):
    for _ in range(50):
        x = XStateParams.from_entries(*random_x_entries(rng, equal_perp=False))
        st = x.to_state()
        assert concurrence(st) == pytest.approx(wootters(st.rho), abs=1e-10)


def test_concurrence_known_values():
    assert concurrence(psi_alpha(0.5)) == pytest.approx(1.0)
    assert concurrence(psi_alpha(0.1)) == pytest.approx(2 * np.sqrt(0.09))
    assert concurrence(TwoQubitState(np.eye(4) / 4)) == 0.0


def test_concurrence_needs_x_pattern():
    v = np.array([1, 1, 0, 0]) / np.sqrt(2)
    with pytest.raises(NotXState):
        concurrence(TwoQubitState(np.outer(v, v)))


def test_canonicalize_is_local_unitary_invariant(rng):
    for _ in range(20):
        e = random_x_entries(rng, equal_perp=False)
        x = XStateParams.from_entries(*e)
        can = canonicalize_x(x.to_state())
        assert can.t_x >= 0 and can.t_x >= abs(can.t_y)
        assert abs(can.t_x) + abs(can.t_y) == pytest.approx(abs(x.t_x) + abs(x.t_y))
        assert max(abs(can.t_x), abs(can.t_y)) == pytest.approx(max(abs(x.t_x), abs(x.t_y)))
        assert (can.a, can.b, can.t_z) == pytest.approx((x.a, x.b, x.t_z))


def test_x_entries_from_parameters():
    x = XStateParams(0.1, -0.2, 0.3, -0.1, 0.05)
    x11, x22, x33, x44, x14, x23 = x.entries()
    assert x11 == pytest.approx((1 + 0.1 - 0.2 + 0.05) / 4)
    assert x44 == pytest.approx((1 - 0.1 + 0.2 + 0.05) / 4)
    assert x14 == pytest.approx((0.3 + 0.1) / 4)
    assert x23 == pytest.approx((0.3 - 0.1) / 4)
    assert np.allclose(x.matrix(), pauli_reconstruct(x.to_pauli()).rho)


def test_swap_exchanges_parties(rng):
    x = XStateParams.from_entries(*random_x_entries(rng, equal_perp=False))
    swap = np.eye(4)[[0, 2, 1, 3]]
    assert np.allclose(x.swap().matrix(), swap @ x.matrix() @ swap)
    assert np.allclose(pauli_decompose(x.swap().to_state()).T, x.to_pauli().T.T)


def test_depolarize_and_rho_zero():
    st = depolarize(psi_alpha(0.5), 0.4)
    assert np.allclose(pauli_decompose(st).T, 0.6 * np.diag([1, -1, 1]))
    assert np.allclose(rho_zero().bloch, [0, 0, 1])
    with pytest.raises(ParameterOutOfRange):
        depolarize(psi_alpha(0.5), 1.5)


def test_single_qubit_validation():
    with pytest.raises(InvalidState):
        SingleQubitState(np.array([[1.2, 0], [0, -0.2]]))


def test_pauli_form_shape_checked():
    with pytest.raises((ValueError, InvalidState)):
        PauliForm([0, 0], [0, 0, 0], np.eye(3))
