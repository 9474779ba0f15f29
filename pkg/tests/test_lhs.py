from __future__ import annotations


import numpy as np
import pytest
from conftest import random_x_entries

from steerkit.criteria import MeasurementScheme, steerable
from steerkit.errors import StateIsSteerable, ValidationError
from steerkit.lhs import (
    Assemblage,
    LhsModel,
    Status,
    assemblage_from,
    assemblage_from_pauli,
    construct_xstate_lhs_ensemble,
    decide,
    lhs_feasible,
    solve_lhs_lp,
    verify_lhs_model,
    verify_witness,
)
from steerkit.polytope import bloch_polytope
from steerkit.qstate import TwoQubitState, XStateParams, pauli_decompose, psi_alpha


def _sigma(rho, n, r, side="A"):
    """Unnormalised conditional state for outcome r of n . sigma, computed by brute force."""
    P = 0.5 * (np.eye(2) + r * (n[0] * np.array([[0, 1], [1, 0]]) + n[1] * np.array([[0, -1j], [1j, 0]]) + n[2] * np.diag([1, -1])))
    R = rho.reshape(2, 2, 2, 2)
    if side == "A":
        return np.einsum("ij,jaib->ab", P, R)
    return np.einsum("ab,ibja->ij", P, R)


def test_assemblage_matches_brute_force(rng):
    x = XStateParams.from_entries(*random_x_entries(rng, equal_perp=False))
    st = x.to_state()
    dirs = rng.normal(size=(3, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    for side in ("A", "B"):
        asm = assemblage_from(st, dirs, side)
        for s, n in enumerate(dirs):
            for k, r in enumerate((1, -1)):
                assert np.allclose(asm.member(s, k), _sigma(st.rho, n, r, side), atol=1e-14)


def test_assemblage_pauli_route_agrees():
    st = psi_alpha(0.3)
    dirs = MeasurementScheme.three_settings().directions()
    a = assemblage_from(st, dirs)
    b = assemblage_from_pauli(pauli_decompose(st), dirs)
    assert np.allclose(a.coords, b.coords, atol=1e-15)


def test_assemblage_validates_no_signalling():
    coords = np.zeros((2, 2, 4))
    coords[:, :, 0] = 0.25
    coords[0, 0, 3] = 0.1
    coords[0, 1, 3] = -0.1
    coords[1, 0, 3] = 0.2
    coords[1, 1, 3] = 0.0
    with pytest.raises(ValidationError):
        Assemblage(np.eye(3)[[2, 0]], coords)


def test_bell_steerable_with_26_vertex_net():
    dirs = MeasurementScheme.two_settings().directions()
    asm = assemblage_from(psi_alpha(0.5), dirs)
    v = lhs_feasible(asm, bloch_polytope(26, "circumscribed"))
    assert v.status is Status.STEERABLE
    assert verify_witness(v.certificate, asm, bloch_polytope(26, "circumscribed"))


def test_bell_cube_is_too_coarse():
    dirs = MeasurementScheme.two_settings().directions()
    asm = assemblage_from(psi_alpha(0.5), dirs)
    assert lhs_feasible(asm, bloch_polytope(8, "circumscribed")).status is Status.UNDECIDED


def test_product_state_unsteerable():
    rho = np.kron(np.diag([0.7, 0.3]), np.diag([0.4, 0.6]))
    asm = assemblage_from(TwoQubitState(rho), MeasurementScheme.three_settings().directions())
    v = lhs_feasible(asm, bloch_polytope(42, "inscribed"))
    assert v.status is Status.UNSTEERABLE
    assert verify_lhs_model(v.certificate, asm)


def test_compact_and_deterministic_formulations_agree(rng):
    for _ in range(5):
        x = XStateParams.from_entries(*random_x_entries(rng))
        asm = assemblage_from(x.to_state(), MeasurementScheme.dihedral(2).directions())
        poly = bloch_polytope(42, "inscribed")
        f1, *_ = solve_lhs_lp(asm, poly, "compact")
        f2, *_ = solve_lhs_lp(asm, poly, "deterministic")
        assert f1 == pytest.approx(f2, abs=1e-7)


def test_decide_werner_family():
    dirs = MeasurementScheme.two_settings().directions()
    inner, outer = bloch_polytope(162, "inscribed"), bloch_polytope(162, "circumscribed")
    for p, expected in ((0.9, Status.STEERABLE), (0.5, Status.UNSTEERABLE)):
        x = XStateParams(0, 0, p, -p, p)
        assert decide(assemblage_from(x.to_state(), dirs), inner, outer).status is expected


def test_model_serialisation_round_trip():
    asm = assemblage_from(TwoQubitState(np.eye(4) / 4), MeasurementScheme.two_settings().directions())
    v = lhs_feasible(asm, bloch_polytope(26, "inscribed"))
    back = LhsModel.from_dict(v.certificate.to_dict())
    assert np.allclose(back.reconstruct(), v.certificate.reconstruct())


@pytest.mark.parametrize("m", [1, 2, 4])
def test_explicit_construction_reconstructs(rng, m):
    scheme = MeasurementScheme.dihedral(m)
    built = 0
    while built < 5:
        x = XStateParams.from_entries(*random_x_entries(rng))
        if steerable(x, scheme).steerable:
            with pytest.raises(StateIsSteerable):
                construct_xstate_lhs_ensemble(x, m)
            continue
        model = construct_xstate_lhs_ensemble(x, m)
        asm = assemblage_from(x.to_state(), model.directions)
        assert np.max(np.abs(model.reconstruct() - asm.coords)) < 1e-10
        assert np.all(model.responses >= 0) and np.all(model.responses <= 1)
        assert np.all(np.linalg.norm(model.hidden, axis=1) <= 1 + 1e-12)
        built += 1


def test_explicit_construction_at_boundary():
    # SRPE n = 4 at alpha = 1/3 sits exactly on the M2 boundary
    from steerkit.scenarios import Scenario, reduced_pair_state

    x = reduced_pair_state(Scenario("srpe", 4, 1 / 3))
    model = construct_xstate_lhs_ensemble(x, 1)
    asm = assemblage_from(x.to_state(), model.directions)
    assert np.max(np.abs(model.reconstruct() - asm.coords)) < 1e-10
