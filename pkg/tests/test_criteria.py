from __future__ import annotations

import math

import numpy as np
import pytest

from steerkit.criteria import (
    MeasurementScheme,
    alpha_threshold,
    closed_form_ratio,
    f_over_tperp_closed_form,
    f_value,
    margin_curve,
    n_threshold,
    steerable,
)
from steerkit.errors import ParameterOutOfRange, TheoremPreconditionViolated, UnsupportedScheme
from steerkit.qstate import XStateParams, psi_alpha, pauli_decompose
from steerkit.scenarios import Kind, Scenario, reduced_pair_state

M2, M3, ME = MeasurementScheme.two_settings(), MeasurementScheme.three_settings(), MeasurementScheme.equatorial()


def _f_direct(x: XStateParams) -> float:
    return math.sqrt((1 + x.a) ** 2 - (x.b + x.t_z) ** 2) + math.sqrt((1 - x.a) ** 2 - (x.b - x.t_z) ** 2)


def test_lhs_bounds():
    assert M2.lhs_bound == pytest.approx(2.0)
    assert M3.lhs_bound == pytest.approx(2 * math.sqrt(2))
    assert ME.lhs_bound == math.pi
    assert MeasurementScheme.dihedral(500).lhs_bound == pytest.approx(math.pi, abs=1e-5)


def test_scheme_parsing_and_names():
    for text in ("m2", "m3", "equatorial", "dihedral:5", "projective:60"):
        assert MeasurementScheme.parse(text).name == text
    with pytest.raises(UnsupportedScheme):
        MeasurementScheme.parse("m7")
    with pytest.raises(UnsupportedScheme):
        MeasurementScheme.dihedral(0)


def test_scheme_directions():
    d = MeasurementScheme.dihedral(3).directions()
    assert d.shape == (4, 3)
    assert np.allclose(np.linalg.norm(d, axis=1), 1)
    assert np.allclose(d[0], [0, 0, 1])


def test_f_matches_textbook_formula(rng):
    for _ in range(50):
        d = rng.dirichlet(np.ones(4))
        x = XStateParams.from_entries(*d, 0.5 * math.sqrt(d[0] * d[3]), 0.0)
        assert f_value(x) == pytest.approx(_f_direct(x), abs=1e-12)


def test_bell_state_steerable_with_two_settings():
    x = XStateParams(0, 0, 1, -1, 1)
    rep = steerable(x, M2)
    assert rep.steerable and rep.rhs == pytest.approx(0.0)


def test_werner_family_boundary():
    # p |Phi+><Phi+| + (1 - p) I/4 has F / t_perp = 2 sqrt(1 - p^2) / p
    for p in (0.6, 0.8):
        x = XStateParams(0, 0, p, -p, p)
        rep = steerable(x, M2)
        assert rep.rhs == pytest.approx(2 * math.sqrt(1 - p * p) / p)
        assert rep.steerable == (2 > 2 * math.sqrt(1 - p * p) / p)


def test_precondition_and_product_state():
    with pytest.raises(TheoremPreconditionViolated):
        steerable(XStateParams(0, 0, 0.3, 0.1, 0.2), M2)
    rep = steerable(XStateParams(0.2, 0.1, 0, 0, 0.02), M2)
    assert not rep.steerable and rep.rhs == math.inf


def test_projective_scheme_is_not_analytic():
    with pytest.raises(UnsupportedScheme):
        steerable(XStateParams(0, 0, 1, -1, 1), MeasurementScheme.all_projective(26))


@pytest.mark.parametrize("kind,n", [("srpe", 3), ("srpe", 7), ("rpe", 5), ("rhalfpe", 6)])
@pytest.mark.parametrize("mu", [0.0, 0.03])
def test_closed_form_ratio_matches_reduced_state(kind, n, mu):
    for al in (0.01, 0.2, 0.5):
        sc = Scenario(kind, n, al, mu)
        for direction in ("ab", "ba"):
            x = reduced_pair_state(sc, direction)
            assert f_over_tperp_closed_form(sc, direction) == pytest.approx(f_value(x) / x.t_perp, rel=1e-12)


def test_srpe_thresholds_closed_forms():
    for n in (3, 4, 9):
        assert alpha_threshold("srpe", n, M2) == pytest.approx(1 / (n - 1))
        assert alpha_threshold("srpe", n, M3) == pytest.approx(2 / n)
    assert n_threshold("srpe", M2, "ba", 0.3) == pytest.approx((3 + math.sqrt(5)) / 2)
    assert n_threshold("srpe", M3, "ba", 0.3) == pytest.approx(3.0)


def test_threshold_is_a_sign_change_of_the_margin():
    for kind, n, mu in (("srpe", 6, 0.05), ("rpe", 3, 0.0), ("srpe", 4, 0.0)):
        a = alpha_threshold(kind, n, ME, "ab", mu, method="bisect")
        if a is None or a >= 1.0:
            continue
        below = margin_curve(kind, n, a * (1 - 1e-6), mu, "ab", math.pi)
        above = margin_curve(kind, n, a * (1 + 1e-6), mu, "ab", math.pi)
        assert below > 0 > above


def test_no_steering_for_rhalfpe_finite_schemes():
    for n in (4, 6):
        assert alpha_threshold("rhalfpe", n, M2) is None
        assert alpha_threshold("rhalfpe", n, M3) is None


def test_n_threshold_srpe_forward_matches_alpha_threshold():
    n_star = n_threshold("srpe", M2, "ab", 0.1)
    assert n_star == pytest.approx(11.0)
    assert alpha_threshold("srpe", n_star, M2) == pytest.approx(0.1)


def test_threshold_input_validation():
    with pytest.raises(ParameterOutOfRange):
        alpha_threshold("srpe", 4, M2, mu=1.5)
    with pytest.raises(ParameterOutOfRange):
        n_threshold("srpe", M2, "ab", 0.0)


def test_closed_form_ratio_real_n():
    r = closed_form_ratio(Kind.SRPE, 4.5, 0.2, 0.0, "ab")
    # hub side at mu = 0: F / t_perp = 2 sqrt((n - 2) alpha / (1 - alpha))
    assert r == pytest.approx(2 * math.sqrt(2.5 * 0.2 / 0.8), rel=1e-12)
