"""Analytic steering criterion for X-states with |t_x| = |t_y| and its threshold solvers.

For a measurement scheme made of sigma_z plus m equally spaced equatorial
observables, Alice steers Bob iff 2m sin(pi/2m) > F / t_perp with

    F = sqrt((1+a)^2 - (b+t_z)^2) + sqrt((1-a)^2 - (b-t_z)^2).

The equatorial limit m -> inf has left-hand side pi.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import (
    NegativeRadicand,
    NonMonotoneMargin,
    ParameterOutOfRange,
    TheoremPreconditionViolated,
    UnsupportedScheme,
)
from .qstate import XStateParams
from .scenarios import Kind, PairRole, Scenario, check_n, parse_kind, parse_role, reduced_params

RADICAND_CLAMP = 1e-12
TPERP_EQUAL_TOL = 1e-10
ROOT_XTOL = 1e-13
ROOT_MAXITER = 200
# alpha is scanned over (0, 1); above 1/2 the formulas are an analytic continuation
ALPHA_SCAN = np.unique(
    np.concatenate([np.geomspace(1e-12, 0.5, 500), np.linspace(0.5, 1.0 - 1e-9, 500)])
)
N_SCAN = 2.0 + np.geomspace(1e-9, 1e6, 1000)


@dataclass(frozen=True)
class MeasurementScheme:
    """kind is 'dihedral' (sigma_z plus m equatorial settings), 'equatorial' or 'projective'."""

    kind: str
    m: int = 0
    resolution: int = 0

    def __post_init__(self) -> None:
        if self.kind == "dihedral":
            if int(self.m) != self.m or self.m < 1:
                raise UnsupportedScheme(f"dihedral scheme needs m >= 1, got {self.m}")
            object.__setattr__(self, "m", int(self.m))
        elif self.kind == "projective":
            if int(self.resolution) != self.resolution or self.resolution < 1:
                raise UnsupportedScheme(f"projective scheme needs a resolution >= 1")
        elif self.kind != "equatorial":
            raise UnsupportedScheme(f"unknown scheme kind {self.kind!r}")

    @classmethod
    def two_settings(cls) -> MeasurementScheme:
        return cls("dihedral", 1)

    @classmethod
    def three_settings(cls) -> MeasurementScheme:
        return cls("dihedral", 2)

    @classmethod
    def dihedral(cls, m: int) -> MeasurementScheme:
        return cls("dihedral", m)

    @classmethod
    def equatorial(cls) -> MeasurementScheme:
        return cls("equatorial")

    @classmethod
    def all_projective(cls, resolution: int) -> MeasurementScheme:
        return cls("projective", resolution=resolution)

    @classmethod
    def parse(cls, text: str) -> MeasurementScheme:
        t = text.strip().lower()
        if t == "m2":
            return cls.two_settings()
        if t == "m3":
            return cls.three_settings()
        if t in ("equatorial", "me"):
            return cls.equatorial()
        mt = re.fullmatch(r"dihedral:(\d+)", t)
        if mt:
            return cls.dihedral(int(mt.group(1)))
        mt = re.fullmatch(r"projective:(\d+)", t)
        if mt:
            return cls.all_projective(int(mt.group(1)))
        raise UnsupportedScheme(f"cannot parse measurement scheme {text!r}")

    @property
    def name(self) -> str:
        if self.kind == "dihedral":
            return {1: "m2", 2: "m3"}.get(self.m, f"dihedral:{self.m}")
        if self.kind == "projective":
            return f"projective:{self.resolution}"
        return "equatorial"

    @property
    def analytic(self) -> bool:
        return self.kind in ("dihedral", "equatorial")

    @property
    def lhs_bound(self) -> float:
        if self.kind == "dihedral":
            m = self.m
            return 2 * m * math.sin(math.pi / (2 * m))
        if self.kind == "equatorial":
            return math.pi
        raise UnsupportedScheme("all-projective steering has no closed-form bound")

    def directions(self) -> np.ndarray:
        """Distinct measurement axes: z first, then equatorial angles l*pi/m, l < m."""
        if self.kind != "dihedral":
            raise UnsupportedScheme(f"{self.name} has no finite direction list")
        th = np.arange(self.m) * np.pi / self.m
        eq = np.stack([np.cos(th), np.sin(th), np.zeros_like(th)], axis=1)
        return np.vstack([[0.0, 0.0, 1.0], eq])


@dataclass(frozen=True)
class CriterionReport:
    lhs: float
    rhs: float
    steerable: bool
    margin: float


def _oriented(x: XStateParams, direction: PairRole | str) -> XStateParams:
    return x.swap() if parse_role(direction) is PairRole.BOB_TO_ALICE else x


def _sqrt_clamped(r):
    r = np.asarray(r, dtype=float)
    if np.any(r < -RADICAND_CLAMP):
        raise NegativeRadicand(f"radicand {float(np.min(r)):.3e} is negative")
    return np.sqrt(np.clip(r, 0.0, None))


def _f_from_entries(x: XStateParams):
    # (1+a)^2 - (b+t_z)^2 = 16 X11 X22 and (1-a)^2 - (b-t_z)^2 = 16 X33 X44
    x11, x22, x33, x44, _, _ = x.entries()
    return _sqrt_clamped(16 * x11 * x22) + _sqrt_clamped(16 * x33 * x44)


def f_value(x: XStateParams, direction: PairRole | str = PairRole.ALICE_TO_BOB) -> float:
    return float(_f_from_entries(_oriented(x, direction)))


def _require_analytic(scheme: MeasurementScheme) -> None:
    if not scheme.analytic:
        raise UnsupportedScheme(
            f"{scheme.name} is not covered by the analytic criterion; use the LP oracle"
        )


def steerable(
    x: XStateParams, scheme: MeasurementScheme, direction: PairRole | str = PairRole.ALICE_TO_BOB
) -> CriterionReport:
    _require_analytic(scheme)
    if abs(abs(x.t_x) - abs(x.t_y)) > TPERP_EQUAL_TOL:
        raise TheoremPreconditionViolated(
            f"criterion needs |t_x| = |t_y|, got {x.t_x!r} and {x.t_y!r}"
        )
    lhs = scheme.lhs_bound
    f = f_value(x, direction)
    if x.t_perp == 0.0:
        return CriterionReport(lhs, math.inf, False, -math.inf)
    rhs = f / x.t_perp
    return CriterionReport(lhs, rhs, lhs > rhs, lhs - rhs)


# -- closed forms -------------------------------------------------------------


def _symmetric_ratio(one_minus_tz, plus, minus, tperp):
    """F / t_perp for a = b, written as sqrt(1-t_z)(sqrt(1+t_z+2a) + sqrt(1+t_z-2a))."""
    f = _sqrt_clamped(one_minus_tz) * (_sqrt_clamped(plus) + _sqrt_clamped(minus))
    return f / tperp


def closed_form_ratio(kind: Kind | str, n: float, alpha: float, mu: float, direction) -> float:
    """F / t_perp of the reduced pair, from per-scenario closed expressions."""
    kind = parse_kind(kind)
    direction = parse_role(direction)
    if mu >= 1.0:
        return math.inf
    c = 1.0 - mu
    if kind is Kind.SRPE:
        A = mu + 4 * alpha * (1 - mu)
        B = 4 * alpha * (1 - mu) * (n - 2) + mu * (2 * n - 3)
        C = 4 * (n - 1) * (1 - alpha * (1 - mu)) - mu * (2 * n - 1)
        D = 2 * (1 - mu) * math.sqrt(alpha * (1 - alpha))
        if direction is PairRole.ALICE_TO_BOB:
            num = _sqrt_clamped(A * B) + _sqrt_clamped(mu * C)
        else:
            num = _sqrt_clamped(mu * A) + _sqrt_clamped(B * C)
        return float(num / D)
    if kind is Kind.RHALFPE:
        if mu == 0.0:
            eta = 1 + alpha * (n - 2)
            return 2 * math.sqrt(n - 2) * (
                math.sqrt(alpha * eta) + math.sqrt((1 - alpha) * (n - eta))
            )
        u = 1 - 2 * alpha
        s = 2 * math.sqrt(alpha * (1 - alpha))
        q = (n - 2) * c * c * u * u
        X = (n - 1) - c - q
        Yp = (n - 1) * (1 + 2 * c * u) + c + q
        Ym = (n - 1) * (1 - 2 * c * u) + c + q
        return float(_symmetric_ratio(X, Yp, Ym, c * s))
    # RPE
    if mu == 0.0:
        return (
            math.sqrt(2 * (n - 2))
            * (math.sqrt(2 * alpha) + math.sqrt(6 * alpha + n * (n - 1 - 4 * alpha)))
            / math.sqrt(1 - alpha)
        )
    u = 1 - 2 * alpha
    s = 2 * math.sqrt(alpha * (1 - alpha))
    N = n * (n - 1)
    r = (n - 2) * (n - 3)
    P = N - 2 * c - 4 * (n - 2) * c * u - r
    Q = N + 2 * c + 4 * (n - 2) * c * u + r
    a_term = 2 * (2 * c * u + 2 * (n - 2) * c * u + 2 * (n - 2) + r)
    return float(_symmetric_ratio(P, Q + a_term, Q - a_term, 2 * c * s))


def f_over_tperp_closed_form(sc: Scenario, direction: PairRole | str = PairRole.ALICE_TO_BOB) -> float:
    return closed_form_ratio(sc.kind, sc.n, sc.alpha, sc.mu, direction)


# -- thresholds ---------------------------------------------------------------


def margin_curve(kind: Kind | str, n, alpha, mu: float, direction, lhs: float):
    """lhs - F/t_perp of the reduced pair; vectorised over alpha or n."""
    x = _oriented(reduced_params(kind, n, alpha, mu), direction)
    f = _f_from_entries(x)
    tp = np.abs(x.t_x)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(tp > 0, f / np.where(tp > 0, tp, 1.0), np.inf)
    return lhs - ratio


def _sup_of_steerable(grid: np.ndarray, margins: np.ndarray, scalar_margin) -> float | None:
    pos = margins > 0
    if not pos.any():
        return None
    idx = np.flatnonzero(pos)
    if np.any(np.diff(idx) > 1):
        raise NonMonotoneMargin("steerable parameters do not form a single interval")
    hi = idx[-1]
    if hi == len(grid) - 1:
        return math.inf
    return float(
        brentq(scalar_margin, grid[hi], grid[hi + 1], xtol=ROOT_XTOL, maxiter=ROOT_MAXITER)
    )


def _check_mu(mu: float) -> None:
    if not 0.0 <= mu <= 1.0:
        raise ParameterOutOfRange(f"mu must lie in [0, 1], got {mu}")


def alpha_threshold(
    kind: Kind | str,
    n: float,
    scheme: MeasurementScheme,
    direction: PairRole | str = PairRole.ALICE_TO_BOB,
    mu: float = 0.0,
    *,
    method: str = "auto",
) -> float | None:
    """Supremum of steerable alpha, or None when no alpha steers.

    The search runs over the analytic continuation alpha in (0, 1); a result of
    at least 1/2 means every physical alpha in (0, 1/2] steers, and 1.0 means the
    criterion holds all the way up.
    """
    kind = parse_kind(kind)
    direction = parse_role(direction)
    _require_analytic(scheme)
    check_n(kind, float(n), integral=False)
    _check_mu(mu)
    L = scheme.lhs_bound
    if method not in ("auto", "bisect"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto" and kind is Kind.SRPE and mu == 0.0:
        if direction is PairRole.ALICE_TO_BOB:
            return L * L / (4 * (n - 2) + L * L)
        # Bob's side does not depend on alpha
        return 1.0 if 2 * math.sqrt((n - 1) * (n - 2)) < L else None

    margins = margin_curve(kind, n, ALPHA_SCAN, mu, direction, L)

    def f(al):
        return float(margin_curve(kind, n, al, mu, direction, L))

    sup = _sup_of_steerable(ALPHA_SCAN, margins, f)
    return 1.0 if sup == math.inf else sup


def n_threshold(
    kind: Kind | str,
    scheme: MeasurementScheme,
    direction: PairRole | str,
    alpha: float,
    mu: float = 0.0,
    *,
    method: str = "auto",
) -> float | None:
    """Supremum of steerable real n > 2; inf if steering persists for every n scanned."""
    kind = parse_kind(kind)
    direction = parse_role(direction)
    _require_analytic(scheme)
    _check_mu(mu)
    if not 0.0 < alpha < 1.0:
        raise ParameterOutOfRange(f"alpha must lie in (0, 1), got {alpha}")
    L = scheme.lhs_bound
    if method not in ("auto", "bisect"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto" and kind is Kind.SRPE and mu == 0.0:
        if direction is PairRole.BOB_TO_ALICE:
            return (3 + math.sqrt(1 + L * L)) / 2
        return 2 + L * L * (1 - alpha) / (4 * alpha)

    margins = margin_curve(kind, N_SCAN, alpha, mu, direction, L)

    def f(n):
        return float(margin_curve(kind, n, alpha, mu, direction, L))

    return _sup_of_steerable(N_SCAN, margins, f)
