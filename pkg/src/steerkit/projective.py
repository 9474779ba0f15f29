"""Two-sided certificates for steering under every projective measurement.

States whose correlations are symmetric under rotations about z (X-states with
|t_x| = |t_y|) reduce to a problem on meridian angles only:

* hidden states are rings at polar angle zeta, spread uniformly in azimuth;
* Alice's setting is a ring of directions at polar angle theta;
* a response on a ring is summarised by its mean c0 and first Fourier
  moment c1, and the achievable pairs are |c1| <= sin(pi c0) / pi.

Steerable side: measure only finitely many polar angles (all azimuths), relax the
hidden rings outward and the (c0, c1) region by tangent lines. Infeasibility
gives a dual witness, re-checked against every pure hidden state by a
Lipschitz-bounded sweep over zeta.

Unsteerable side: solve the inner problem (unit rings, chords) for the state
with a and T divided by eta, the inradius of the hull of the measured polar
angles. Any projective direction scaled by eta is a convex mixture of measured
directions, so the model extends to every measurement on the original state.

Other states fall back to geodesic direction nets on the full sphere.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .errors import ResolutionTooLow, SolverNumericalFailure, ValidationError
from .lhs import (
    FEASIBILITY_TOL,
    RECONSTRUCTION_TOL,
    WITNESS_GAP_TOL,
    Assemblage,
    SteeringVerdict,
    Status,
    UndecidedBounds,
    assemblage_from_pauli,
    lhs_feasible,
)
from .polytope import bloch_polytope, half_directions, inradius, unit_vertices
from .qstate import PauliForm, TwoQubitState, XStateParams, canonicalize_x, pauli_decompose

MIN_RESOLUTION = 6
AXIAL_TOL = 1e-10
TANGENTS = 16
MAX_REFINE = 40


def _s(c):
    return np.sin(np.pi * c) / np.pi


@dataclass(frozen=True)
class AxialState:
    """Rotation-symmetric two-qubit data: a, b along z, T = diag(t, +-t, t_z)."""

    a: float
    b: float
    t: float
    t_z: float

    def inflated(self, eta: float) -> AxialState:
        return AxialState(self.a / eta, self.b, self.t / eta, self.t_z / eta)

    def rows(self, thetas: np.ndarray) -> np.ndarray:
        """Right-hand side: marginal (1, b), then (v0, v_perp, v_z) per polar angle."""
        th = np.asarray(thetas, dtype=float)
        per = np.column_stack(
            [(1 + self.a * np.cos(th)) / 2, self.t * np.sin(th) / 2, (self.b + self.t_z * np.cos(th)) / 2]
        )
        return np.concatenate([[1.0, self.b], per.ravel()])

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "t": self.t, "t_z": self.t_z}


def axial_form(form: PauliForm, tol: float = AXIAL_TOL) -> AxialState | None:
    """Return the axial data if the Pauli form is rotation-symmetric about z."""
    T = form.T
    off = [T[0, 1], T[1, 0], T[0, 2], T[2, 0], T[1, 2], T[2, 1]]
    if max(abs(form.a[0]), abs(form.a[1]), abs(form.b[0]), abs(form.b[1])) > tol:
        return None
    if max(abs(v) for v in off) > tol or abs(abs(T[0, 0]) - abs(T[1, 1])) > tol:
        return None
    return AxialState(float(form.a[2]), float(form.b[2]), float(abs(T[0, 0])), float(T[2, 2]))


def axial_from_x(x: XStateParams) -> AxialState:
    if abs(abs(x.t_x) - abs(x.t_y)) > AXIAL_TOL:
        raise ValidationError("state is not rotation-symmetric about z")
    return AxialState(x.a, x.b, x.t_perp, x.t_z)


# -- node layouts ---------------------------------------------------------------


def uniform_thetas(count: int) -> np.ndarray:
    return np.linspace(0.0, np.pi / 2, count)


def clustered_thetas(count: int) -> np.ndarray:
    half = count // 2
    return np.unique(np.concatenate([
        np.linspace(0.0, np.pi / 2, half), np.geomspace(1e-3, np.pi / 2, count - half)
    ]))


def clustered_zetas(count: int) -> np.ndarray:
    q = max(count // 4, 2)
    g = np.geomspace(1e-3, np.pi / 2, q)
    return np.unique(np.concatenate([np.linspace(0.0, np.pi, count - 2 * q), g, np.pi - g]))


def covering_eta(thetas: np.ndarray) -> float:
    """Inradius of the hull of the measured directions and their mirror images."""
    th = np.asarray(thetas, dtype=float)
    if np.any(th < 0) or np.any(th > np.pi / 2):
        raise ValidationError("polar angles must lie in [0, pi/2]")
    ang = np.concatenate([th, -th, np.pi - th, np.pi + th])
    ang = np.sort(np.mod(ang, 2 * np.pi))
    gaps = np.diff(np.concatenate([ang, [ang[0] + 2 * np.pi]]))
    return float(math.cos(gaps.max() / 2))


# -- ring LP ----------------------------------------------------------------------


def _region_lines(K: int, outer: bool):
    c = np.linspace(0.0, 1.0, K + 1)
    if outer:
        slope = np.cos(np.pi * c)
        icpt = _s(c) - c * slope
    else:
        slope = (_s(c[1:]) - _s(c[:-1])) / (c[1:] - c[:-1])
        icpt = _s(c[:-1]) - slope * c[:-1]
    return slope, icpt


def _ring_lp(st: AxialState, thetas, zetas, radii, K: int, outer: bool):
    """Minimum total slack; variables mu_j, m_ij, n_ij (n free)."""
    I, J = len(thetas), len(zetas)
    rs = radii * np.sin(zetas)
    rc = radii * np.cos(zetas)
    nx = J + 2 * I * J
    ii, jj = np.meshgrid(np.arange(I), np.arange(J), indexing="ij")
    mi = (J + ii * J + jj).ravel()
    ni = (J + I * J + ii * J + jj).ravel()
    ir = ii.ravel()
    jr = jj.ravel()

    rows = [np.zeros(J, int), np.ones(J, int), 2 + 3 * ir, 3 + 3 * ir, 4 + 3 * ir]
    cols = [np.arange(J), np.arange(J), mi, ni, mi]
    vals = [np.ones(J), rc, np.ones(I * J), rs[jr], rc[jr]]
    ne = 2 + 3 * I
    A = sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(ne, nx)
    )
    b = st.rows(thetas)

    slope, icpt = _region_lines(K, outer)
    L = len(slope)
    P = I * J
    # for each (i, j) and line l: +-n - slope m - icpt mu <= 0; then m - mu <= 0
    r_idx = np.arange(P * L * 2).reshape(P, L, 2)
    ub_rows, ub_cols, ub_vals = [], [], []
    for sign, k in ((1.0, 0), (-1.0, 1)):
        rr = r_idx[:, :, k]
        ub_rows += [rr.ravel(), rr.ravel(), rr.ravel()]
        ub_cols += [np.repeat(ni, L), np.repeat(mi, L), np.repeat(jr, L)]
        ub_vals += [np.full(P * L, sign), -np.tile(slope, P), -np.tile(icpt, P)]
    base = P * L * 2
    ub_rows += [base + np.arange(P), base + np.arange(P)]
    ub_cols += [mi, jr]
    ub_vals += [np.ones(P), -np.ones(P)]
    n_ub = base + P
    A_ub = sparse.csr_matrix(
        (np.concatenate(ub_vals), (np.concatenate(ub_rows), np.concatenate(ub_cols))),
        shape=(n_ub, nx + 2 * ne),
    )
    A_eq = sparse.hstack([A, sparse.identity(ne), -sparse.identity(ne)]).tocsr()
    cost = np.concatenate([np.zeros(nx), np.ones(2 * ne)])
    bounds = [(0, None)] * (J + P) + [(None, None)] * P + [(0, None)] * (2 * ne)
    res = linprog(cost, A_ub=A_ub, b_ub=np.zeros(n_ub), A_eq=A_eq, b_eq=b, bounds=bounds, method="highs")
    if res.status != 0:
        raise SolverNumericalFailure(f"ring LP failed: {res.message}")
    x = res.x
    mu = x[:J]
    m = x[J : J + P].reshape(I, J)
    n = x[J + P : J + 2 * P].reshape(I, J)
    return float(res.fun), mu, m, n, np.asarray(res.eqlin.marginals)


# -- steerable side ----------------------------------------------------------------


def _h(A, B):
    """max over c in [0,1] of A c + B sin(pi c)/pi, for B >= 0."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    out = np.where(A >= B, A, 0.0)
    mid = (np.abs(A) < B) & (B > 0)
    if np.any(mid):
        u0 = np.arccos(np.clip(-A[mid] / B[mid], -1.0, 1.0))
        out[mid] = (A[mid] * u0 + B[mid] * np.sin(u0)) / np.pi
    return out


def _G(y: np.ndarray, zeta: np.ndarray) -> np.ndarray:
    I = (len(y) - 2) // 3
    yi = y[2:].reshape(I, 3)
    cz = np.cos(zeta)
    sz = np.sin(zeta)
    A = yi[:, 0][:, None] + yi[:, 2][:, None] * cz[None, :]
    B = np.abs(yi[:, 1])[:, None] * sz[None, :]
    return y[0] + y[1] * cz + _h(A, B).sum(axis=0)


def witness_sup(y: np.ndarray, target: float | None = None, grid: int = 4097) -> float:
    """Rigorous upper bound on sup over zeta in [0, pi] of the witness's LHS value.

    Cells are bisected where the Lipschitz bound could still reach `target`.
    """
    I = (len(y) - 2) // 3
    yi = y[2:].reshape(I, 3)
    lip = abs(y[1]) + float(np.sum(np.abs(yi[:, 2]) + np.abs(yi[:, 1]) / np.pi))
    lo = np.linspace(0.0, np.pi, grid)[:-1]
    width = np.full(lo.shape, np.pi / (grid - 1))
    bound = -math.inf
    settled = -math.inf
    for _ in range(MAX_REFINE):
        gl = _G(y, lo)
        gr = _G(y, lo + width)
        ub = np.maximum(gl, gr) + lip * width / 2
        ub = np.minimum(ub, (gl + gr) / 2 + lip * width / 2)
        if target is None:
            return float(max(ub.max(), settled))
        open_ = ub >= target
        settled = max(settled, float(ub[~open_].max()) if np.any(~open_) else -math.inf)
        if not np.any(open_):
            return settled
        if np.max(np.maximum(gl, gr)[open_]) >= target:
            return float(max(ub.max(), settled))
        lo_o, w_o = lo[open_], width[open_] / 2
        lo = np.concatenate([lo_o, lo_o + w_o])
        width = np.concatenate([w_o, w_o])
        if len(lo) > 2_000_000:
            break
    return float(max(ub.max(), settled))


@dataclass(frozen=True, eq=False)
class AxialWitness:
    thetas: np.ndarray
    y: np.ndarray
    value: float
    bound: float

    def to_dict(self) -> dict:
        return {
            "type": "axial_witness",
            "thetas": self.thetas.tolist(),
            "y": self.y.tolist(),
            "value": self.value,
            "bound": self.bound,
        }

    @classmethod
    def from_dict(cls, d: dict) -> AxialWitness:
        return cls(np.asarray(d["thetas"], float), np.asarray(d["y"], float), float(d["value"]), float(d["bound"]))


def verify_axial_witness(w: AxialWitness, st: AxialState) -> bool:
    th = np.asarray(w.thetas, dtype=float)
    if len(w.y) != 2 + 3 * len(th) or np.any(th < 0) or np.any(th > np.pi):
        return False
    value = float(w.y @ st.rows(th))
    bound = witness_sup(w.y, target=value - WITNESS_GAP_TOL)
    return value - bound > WITNESS_GAP_TOL


def axial_steering_certificate(st: AxialState, n_meas: int, n_hidden: int, K: int = TANGENTS):
    """(slack, AxialWitness or None) from the relaxed outer problem."""
    thetas = clustered_thetas(n_meas)
    nodes = clustered_zetas(n_hidden)
    d = np.diff(nodes)
    zetas = (nodes[1:] + nodes[:-1]) / 2
    radii = 1.0 / np.cos(d / 2)
    fun, _, _, _, y = _ring_lp(st, thetas, zetas, radii, K, outer=True)
    if fun <= FEASIBILITY_TOL:
        return fun, None
    value = float(y @ st.rows(thetas))
    bound = witness_sup(y, target=value - WITNESS_GAP_TOL)
    w = AxialWitness(thetas, y, value, bound)
    return fun, (w if value - bound > WITNESS_GAP_TOL else None)


# -- unsteerable side --------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class AxialLhsModel:
    """Rings at polar angles zetas with weights; per (theta_i, ring j) response moments.

    The response on ring j for setting i is an arc of half-width pi*c0 centred on
    the measured azimuth (opposite side when c1 < 0), mixed with the constant c0
    so that its first moment equals c1.
    """

    thetas: np.ndarray
    eta: float
    zetas: np.ndarray
    weights: np.ndarray
    c0: np.ndarray
    c1: np.ndarray

    def reconstruct(self) -> np.ndarray:
        w = self.weights
        v0 = self.c0 @ w
        vp = self.c1 @ (w * np.sin(self.zetas))
        vz = self.c0 @ (w * np.cos(self.zetas))
        per = np.column_stack([v0, vp, vz])
        return np.concatenate([[w.sum(), w @ np.cos(self.zetas)], per.ravel()])

    def to_dict(self) -> dict:
        return {
            "type": "axial_lhs_model",
            "thetas": self.thetas.tolist(),
            "eta": self.eta,
            "zetas": self.zetas.tolist(),
            "weights": self.weights.tolist(),
            "c0": self.c0.tolist(),
            "c1": self.c1.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> AxialLhsModel:
        return cls(
            np.asarray(d["thetas"], float), float(d["eta"]), np.asarray(d["zetas"], float),
            np.asarray(d["weights"], float), np.asarray(d["c0"], float), np.asarray(d["c1"], float),
        )


def verify_axial_model(model: AxialLhsModel, st: AxialState, tol: float = RECONSTRUCTION_TOL) -> bool:
    th = model.thetas
    I, J = len(th), len(model.zetas)
    if model.c0.shape != (I, J) or model.c1.shape != (I, J) or model.weights.shape != (J,):
        return False
    if not 0.0 < model.eta <= covering_eta(th) + 1e-15:
        return False
    if np.any(model.weights < 0) or np.any(model.c0 < 0) or np.any(model.c0 > 1):
        return False
    if np.any(np.abs(model.c1) > _s(model.c0) * (1 + 1e-12)):
        return False
    target = st.inflated(model.eta).rows(th)
    return bool(np.max(np.abs(model.reconstruct() - target)) <= tol)


def axial_lhs_certificate(st: AxialState, n_meas: int, n_hidden: int, K: int = TANGENTS):
    """(slack, AxialLhsModel or None) from the inner problem of the inflated state."""
    thetas = uniform_thetas(n_meas)
    eta = covering_eta(thetas)
    zetas = np.linspace(0.0, np.pi, n_hidden)
    fun, mu, m, n, _ = _ring_lp(st.inflated(eta), thetas, zetas, np.ones(n_hidden), K, outer=False)
    if fun > FEASIBILITY_TOL:
        return fun, None
    mu = np.clip(mu, 0.0, None)
    safe = np.where(mu > 0, mu, 1.0)
    c0 = np.where(mu > 0, np.clip(m / safe, 0.0, 1.0), 0.5)
    c1 = np.where(mu > 0, n / safe, 0.0)
    c1 = np.clip(c1, -_s(c0), _s(c0))
    model = AxialLhsModel(thetas, eta, zetas, mu, c0, c1)
    return fun, (model if verify_axial_model(model, st) else None)


# -- dispatcher ------------------------------------------------------------------------


def _sizes(resolution: int) -> tuple[int, int]:
    """(measured polar angles, hidden rings) for the axial problem."""
    return int(min(max(resolution // 3, 4), 30)), int(resolution)


def classify_all_projective(
    state: TwoQubitState | PauliForm,
    resolution: int,
    *,
    side: str = "A",
    run_both: bool = False,
) -> SteeringVerdict:
    """Steerable / Unsteerable / Undecided for every projective measurement by `side`.

    For rotation-symmetric states `resolution` is the number of hidden rings;
    otherwise it is the vertex count of the geodesic net used for directions and
    hidden states alike.
    """
    if int(resolution) != resolution or resolution < MIN_RESOLUTION:
        raise ResolutionTooLow(f"resolution must be an integer >= {MIN_RESOLUTION}")
    form = state if isinstance(state, PauliForm) else pauli_decompose(state)
    if side == "B":
        form = form.swap()
    elif side != "A":
        raise ValueError(f"side must be 'A' or 'B', got {side!r}")
    st = axial_form(form)
    if st is not None:
        return _classify_axial(st, int(resolution), run_both)
    return _classify_net(form, int(resolution), run_both)


def _classify_axial(st: AxialState, resolution: int, run_both: bool) -> SteeringVerdict:
    n_meas, n_hidden = _sizes(resolution)
    t0 = time.perf_counter()
    s_fun, witness = axial_steering_certificate(st, n_meas, n_hidden)
    details = {"method": "axial", "state": st.to_dict(), "steer_slack": s_fun}
    if witness is not None and not run_both:
        details["seconds"] = time.perf_counter() - t0
        return SteeringVerdict(Status.STEERABLE, witness, details)
    u_fun, model = axial_lhs_certificate(st, n_meas, n_hidden)
    details["unsteer_slack"] = u_fun
    details["seconds"] = time.perf_counter() - t0
    if witness is not None and model is not None:
        raise SolverNumericalFailure("both certificates fired on the same state")
    if witness is not None:
        return SteeringVerdict(Status.STEERABLE, witness, details)
    if model is not None:
        return SteeringVerdict(Status.UNSTEERABLE, model, details)
    return SteeringVerdict(Status.UNDECIDED, UndecidedBounds(0.0 if s_fun <= FEASIBILITY_TOL else s_fun, u_fun), details)


@dataclass(frozen=True, eq=False)
class NetCertificate:
    """Certificate from the direction-net fallback, with everything needed to re-check it."""

    kind: str
    directions: np.ndarray
    eta: float
    inner: object
    hidden_vertices: np.ndarray = field(default=None)


def _classify_net(form: PauliForm, resolution: int, run_both: bool) -> SteeringVerdict:
    net = np.array(unit_vertices(resolution))
    dirs = half_directions(net)
    eta = inradius(net)
    outer = bloch_polytope(resolution, "circumscribed")
    inner = bloch_polytope(resolution, "inscribed")
    asm = assemblage_from_pauli(form, dirs)
    v_s = lhs_feasible(asm, outer)
    details = {"method": "net", "steer_slack": v_s.details["slack"]}
    if v_s.status is Status.STEERABLE and not run_both:
        return SteeringVerdict(Status.STEERABLE, NetCertificate("witness", dirs, eta, v_s.certificate, outer.vertices), details)
    inflated = PauliForm(form.a / eta, form.b, form.T / eta)
    v_u = lhs_feasible(assemblage_from_pauli(inflated, dirs), inner)
    details["unsteer_slack"] = v_u.details["slack"]
    if v_s.status is Status.STEERABLE and v_u.status is Status.UNSTEERABLE:
        raise SolverNumericalFailure("both certificates fired on the same state")
    if v_s.status is Status.STEERABLE:
        return SteeringVerdict(Status.STEERABLE, NetCertificate("witness", dirs, eta, v_s.certificate, outer.vertices), details)
    if v_u.status is Status.UNSTEERABLE:
        return SteeringVerdict(Status.UNSTEERABLE, NetCertificate("lhs_model", dirs, eta, v_u.certificate), details)
    return SteeringVerdict(Status.UNDECIDED, UndecidedBounds(v_s.details["slack"], v_u.details["slack"]), details)


def inflated_net_assemblage(form: PauliForm, cert: NetCertificate) -> Assemblage:
    return assemblage_from_pauli(PauliForm(form.a / cert.eta, form.b, form.T / cert.eta), cert.directions)
