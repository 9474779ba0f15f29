"""Assemblages, LP decisions about local hidden state models, and explicit models.

Unnormalised conditional states are stored in Pauli coordinates
(v0, vx, vy, vz) with sigma = (v0 I + v . sigma) / 2, so a hidden pure state
with Bloch vector v contributes the column (1, v).
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .errors import InvalidDirection, SolverNumericalFailure, StateIsSteerable, ValidationError
from .polytope import BlochPolytope, Mode
from .qstate import I2, PAULIS, PauliForm, TwoQubitState, XStateParams, pauli_decompose

FEASIBILITY_TOL = 1e-9
RECONSTRUCTION_TOL = 1e-8
WITNESS_GAP_TOL = 1e-9
ASSEMBLAGE_TOL = 1e-12
MAX_ENUMERATED_SETTINGS = 12


class Status(str, enum.Enum):
    STEERABLE = "steerable"
    UNSTEERABLE = "unsteerable"
    UNDECIDED = "undecided"


# -- assemblages --------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Assemblage:
    """coords[s, r] holds the Pauli coordinates of sigma_{r|s}; r = 0 is outcome +."""

    directions: np.ndarray
    coords: np.ndarray

    def __post_init__(self) -> None:
        d = np.asarray(self.directions, dtype=float).reshape(-1, 3)
        c = np.asarray(self.coords, dtype=float).reshape(len(d), 2, 4)
        object.__setattr__(self, "directions", d)
        object.__setattr__(self, "coords", c)
        marg = c.sum(axis=1)
        if np.max(np.abs(marg - marg[0])) > ASSEMBLAGE_TOL:
            raise ValidationError("assemblage violates no-signalling")
        if abs(marg[0, 0] - 1.0) > ASSEMBLAGE_TOL:
            raise ValidationError("assemblage does not have unit total trace")

    @property
    def k(self) -> int:
        return len(self.directions)

    @property
    def marginal(self) -> np.ndarray:
        return self.coords[0].sum(axis=0)

    def member(self, s: int, r: int) -> np.ndarray:
        v = self.coords[s, r]
        return 0.5 * (v[0] * I2 + sum(v[i + 1] * PAULIS[i] for i in range(3)))

    def is_positive(self, tol: float = 1e-10) -> bool:
        v0 = self.coords[..., 0]
        vn = np.linalg.norm(self.coords[..., 1:], axis=-1)
        return bool(np.all(v0 - vn >= -tol))


def _check_directions(directions) -> np.ndarray:
    d = np.asarray(directions, dtype=float).reshape(-1, 3)
    if len(d) == 0:
        raise InvalidDirection("at least one measurement direction is required")
    if np.max(np.abs(np.linalg.norm(d, axis=1) - 1.0)) > 1e-12:
        raise InvalidDirection("measurement directions must be unit vectors")
    return d


def _to_coords(m: np.ndarray) -> np.ndarray:
    return np.array([np.trace(m).real] + [np.trace(m @ p).real for p in PAULIS])


def assemblage_from(state: TwoQubitState, directions, side: str = "A") -> Assemblage:
    """Projective measurements on `side`; the other qubit is steered."""
    d = _check_directions(directions)
    if side not in ("A", "B"):
        raise ValueError(f"side must be 'A' or 'B', got {side!r}")
    r = state.rho.reshape(2, 2, 2, 2)
    coords = np.empty((len(d), 2, 4))
    for s, n in enumerate(d):
        nsig = sum(n[i] * PAULIS[i] for i in range(3))
        for k, sign in enumerate((1, -1)):
            proj = (I2 + sign * nsig) / 2
            if side == "A":
                m = np.einsum("ij,jaib->ab", proj, r)
            else:
                m = np.einsum("ab,ibja->ij", proj, r)
            coords[s, k] = _to_coords(m)
    return Assemblage(d, coords)


def assemblage_from_pauli(form: PauliForm, directions, side: str = "A") -> Assemblage:
    """Linear-algebra version; also accepts forms that are not valid states."""
    d = _check_directions(directions)
    f = form if side == "A" else form.swap()
    plus = np.column_stack([(1 + d @ f.a) / 2, (f.b[None, :] + d @ f.T) / 2])
    marg = np.concatenate([[1.0], f.b])
    return Assemblage(d, np.stack([plus, marg[None, :] - plus], axis=1))


# -- certificates -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LhsModel:
    """Hidden Bloch vectors with weights and the probability of outcome + per setting."""

    hidden: np.ndarray
    weights: np.ndarray
    responses: np.ndarray
    directions: np.ndarray

    def reconstruct(self) -> np.ndarray:
        cols = np.column_stack([np.ones(len(self.hidden)), self.hidden])
        plus = (self.weights[:, None] * self.responses).T @ cols
        minus = (self.weights[:, None] * (1 - self.responses)).T @ cols
        return np.stack([plus, minus], axis=1)

    def to_dict(self) -> dict:
        return {
            "type": "lhs_model",
            "hidden": self.hidden.tolist(),
            "weights": self.weights.tolist(),
            "responses": self.responses.tolist(),
            "directions": self.directions.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> LhsModel:
        return cls(*(np.asarray(d[k], dtype=float) for k in ("hidden", "weights", "responses", "directions")))


@dataclass(frozen=True, eq=False)
class Witness:
    """Linear functional sum_{s,r} <W_{r|s}, sigma_{r|s}> in Pauli coordinates."""

    coefficients: np.ndarray
    value: float
    bound: float

    @property
    def gap(self) -> float:
        return self.value - self.bound

    def to_dict(self) -> dict:
        return {
            "type": "witness",
            "coefficients": self.coefficients.tolist(),
            "value": self.value,
            "bound": self.bound,
        }

    @classmethod
    def from_dict(cls, d: dict) -> Witness:
        return cls(np.asarray(d["coefficients"], dtype=float), float(d["value"]), float(d["bound"]))


@dataclass(frozen=True)
class UndecidedBounds:
    """Residual slack of the outer LP (0 when feasible) and of the inner LP."""

    outer_slack: float
    inner_slack: float

    def to_dict(self) -> dict:
        return {"type": "bounds", "outer_slack": self.outer_slack, "inner_slack": self.inner_slack}


@dataclass(frozen=True, eq=False)
class SteeringVerdict:
    status: Status
    certificate: object = None
    details: dict = field(default_factory=dict)


def witness_value(coefficients: np.ndarray, asm: Assemblage) -> float:
    return float(np.sum(coefficients * asm.coords))


def witness_bound(coefficients: np.ndarray, vertices: np.ndarray) -> float:
    """max over hidden vertices of sum_s max_r <W_{r|s}, (1, v)>."""
    cols = np.column_stack([np.ones(len(vertices)), vertices])
    per = np.einsum("srq,vq->vsr", coefficients, cols)
    return float(per.max(axis=2).sum(axis=1).max())


def verify_witness(w: Witness, asm: Assemblage, poly: BlochPolytope) -> bool:
    """Recompute both sides; the vertex hull must contain every pure state."""
    if w.coefficients.shape != asm.coords.shape or not poly.contains_unit_ball():
        return False
    value = witness_value(w.coefficients, asm)
    bound = witness_bound(w.coefficients, poly.vertices)
    return value - bound > WITNESS_GAP_TOL


def verify_lhs_model(model: LhsModel, asm: Assemblage, tol: float = RECONSTRUCTION_TOL) -> bool:
    if model.responses.shape != (len(model.hidden), asm.k):
        return False
    if not np.allclose(model.directions, asm.directions, atol=1e-12):
        return False
    if np.any(model.weights < 0) or abs(model.weights.sum() - 1.0) > tol:
        return False
    if np.any(np.linalg.norm(model.hidden, axis=1) > 1.0 + 1e-12):
        return False
    if np.any(model.responses < 0) or np.any(model.responses > 1):
        return False
    return bool(np.max(np.abs(model.reconstruct() - asm.coords)) <= tol)


# -- linear programs ----------------------------------------------------------


def _min_slack(A: sparse.spmatrix, b: np.ndarray, A_ub=None, n_real: int | None = None):
    """min sum|A x - b| over x >= 0 (and A_ub x <= 0); returns (slack, x, dual y)."""
    ne = A.shape[0]
    nx = A.shape[1]
    A_eq = sparse.hstack([A, sparse.identity(ne), -sparse.identity(ne)]).tocsr()
    cost = np.concatenate([np.zeros(nx), np.ones(2 * ne)])
    kw = {}
    if A_ub is not None:
        A_ub = sparse.hstack([A_ub, sparse.csr_matrix((A_ub.shape[0], 2 * ne))]).tocsr()
        kw = {"A_ub": A_ub, "b_ub": np.zeros(A_ub.shape[0])}
    res = linprog(cost, A_eq=A_eq, b_eq=b, bounds=(0, None), method="highs", **kw)
    if res.status != 0:
        raise SolverNumericalFailure(f"LP solver failed: {res.message}")
    return float(res.fun), res.x[:nx], np.asarray(res.eqlin.marginals)


def _compact(asm: Assemblage, V: np.ndarray):
    """Variables mu_v and x_{s,v} in [0, mu_v]; rows: marginal then each sigma_{+|s}."""
    k, nv = asm.k, len(V)
    R = sparse.csr_matrix(np.column_stack([np.ones(nv), V]).T)
    A = sparse.block_diag([R] * (k + 1)).tocsr()
    b = np.concatenate([asm.marginal, asm.coords[:, 0, :].ravel()])
    I = sparse.identity(nv)
    A_ub = sparse.hstack([-sparse.vstack([I] * k), sparse.identity(k * nv)]).tocsr()
    fun, x, y = _min_slack(A, b, A_ub)
    mu = x[:nv]
    xs = x[nv:].reshape(k, nv)
    return fun, mu, xs, y


def _deterministic(asm: Assemblage, V: np.ndarray):
    """Columns (strategy d, vertex v) of the textbook formulation."""
    k, nv = asm.k, len(V)
    if k > MAX_ENUMERATED_SETTINGS:
        raise ValidationError(f"strategy enumeration is limited to {MAX_ENUMERATED_SETTINGS} settings")
    R = np.column_stack([np.ones(nv), V]).T
    strategies = np.array(list(itertools.product((1, 0), repeat=k)), dtype=float)
    blocks = [np.kron(np.ones((1, len(strategies))), R)]
    for s in range(k):
        blocks.append(np.kron(strategies[:, s][None, :], R))
    A = sparse.csr_matrix(np.vstack(blocks))
    b = np.concatenate([asm.marginal, asm.coords[:, 0, :].ravel()])
    fun, q, y = _min_slack(A, b)
    q = q.reshape(len(strategies), nv)
    mu = q.sum(axis=0)
    xs = np.einsum("ds,dv->sv", strategies, q)
    return fun, mu, xs, y


def _witness_from_dual(y: np.ndarray, k: int) -> np.ndarray:
    yb = y[:4]
    ys = y[4:].reshape(k, 4)
    W = np.empty((k, 2, 4))
    W[:, 0, :] = ys + yb / k
    W[:, 1, :] = yb / k
    return W


def _model_from_solution(mu, xs, V, directions) -> LhsModel:
    keep = mu > 1e-15
    mu_k = mu[keep]
    resp = np.clip(xs[:, keep] / mu_k, 0.0, 1.0).T
    return LhsModel(V[keep], mu_k / mu_k.sum(), resp, directions)


def solve_lhs_lp(asm: Assemblage, poly: BlochPolytope, formulation: str = "compact"):
    """Raw LP outcome: (slack, LhsModel or None, Witness or None)."""
    V = poly.vertices
    if formulation == "compact":
        fun, mu, xs, y = _compact(asm, V)
    elif formulation == "deterministic":
        fun, mu, xs, y = _deterministic(asm, V)
    else:
        raise ValueError(f"unknown formulation {formulation!r}")
    model = witness = None
    if fun <= FEASIBILITY_TOL:
        model = _model_from_solution(mu, xs, V, asm.directions)
    else:
        W = _witness_from_dual(y, asm.k)
        witness = Witness(W, witness_value(W, asm), witness_bound(W, V))
    return fun, model, witness


def lhs_feasible(asm: Assemblage, poly: BlochPolytope, formulation: str = "compact") -> SteeringVerdict:
    """One-sided decision from a single polytope.

    Inscribed and feasible means unsteerable; circumscribed and infeasible means
    steerable. Every certificate is re-verified before it is returned.
    """
    fun, model, witness = solve_lhs_lp(asm, poly, formulation)
    details = {"slack": fun, "vertices": len(poly), "mode": poly.mode.value}
    if model is not None:
        if poly.mode is Mode.INSCRIBED and verify_lhs_model(model, asm):
            return SteeringVerdict(Status.UNSTEERABLE, model, details)
        return SteeringVerdict(Status.UNDECIDED, UndecidedBounds(0.0, fun), details)
    if poly.mode is Mode.CIRCUMSCRIBED and verify_witness(witness, asm, poly):
        details["polytope"] = poly.vertices
        return SteeringVerdict(Status.STEERABLE, witness, details)
    return SteeringVerdict(Status.UNDECIDED, UndecidedBounds(fun, fun), details)


def decide(asm: Assemblage, inner: BlochPolytope, outer: BlochPolytope) -> SteeringVerdict:
    """Both one-sided tests; Undecided reports the pair of residual slacks."""
    if inner.mode is not Mode.INSCRIBED or outer.mode is not Mode.CIRCUMSCRIBED:
        raise ValidationError("decide() needs an inscribed and a circumscribed polytope")
    v_out = lhs_feasible(asm, outer)
    if v_out.status is Status.STEERABLE:
        return v_out
    v_in = lhs_feasible(asm, inner)
    if v_in.status is Status.UNSTEERABLE:
        return v_in
    bounds = UndecidedBounds(v_out.details["slack"], v_in.details["slack"])
    return SteeringVerdict(Status.UNDECIDED, bounds, {"outer": v_out.details, "inner": v_in.details})


# -- explicit model for X-states ------------------------------------------------


def dihedral_full_directions(m: int) -> np.ndarray:
    """sigma_z followed by all 2m equatorial directions l*pi/m."""
    th = np.arange(2 * m) * np.pi / m
    eq = np.stack([np.cos(th), np.sin(th), np.zeros_like(th)], axis=1)
    return np.vstack([[0.0, 0.0, 1.0], eq])


def construct_xstate_lhs_ensemble(x: XStateParams, m: int) -> LhsModel:
    """Explicit hidden-state model for sigma_z plus 2m equatorial settings.

    Hidden states sit on two latitudes z_+- (the normalised sigma_z-conditional
    states) at 2m azimuths; the equatorial response is a half-plane rule toward
    (sgn t_x cos th, sgn t_y sin th), damped toward 1/2 so that the transverse
    correlation comes out as t_perp exactly.
    """
    if m < 1:
        raise ValidationError("m must be a positive integer")
    if abs(abs(x.t_x) - abs(x.t_y)) > 1e-10:
        raise ValidationError("construction needs |t_x| = |t_y|")
    x11, x22, x33, x44, _, _ = x.entries()
    p_plus, p_minus = x11 + x22, x33 + x44
    # p_+ sqrt(1 - z_+^2) = 2 sqrt(X11 X22), likewise for the minus branch
    f = 4 * (math.sqrt(max(x11 * x22, 0.0)) + math.sqrt(max(x33 * x44, 0.0)))
    tperp = x.t_perp
    M = 1.0 / (m * math.sin(math.pi / (2 * m)))
    if tperp == 0.0:
        kappa = 0.0
    elif f == 0.0:
        raise StateIsSteerable("F = 0 with non-zero transverse correlation")
    else:
        kappa = 2 * tperp / (M * f)
    if kappa > 1.0 + 1e-12:
        raise StateIsSteerable(
            f"criterion 2m sin(pi/2m) > F/t_perp holds ({2 / M:.6g} > {f / tperp:.6g})"
        )
    kappa = min(kappa, 1.0)

    phis = (2 * np.arange(2 * m) + 1 - m) * np.pi / (2 * m)
    dirs = dihedral_full_directions(m)
    th = np.arange(2 * m) * np.pi / m
    g = np.stack([np.sign(x.t_x) * np.cos(th), np.sign(x.t_y) * np.sin(th)], axis=1)
    if x.t_x == 0.0 or x.t_y == 0.0:
        g = np.zeros_like(g)
    u = np.stack([np.cos(phis), np.sin(phis)], axis=1)
    dots = u @ g.T
    half_plane = np.where(dots > 1e-12, 1.0, np.where(dots < -1e-12, 0.0, 0.5))

    hidden, weights, responses = [], [], []
    for p, first, second, z_resp in (
        (p_plus, x11, x22, 1.0),
        (p_minus, x33, x44, 0.0),
    ):
        if p <= 0.0:
            continue
        z = (first - second) / p
        r = 2 * math.sqrt(max(first * second, 0.0)) / p
        for j, phi in enumerate(phis):
            hidden.append([r * math.cos(phi), r * math.sin(phi), z])
            weights.append(p / (2 * m))
            responses.append([z_resp] + list(0.5 + kappa * (half_plane[j] - 0.5)))
    return LhsModel(np.array(hidden), np.array(weights), np.array(responses), dirs)
