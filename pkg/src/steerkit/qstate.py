"""Two-qubit states: Pauli form, partial traces, X-state parameters, concurrence."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidState, NotXState, ParameterOutOfRange

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
X_PATTERN_TOL = 1e-12

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)

# entries of the 4x4 matrix allowed to be non-zero in an X-state
_X_MASK = np.array(
    [[1, 0, 0, 1], [0, 1, 1, 0], [0, 1, 1, 0], [1, 0, 0, 1]], dtype=bool
)


def _check_density(rho: np.ndarray, dim: int) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (dim, dim):
        raise InvalidState(f"expected a {dim}x{dim} matrix, got shape {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise InvalidState("matrix has non-finite entries")
    if np.max(np.abs(rho - rho.conj().T)) > HERMITIAN_TOL:
        raise InvalidState("matrix is not Hermitian")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise InvalidState(f"trace is {tr!r}, expected 1")
    lam = np.linalg.eigvalsh(rho)[0]
    if lam < -PSD_TOL:
        raise InvalidState(f"minimum eigenvalue {lam:.3e} is negative")
    rho = rho.copy()
    rho.setflags(write=False)
    return rho


@dataclass(frozen=True, eq=False)
class SingleQubitState:
    rho: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "rho", _check_density(self.rho, 2))

    @property
    def bloch(self) -> np.ndarray:
        return np.array([np.trace(self.rho @ p).real for p in PAULIS])


@dataclass(frozen=True, eq=False)
class TwoQubitState:
    """Density matrix on qubits A (first tensor factor) and B."""

    rho: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "rho", _check_density(self.rho, 4))

    def is_x_state(self, tol: float = X_PATTERN_TOL) -> bool:
        return bool(np.all(np.abs(self.rho[~_X_MASK]) <= tol))


@dataclass(frozen=True, eq=False)
class PauliForm:
    """rho = (1/4)(I + a.sigma x I + I x b.sigma + sum_ij T_ij sigma_i x sigma_j)."""

    a: np.ndarray
    b: np.ndarray
    T: np.ndarray

    def __post_init__(self) -> None:
        a = np.asarray(self.a, dtype=float).reshape(3)
        b = np.asarray(self.b, dtype=float).reshape(3)
        T = np.asarray(self.T, dtype=float).reshape(3, 3)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "T", T)

    def swap(self) -> PauliForm:
        return PauliForm(self.b, self.a, self.T.T)

    def scaled(self, factor: float) -> PauliForm:
        return PauliForm(factor * self.a, factor * self.b, factor * self.T)


@dataclass(frozen=True)
class XStateParams:
    """Canonical X-state: a = (0,0,a), b = (0,0,b), T = diag(t_x, t_y, t_z).

    `exact` optionally carries the matrix entries (X11, X22, X33, X44, X14, X23)
    computed without cancellation; pure-state boundaries make F sensitive to
    rounding in 1 + a - b - t_z.
    """

    a: float
    b: float
    t_x: float
    t_y: float
    t_z: float
    exact: tuple | None = field(default=None, compare=False, repr=False)

    @classmethod
    def from_entries(cls, x11, x22, x33, x44, x14, x23) -> XStateParams:
        vals = (x11, x22, x33, x44, x14, x23)
        vals = tuple(float(v) if np.ndim(v) == 0 else v for v in vals)
        x11, x22, x33, x44, x14, x23 = vals
        return cls(
            a=x11 + x22 - x33 - x44,
            b=x11 - x22 + x33 - x44,
            t_x=2 * (x14 + x23),
            t_y=2 * (x23 - x14),
            t_z=x11 - x22 - x33 + x44,
            exact=vals,
        )

    @property
    def t_perp(self) -> float:
        return abs(self.t_x)

    def swap(self) -> XStateParams:
        """Exchange the roles of the two qubits."""
        ex = None
        if self.exact is not None:
            x11, x22, x33, x44, x14, x23 = self.exact
            ex = (x11, x33, x22, x44, x14, x23)
        return XStateParams(self.b, self.a, self.t_x, self.t_y, self.t_z, ex)

    def entries(self) -> tuple:
        """(X11, X22, X33, X44, X14, X23) of the real X matrix."""
        if self.exact is not None:
            return self.exact
        a, b, tz = self.a, self.b, self.t_z
        return (
            (1 + a + b + tz) / 4,
            (1 + a - b - tz) / 4,
            (1 - a + b - tz) / 4,
            (1 - a - b + tz) / 4,
            (self.t_x - self.t_y) / 4,
            (self.t_x + self.t_y) / 4,
        )

    def matrix(self) -> np.ndarray:
        x11, x22, x33, x44, x14, x23 = self.entries()
        return np.array(
            [
                [x11, 0, 0, x14],
                [0, x22, x23, 0],
                [0, x23, x33, 0],
                [x14, 0, 0, x44],
            ],
            dtype=complex,
        )

    def to_state(self) -> TwoQubitState:
        return TwoQubitState(self.matrix())

    def to_pauli(self) -> PauliForm:
        return PauliForm(
            [0.0, 0.0, self.a], [0.0, 0.0, self.b], np.diag([self.t_x, self.t_y, self.t_z])
        )

    def is_valid(self) -> bool:
        try:
            self.to_state()
        except InvalidState:
            return False
        return True


def pauli_decompose(state: TwoQubitState) -> PauliForm:
    rho = state.rho
    a = [np.trace(rho @ np.kron(p, I2)).real for p in PAULIS]
    b = [np.trace(rho @ np.kron(I2, p)).real for p in PAULIS]
    T = [[np.trace(rho @ np.kron(p, q)).real for q in PAULIS] for p in PAULIS]
    return PauliForm(a, b, T)


def pauli_matrix(form: PauliForm) -> np.ndarray:
    """The 4x4 operator of a Pauli form, without any validity checks."""
    rho = np.kron(I2, I2).astype(complex)
    for i, p in enumerate(PAULIS):
        rho = rho + form.a[i] * np.kron(p, I2) + form.b[i] * np.kron(I2, p)
        for j, q in enumerate(PAULIS):
            rho = rho + form.T[i, j] * np.kron(p, q)
    return rho / 4


def pauli_reconstruct(form: PauliForm) -> TwoQubitState:
    return TwoQubitState(pauli_matrix(form))


def partial_trace(state: TwoQubitState, keep: str) -> SingleQubitState:
    r = state.rho.reshape(2, 2, 2, 2)
    if keep == "A":
        return SingleQubitState(np.einsum("ijkj->ik", r))
    if keep == "B":
        return SingleQubitState(np.einsum("ijil->jl", r))
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def _require_x(state: TwoQubitState) -> None:
    if not state.is_x_state():
        raise NotXState("state has non-zero entries outside the X pattern")


def x_concurrence(x11: float, x22: float, x33: float, x44: float, x14, x23):
    """Signed concurrence witness; positive exactly when the X-state is entangled.

    Works elementwise on arrays, which the threshold scans rely on.
    """
    g1 = np.abs(x23) - np.sqrt(np.clip(x11 * x44, 0.0, None))
    g2 = np.abs(x14) - np.sqrt(np.clip(x22 * x33, 0.0, None))
    return 2.0 * np.maximum(g1, g2)


def concurrence(state: TwoQubitState) -> float:
    _require_x(state)
    r = state.rho
    d = np.diag(r).real
    c = x_concurrence(d[0], d[1], d[2], d[3], r[0, 3], r[1, 2])
    return float(max(0.0, c))


def canonicalize_x(state: TwoQubitState) -> XStateParams:
    """Five real parameters after local z-rotations making X14, X23 >= 0."""
    _require_x(state)
    r = state.rho
    d = np.diag(r).real
    return XStateParams.from_entries(d[0], d[1], d[2], d[3], abs(r[0, 3]), abs(r[1, 2]))


def psi_alpha(alpha: float) -> TwoQubitState:
    """|psi> = sqrt(1-alpha)|00> + sqrt(alpha)|11>."""
    if not 0.0 < alpha <= 0.5:
        raise ParameterOutOfRange(f"alpha must lie in (0, 1/2], got {alpha}")
    psi = np.array([np.sqrt(1 - alpha), 0, 0, np.sqrt(alpha)], dtype=complex)
    return TwoQubitState(np.outer(psi, psi.conj()))


def rho_zero() -> SingleQubitState:
    return SingleQubitState(np.array([[1, 0], [0, 0]], dtype=complex))


def depolarize(state: TwoQubitState, mu: float) -> TwoQubitState:
    if not 0.0 <= mu <= 1.0:
        raise ParameterOutOfRange(f"mu must lie in [0, 1], got {mu}")
    return TwoQubitState((1 - mu) * state.rho + mu * np.eye(4) / 4)
