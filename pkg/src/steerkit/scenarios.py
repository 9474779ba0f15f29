"""The three pair-distribution scenarios, their full states and two-party reductions."""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import InvalidScenario, NonMonotoneMargin, NTooLarge, ParameterOutOfRange
from .qstate import PSD_TOL, TwoQubitState, XStateParams, x_concurrence

MAX_FULL_N = 8
ROOT_XTOL = 1e-13
ZERO_CONCURRENCE = 1e-14


class Kind(str, enum.Enum):
    RHALFPE = "rhalfpe"  # n/2 random pairs
    RPE = "rpe"  # one random pair among n parties
    SRPE = "srpe"  # one pair anchored at the hub party A


class PairRole(str, enum.Enum):
    ALICE_TO_BOB = "ab"
    BOB_TO_ALICE = "ba"


def parse_kind(value: str | Kind) -> Kind:
    try:
        return Kind(str(getattr(value, "value", value)).lower())
    except ValueError:
        raise InvalidScenario(f"unknown scenario {value!r}") from None


def parse_role(value: str | PairRole) -> PairRole:
    try:
        return PairRole(str(getattr(value, "value", value)).lower())
    except ValueError:
        raise InvalidScenario(f"unknown direction {value!r}") from None


def check_n(kind: Kind, n: float, *, integral: bool) -> None:
    if not math.isfinite(n):
        raise InvalidScenario(f"n must be finite, got {n}")
    is_int = float(n).is_integer()
    if integral and not is_int:
        raise InvalidScenario(f"n must be an integer here, got {n}")
    if kind is Kind.RHALFPE:
        if is_int and (int(n) % 2 or n <= 2):
            raise InvalidScenario(f"rhalfpe needs an even n > 2, got {n:g}")
        if not is_int and n <= 2:
            raise InvalidScenario(f"rhalfpe needs n > 2, got {n:g}")
    elif is_int and n < 3:
        raise InvalidScenario(f"{kind.value} needs n >= 3, got {n:g}")
    elif not is_int and n <= 2:
        raise InvalidScenario(f"{kind.value} needs n > 2, got {n:g}")


@dataclass(frozen=True)
class Scenario:
    kind: Kind
    n: int
    alpha: float
    mu: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", parse_kind(self.kind))
        check_n(self.kind, float(self.n), integral=True)
        object.__setattr__(self, "n", int(self.n))
        if not 0.0 < self.alpha <= 0.5:
            raise ParameterOutOfRange(f"alpha must lie in (0, 1/2], got {self.alpha}")
        if not 0.0 <= self.mu <= 1.0:
            raise ParameterOutOfRange(f"mu must lie in [0, 1], got {self.mu}")


# -- reduced states ---------------------------------------------------------


def _lin(*terms: tuple[float, XStateParams]) -> XStateParams:
    ent = [sum(w * x.exact[i] for w, x in terms) for i in range(6)]
    return XStateParams.from_entries(*ent)


def _pair(alpha, mu) -> XStateParams:
    c = 1.0 - mu
    q = mu / 4
    return XStateParams.from_entries(
        c * (1 - alpha) + q, q, q, c * alpha + q, c * np.sqrt(alpha * (1 - alpha)), 0.0 * q
    )


def _noisy_half(alpha, mu) -> tuple:
    """Populations (p0, p1) of one half of the noisy pair."""
    c = 1.0 - mu
    return c * (1 - alpha) + mu / 2, c * alpha + mu / 2


def _product(pa: tuple, pb: tuple) -> XStateParams:
    return XStateParams.from_entries(
        pa[0] * pb[0], pa[0] * pb[1], pa[1] * pb[0], pa[1] * pb[1], 0.0, 0.0
    )


_UP = (1.0, 0.0)


def reduced_params(kind: Kind | str, n: float, alpha: float, mu: float = 0.0) -> XStateParams:
    """Closed-form two-party reduction (A first) with n treated as a real number.

    Ancilla qubits stay in |0>; only the entangled pair carries the white noise,
    so a party holding half of a noisy pair sees z = (1-mu)(1-2 alpha).
    alpha may range over (0, 1): values above 1/2 are the analytic continuation.
    """
    kind = parse_kind(kind)
    pair = _pair(alpha, mu)
    z1 = _noisy_half(alpha, mu)
    if kind is Kind.RHALFPE:
        S = 1.0 / (n - 1.0)
        return _lin((S, pair), (1.0 - S, _product(z1, z1)))
    if kind is Kind.RPE:
        w1 = 2.0 / (n * (n - 1.0))
        w2 = 2.0 * (n - 2.0) / (n * (n - 1.0))
        w3 = (n - 2.0) * (n - 3.0) / (n * (n - 1.0))
        return _lin(
            (w1, pair), (w2, _product(z1, _UP)), (w2, _product(_UP, z1)), (w3, _product(_UP, _UP))
        )
    S = 1.0 / (n - 1.0)
    return _lin((S, pair), (1.0 - S, _product(z1, _UP)))


def reduced_pair_state(sc: Scenario, role: PairRole | str = PairRole.ALICE_TO_BOB) -> XStateParams:
    """Reduced state of (steering party, steered party) for the given direction."""
    x = reduced_params(sc.kind, sc.n, sc.alpha, sc.mu)
    if parse_role(role) is PairRole.BOB_TO_ALICE:
        return x.swap()
    return x


def bob_bob_params(sc: Scenario) -> XStateParams:
    """Two spokes of an SRPE network: a mixture of product states."""
    if sc.kind is not Kind.SRPE:
        raise InvalidScenario("spoke-spoke reductions only exist for srpe")
    n = sc.n
    z1 = _noisy_half(sc.alpha, sc.mu)
    w = 1.0 / (n - 1.0)
    return _lin((w, _product(z1, _UP)), (w, _product(_UP, z1)), (1.0 - 2.0 * w, _product(_UP, _UP)))


# -- full states ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MultiPartyState:
    n: int
    rho: np.ndarray

    def __post_init__(self) -> None:
        dim = 2**self.n
        if self.rho.shape != (dim, dim):
            raise ValueError("matrix size does not match the number of qubits")
        if np.max(np.abs(self.rho - self.rho.conj().T)) > 1e-12:
            raise ValueError("state is not Hermitian")
        if abs(np.trace(self.rho).real - 1.0) > 1e-12:
            raise ValueError("state does not have unit trace")

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.rho)[0])

    def reduce(self, i: int, j: int) -> TwoQubitState:
        """Partial trace onto qubits (i, j), in that order."""
        n = self.n
        t = self.rho.reshape((2,) * (2 * n))
        keep = [i, j]
        rest = [q for q in range(n) if q not in keep]
        letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
        row = list(letters[:n])
        col = list(letters[n : 2 * n])
        for q in rest:
            col[q] = row[q]
        out = row[i] + row[j] + col[i] + col[j]
        r = np.einsum("".join(row) + "".join(col) + "->" + out, t)
        return TwoQubitState(r.reshape(4, 4))


def _embed(n: int, blocks: list[tuple[tuple[int, ...], np.ndarray]]) -> np.ndarray:
    """Tensor product of blocks acting on the given qubits, in natural qubit order."""
    order: list[int] = []
    op = np.ones((1, 1), dtype=complex)
    for qubits, m in blocks:
        op = np.kron(op, m)
        order.extend(qubits)
    t = op.reshape((2,) * (2 * n))
    perm = np.argsort(order)
    t = t.transpose(list(perm) + [n + p for p in perm])
    return t.reshape(2**n, 2**n)


def _perfect_matchings(items: list[int]):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for k, partner in enumerate(rest):
        for m in _perfect_matchings(rest[:k] + rest[k + 1 :]):
            yield [(first, partner)] + m


def build_full_state(sc: Scenario) -> MultiPartyState:
    n = sc.n
    if n > MAX_FULL_N:
        raise NTooLarge(f"dense construction is limited to n <= {MAX_FULL_N}, got {n}")
    pair = _pair(sc.alpha, sc.mu).matrix()
    zero = np.array([[1, 0], [0, 0]], dtype=complex)

    def term(pairs, singles):
        return _embed(n, [((i, j), pair) for i, j in pairs] + [((q,), zero) for q in singles])

    if sc.kind is Kind.RHALFPE:
        # every perfect matching carries the same weight in the permutation average
        terms = [term(m, []) for m in _perfect_matchings(list(range(n)))]
    elif sc.kind is Kind.RPE:
        terms = [
            term([(i, j)], [q for q in range(n) if q not in (i, j)])
            for i, j in itertools.combinations(range(n), 2)
        ]
    else:
        terms = [term([(0, j)], [q for q in range(1, n) if q != j]) for j in range(1, n)]
    return MultiPartyState(n, sum(terms) / len(terms))


# -- entanglement -----------------------------------------------------------


@dataclass(frozen=True)
class AlphaInterval:
    """Entangled parameters: lower < alpha < upper (alpha <= upper when upper_closed)."""

    lower: float
    upper: float
    upper_closed: bool = False

    def contains(self, alpha: float) -> bool:
        if alpha <= self.lower:
            return False
        return alpha <= self.upper if self.upper_closed else alpha < self.upper


def signed_concurrence(kind: Kind | str, n: float, alpha, mu: float = 0.0):
    """Concurrence before clipping at zero; vectorised over alpha."""
    x = reduced_params(kind, n, np.asarray(alpha, dtype=float), mu)
    return x_concurrence(*x.entries())


def _alpha_grid() -> np.ndarray:
    return np.unique(np.concatenate([np.geomspace(1e-9, 0.5, 500), np.linspace(1e-6, 0.5, 501)]))


def entanglement_threshold(
    kind: Kind | str, n: float, mu: float = 0.0, *, method: str = "auto"
) -> AlphaInterval | None:
    """The range of alpha in (0, 1/2] for which the reduced pair is entangled."""
    kind = parse_kind(kind)
    check_n(kind, float(n), integral=False)
    if not 0.0 <= mu <= 1.0:
        raise ParameterOutOfRange(f"mu must lie in [0, 1], got {mu}")
    if method not in ("auto", "bisect"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto" and mu == 0.0:
        if kind is Kind.SRPE:
            return AlphaInterval(0.0, 0.5, True)
        if kind is Kind.RPE:
            return AlphaInterval(0.0, 1.0 / (n * n - 4 * n + 5))
        if n >= 4:
            return AlphaInterval(0.0, (1.0 - math.sqrt(n * (n - 4)) / (n - 2)) / 2)

    grid = _alpha_grid()
    c = signed_concurrence(kind, n, grid, mu)
    ent = c > 0
    if not ent.any():
        return None
    idx = np.flatnonzero(ent)
    if np.any(np.diff(idx) > 1):
        raise NonMonotoneMargin("entangled region is not a single interval")

    def f(a):
        return float(signed_concurrence(kind, n, a, mu))

    lo_i, hi_i = idx[0], idx[-1]
    lower = 0.0 if lo_i == 0 else brentq(f, grid[lo_i - 1], grid[lo_i], xtol=ROOT_XTOL)
    if hi_i == len(grid) - 1:
        return AlphaInterval(lower, 0.5, True)
    if abs(c[hi_i + 1]) <= ZERO_CONCURRENCE:
        # tangential root (n = 4 RHalfPE at alpha = 1/2): brentq would wander inside the rounding noise
        return AlphaInterval(lower, float(grid[hi_i + 1]))
    upper = brentq(f, grid[hi_i], grid[hi_i + 1], xtol=ROOT_XTOL)
    return AlphaInterval(lower, upper)


def reduced_state_is_valid(x: XStateParams) -> bool:
    return bool(np.linalg.eigvalsh(x.matrix())[0] >= -PSD_TOL)
