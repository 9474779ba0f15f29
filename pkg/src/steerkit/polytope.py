"""Polytopes approximating the Bloch ball from inside or outside."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.spatial import ConvexHull

from .errors import ValidationError

CONTAINMENT_TOL = 1e-12


class Mode(str, enum.Enum):
    INSCRIBED = "inscribed"
    CIRCUMSCRIBED = "circumscribed"


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _dedupe(v: np.ndarray) -> np.ndarray:
    return np.unique(np.round(_unit(v), 12), axis=0)


def icosahedron() -> np.ndarray:
    p = (1 + 5**0.5) / 2
    v = np.array(
        [[-1, p, 0], [1, p, 0], [-1, -p, 0], [1, -p, 0], [0, -1, p], [0, 1, p],
         [0, -1, -p], [0, 1, -p], [p, 0, -1], [p, 0, 1], [-p, 0, -1], [-p, 0, 1]],
        dtype=float,
    )
    return _unit(v)


def geodesic(freq: int) -> np.ndarray:
    """Icosahedron with each face subdivided freq times: 10 freq^2 + 2 vertices."""
    v = icosahedron()
    faces = ConvexHull(v).simplices
    pts = []
    for tri in faces:
        A, B, C = v[tri]
        for i in range(freq + 1):
            for j in range(freq + 1 - i):
                k = freq - i - j
                pts.append((i * A + j * B + k * C) / freq)
    return _dedupe(np.array(pts))


def _named(n_vertices: int) -> np.ndarray | None:
    signs = np.array([[x, y, z] for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)], float)
    octa = np.vstack([np.eye(3), -np.eye(3)])
    if n_vertices == 6:
        return octa
    if n_vertices == 8:
        return _unit(signs)
    if n_vertices == 26:
        edges = np.array(
            [e for e in {tuple(s * m) for s in signs for m in ([1, 1, 0], [1, 0, 1], [0, 1, 1])}],
            float,
        )
        return _dedupe(np.vstack([octa, signs, edges]))
    if n_vertices == 62:
        ico = icosahedron()
        hull = ConvexHull(ico)
        dual = ico[hull.simplices].sum(axis=1)
        mids = np.array([ico[i] + ico[j] for i in range(12) for j in range(i + 1, 12)
                         if np.isclose(ico[i] @ ico[j], 1 / 5**0.5)])
        return _dedupe(np.vstack([ico, dual, mids]))
    return None


def supported_counts(limit: int = 2000) -> list[int]:
    counts = {6, 8, 26, 62}
    f = 1
    while 10 * f * f + 2 <= limit:
        counts.add(10 * f * f + 2)
        f += 1
    return sorted(counts)


@lru_cache(maxsize=32)
def unit_vertices(n_vertices: int) -> np.ndarray:
    v = _named(n_vertices)
    if v is None:
        f2 = (n_vertices - 2) / 10
        f = int(round(f2**0.5))
        if f < 1 or 10 * f * f + 2 != n_vertices:
            raise ValidationError(
                f"no polytope with {n_vertices} vertices; supported: {supported_counts(700)} ..."
            )
        v = geodesic(f)
    if len(v) != n_vertices:
        raise AssertionError(f"construction produced {len(v)} vertices, expected {n_vertices}")
    v.setflags(write=False)
    return v


def inradius(vertices: np.ndarray) -> float:
    """Distance from the origin to the nearest facet of the convex hull."""
    hull = ConvexHull(vertices)
    return float(-hull.equations[:, 3].max())


@dataclass(frozen=True, eq=False)
class BlochPolytope:
    """Hidden-state candidates.

    Inscribed vertices are pure states. Circumscribed vertices are the same
    directions pushed out by 1/covering_cosine, so the hull contains the ball.
    covering_cosine is the inradius of the unit-vertex hull.
    """

    vertices: np.ndarray
    mode: Mode
    covering_cosine: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", Mode(self.mode))
        v = np.asarray(self.vertices, dtype=float)
        object.__setattr__(self, "vertices", v)
        if self.mode is Mode.INSCRIBED:
            if np.max(np.abs(np.linalg.norm(v, axis=1) - 1.0)) > 1e-12:
                raise ValidationError("inscribed polytope vertices must be unit vectors")
        elif not self.contains_unit_ball():
            raise ValidationError("circumscribed polytope does not contain the unit ball")

    def contains_unit_ball(self) -> bool:
        return inradius(self.vertices) >= 1.0 - CONTAINMENT_TOL

    def __len__(self) -> int:
        return len(self.vertices)


def bloch_polytope(n_vertices: int, mode: Mode | str = Mode.INSCRIBED) -> BlochPolytope:
    mode = Mode(mode)
    v = np.array(unit_vertices(n_vertices))
    eta = inradius(v)
    if mode is Mode.CIRCUMSCRIBED:
        v = v / eta
    return BlochPolytope(v, mode, eta)


def half_directions(vertices: np.ndarray) -> np.ndarray:
    """One representative from each antipodal pair (a measurement axis)."""
    keep = []
    for v in vertices:
        if not any(np.allclose(v, -w, atol=1e-9) or np.allclose(v, w, atol=1e-9) for w in keep):
            keep.append(v)
    return np.array(keep)
