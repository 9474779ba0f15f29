from __future__ import annotations

import numpy as np
import pytest

from steerkit.errors import ValidationError
from steerkit.polytope import bloch_polytope, geodesic, half_directions, inradius, supported_counts, unit_vertices


def test_geodesic_vertex_counts():
    for f, count in ((1, 12), (2, 42), (4, 162), (8, 642)):
        v = geodesic(f)
        assert len(v) == count == 10 * f * f + 2
        assert np.allclose(np.linalg.norm(v, axis=1), 1)


def test_named_nets_are_antipodal():
    for n in (6, 8, 26, 62, 162):
        v = unit_vertices(n)
        assert len(v) == n
        d = np.linalg.norm(v[:, None, :] + v[None, :, :], axis=2)
        assert np.all(d.min(axis=1) < 1e-12)


def test_inradius_reference_values():
    # octahedron and cube both have inradius 1/sqrt(3) when inscribed in the unit sphere
    assert inradius(unit_vertices(6)) == pytest.approx(1 / np.sqrt(3))
    assert inradius(unit_vertices(8)) == pytest.approx(1 / np.sqrt(3))
    eta = [inradius(unit_vertices(n)) for n in (12, 42, 162, 642)]
    assert all(a < b < 1 for a, b in zip(eta, eta[1:]))


def test_modes():
    inner = bloch_polytope(42, "inscribed")
    outer = bloch_polytope(42, "circumscribed")
    assert not inner.contains_unit_ball()
    assert outer.contains_unit_ball()
    assert np.allclose(np.linalg.norm(inner.vertices, axis=1), 1)


def test_unsupported_count():
    assert 1514 not in supported_counts()
    with pytest.raises(ValidationError):
        unit_vertices(1514)


def test_half_directions():
    h = half_directions(unit_vertices(26))
    assert len(h) == 13
