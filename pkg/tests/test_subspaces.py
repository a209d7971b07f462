import math

import numpy as np
import pytest

from fusionframes.errors import InputError
from fusionframes.subspaces import Subspace


def test_from_spanning_full_space():
    w = Subspace.from_spanning(np.eye(3))
    assert w.dim == 3
    np.testing.assert_allclose(w.projection(), np.eye(3), atol=1e-12)


def test_from_spanning_line():
    w = Subspace.from_spanning(np.array([[1.0], [1.0]]))
    assert w.dim == 1
    target = np.array([1.0, 1.0]) / math.sqrt(2)
    assert min(np.linalg.norm(w.basis[:, 0] - target), np.linalg.norm(w.basis[:, 0] + target)) < 1e-12


def test_from_spanning_zero_column():
    w = Subspace.from_spanning(np.zeros((2, 1)))
    assert w.is_zero() and w.dim == 0
    np.testing.assert_array_equal(w.projection(), np.zeros((2, 2)))


def test_projection_examples():
    np.testing.assert_allclose(
        Subspace.span([1.0, 0.0]).projection(), np.diag([1.0, 0.0]), atol=1e-14
    )
    np.testing.assert_allclose(
        Subspace.span([1.0, 1.0]).projection(), np.full((2, 2), 0.5), atol=1e-14
    )
    np.testing.assert_array_equal(Subspace.zero(2).projection(), np.zeros((2, 2)))


def test_projection_idempotent_trace():
    rng = np.random.default_rng(0)
    for _ in range(10):
        w = Subspace.from_spanning(rng.standard_normal((5, 3)))
        p = w.projection()
        assert np.linalg.norm(p @ p - p) < 1e-10
        assert np.linalg.norm(p - p.T) < 1e-12
        assert abs(np.trace(p) - w.dim) < 1e-10


def test_image_examples():
    w = Subspace.span([1.0, 0.0])
    same = w.image_under(np.eye(2))
    assert same.projection_distance(w) < 1e-12
    killed = Subspace.span([0.0, 1.0]).image_under(np.diag([1.0, 0.0]))
    assert killed.is_zero()
    swapped = w.image_under(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert swapped.projection_distance(Subspace.span([0.0, 1.0])) < 1e-12


def test_image_dimension_mismatch():
    with pytest.raises(InputError):
        Subspace.span([1.0, 0.0]).image_under(np.eye(3))


def test_contains_examples():
    full = Subspace.full(2)
    e1 = Subspace.span([1.0, 0.0])
    e2 = Subspace.span([0.0, 1.0])
    assert full.contains(e1) and full.contains(e2)
    assert not e1.contains(e2)
    assert e1.contains(e1)
    assert e1.contains(Subspace.zero(2))


def test_contains_dimension_mismatch():
    with pytest.raises(InputError):
        Subspace.full(2).contains(Subspace.full(3))


def test_projection_transpose_factors_through_image():
    # pi_W T.T equals pi_W T.T pi_TW for arbitrary T and W
    rng = np.random.default_rng(1)
    for _ in range(30):
        n = int(rng.integers(2, 7))
        t = rng.standard_normal((n, n))
        if rng.integers(0, 2):
            r = int(rng.integers(1, n))
            t = rng.standard_normal((n, r)) @ rng.standard_normal((r, n))
        w = Subspace.from_spanning(rng.standard_normal((n, int(rng.integers(1, n + 1)))))
        tw = w.image_under(t)
        lhs = w.projection() @ t.T
        rhs = lhs @ tw.projection()
        assert np.linalg.norm(lhs - rhs) <= 1e-9 * max(1.0, np.linalg.norm(t))


def test_image_projection_is_projection():
    rng = np.random.default_rng(2)
    for _ in range(10):
        n = 5
        t = rng.standard_normal((n, n))
        w = Subspace.from_spanning(rng.standard_normal((n, 2)))
        p = w.image_under(t).projection()
        assert np.linalg.norm(p @ p - p) < 1e-10
        assert np.linalg.norm(p - p.T) < 1e-12


def test_mutual_containment_means_equality():
    rng = np.random.default_rng(3)
    for _ in range(10):
        m = rng.standard_normal((5, 3))
        w = Subspace.from_spanning(m)
        # same span, different spanning set
        v = Subspace.from_spanning(m @ rng.standard_normal((3, 3)) + 0.0)
        if not (w.contains(v) and v.contains(w)):
            continue  # random recombination degenerated; skip
        assert w.dim == v.dim
        assert w.projection_distance(v) <= 1e-9


def test_json_roundtrip_and_reorthonormalization():
    w = Subspace.from_spanning(np.array([[1.0, 1.0], [1.0, 0.0], [0.0, 2.0]]))
    back = Subspace.from_json(w.to_json())
    assert back.ambient_dim == 3 and back.dim == w.dim
    assert back.projection_distance(w) < 1e-10
    # non-orthonormal basis in the wire object is re-orthonormalized
    raw = {
        "ambient_dim": 2,
        "basis": {"rows": 2, "cols": 2, "data": [1.0, 2.0, 1.0, 2.0]},
    }
    loaded = Subspace.from_json(raw)
    assert loaded.dim == 1


def test_json_zero_subspace():
    z = Subspace.zero(3)
    back = Subspace.from_json(z.to_json())
    assert back.is_zero() and back.ambient_dim == 3


@pytest.mark.parametrize(
    "obj",
    [
        {"ambient_dim": 2},
        {"basis": {"rows": 2, "cols": 1, "data": [1.0, 0.0]}},
        {"ambient_dim": 3, "basis": {"rows": 2, "cols": 1, "data": [1.0, 0.0]}},
        {"ambient_dim": -1, "basis": {"rows": 2, "cols": 1, "data": [1.0, 0.0]}},
    ],
)
def test_json_rejects(obj):
    with pytest.raises(InputError):
        Subspace.from_json(obj)


def test_direct_constructor_requires_orthonormal():
    with pytest.raises(InputError):
        Subspace(2, np.array([[1.0, 1.0], [0.0, 0.0]]))
