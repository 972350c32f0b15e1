import itertools

import numpy as np
import pytest
from conftest import random_interior_simplex
from hypothesis import given, settings
from hypothesis import strategies as st

from mvdual import polytope


def _same_up_to_permutation(A, B, tol):
    r = A.shape[1]
    return any(np.allclose(A[:, list(p)], B, atol=tol, rtol=0) for p in itertools.permutations(range(r)))


def test_volume_examples():
    assert polytope.simplex_volume(np.array([[1.0, -1.0]])) == pytest.approx(2.0)
    assert polytope.simplex_volume(np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])) == pytest.approx(0.0, abs=1e-15)
    tri = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    assert polytope.simplex_volume(tri) == pytest.approx(0.5)


def test_volume_rejects_bad_shape():
    with pytest.raises(ValueError):
        polytope.simplex_volume(np.ones((2, 2)))


def test_volume_permutation_invariant(rng):
    dual = random_interior_simplex(rng, 4)
    v = polytope.simplex_volume(dual)
    for p in itertools.permutations(range(4)):
        assert polytope.simplex_volume(dual[:, list(p)]) == pytest.approx(v, rel=1e-12)


def test_dual_simplex_caches_volume(rng):
    dual = random_interior_simplex(rng, 3)
    ds = polytope.DualSimplex(dual)
    assert ds.volume == polytope.simplex_volume(dual)
    np.testing.assert_array_equal(ds.lifted[-1], np.ones(3))


def test_polar_symmetric_interval():
    # self-polar as a set; column k is the vertex opposite facet k
    P = polytope.polar_vertices([[1.0, -1.0]])
    assert _same_up_to_permutation(P, np.array([[1.0, -1.0]]), 1e-15)


def test_polar_interval_frozen():
    # polar of conv{2, -2/3} is {x : 2x <= 1, -2x/3 <= 1} = [-3/2, 1/2]
    np.testing.assert_allclose(polytope.polar_vertices([[2.0, -2.0 / 3.0]]), [[-1.5, 0.5]])


def test_polar_of_regular_simplex(rng):
    # rows of Q plus e/sqrt(r) form an orthonormal basis; polar of conv(-rQ) is conv(Q)
    r = 3
    M, _ = np.linalg.qr(np.column_stack([np.ones(r) / np.sqrt(r), rng.standard_normal((r, r - 1))]))
    if M[0, 0] < 0:
        M = -M
    Q = M[:, 1:].T
    np.testing.assert_allclose(polytope.polar_vertices(-r * Q), Q, atol=1e-12)


def test_polar_requires_interior_origin():
    with pytest.raises(polytope.OriginNotInteriorError):
        polytope.polar_vertices([[1.0, 2.0]])


def test_polar_degenerate():
    with pytest.raises(polytope.DegenerateSimplexError):
        polytope.polar_vertices([[1.0, 1.0, -1.0], [0.0, 0.0, 0.0]])


def test_translate_examples():
    dual = np.array([[1.0, -1.0]])
    np.testing.assert_array_equal(polytope.translate_polar(dual, [0.0]), dual)
    np.testing.assert_allclose(polytope.translate_polar(dual, [0.5]), [[2.0, -2.0 / 3.0]])


def test_translate_outside_names_component():
    with pytest.raises(polytope.OriginNotInteriorError, match="dual_0"):
        polytope.translate_polar(np.array([[1.0, -1.0]]), [1.5])


def test_translate_matches_polar_of_shifted_primal(rng):
    dual = random_interior_simplex(rng, 4)
    P = polytope.polar_vertices(dual)
    w = P @ rng.dirichlet(np.ones(4))
    direct = polytope.polar_vertices(P - w[:, None])
    assert np.allclose(polytope.translate_polar(dual, w), direct, atol=1e-8)


def test_barycentric_examples():
    tri = np.array([[1.0, -0.5, -0.5], [0.0, np.sqrt(3) / 2, -np.sqrt(3) / 2]])
    np.testing.assert_allclose(polytope.barycentric_of_origin(tri).weights, np.ones(3) / 3)
    q = polytope.barycentric_of_origin([[-1.5, 0.5]])
    np.testing.assert_allclose(q.weights, [0.25, 0.75])
    assert q.interior
    edge = polytope.barycentric_of_origin([[0.0, 1.0, -1.0], [0.0, 1.0, 1.0]])
    assert not edge.interior
    assert edge.weights.min() == pytest.approx(0.0, abs=1e-12)


def test_barycentric_degenerate():
    with pytest.raises(polytope.DegenerateSimplexError):
        polytope.barycentric_of_origin([[1.0, 2.0, 3.0], [1.0, 2.0, 3.0]])


def test_volume_transform_examples(rng):
    dual = random_interior_simplex(rng, 3)
    w = np.ones(3)
    assert polytope.volume_transform_factor(dual, np.eye(3), w) == pytest.approx(1.0)
    assert polytope.volume_transform_factor(dual, 2.5 * np.eye(3), w) == pytest.approx(2.5**2)


def test_volume_transform_preconditions(rng):
    dual = random_interior_simplex(rng, 3)
    with pytest.raises(ValueError):
        polytope.volume_transform_factor(dual, np.eye(3), np.array([1.0, -1.0, 0.0]))
    with pytest.raises(ValueError):
        polytope.volume_transform_factor(dual, np.eye(3), np.array([1.0, 2.0, 3.0]))


def test_max_violation_examples(rng):
    Y = rng.standard_normal((2, 10))
    assert polytope.max_polar_violation(Y, np.zeros((2, 3))) == -1.0
    dual = np.array([[1.0, -1.0, 0.0], [0.0, 0.0, -1.0]])
    Y = np.array([[1.0, -0.5], [0.0, 0.5]])
    assert polytope.max_polar_violation(Y, dual) == pytest.approx(0.0)
    dual = random_interior_simplex(rng, 3)
    Y = rng.standard_normal((2, 30))
    dual /= 1.0 + max(0.0, polytope.max_polar_violation(Y, dual))
    assert polytope.max_polar_violation(Y, dual) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 6))
def test_involution(seed, r):
    dual = random_interior_simplex(np.random.default_rng(seed), r)
    back = polytope.polar_vertices(polytope.polar_vertices(dual))
    assert np.allclose(back, dual, atol=1e-8 * max(1.0, np.abs(dual).max()))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 6))
def test_polar_translation_identity(seed, r):
    rng = np.random.default_rng(seed)
    dual = random_interior_simplex(rng, r)
    P = polytope.polar_vertices(dual)
    w = P @ rng.dirichlet(np.ones(r))
    expected = polytope.polar_vertices(P - w[:, None])
    got = polytope.translate_polar(dual, w)
    assert np.allclose(got, expected, atol=1e-8 * max(1.0, np.abs(expected).max()))
