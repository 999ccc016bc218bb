import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from condlab import numlin
from condlab.errors import PreconditionError
from conftest import random_complex

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
shapes = st.tuples(st.integers(1, 6), st.integers(1, 6))


def penrose_residuals(a, x):
    h = lambda z: z.conj().T
    return (
        np.linalg.norm(a @ x @ a - a),
        np.linalg.norm(x @ a @ x - x),
        np.linalg.norm(h(a @ x) - a @ x),
        np.linalg.norm(h(x @ a) - x @ a),
    )


@given(arrays(np.float64, shapes, elements=finite))
@settings(max_examples=60, deadline=None)
def test_svd_reconstructs(a):
    res = numlin.svd(a)
    scale = max(1.0, np.abs(a).max())
    assert np.allclose(res.reconstruct(), a, atol=1e-10 * scale)
    s = res.singular_values
    assert np.all(np.diff(s) <= 0) and np.all(s >= 0)


def test_svd_complex_unitary_factors(rng):
    a = random_complex(rng, 5, 3)
    res = numlin.svd(a)
    u, vt = res.left_factor, res.right_factor_transposed
    assert np.allclose(u.conj().T @ u, np.eye(5))
    assert np.allclose(vt @ vt.conj().T, np.eye(3))
    assert np.allclose(res.reconstruct(), a)


def test_rank_deficient_svd_tail(rng):
    a = rng.standard_normal((6, 2)) @ rng.standard_normal((2, 5))
    s = numlin.singular_values(a)
    assert s[2] <= 1e-12 * 6 * s[0]


@pytest.mark.parametrize("field", ["real", "complex"])
@pytest.mark.parametrize("shape,rank", [((5, 5), 5), ((6, 4), 4), ((4, 6), 2), ((5, 5), 3)])
def test_pseudoinverse_penrose(rng, field, shape, rank):
    k, q = shape
    draw = (lambda *s: rng.standard_normal(s)) if field == "real" else (lambda *s: random_complex(rng, *s))
    a = draw(k, rank) @ draw(rank, q)
    x = numlin.pseudoinverse(a)
    assert max(penrose_residuals(a, x)) < 1e-9 * max(1.0, np.linalg.norm(a)) * max(1.0, np.linalg.norm(x))


def test_pseudoinverse_of_zero_and_invertible(rng):
    assert np.array_equal(numlin.pseudoinverse(np.zeros((2, 3))), np.zeros((3, 2)))
    a = rng.standard_normal((4, 4))
    assert np.allclose(numlin.pseudoinverse(a), np.linalg.inv(a))


def test_pseudoinverse_rejects_bad_tolerance():
    with pytest.raises(PreconditionError):
        numlin.pseudoinverse(np.eye(2), rank_tol=0.0)


def test_norms_against_entrywise_oracles(rng):
    a = random_complex(rng, 4, 3)
    assert numlin.frobenius_norm(a) == pytest.approx(np.sqrt(sum(abs(z) ** 2 for z in a.ravel())), rel=1e-14)
    # operator norm dominates every sampled ratio and is attained at the top right singular vector
    x = random_complex(rng, 3, 2000)
    ratios = np.linalg.norm(a @ x, axis=0) / np.linalg.norm(x, axis=0)
    top = numlin.operator_norm(a)
    assert ratios.max() <= top * (1 + 1e-12)
    v = numlin.svd(a).right_factor_transposed[0].conj()
    assert np.linalg.norm(a @ v) == pytest.approx(top, rel=1e-12)


def test_as_matrix_rejects_bad_input():
    with pytest.raises(PreconditionError):
        numlin.as_matrix([1.0, 2.0])
    with pytest.raises(PreconditionError):
        numlin.as_matrix([[1.0, np.nan]])


def test_realify_is_a_ring_homomorphism(rng):
    a, b = random_complex(rng, 3, 4), random_complex(rng, 4, 2)
    z = random_complex(rng, 4)
    ra = numlin.realify(a)
    assert np.allclose(numlin.realify(a @ b), ra @ numlin.realify(b))
    assert np.allclose(ra @ numlin.realify_vector(z), numlin.realify_vector(a @ z))
    assert np.allclose(numlin.complexify_vector(numlin.realify_vector(z)), z)


def test_realify_doubles_singular_values(rng):
    a = random_complex(rng, 3, 3)
    s = numlin.singular_values(a)
    assert np.allclose(numlin.singular_values(numlin.realify(a)), np.repeat(s, 2))


@pytest.mark.parametrize("field", ["real", "complex"])
def test_complement_basis(rng, field):
    v = rng.standard_normal(5) if field == "real" else random_complex(rng, 5)
    b = numlin.orthonormal_complement_basis(v)
    assert b.shape == (5, 4)
    assert np.allclose(b.conj().T @ b, np.eye(4))
    assert np.allclose(v.conj() @ b, 0.0, atol=1e-12)


def test_complement_basis_rejects_zero():
    with pytest.raises(PreconditionError):
        numlin.orthonormal_complement_basis(np.zeros(3))
    with pytest.raises(PreconditionError):
        numlin.orthonormal_complement_basis(np.array([1j, 0]), field="real")
