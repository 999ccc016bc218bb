import numpy as np
import pytest

from condlab import kernels

BACKENDS = ["python"]
try:
    from condlab import _ckernels  # noqa: F401
except ImportError:
    pass
else:
    BACKENDS.append("cython")


def reference_stats(values):
    values = np.asarray(values, dtype=np.float64)
    return values.size, values.mean(), float(np.sum((values - values.mean()) ** 2))


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("p", [1.0, 2.0, 3.0, 4.5])
def test_sphere_stats_match_direct_loop(rng, backend, p):
    sphere, _ = kernels.backend_functions(backend)
    mat = rng.standard_normal((3, 5))
    draws = rng.standard_normal((2000, 5))
    direct = [np.linalg.norm(mat @ (g / np.linalg.norm(g))) ** p for g in draws]
    n, mean, m2 = sphere(np.ascontiguousarray(mat), draws, p)
    rn, rmean, rm2 = reference_stats(direct)
    assert n == rn
    assert mean == pytest.approx(rmean, rel=1e-12)
    assert m2 == pytest.approx(rm2, rel=1e-10)


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("p", [1.0, 3.0])
def test_gaussian_stats_match_direct_loop(rng, backend, p):
    _, gauss = kernels.backend_functions(backend)
    w = np.array([1.0, 4.0, 0.25])
    draws = rng.standard_normal((3000, 3))
    direct = [np.sqrt(np.sum(w * g * g)) ** p for g in draws]
    n, mean, m2 = gauss(w, draws, p)
    rn, rmean, rm2 = reference_stats(direct)
    assert n == rn
    assert mean == pytest.approx(rmean, rel=1e-12)
    assert m2 == pytest.approx(rm2, rel=1e-10)


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled extension not built")
def test_backends_agree(rng):
    mat = rng.standard_normal((4, 9))
    draws = rng.standard_normal((1 << 15, 9))
    a = kernels.backend_functions("python")[0](mat, draws, 3.0)
    b = kernels.backend_functions("cython")[0](mat, draws, 3.0)
    assert a[0] == b[0]
    assert a[1] == pytest.approx(b[1], rel=1e-12)
    assert a[2] == pytest.approx(b[2], rel=1e-9)


@pytest.mark.parametrize("backend", BACKENDS)
def test_constant_integrand_stays_at_rounding_level(rng, backend):
    # a single-column map makes |M x| constant on the sphere; the full-chunk
    # mean must not drift with the sample count
    sphere, _ = kernels.backend_functions(backend)
    mat = rng.standard_normal((3, 1))
    exact = float(np.linalg.norm(mat))
    n, mean, m2 = sphere(mat, rng.standard_normal((1 << 15, 1)), 1.0)
    assert abs(mean - exact) <= 8 * np.finfo(float).eps * exact
    assert np.sqrt(m2 / n) <= 8 * np.finfo(float).eps * exact


def test_merge_is_exact_split(rng):
    x = rng.standard_normal(1001) ** 2
    whole = reference_stats(x)
    merged = kernels.merge_stats(reference_stats(x[:300]), reference_stats(x[300:]))
    merged = kernels.merge_stats((0, 0.0, 0.0), merged)
    assert merged[0] == whole[0]
    assert merged[1] == pytest.approx(whole[1], rel=1e-14)
    assert merged[2] == pytest.approx(whole[2], rel=1e-12)


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.backend_functions("fortran")


def test_active_backend_is_named():
    assert kernels.BACKEND in BACKENDS
