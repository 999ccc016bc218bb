import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy import integrate, stats

from condlab import condcore as cc
from condlab.errors import OutputAtOriginError, PreconditionError, UnsupportedModeError

DIAG34 = cc.ConditionMap.from_matrix(np.diag([3.0, 4.0]))

map_matrices = st.tuples(st.integers(1, 5), st.integers(1, 8)).flatmap(
    lambda s: arrays(np.float64, s, elements=st.floats(-10, 10, allow_nan=False))
)


def test_condition_map_shape_checked():
    with pytest.raises(PreconditionError):
        cc.ConditionMap(np.zeros((2, 3)), 2, 2)
    m = cc.ConditionMap.from_matrix(np.ones((2, 3)))
    assert (m.output_dim, m.input_dim) == (2, 3)
    with pytest.raises(ValueError):
        m.matrix[0, 0] = 5.0


def test_complex_map_is_realified():
    m = cc.ConditionMap.from_matrix(np.array([[1j, 0], [0, 2]]))
    assert (m.output_dim, m.input_dim) == (4, 4)
    assert np.allclose(m.singular_values, [2, 2, 1, 1])


def test_diag34_values():
    assert cc.kappa(DIAG34) == 4.0
    assert cc.kappa_frobenius(DIAG34) == 5.0
    assert cc.kappa_avg(DIAG34, 2) == pytest.approx(5 / math.sqrt(2), rel=1e-15)
    assert cc.componentwise_kappa(DIAG34, 1) == 3.0
    assert cc.componentwise_avg(DIAG34, 2, 2) == pytest.approx(4 / math.sqrt(2), rel=1e-14)


def test_zero_map():
    z = cc.ConditionMap.from_matrix(np.zeros((2, 3)))
    assert cc.kappa(z) == 0.0 and cc.kappa_frobenius(z) == 0.0
    assert cc.kappa_avg(z, 3) == 0.0
    assert cc.componentwise_kappa(z, 2) == 0.0


def test_kappa_is_max_over_random_directions(rng):
    m = cc.ConditionMap.from_matrix(rng.standard_normal((3, 7)))
    x = rng.standard_normal((7, 100_000))
    x /= np.linalg.norm(x, axis=0)
    norms = np.linalg.norm(m.matrix @ x, axis=0)
    k = cc.kappa(m)
    assert norms.max() <= k * (1 + 1e-12)
    # ascend from the best sampled direction (power iteration on M^T M)
    best = x[:, norms.argmax()]
    for _ in range(30):
        best = m.matrix.T @ (m.matrix @ best)
        best /= np.linalg.norm(best)
    climbed = np.linalg.norm(m.matrix @ best)
    assert climbed <= k * (1 + 1e-12)
    assert climbed >= 0.995 * k


def test_frobenius_entrywise(rng):
    a = rng.standard_normal((4, 6))
    m = cc.ConditionMap.from_matrix(a)
    assert cc.kappa_frobenius(m) == pytest.approx(math.sqrt(sum(v * v for v in a.ravel())), rel=1e-12)


def test_identity_map():
    for n in (1, 3, 6):
        m = cc.ConditionMap.from_matrix(np.eye(n))
        assert cc.kappa_frobenius(m) == pytest.approx(math.sqrt(n))
        for p in (1, 2, 3, 4):
            assert cc.kappa_avg(m, p) == pytest.approx(1.0, rel=1e-13)


def test_gamma_ratio_constant():
    assert cc.gamma_ratio_constant(2, 2) == pytest.approx(1 / math.sqrt(2), rel=1e-15)
    for m in (1, 5, 50, 10**6):
        assert cc.gamma_ratio_constant(m, 2) == pytest.approx(1 / math.sqrt(m), rel=1e-12)
    mp = mpmath.sqrt(mpmath.pi / 2)
    assert cc.gamma_ratio_constant(1, 1) == pytest.approx(float(mp), rel=1e-15)
    assert cc.gamma_ratio_constant(1, 1) == pytest.approx(1.2533141, abs=1e-7)
    with mpmath.workdps(40):
        ref = mpmath.power(mpmath.gamma(mpmath.mpf(37) / 2) / mpmath.gamma(mpmath.mpf(40) / 2), mpmath.mpf(1) / 3)
        assert cc.gamma_ratio_constant(37, 3) == pytest.approx(float(ref / mpmath.sqrt(2)), rel=1e-13)


def test_componentwise_constant_reduces_to_inverse_root_m():
    for m in (1, 2, 9, 400):
        assert cc.componentwise_constant(m, 2) == pytest.approx(1 / math.sqrt(m), rel=1e-13)


def test_sphere_volume():
    assert cc.sphere_volume(1) == pytest.approx(2.0)
    assert cc.sphere_volume(2) == pytest.approx(2 * math.pi)
    assert cc.sphere_volume(3) == pytest.approx(4 * math.pi)
    assert cc.sphere_volume(2000) == 0.0 or cc.sphere_volume(2000) < 1e-300


def test_exact_moments():
    assert cc.gaussian_norm_moment([3, 4], 2).value == pytest.approx(25.0)
    assert cc.gaussian_norm_moment([1], 1).value == pytest.approx(math.sqrt(2 / math.pi), rel=1e-15)
    assert cc.gaussian_norm_moment([1], 1).value == pytest.approx(0.7978846, abs=1e-7)
    with pytest.raises(UnsupportedModeError):
        cc.gaussian_norm_moment([1, 2], 3, mode="exact")
    with pytest.raises(UnsupportedModeError):
        cc.gaussian_norm_moment([1, 2], 3, mode="bogus")


@pytest.mark.parametrize("sig", [[1.0, 2.0], [0.5, 1.0, 3.0], [2.0]])
def test_even_moments_match_isserlis_by_sampling(sig):
    # fourth moment of the quadratic form: (sum w)^2 + 2 sum w^2
    w = np.square(sig)
    assert cc.gaussian_norm_moment(sig, 4).value == pytest.approx(w.sum() ** 2 + 2 * (w ** 2).sum(), rel=1e-14)
    for p in (4, 6):
        mc = cc.gaussian_norm_moment(sig, p, mode="mc", samples=400_000, seed=3)
        assert abs(mc.value - cc.gaussian_norm_moment(sig, p).value) <= 4 * mc.std_error


def test_isotropic_moment_is_chi():
    for k, p in [(2, 3), (5, 1), (3, 7)]:
        ref = 2 ** (p / 2) * math.gamma((k + p) / 2) / math.gamma(k / 2) * 1.5 ** p
        assert cc.gaussian_norm_moment([1.5] * k + [0.0], p).value == pytest.approx(ref, rel=1e-13)


def test_mc_moment_against_quadrature():
    phi = stats.norm.pdf
    ref, _ = integrate.dblquad(
        lambda y, x: (x * x + 4 * y * y) ** 1.5 * phi(x) * phi(y), -12, 12, -12, 12, epsabs=1e-10
    )
    est = cc.gaussian_norm_moment([1.0, 2.0], 3, mode="mc", samples=10**6, seed=11)
    assert abs(est.value - ref) <= 3 * est.std_error


def test_sphere_oracle_examples():
    eye = cc.ConditionMap.from_matrix(np.eye(2))
    est = cc.sphere_average_oracle(eye, 2, samples=5000, seed=1)
    assert est.value == pytest.approx(1.0, rel=1e-14)
    est = cc.sphere_average_oracle(DIAG34, 2, samples=10**6, seed=1)
    assert abs(est.value - 5 / math.sqrt(2)) <= 3 * est.std_error
    r1 = cc.ConditionMap.from_matrix(np.array([[1.0, 0.0], [0.0, 0.0]]))
    est = cc.sphere_average_oracle(r1, 2, samples=200_000, seed=1)
    assert abs(est.value - 1 / math.sqrt(2)) <= 3 * est.std_error
    with pytest.raises(PreconditionError):
        cc.sphere_average_oracle(eye, 2, samples=999)


@pytest.mark.parametrize("p", [1, 3, 4])
def test_closed_formula_matches_oracle_2x10(rng, p):
    m = cc.ConditionMap.from_matrix(rng.standard_normal((2, 10)))
    closed = cc.kappa_avg_estimate(m, p, samples=200_000, seed=(5, p))
    orc = cc.sphere_average_oracle(m, p, samples=200_000, seed=(6, p))
    assert abs(closed.value - orc.value) <= 3 * math.hypot(closed.std_error, orc.std_error)


@pytest.mark.parametrize("p", [1, 3])
def test_componentwise_avg_matches_row_oracle(rng, p):
    m = cc.ConditionMap.from_matrix(rng.standard_normal((3, 6)))
    orc = cc.sphere_average_oracle(m.row(1), p, samples=200_000, seed=p)
    assert abs(cc.componentwise_avg(m, 1, p) - orc.value) <= 3 * orc.std_error


def test_componentwise_is_kappa_of_row_submap(rng):
    m = cc.ConditionMap.from_matrix(rng.standard_normal((4, 5)))
    for k in range(1, 5):
        assert cc.componentwise_kappa(m, k) == pytest.approx(cc.kappa(m.row(k)), rel=1e-12)
    with pytest.raises(IndexError):
        cc.componentwise_kappa(m, 0)
    with pytest.raises(IndexError):
        cc.componentwise_kappa(m, 5)


@given(map_matrices)
@settings(max_examples=80, deadline=None)
def test_report_invariants(a):
    m = cc.ConditionMap.from_matrix(a)
    k, kf = cc.kappa(m), cc.kappa_frobenius(m)
    n = m.output_dim
    assert k <= kf * (1 + 1e-12) + 1e-300
    assert kf <= math.sqrt(n) * k * (1 + 1e-12) + 1e-300
    av = cc.kappa_avg(m, 2)
    assert av == pytest.approx(kf / math.sqrt(m.input_dim), rel=1e-12, abs=1e-300)
    assert av <= math.sqrt(n / m.input_dim) * k * (1 + 1e-12) + 1e-300
    assert cc.gamma_ratio_constant(m.input_dim, 2) * math.hypot(*m.singular_values) == pytest.approx(
        av, rel=1e-12, abs=1e-300
    )
    for j in range(1, n + 1):
        assert cc.componentwise_avg(m, j, 2) == pytest.approx(
            cc.componentwise_kappa(m, j) / math.sqrt(m.input_dim), rel=1e-12, abs=1e-300
        )


def test_relative_report():
    rep = cc.analyze_map(DIAG34, p_list=(2, 3), componentwise=True)
    same = cc.relative_report(rep, 1.0, 1.0)
    assert same.kappa == rep.kappa and same.kappa_avg == rep.kappa_avg
    rel = cc.relative_report(rep, 2.0, 1.0)
    assert rel.kappa == 8.0 and rel.relative_scale == 2.0
    assert rel.kappa_avg[2] / rel.kappa_frobenius == pytest.approx(1 / math.sqrt(2))
    assert rel.componentwise == [6.0, 8.0]
    assert cc.relative_report(rel, 3.0, 1.0).relative_scale == 6.0
    with pytest.raises(OutputAtOriginError):
        cc.relative_report(rep, 1.0, 0.0)


def test_deterministic_replay_and_worker_invariance(rng):
    m = cc.ConditionMap.from_matrix(rng.standard_normal((3, 9)))
    a = cc.sphere_average_oracle(m, 3, samples=150_000, seed=42, workers=1)
    b = cc.sphere_average_oracle(m, 3, samples=150_000, seed=42, workers=4)
    assert a == b
    c = cc.kappa_avg_estimate(m, 3, mode="mc", samples=150_000, seed=42, workers=3)
    assert c == cc.kappa_avg_estimate(m, 3, mode="mc", samples=150_000, seed=42, workers=1)
    assert cc.sphere_average_oracle(m, 3, samples=150_000, seed=43) != a


def test_disjoint_seeds_are_uncorrelated():
    # per-observation values from different seeds should be uncorrelated
    m = cc.ConditionMap.from_matrix(np.array([[1.0, 0.0, 0.0]]))
    vals = []
    for seed in (1, 2):
        rs = [cc.sphere_average_oracle(m, 2, samples=1000, seed=(seed, i)).value for i in range(300)]
        vals.append(rs)
    r = np.corrcoef(vals[0], vals[1])[0, 1]
    assert abs(r) < 4 / math.sqrt(300)


def test_seed_validation():
    with pytest.raises(PreconditionError):
        cc.sphere_average_oracle(DIAG34, 2, samples=1000, seed=-1)
