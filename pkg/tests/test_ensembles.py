import math

import numpy as np
import pytest

from condlab import ensembles as ens
from condlab.errors import PreconditionError
from condlab.problems import build_linear_fixed_b, homogenize_upoly


def test_complex_normal_moments():
    z = ens.sample_complex_normal(np.random.default_rng(1), 200_000)
    assert np.mean(np.abs(z) ** 2) == pytest.approx(1.0, abs=0.01)
    assert np.var(z.real) == pytest.approx(0.5, abs=0.01)
    assert abs(np.mean(z.real * z.imag)) < 0.01


def test_weyl_upoly_coefficient_variance():
    draws = np.array([ens.sample_weyl_upoly(4, s) for s in range(20_000)])
    var = np.mean(np.abs(draws) ** 2, axis=0)
    assert var == pytest.approx([math.comb(4, i) for i in range(5)], rel=0.05)
    assert var[2] == pytest.approx(6.0, rel=0.05)


@pytest.mark.parametrize("d", [1, 3, 6])
def test_weyl_system_n1_matches_homogenized_upoly(d):
    for seed in range(5):
        h = homogenize_upoly(ens.sample_weyl_upoly(d, seed))
        s = ens.sample_weyl_system(1, (d,), seed)
        assert h.polys[0].keys() == s.polys[0].keys()
        for a in h.polys[0]:
            assert h.polys[0][a] == pytest.approx(s.polys[0][a], rel=1e-14)


def test_weyl_system_coordinates_standard():
    coords = np.array([ens.sample_weyl_system(2, (2, 1), s).weyl_coordinates() for s in range(5000)])
    assert np.mean(np.abs(coords) ** 2, axis=0) == pytest.approx(np.ones(coords.shape[1]), abs=0.08)


def test_planted_root():
    s = ens.sample_weyl_system_with_root(3, (2, 1, 3), 5)
    assert np.linalg.norm(s.root) == pytest.approx(1.0)
    assert np.linalg.norm(s.evaluate(s.root)) < 1e-12


def test_gaussian_matrix_fields():
    assert ens.sample_gaussian_matrix(3, "real", 0).dtype == np.float64
    c = ens.sample_gaussian_matrix(3, "complex", 0, cols=5)
    assert c.shape == (3, 5) and np.iscomplexobj(c)
    assert np.array_equal(ens.sample_gaussian_matrix(4, seed=9), ens.sample_gaussian_matrix(4, seed=9))
    with pytest.raises(PreconditionError):
        ens.sample_gaussian_matrix(3, "quaternion")


def test_spec_validation():
    with pytest.raises(PreconditionError):
        ens.EnsembleSpec("wishart", (3,), 10)
    with pytest.raises(PreconditionError):
        ens.EnsembleSpec("rank_r_factors", (3, 3, 4), 10)
    with pytest.raises(PreconditionError):
        ens.EnsembleSpec("gaussian_real", (3,), 0)


def test_bootstrap_interval():
    x = np.random.default_rng(3).exponential(size=400)
    lo, hi = ens.bootstrap_mean_ci(x, seed=1)
    assert lo < x.mean() < hi
    se = x.std(ddof=1) / math.sqrt(x.size)
    assert hi - lo == pytest.approx(2 * 1.96 * se, rel=0.2)
    assert ens.bootstrap_mean_ci(x, seed=1) == (lo, hi)


def test_edelman_kappas_against_engine(rng):
    A = rng.standard_normal((5, 5))
    rel, rel_av = ens.edelman_kappas(A)
    assert rel == pytest.approx(np.linalg.cond(A), rel=1e-10)
    # the fixed-b engine map with a unit output gives the same relative average
    b = A @ (np.eye(5)[0])
    an = build_linear_fixed_b(A, b)
    assert rel_av == pytest.approx(an.relative().kappa_avg[2], rel=1e-10)


def test_edelman_small_run_is_worker_invariant():
    a = ens.edelman_experiment([4, 8], trials=60, seed=2, workers=1)
    b = ens.edelman_experiment([4, 8], trials=60, seed=2, workers=3)
    assert a.rows == b.rows and a.fits == b.fits
    assert a.row("log_kappa_rel", 8)["trials"] == 60
    with pytest.raises(PreconditionError):
        ens.edelman_experiment([1], trials=60)


def test_bp_bound_degree_one_is_exact():
    res = ens.bp_bound_experiment(1, trials=500, seed=0)
    row = res.row("kappa_W_sq", 1)
    assert row["mean"] == pytest.approx(1.0, rel=1e-10)
    assert row["pass"] is True
    assert res.meta["N"] == 1 and res.meta["excluded"] == 0


def test_bp_bound_validation():
    with pytest.raises(PreconditionError):
        ens.bp_bound_experiment(3, trials=100)
    with pytest.raises(PreconditionError):
        ens.bp_bound_experiment(3, trials=600, n=2)


def test_rank_r_reports_disclaimer_only():
    res = ens.rank_r_sample_experiment(4, 4, 2, trials=60, seed=0)
    assert any("measure differs from paper" in n for n in res.notes)
    for row in res.rows:
        assert "pass" not in row and "bound" not in row
    full = ens.rank_r_sample_experiment(3, 3, 3, trials=60, seed=0)
    assert [r["quantity"] for r in full.rows] == ["log_kappa_rel"]
