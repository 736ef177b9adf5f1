import math

import numpy as np
import pytest

from hdivtest import simulation as sim
from hdivtest.errors import DegenerateDirectionError
from hdivtest.statistics import Method


class TestDesign:
    def test_ar1(self):
        assert sim.ar1_covariance(1, 0.6).tolist() == [[1.0]]
        np.testing.assert_allclose(
            sim.ar1_covariance(3, 0.6), [[1, 0.6, 0.36], [0.6, 1, 0.6], [0.36, 0.6, 1]], atol=1e-15
        )
        np.testing.assert_array_equal(sim.ar1_covariance(4, 0.0), np.eye(4))
        assert np.all(np.linalg.eigvalsh(sim.ar1_covariance(50, 0.6)) > 0)
        with pytest.raises(ValueError):
            sim.ar1_covariance(3, 1.0)

    def test_tau(self):
        assert sim.calibrate_tau(np.ones(3), np.eye(3), 0.0, 100) == 0.0
        e1 = np.array([1.0, 0, 0])
        assert sim.calibrate_tau(e1, np.eye(3), 30.0, 200) == pytest.approx(math.sqrt(30 / 200))
        psi = np.array([1.0, 1, 0, 0])
        S = sim.ar1_covariance(4, 0.6)
        assert psi @ S @ psi == pytest.approx(3.2)
        assert sim.calibrate_tau(psi, S, 30.0, 200) == pytest.approx(math.sqrt(30 / (3.2 * 200)))
        with pytest.raises(DegenerateDirectionError):
            sim.calibrate_tau(np.zeros(3), np.eye(3), 1.0, 10)

    @pytest.mark.parametrize("eid", sim.EXAMPLE_IDS)
    def test_concentration_identity(self, eid):
        for cfg in sim.example_suite(eid):
            assert sim.concentration(cfg.dgp) == pytest.approx(cfg.dgp.mu2, rel=1e-10)

    def test_sparsity_rounding(self):
        assert [sim.Sparsity.sparse(K).q for K in (100, 200, 300, 50)] == [3, 6, 9, 2]
        assert [sim.Sparsity.dense(K).q for K in (100, 200, 300, 15)] == [60, 120, 180, 9]
        assert sim.Sparsity.dense(300, 0.2).q == 60
        with pytest.raises(ValueError):
            sim.DGPConfig(n=10, K=3, mu2=1, sparsity=sim.Sparsity("sparse", 4))


class TestGenerate:
    def test_deterministic(self):
        d = sim.DGPConfig(n=50, K=10, mu2=30, sparsity=sim.Sparsity.sparse(10), a0=0.5)
        a, b = sim.generate(d, 42), sim.generate(d, 42)
        for name in "YXZ":
            assert np.array_equal(getattr(a, name), getattr(b, name))
        c = sim.generate(d, 43)
        assert not np.array_equal(a.Y, c.Y)

    def test_error_variance(self):
        d = sim.DGPConfig(n=100_000, K=2, mu2=0.0, sparsity=sim.Sparsity("sparse", 1), beta=0.0)
        data = sim.generate(d, 1)
        assert np.var(data.Y) == pytest.approx(2.0, rel=0.02)

    def test_heteroskedastic_slope(self):
        d = sim.DGPConfig(n=100_000, K=2, mu2=0.0, sparsity=sim.Sparsity("sparse", 1), beta=0.0, a0=0.5)
        data = sim.generate(d, 2)
        z2 = data.Z[:, 0] ** 2
        slope = np.polyfit(z2, data.Y**2, 1)[0]
        assert slope == pytest.approx(0.25, rel=0.10)

    def test_instrument_covariance(self):
        d = sim.DGPConfig(n=100_000, K=5, mu2=10.0, sparsity=sim.Sparsity("dense", 3))
        data = sim.generate(d, 3)
        np.testing.assert_allclose(np.cov(data.Z.T), sim.ar1_covariance(5, 0.6), atol=0.02)

    def test_error_correlation(self):
        d = sim.DGPConfig(n=100_000, K=3, mu2=20.0, sparsity=sim.Sparsity("dense", 2), beta=0.0)
        data = sim.generate(d, 4)
        v = data.X - data.Z @ d.first_stage
        eps = data.Y  # beta = 0
        assert np.corrcoef(eps, v)[0, 1] == pytest.approx(0.6, abs=0.02)


class TestMonteCarlo:
    def cfg(self, **kw):
        d = sim.DGPConfig(n=60, K=20, mu2=30.0, sparsity=sim.Sparsity.sparse(20), beta=kw.pop("beta", 1.0))
        return sim.MCConfig(dgp=d, replications=kw.pop("reps", 20), master_seed=5, gamma=1.0, **kw)

    def test_thread_independence(self):
        c = self.cfg(beta=2.0)
        base = sim.run_monte_carlo(c, threads=1)
        for t in (2, 4):
            assert sim.run_monte_carlo(c, threads=t) == base

    def test_single_replication(self):
        table = sim.run_monte_carlo(self.cfg(reps=1))
        assert len(table) == 5
        assert all(r.rejection_frequency in (0.0, 1.0) for r in table)

    def test_standard_error(self):
        for r in sim.run_monte_carlo(self.cfg(beta=3.0, reps=40)):
            f = r.rejection_frequency
            assert r.mc_standard_error == pytest.approx(math.sqrt(f * (1 - f) / 40))
            assert r.rejections == round(f * 40)

    def test_degenerate_counted(self):
        # sigma_eps tiny, beta = beta0: never exactly degenerate, so check the path directly
        d = sim.DGPConfig(n=20, K=3, mu2=1.0, sparsity=sim.Sparsity("sparse", 1))
        c = sim.MCConfig(dgp=d, replications=3, methods=("JAR",))
        assert sim.run_monte_carlo(c).rows[0].degenerate_count == 0

    def test_rjar_needs_gamma(self):
        d = sim.DGPConfig(n=20, K=3, mu2=1.0, sparsity=sim.Sparsity("sparse", 1))
        with pytest.raises(ValueError):
            sim.MCConfig(dgp=d, methods=("RJAR",))

    def test_threads_env(self, monkeypatch):
        monkeypatch.setenv(sim.THREADS_ENV, "3")
        assert sim.default_threads() == 3
        monkeypatch.delenv(sim.THREADS_ENV)
        assert sim.default_threads() == 1

    def test_power_monotone(self):
        freqs = []
        for beta in (1.0, 2.0, 3.0):
            d = sim.DGPConfig(n=200, K=100, mu2=180.0, sparsity=sim.Sparsity.dense(100), beta=beta)
            t = sim.run_monte_carlo(sim.MCConfig(dgp=d, replications=300, master_seed=11, methods=("JAR",)))
            freqs.append(t.rows[0])
        for a, b in zip(freqs, freqs[1:]):
            slack = 2 * math.hypot(a.mc_standard_error, b.mc_standard_error)
            assert b.rejection_frequency >= a.rejection_frequency - slack


class TestSuite:
    def test_e1_1(self):
        cfgs = sim.example_suite("E1_1")
        assert len(cfgs) == 20
        assert {(c.dgp.n, c.dgp.K, c.dgp.a0) for c in cfgs} == {(200, 100, 0.0)}
        assert sorted({c.dgp.beta for c in cfgs}) == [-1, 0, 1, 2, 3]
        assert {c.dgp.sparsity.q for c in cfgs} == {3, 60}
        assert {c.dgp.mu2 for c in cfgs} == {30.0, 180.0}
        assert all(c.dgp.beta0 == 1.0 and c.replications == 300 for c in cfgs)

    def test_e3_2(self):
        cfgs = sim.example_suite("e3_2")
        assert {(c.dgp.K, c.dgp.a0) for c in cfgs} == {(300, 0.5)}
        assert {c.dgp.sparsity.q for c in cfgs} == {9, 180}

    def test_e4(self):
        e41 = sim.example_suite("E4_1")
        assert len(e41) == 30
        assert {c.dgp.sparsity.q for c in e41} == {1, 3, 5, 7, 9}
        e42 = sim.example_suite("E4_2")
        assert len(e42) == 30
        assert {(c.dgp.K, c.dgp.sparsity.q) for c in e42 if c.dgp.K == 100} == {(100, q) for q in (20, 40, 60, 80, 100)}
        assert all(c.dgp.mu2 == 30 and c.dgp.a0 == 0 and c.dgp.beta in (-1, 3) for c in e41 + e42)

    def test_overrides(self):
        cfgs = sim.example_suite("E2_1", {"replications": 50, "a0": 0.25, "methods": ["JAR"]})
        assert all(c.replications == 50 and c.dgp.a0 == 0.25 and c.methods == (Method.JAR,) for c in cfgs)
        with pytest.raises(ValueError):
            sim.example_suite("E2_1", {"bogus": 1})

    def test_unknown(self):
        with pytest.raises(ValueError):
            sim.example_suite("E5_1")


def test_timing_shape():
    rows = sim.timing_benchmark([60], reps=2)
    assert len(rows) == 4
    assert {(r.sparsity, r.method) for r in rows} == {(s, m) for s in ("sparse", "dense") for m in ("RJAR", "JAR")}
    assert all(r.mean_seconds > 0 for r in rows)


def test_critical_value_curve():
    rows = sim.critical_value_curve()
    assert [r.K for r in rows] == list(range(100, 1001, 100))
    assert all(r.bcch_threshold > r.refined_threshold for r in rows)
    for a, b in zip(rows, rows[1:]):
        assert b.bcch_threshold > a.bcch_threshold and b.refined_threshold > a.refined_threshold
    assert rows[0].bcch_threshold == pytest.approx(3.8288, abs=1e-3)
    assert rows[0].refined_threshold == pytest.approx(3.5326, abs=1e-3)
    with pytest.raises(ValueError):
        sim.critical_value_curve([1])
