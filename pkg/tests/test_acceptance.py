"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

Every stochastic criterion uses the fixed master seed ``SEED``. The lines are
collected in ``RESULTS`` and printed at the end of the pytest session (see
``conftest.py``); running this file directly prints them as well.
"""
import math
import subprocess
import sys
import time

import numpy as np
import pytest
from scipy import stats

from hdivtest import simulation as sim
from hdivtest import statistics as S
from hdivtest.distributions import gumbel_cdf
from hdivtest.inference import GridSpec, invert
from oracles import jar_loop, max_loop, omega_loop, rjar_loop
from conftest import random_dataset

SEED = 20261014
ALPHA = 0.05
RESULTS = {}


def report(num, ok, detail):
    line = f"criterion {num:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[num] = line
    print(line)
    return ok


def mc_se(p, reps):
    return math.sqrt(p * (1 - p) / reps)


def e1_null(K, mu2=30.0):
    return sim.DGPConfig(n=200, K=K, mu2=mu2, sparsity=sim.Sparsity.sparse(K), beta=1.0, beta0=1.0)


def test_c01_jar_null_normality():
    t0 = time.perf_counter()
    jar = sim.null_statistics(e1_null(100), 2000, SEED)["jar"]
    ks = stats.kstest(jar, "norm")
    took = time.perf_counter() - t0
    ok = ks.pvalue > 0.01 and took < 120
    assert report(1, ok, f"KS D={ks.statistic:.4f} p={ks.pvalue:.4f} ({took:.1f}s)")


def test_c02_max_gumbel_law():
    mc = sim.null_statistics(e1_null(300), 2000, SEED)["max_centered"]
    ks = stats.kstest(mc, gumbel_cdf)
    assert report(2, ks.pvalue > 0.01, f"KS D={ks.statistic:.4f} p={ks.pvalue:.3g}")


def test_c03_size_control():
    methods = ("JAR", "BCCH_ASY", "FISHER")
    worst = []
    ok = True
    for eid in ("E1_1", "E1_2"):
        for cfg in sim.example_suite(eid, {"master_seed": SEED, "methods": methods}):
            if cfg.dgp.beta != cfg.dgp.beta0:
                continue
            for row in sim.run_monte_carlo(cfg):
                f = row.rejection_frequency
                worst.append((f, f"{eid}/{row.sparsity}/mu2={row.mu2:g}/{row.method}"))
                ok &= 0.01 <= f <= 0.09
    assert len(worst) == 8 * 3
    lo, hi = min(worst), max(worst)
    assert report(3, ok, f"24 sizes in [{lo[0]:.4f} ({lo[1]}), {hi[0]:.4f} ({hi[1]})]")


def test_c04_power_ordering():
    dgp = sim.DGPConfig(n=200, K=100, mu2=180.0, sparsity=sim.Sparsity.dense(100), beta=3.0)
    table = sim.run_monte_carlo(sim.MCConfig(dgp=dgp, replications=300, master_seed=SEED, gamma=1.0))
    f = {m.value: table.frequency(m) for m in S.Method}
    ok = f["FISHER"] >= max(f["JAR"], f["BCCH_ASY"]) - 0.05 and f["BCCH_ASY"] >= f["BCCH"] - 0.02
    assert report(4, ok, " ".join(f"{k}={v:.3f}" for k, v in f.items()))


def test_c05_zero_identification():
    dgp = sim.DGPConfig(n=200, K=100, mu2=0.0, sparsity=sim.Sparsity.sparse(100), beta=3.0)
    reps = 300
    table = sim.run_monte_carlo(sim.MCConfig(dgp=dgp, replications=reps, master_seed=SEED, gamma=1.0))
    band = 3 * mc_se(ALPHA, reps)
    f = {r.method: r.rejection_frequency for r in table}
    ok = all(abs(v - ALPHA) <= band for v in f.values())
    detail = " ".join(f"{k}={v:.4f}" for k, v in f.items())
    assert report(5, ok, f"{detail} band=[{ALPHA - band:.4f}, {ALPHA + band:.4f}]")


def test_c06_oracle_equivalence():
    rng = np.random.default_rng(SEED)
    worst = 0.0
    t0 = time.perf_counter()
    for i in range(200):
        n, K = int(rng.integers(2, 31)), int(rng.integers(1, 11))
        d = random_dataset(SEED + i, n, K)
        e = S.residuals(d, float(rng.normal()))
        Zl, el = d.Z.tolist(), e.tolist()
        pairs = [
            (S.jar_statistic(d, e), jar_loop(Zl, el)),
            (S.rjar_statistic(d, e, 1.0), rjar_loop(d.Z, el, 1.0)),
            (S.max_statistic(d, e)[0], max_loop(Zl, el)),
            (S.omega_hat(d, e), omega_loop(Zl, el)),
        ]
        for got, ref in pairs:
            worst = max(worst, abs(got - ref) / max(abs(ref), 1e-300))
    took = time.perf_counter() - t0
    assert report(6, worst <= 1e-10, f"max relative error {worst:.2e} over 200 instances ({took:.1f}s)")


def test_c07_critical_value_curve():
    rows = sim.critical_value_curve(range(100, 1001, 100), ALPHA)
    larger = all(r.bcch_threshold > r.refined_threshold for r in rows)
    mono = all(b.bcch_threshold > a.bcch_threshold and b.refined_threshold > a.refined_threshold
               for a, b in zip(rows, rows[1:]))
    first = rows[0]
    close = abs(first.bcch_threshold - 3.8288) <= 1e-3 and abs(first.refined_threshold - 3.5326) <= 1e-3
    ok = larger and mono and close
    assert report(7, ok, f"K=100: {first.bcch_threshold:.6f} vs {first.refined_threshold:.6f}; "
                         f"larger={larger} monotone={mono}")


def test_c08_timing_ordering():
    rows = sim.timing_benchmark([100, 200, 300], reps=20, n=200, seed=SEED)
    mean = {}
    for r in rows:
        mean.setdefault(r.K, {}).setdefault(r.method, []).append(r.mean_seconds)
    order = {K: np.mean(t["JAR"]) < np.mean(t["RJAR"]) for K, t in mean.items()}
    data = sim.generate(e1_null(300), SEED)
    t0 = time.perf_counter()
    S.run_test(data, 1.0, "JAR")
    single = time.perf_counter() - t0
    ok = all(order.values()) and single < 1.0
    detail = " ".join(f"K={K}: JAR {np.mean(t['JAR']) * 1e3:.2f}ms RJAR {np.mean(t['RJAR']) * 1e3:.2f}ms"
                      for K, t in mean.items())
    assert report(8, ok, f"{detail}; single JAR call {single * 1e3:.1f}ms")


def test_c09_inversion_coverage():
    dgp = sim.DGPConfig(n=200, K=100, mu2=180.0, sparsity=sim.Sparsity.sparse(100), beta=1.0)
    grid = GridSpec(-4.0, 6.0, 100)
    reps = 500
    covered = 0
    for r in range(reps):
        data = sim.generate(dgp, sim.replication_seed(SEED, r))
        covered += invert(data, grid, "JAR", ALPHA).contains(dgp.beta)
    rate = covered / reps
    assert report(9, abs(rate - 0.95) <= 0.03, f"coverage {rate:.3f} over {reps} replications")


def test_c10_determinism(tmp_path):
    outputs = []
    for threads in (1, 4, 8):
        out = tmp_path / f"sim_{threads}.csv"
        cmd = [sys.executable, "-m", "hdivtest", "simulate", "--example", "E1_1", "--reps", "25",
               "--seed", str(SEED), "--threads", str(threads), "--out", str(out)]
        subprocess.run(cmd, check=True)
        outputs.append(out.read_bytes())
    ok = outputs[0] == outputs[1] == outputs[2] and len(outputs[0]) > 0
    assert report(10, ok, f"{len(outputs[0])} bytes, identical at 1/4/8 threads: {ok}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
