"""Acceptance criteria, one test each; every test prints a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -s``.  Monte Carlo seeds are
pinned so each line is reproducible.
"""

import math
import time

import numpy as np
import pytest
from scipy import stats

from tickcoint.durations import AcdSpec, LmsdSpec, gen_acd, gen_lmsd
from tickcoint.estimators import (
    TaperConfig,
    ctaper_theta,
    gph_memory,
    ols_theta,
    tapered_dfts,
    taper_theta,
)
from tickcoint.fracgauss import GaussianSpec, fbm_covariance, fbm_paths, gen_fgn
from tickcoint.limitlab import (
    ExperimentConfig,
    LimitFunctional,
    ModelConstants,
    distribution_experiment,
    rate_experiment,
    weak_scale,
)
from tickcoint.market import AssetConfig, MarketConfig, StepPath, average_over, levels_fclt_statistics, sample_at, sigma_levels, simulate
from tickcoint.shocks import NoiseSpec, xi_transform

pytestmark = pytest.mark.slow

WEAK_GRID = [2**k for k in range(8, 14)]
STRONG_GRID = [2**k for k in range(8, 13)]


def weak_market(c1=1.0, c2=0.5, theta=1.5):
    a1 = AssetConfig(noise=NoiseSpec("weak", hurst=0.25, scale=c1))
    a2 = AssetConfig(noise=NoiseSpec("weak", hurst=0.25, scale=c2))
    return MarketConfig(a1, a2, theta=theta)


def leverage_market(construction, regime):
    lm = LmsdSpec(sigma=1.0, driver=GaussianSpec(hurst=0.7, c=0.2))
    a = AssetConfig(durations=lm, noise=NoiseSpec(regime, construction=construction))
    return MarketConfig(a, a, theta=1.5)


def test_c01_fbm_exactness(record_criterion):
    t0 = time.perf_counter()
    times = np.arange(257) / 256
    pairs = [(64, 64), (64, 128), (128, 256), (26, 230), (192, 256)]
    worst = 0.0
    for i, h in enumerate((0.3, 0.5, 0.7)):
        x = fbm_paths(h, times, 5000, seed=100 + i)
        for a, b in pairs:
            prod = x[:, a] * x[:, b]
            se = prod.std(ddof=1) / math.sqrt(prod.size)
            z = abs(prod.mean() - fbm_covariance(h, times[a], times[b])) / se
            worst = max(worst, z)
    elapsed = time.perf_counter() - t0
    ok = worst < 3 and elapsed < 60
    record_criterion("C1 FBM exactness", ok, f"max |z| = {worst:.2f} over 15 pairs (< 3), {elapsed:.1f}s")
    assert ok


def test_c02_duration_intensities(record_criterion):
    t0 = time.perf_counter()
    tau, _ = gen_lmsd(LmsdSpec(1.0, GaussianSpec(hurst=0.6, c=0.2)), 10**6, seed=21)
    lmsd_err = tau.mean() / math.exp(0.5) - 1
    acd_err = gen_acd(AcdSpec(0.2, 0.1, 0.7), 10**6, seed=22).mean() - 1
    elapsed = time.perf_counter() - t0
    ok = abs(lmsd_err) < 0.02 and abs(acd_err) < 0.02 and elapsed < 60
    record_criterion(
        "C2 duration intensities", ok, f"LMSD rel err {lmsd_err:+.4f}, ACD rel err {acd_err:+.4f} (< 0.02), {elapsed:.1f}s"
    )
    assert ok


def test_c03_leverage_constants(record_criterion):
    t0 = time.perf_counter()
    # unit innovations: the published correlations are those of xi_k with exp(Y_{k+1})
    tau, y = gen_lmsd(LmsdSpec(1.0, GaussianSpec(hurst=0.6, c=0.2), "unit"), 10**6 + 1, seed=31)
    sq = np.corrcoef(xi_transform("leverage-square", y[1:]), tau[1:])[0, 1]
    he = np.corrcoef(xi_transform("leverage-hermite23", y[1:]), tau[1:])[0, 1]
    elapsed = time.perf_counter() - t0
    ok = abs(sq - 0.539) <= 0.02 and abs(he - 0.082) <= 0.01 and elapsed < 60
    record_criterion("C3 leverage constants", ok, f"square {sq:.4f} (0.539 +- 0.02), Hermite {he:.4f} (0.082 +- 0.01), {elapsed:.1f}s")
    assert ok


def test_c04_levels_fclt(record_criterion):
    t0 = time.perf_counter()
    worst = {}
    for label, cfg in (("cointegrated", MarketConfig(theta=2.0)), ("spurious", MarketConfig(theta=None, theta21=2.0, theta12=0.1))):
        (s,) = levels_fclt_statistics(cfg, [10**4], 2000, seed=4)
        worst[label] = float(s.relative_error.max())
    elapsed = time.perf_counter() - t0
    ok = max(worst.values()) < 0.10 and elapsed < 300
    detail = ", ".join(f"{k} max rel err {v:.3f}" for k, v in worst.items())
    record_criterion("C4 levels FCLT", ok, f"{detail} (< 0.10), {elapsed:.1f}s")
    assert ok


def _weak_case(estimator, kind, label, record_criterion):
    t0 = time.perf_counter()
    market = weak_market()
    k = ModelConstants.from_market(market, 1.0, 0.5, 0.25)
    cfg = ExperimentConfig(label, market, estimator, rate=0.25)
    rate = rate_experiment(cfg, WEAK_GRID, 500, seed=11)
    f = LimitFunctional(kind, scale=weak_scale(k), hurst=0.25)
    dist = distribution_experiment(cfg, 2**13, 1000, f, seed=12)
    elapsed = time.perf_counter() - t0
    ok = abs(rate.slope + 0.25) <= 0.1 and dist.ks_stat < 0.08 and elapsed < 900
    detail = f"slope {rate.slope:.3f} (-0.25 +- 0.1), KS {dist.ks_stat:.4f} (< 0.08), {elapsed:.0f}s"
    record_criterion(label, ok, detail)
    assert ok


def test_c05_weak_ols(record_criterion):
    _weak_case("ols", "ratio-BBH", "C5 weak-regime OLS", record_criterion)


def test_c06_weak_taper(record_criterion):
    _weak_case("taper", "taper-weak", "C6 weak-regime taper", record_criterion)


def test_c07_strong_taper(record_criterion):
    t0 = time.perf_counter()
    market = leverage_market("leverage-square", "strong")
    h = 0.7
    slopes = {}
    for est in ("taper", "ctaper"):
        cfg = ExperimentConfig(f"c7-{est}", market, est, rate=1.5 - h)
        slopes[est] = rate_experiment(cfg, STRONG_GRID, 500, seed=5).slope
    # delta scale: same number of windows, window length delta = 1 and 2
    n = STRONG_GRID[-1]
    var = {}
    for delta in (1.0, 2.0):
        cfg = ExperimentConfig(f"c7-delta{delta:g}", market, "ctaper", rate=1.5 - h, delta=delta)
        var[delta] = np.var(distribution_experiment(cfg, n, 1000, LimitFunctional("taper-strong", hurst=h), seed=7).estimates(n))
    ratio = var[2.0] / var[1.0]
    target = 2 ** (2 * h)
    elapsed = time.perf_counter() - t0
    slope_ok = all(abs(s + 0.8) <= 0.12 for s in slopes.values())
    scale_ok = abs(ratio / target - 1) <= 0.2
    ok = slope_ok and scale_ok and elapsed < 1800
    detail = (
        f"taper slope {slopes['taper']:.3f}, ctaper slope {slopes['ctaper']:.3f} (-0.8 +- 0.12); "
        f"var ratio delta=2 vs 1 {ratio:.3f} vs 2^(2H) = {target:.3f} (within 20%), {elapsed:.0f}s"
    )
    record_criterion("C7 strong-regime taper", ok, detail)
    assert ok


def test_c08_standard_op1(record_criterion):
    t0 = time.perf_counter()
    cfg = ExperimentConfig("c8", leverage_market("leverage-hermite23", "standard"), "taper", rate=1.0)
    report = rate_experiment(cfg, [2**9, 2**11, 2**13], 500, seed=8, min_points=3)
    iqr = report.extra["iqr"]
    factor = float(iqr.max() / iqr.min())
    elapsed = time.perf_counter() - t0
    ok = factor <= 2.0 and elapsed < 900
    record_criterion("C8 standard O_P(1)", ok, f"IQR of n(theta_hat - theta) {np.round(iqr, 1).tolist()}, max/min {factor:.2f} (<= 2), {elapsed:.0f}s")
    assert ok


def test_c09_spurious(record_criterion):
    t0 = time.perf_counter()
    market = MarketConfig(theta=None, theta21=2.0, theta12=0.1)
    cfg = ExperimentConfig("c9", market, "spurious", rate=0.0)
    f = LimitFunctional("spurious", sigma=tuple(map(tuple, sigma_levels(market))))
    small = distribution_experiment(cfg, 2**11, 1000, f, seed=91)
    large = distribution_experiment(cfg, 2**13, 1000, f, seed=92)
    between = stats.ks_2samp(small.estimates(2**11), large.estimates(2**13)).pvalue
    elapsed = time.perf_counter() - t0
    ok = between > 0.01 and large.ks_stat < 0.1 and elapsed < 600
    record_criterion(
        "C9 spurious regression", ok, f"KS p between n {between:.3f} (> 0.01), KS vs functional {large.ks_stat:.4f} (< 0.1), {elapsed:.0f}s"
    )
    assert ok


def test_c10_exact_identities(record_criterion):
    rng = np.random.default_rng(10)
    checks = {}
    timings = []

    t0 = time.perf_counter()
    x = np.cumsum(rng.standard_normal(4096))
    worst = 0.0
    for taper in ("cosine", "sine"):
        cfg = TaperConfig(taper, 5)
        d, p = tapered_dfts(x, cfg), tapered_dfts(x, cfg, method="parts")
        worst = max(worst, float(np.max(np.abs(d - p) / np.abs(d))))
    checks["DFT by parts rel err"] = (worst, worst < 1e-10)
    timings.append(time.perf_counter() - t0)

    t0 = time.perf_counter()
    lm = LmsdSpec(1.0, GaussianSpec(hurst=0.7, c=0.2))
    market = MarketConfig(
        AssetConfig(durations=lm, noise=NoiseSpec("strong", construction="leverage-square")),
        AssetConfig(noise=NoiseSpec("weak")),
        theta=1.5,
        horizon=500.0,
    )
    sim = simulate(market, 1)
    grid = np.arange(0.0, 500.0, 0.1)
    dec = sim.decomposition(grid)
    resid = float(np.max(np.abs(dec.total - (sample_at(sim.y1, grid) - 1.5 * sample_at(sim.y2, grid)))))
    checks["decomposition abs err"] = (resid, resid < 1e-9)
    timings.append(time.perf_counter() - t0)

    t0 = time.perf_counter()
    t = np.sort(rng.uniform(0, 200, 300))
    v2 = np.cumsum(rng.standard_normal(300))
    p2 = StepPath(t, v2, 0.0, 200.0)
    p1 = StepPath(t, 0.8 * v2, 0.0, 200.0)
    s1, s2 = sample_at(p1, np.arange(1.0, 201.0)), sample_at(p2, np.arange(1.0, 201.0))
    fits = [ols_theta(s1, s2), taper_theta(s1, s2), ctaper_theta(p1, p2, 1.0)]
    err = max(abs(f - 0.8) for f in fits)
    checks["exact-fit err"] = (err, err < 1e-12)
    timings.append(time.perf_counter() - t0)

    t0 = time.perf_counter()
    h = 2.0**-10
    jumps = np.sort(rng.choice(np.arange(1, 64 * 1024), 2000, replace=False)) * h
    path = StepPath(jumps, rng.standard_normal(2000), 0.3, 64.0)
    fine = sample_at(path, np.arange(64 * 1024) * h).reshape(64, -1).sum(axis=1) * h
    aerr = float(np.max(np.abs(average_over(path, 1.0, 64) - fine)))
    checks["averaging abs err"] = (aerr, aerr < 1e-9)
    timings.append(time.perf_counter() - t0)

    t0 = time.perf_counter()
    a, b = simulate(market, 99), simulate(market, 99)
    same = all(np.array_equal(getattr(a, p).times, getattr(b, p).times) and np.array_equal(getattr(a, p).values, getattr(b, p).values) for p in ("y1", "y2"))
    checks["seed determinism"] = (0.0 if same else 1.0, same)
    timings.append(time.perf_counter() - t0)

    ok = all(v[1] for v in checks.values()) and max(timings) < 1.0
    detail = ", ".join(f"{k} {v[0]:.1e}" for k, v in checks.items()) + f"; slowest {max(timings):.2f}s"
    record_criterion("C10 exact identities", ok, detail)
    assert ok


def test_c11_gph(record_criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(111)
    white = np.mean([gph_memory(rng.standard_normal(4096), 64) for _ in range(500)])
    fgn = gen_fgn(0.75, 4096, seed=112, count=500)
    lm = np.mean([gph_memory(row, 64) for row in fgn])
    elapsed = time.perf_counter() - t0
    ok = abs(white) <= 0.05 and abs(lm - 0.25) <= 0.07 and elapsed < 120
    record_criterion("C11 GPH sanity", ok, f"white d {white:+.4f} (0 +- 0.05), fGn H=0.75 d {lm:.4f} (0.25 +- 0.07), {elapsed:.1f}s")
    assert ok
