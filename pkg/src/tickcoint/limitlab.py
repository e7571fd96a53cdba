"""Reference samplers for the limit laws and the Monte Carlo experiment engine."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import ConfigError, ExperimentError, ParameterError, TickCointError
from .estimators import TaperConfig, estimate
from .fracgauss import fbm_paths
from .market import MarketConfig, levels_fclt_statistics, sigma_levels, simulate

FUNCTIONAL_KINDS = ("ratio-BBH", "ratio-BdBH", "taper-weak", "taper-strong", "spurious", "levels")
ESTIMATORS = ("ols", "taper", "ctaper", "spurious", "planted")
MIN_GRID = 2**12
CHUNK = 256


# ---------------------------------------------------------------- scale constants


@dataclass(frozen=True)
class ModelConstants:
    """Parameters entering the limit-law scale constants.

    ``c1``, ``c2`` are the noise constants of each asset; in the weak regime
    they are per-event constants (calendar-time factor lambda^H applied here),
    in the strong and standard regimes they are already in calendar time.
    """

    lam1: float = 1.0
    lam2: float = 1.0
    sigma1: float = 1.0  # efficient-shock standard deviations
    sigma2: float = 1.0
    c1: float = 1.0
    c2: float = 1.0
    theta: float = 1.0
    hurst: float = 0.25

    @classmethod
    def from_market(cls, config: MarketConfig, c1: float, c2: float, hurst: float) -> "ModelConstants":
        return cls(
            lam1=config.asset1.intensity,
            lam2=config.asset2.intensity,
            sigma1=math.sqrt(config.asset1.efficient.variance),
            sigma2=math.sqrt(config.asset2.efficient.variance),
            c1=c1,
            c2=c2,
            theta=config.weights[0],
            hurst=hurst,
        )

    def efficient_variance(self, printed_extra_lambda: bool = False) -> float:
        """theta^{-2} lambda1 sigma1^2 + lambda2 sigma2^2, the long-run variance of y2.

        ``printed_extra_lambda`` multiplies the first term by lambda1 once more,
        reproducing a variant seen in one display of the weak taper limit.
        """
        first = self.lam1 * self.sigma1**2 / self.theta**2
        if printed_extra_lambda:
            first *= self.lam1
        return first + self.lam2 * self.sigma2**2


def weak_scale(k: ModelConstants, theta_on_c2: bool = True, printed_extra_lambda: bool = False) -> float:
    """Sigma_1 of the weak-regime OLS and taper limits.

    The numerator is c1^2 lambda1^{2H} + theta^2 c2^2 lambda2^{2H}; with
    ``theta_on_c2=False`` the theta^2 factor is dropped.
    """
    h2 = 2 * k.hurst
    w = k.theta**2 if theta_on_c2 else 1.0
    num = k.c1**2 * k.lam1**h2 + w * k.c2**2 * k.lam2**h2
    return math.sqrt(num / k.efficient_variance(printed_extra_lambda))


def strong_scale(k: ModelConstants) -> float:
    """Scale of the strong-regime OLS and discrete taper limits."""
    return math.sqrt((k.c1**2 + k.theta**2 * k.c2**2) / k.efficient_variance())


def continuous_taper_scale(k: ModelConstants, delta: float, convention: str = "stated") -> float:
    """Scale of the continuous-averaged taper limit at window length ``delta``.

    ``stated`` multiplies the discrete constant by delta^H.  ``integral`` is the
    factor obtained when the window integrals themselves are tapered, delta^{H - 3/2}.
    """
    if convention == "stated":
        factor = delta**k.hurst
    elif convention == "integral":
        factor = delta ** (k.hurst - 1.5)
    else:
        raise ParameterError(f"unknown convention {convention!r}")
    return factor * strong_scale(k)


# ---------------------------------------------------------------- functionals


@dataclass(frozen=True)
class LimitFunctional:
    """A limit law, up to the multiplicative ``scale``.

    ``spurious`` and ``levels`` use the covariance matrix ``sigma`` of the
    bivariate Brownian limit instead of ``scale``.  For ``spurious`` the
    default denominator is the regressor's integrated square;
    ``denominator="regressand"`` uses the other component.
    """

    kind: str
    scale: float = 1.0
    hurst: float = 0.5
    taper: TaperConfig = field(default_factory=TaperConfig)
    sigma: tuple | None = None
    denominator: str = "regressor"

    def __post_init__(self):
        if self.kind not in FUNCTIONAL_KINDS:
            raise ParameterError(f"unknown functional {self.kind!r}")
        if not 0.0 < self.hurst < 1.0:
            raise ParameterError("hurst must lie in (0, 1)")
        if self.kind in ("spurious", "levels"):
            if self.sigma is None:
                raise ParameterError(f"{self.kind} functional needs the covariance matrix sigma")
            sig = np.asarray(self.sigma, dtype=float)
            if sig.shape != (2, 2) or not np.allclose(sig, sig.T):
                raise ParameterError("sigma must be a symmetric 2x2 matrix")
            object.__setattr__(self, "sigma", tuple(map(tuple, sig)))
        if self.denominator not in ("regressor", "regressand"):
            raise ParameterError(f"unknown denominator {self.denominator!r}")


def _psd_factor(sigma) -> np.ndarray:
    """A matrix L with L L^T = sigma; tolerates the singular cointegrated case."""
    vals, vecs = np.linalg.eigh(np.asarray(sigma, dtype=float))
    if vals.min() < -1e-9 * max(vals.max(), 1.0):
        raise ParameterError("sigma must be nonnegative definite")
    return vecs * np.sqrt(np.clip(vals, 0.0, None))


def _brownian(rng, count, grid):
    inc = rng.standard_normal((count, grid)) / math.sqrt(grid)
    path = np.zeros((count, grid + 1))
    np.cumsum(inc, axis=1, out=path[:, 1:])
    return path, inc


def _chunk_samples(f: LimitFunctional, grid: int, count: int, rng) -> np.ndarray:
    t = np.arange(grid + 1) / grid
    kind = f.kind
    if kind == "levels":
        return rng.standard_normal((count, 2)) @ _psd_factor(f.sigma).T
    if kind == "spurious":
        fac = _psd_factor(f.sigma)
        w1, _ = _brownian(rng, count, grid)
        w2, _ = _brownian(rng, count, grid)
        b1 = fac[0, 0] * w1 + fac[0, 1] * w2
        b2 = fac[1, 0] * w1 + fac[1, 1] * w2
        den = b2 if f.denominator == "regressor" else b1
        return np.mean(b1[:, 1:] * b2[:, 1:], axis=1) / np.mean(den[:, 1:] ** 2, axis=1)
    b, db = _brownian(rng, count, grid)
    bh = fbm_paths(f.hurst, t, count, rng)
    dbh = np.diff(bh, axis=1)
    if kind == "ratio-BBH":
        val = np.mean(b[:, 1:] * bh[:, 1:], axis=1) / np.mean(b[:, 1:] ** 2, axis=1)
    elif kind == "ratio-BdBH":
        # int B dB_H = B(1) B_H(1) - int B_H dB
        stoch = b[:, -1] * bh[:, -1] - np.sum(bh[:, :-1] * db, axis=1)
        val = stoch / np.mean(b[:, 1:] ** 2, axis=1)
    else:
        ells = np.arange(1, f.taper.m + 1)
        hl = f.taper.h_ell(t[1:], ells)  # (m, grid)
        zb = db @ hl.T  # (count, m)
        if kind == "taper-weak":
            zh = dbh @ hl.T
        else:
            zh = dbh @ f.taper.h_ell_prime(t[1:], ells).T
        val = np.sum((zh * np.conj(zb)).real, axis=1) / np.sum(np.abs(zb) ** 2, axis=1)
    return val


def sample_functional(f: LimitFunctional, grid: int = MIN_GRID, count: int = 10_000, seed=None) -> np.ndarray:
    """iid draws of the (scaled) limit law, using Riemann-Stieltjes sums on ``grid`` steps."""
    if grid < MIN_GRID and f.kind != "levels":
        raise ParameterError(f"grid must be at least {MIN_GRID}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    parts = []
    done = 0
    while done < count:
        k = min(CHUNK, count - done)
        parts.append(_chunk_samples(f, grid, k, rng))
        done += k
    out = np.concatenate(parts)
    if f.kind in ("spurious", "levels"):
        return out
    return f.scale * out


# ---------------------------------------------------------------- experiments


@dataclass(frozen=True)
class ExperimentConfig:
    """One Monte Carlo design.

    ``rate`` is the exponent a in the scaled error n^a (estimate - theta).
    For the ``planted`` estimator no market is simulated: the estimate is
    ``theta + n^{-planted_rate} Z`` with Z standard normal, or Z drawn from
    ``planted_functional`` when given.
    """

    name: str
    market: MarketConfig | None = None
    estimator: str = "ols"
    rate: float = 0.25
    taper: TaperConfig = field(default_factory=TaperConfig)
    dt: float = 1.0
    delta: float = 1.0
    planted_rate: float = 0.25
    planted_functional: LimitFunctional | None = None

    def __post_init__(self):
        if self.estimator not in ESTIMATORS:
            raise ConfigError(f"unknown estimator {self.estimator!r}")
        if self.estimator != "planted" and self.market is None:
            raise ConfigError("a market configuration is required")
        if self.dt <= 0 or self.delta <= 0:
            raise ConfigError("dt and delta must be positive")

    @property
    def theta(self) -> float:
        return 0.0 if self.market is None else self.market.weights[0]

    @property
    def centred(self) -> bool:
        return self.estimator != "spurious"


def replication_seed(master: int, n: int, rep: int) -> int:
    """Counter-derived 63-bit seed of one replication."""
    state = np.random.SeedSequence([int(master), int(n), int(rep)]).generate_state(2, np.uint32)
    return int(state[0]) << 31 | int(state[1]) >> 1


def _run_one(cfg: ExperimentConfig, n: int, seed: int) -> float:
    if cfg.estimator == "planted":
        rng = np.random.default_rng(seed)
        if cfg.planted_functional is None:
            z = rng.standard_normal()
        else:
            z = sample_functional(cfg.planted_functional, count=1, seed=rng)[0]
        return cfg.theta + n ** (-cfg.planted_rate) * z
    step = cfg.delta if cfg.estimator == "ctaper" else cfg.dt
    sim = simulate(cfg.market, seed, horizon=n * step)
    return estimate(cfg.estimator, sim.y1, sim.y2, n, cfg.taper, cfg.dt, cfg.delta).theta_hat


def _run_block(args):
    cfg, tasks = args
    out = []
    for n, seed in tasks:
        try:
            with np.errstate(all="raise"):
                out.append(_run_one(cfg, n, seed))
        except (TickCointError, FloatingPointError, np.linalg.LinAlgError):
            out.append(math.nan)
    return out


def resolve_workers(workers: int | None) -> int:
    if workers is None:
        workers = int(os.environ.get("TICKCOINT_WORKERS", "1") or 1)
    if workers < 1:
        raise ConfigError("workers must be at least 1")
    return workers


def run_replications(cfg: ExperimentConfig, tasks, workers: int | None = None) -> np.ndarray:
    """Estimates for (n, seed) tasks, in task order regardless of the worker count."""
    tasks = list(tasks)
    workers = resolve_workers(workers)
    if workers == 1 or len(tasks) < 2:
        return np.asarray(_run_block((cfg, tasks)), dtype=float)
    size = max(1, math.ceil(len(tasks) / (4 * workers)))
    blocks = [(cfg, tasks[i : i + size]) for i in range(0, len(tasks), size)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(_run_block, blocks))
    return np.asarray([x for block in results for x in block], dtype=float)


@dataclass
class MCReport:
    """Replication table plus per-n summary of one experiment."""

    experiment: str
    n_grid: list
    rows: list  # dicts: experiment, n, rep, seed, estimate, scaled_error
    summary: list  # dicts: experiment, n, rmse, ks_stat, ks_p, slope, slope_se
    slope: float = math.nan
    slope_se: float = math.nan
    intercept: float = math.nan
    iqr_ratio: float = math.nan
    ks_stat: float = math.nan
    ks_p: float = math.nan
    reference: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def scaled_errors(self, n: int) -> np.ndarray:
        return np.asarray([r["scaled_error"] for r in self.rows if r["n"] == n], dtype=float)

    def estimates(self, n: int) -> np.ndarray:
        return np.asarray([r["estimate"] for r in self.rows if r["n"] == n], dtype=float)

    def write_csv(self, replication_path, summary_path=None):
        from .io import REPLICATION_FIELDS, SUMMARY_FIELDS, write_csv

        write_csv(replication_path, REPLICATION_FIELDS, self.rows)
        if summary_path is not None:
            write_csv(summary_path, SUMMARY_FIELDS, self.summary)


def _collect(cfg: ExperimentConfig, n_grid, reps: int, seed: int, workers) -> tuple[list, dict]:
    # planted replications reuse one draw per rep across n (common random numbers)
    key = (lambda n: 0) if cfg.estimator == "planted" else (lambda n: n)
    tasks = [(int(n), replication_seed(seed, key(n), r)) for n in n_grid for r in range(reps)]
    est = run_replications(cfg, tasks, workers)
    failed = int(np.isnan(est).sum())
    if failed > 0.01 * len(tasks):
        raise ExperimentError(f"{failed} of {len(tasks)} replications failed (more than 1%)")
    rows = []
    for (n, s), value in zip(tasks, est):
        rep = len(rows) % reps
        err = value - cfg.theta if cfg.centred else value
        rows.append(
            {
                "experiment": cfg.name,
                "n": n,
                "rep": rep,
                "seed": s,
                "estimate": float(value),
                "scaled_error": float(n**cfg.rate * err),
            }
        )
    by_n = {}
    for row in rows:
        err = row["estimate"] - cfg.theta if cfg.centred else row["estimate"]
        by_n.setdefault(row["n"], []).append(err)
    return rows, {n: np.asarray(v) for n, v in by_n.items()}


def _iqr(x):
    q75, q25 = np.nanpercentile(x, [75, 25])
    return q75 - q25


def rate_experiment(
    cfg: ExperimentConfig, n_grid, reps: int, seed: int = 0, workers: int | None = None, min_points: int = 5
) -> MCReport:
    """Fit the slope of log RMSE(estimate - theta) against log n.

    Also reports the ratio of the largest to the smallest IQR of the scaled
    errors across the grid, the surrogate used for O_P(1) claims.
    """
    n_grid = [int(n) for n in n_grid]
    if len(n_grid) < min_points:
        raise ConfigError(f"rate experiments need at least {min_points} grid points")
    if reps < 500:
        raise ConfigError("rate experiments need at least 500 replications per n")
    rows, errs = _collect(cfg, n_grid, reps, seed, workers)
    rmse = np.array([math.sqrt(np.nanmean(errs[n] ** 2)) for n in n_grid])
    fit = stats.linregress(np.log(n_grid), np.log(rmse))
    iqrs = np.array([_iqr(n**cfg.rate * errs[n]) for n in n_grid])
    summary = [
        {
            "experiment": cfg.name,
            "n": n,
            "rmse": float(r),
            "ks_stat": "",
            "ks_p": "",
            "slope": float(fit.slope),
            "slope_se": float(fit.stderr),
        }
        for n, r in zip(n_grid, rmse)
    ]
    return MCReport(
        experiment=cfg.name,
        n_grid=n_grid,
        rows=rows,
        summary=summary,
        slope=float(fit.slope),
        slope_se=float(fit.stderr),
        intercept=float(fit.intercept),
        iqr_ratio=float(iqrs.max() / iqrs.min()),
        extra={"rmse": rmse, "iqr": iqrs},
    )


def distribution_experiment(
    cfg: ExperimentConfig,
    n: int,
    reps: int,
    functional: LimitFunctional,
    seed: int = 0,
    reference_count: int = 10_000,
    grid: int = MIN_GRID,
    workers: int | None = None,
) -> MCReport:
    """Two-sample KS test of the scaled errors at ``n`` against reference draws of ``functional``."""
    if reps < 1000:
        raise ConfigError("distribution experiments need at least 1000 replications")
    if reference_count < 10_000:
        raise ConfigError("the reference sample needs at least 10^4 draws")
    rows, errs = _collect(cfg, [int(n)], reps, seed, workers)
    scaled = np.asarray([r["scaled_error"] for r in rows])
    ref_seed = np.random.SeedSequence([int(seed), int(n), 2**31 - 1])
    ref = sample_functional(functional, grid, reference_count, np.random.default_rng(ref_seed))
    ks = stats.ks_2samp(scaled[np.isfinite(scaled)], ref)
    rmse = math.sqrt(np.nanmean(errs[int(n)] ** 2))
    summary = [
        {
            "experiment": cfg.name,
            "n": int(n),
            "rmse": rmse,
            "ks_stat": float(ks.statistic),
            "ks_p": float(ks.pvalue),
            "slope": "",
            "slope_se": "",
        }
    ]
    return MCReport(
        experiment=cfg.name,
        n_grid=[int(n)],
        rows=rows,
        summary=summary,
        ks_stat=float(ks.statistic),
        ks_p=float(ks.pvalue),
        reference={"kind": functional.kind, "grid": grid, "count": reference_count},
        extra={"reference": ref},
    )


def levels_experiment(config: MarketConfig, n_grid, reps: int, seed: int = 0) -> MCReport:
    """Empirical versus closed-form covariance of the scaled levels, per n."""
    stats_ = levels_fclt_statistics(config, [int(n) for n in n_grid], reps, seed)
    summary = []
    for s in stats_:
        summary.append(
            {
                "n": s.n,
                "empirical": s.empirical,
                "theoretical": s.theoretical,
                "max_relative_error": float(s.relative_error.max()),
            }
        )
    return MCReport(
        experiment="levels",
        n_grid=[s.n for s in stats_],
        rows=[],
        summary=summary,
        extra={"statistics": stats_, "sigma": sigma_levels(config)},
    )
