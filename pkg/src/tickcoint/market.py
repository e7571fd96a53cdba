"""Bivariate pure-jump log-price paths driven by two event clocks."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from . import durations as dur
from .clock import DeformationSpec, EventClock, deform_clock
from .errors import ConfigError, InputError
from .shocks import EfficientSpec, NoiseSpec, coint_error_decomposition, gen_efficient, gen_noise


def rng_streams(seed, k: int) -> list[np.random.Generator]:
    """``k`` independent generators derived from ``seed`` (int, SeedSequence or Generator)."""
    if isinstance(seed, np.random.Generator):
        return seed.spawn(k)
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return [np.random.default_rng(child) for child in ss.spawn(k)]


@dataclass(frozen=True)
class AssetConfig:
    durations: object = field(default_factory=dur.IidSpec)
    deformation: DeformationSpec | None = None
    efficient: EfficientSpec = field(default_factory=EfficientSpec)
    noise: NoiseSpec = field(default_factory=NoiseSpec)

    def __post_init__(self):
        if self.noise.needs_driver and not isinstance(self.durations, dur.LmsdSpec):
            raise ConfigError(f"noise construction {self.noise.construction!r} requires LMSD durations")

    @property
    def intensity(self) -> float:
        gamma = 1.0 if self.deformation is None else self.deformation.gamma
        return self.durations.intensity * gamma


@dataclass(frozen=True)
class MarketConfig:
    """Spillover weights (theta21, theta12); cointegrated when theta12 = 1 / theta21.

    Pass ``theta`` for the cointegrated model, or both ``theta21`` and
    ``theta12`` for the general (possibly spurious) one.
    """

    asset1: AssetConfig = field(default_factory=AssetConfig)
    asset2: AssetConfig = field(default_factory=AssetConfig)
    theta: float | None = 1.0
    theta21: float | None = None
    theta12: float | None = None
    horizon: float = 1000.0

    def __post_init__(self):
        if self.theta21 is None and self.theta12 is None:
            if self.theta is None or self.theta == 0:
                raise ConfigError("cointegrating parameter theta must be nonzero")
        elif self.theta21 is None or self.theta12 is None:
            raise ConfigError("spurious mode needs both theta21 and theta12")
        if self.horizon <= 0:
            raise ConfigError("horizon must be positive")

    @property
    def weights(self) -> tuple[float, float]:
        if self.theta21 is None:
            return float(self.theta), 1.0 / float(self.theta)
        return float(self.theta21), float(self.theta12)

    @property
    def cointegrated(self) -> bool:
        t21, t12 = self.weights
        return math.isclose(t12 * t21, 1.0, rel_tol=1e-12)

    def with_horizon(self, horizon: float) -> "MarketConfig":
        return replace(self, horizon=float(horizon))


@dataclass(frozen=True)
class StepPath:
    """Right-continuous step function: ``initial`` before ``times[0]``, ``values[i]`` from ``times[i]``."""

    times: np.ndarray
    values: np.ndarray
    initial: float = 0.0
    horizon: float = math.inf

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.shape != v.shape or t.ndim != 1:
            raise InputError("step path times and values must be matching 1-d arrays")
        if np.any(np.diff(t) < 0):
            raise InputError("step path jump times must be nondecreasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    def __call__(self, t):
        return sample_at(self, t)


def sample_at(path: StepPath, times) -> np.ndarray:
    """Right-continuous evaluation y(t)."""
    idx = np.searchsorted(path.times, np.asarray(times, dtype=float), side="right")
    padded = np.concatenate([[path.initial], path.values])
    return padded[idx]


def average_over(path: StepPath, delta: float, n: int, start: float = 0.0) -> np.ndarray:
    """Integrals of the path over the windows (start + (k-1) delta, start + k delta], k = 1..n.

    Each window is summed as segment value times overlap length, so the only
    error is floating-point rounding.
    """
    if delta <= 0 or n < 1:
        raise InputError("need delta > 0 and n >= 1")
    end = start + n * delta
    if end > path.horizon * (1 + 1e-12):
        raise InputError(f"n * delta = {n * delta} exceeds the path horizon {path.horizon}")
    edges = start + delta * np.arange(n + 1)
    inner = path.times[(path.times > start) & (path.times < end)]
    points = np.concatenate([edges, inner])
    window = np.concatenate([np.arange(n + 1), np.searchsorted(edges, inner, side="right") - 1])
    order = np.lexsort((points, window))  # sort by window, then by time
    points, window = points[order], window[order]
    # each window's pieces run from its left edge to the next point
    pieces = np.diff(points)
    owner = window[:-1]
    keep = owner < n
    vals = sample_at(path, points[:-1][keep])
    return np.bincount(owner[keep], weights=vals * pieces[keep], minlength=n)[:n]


@dataclass
class AssetRealisation:
    clock: EventClock
    durations: np.ndarray
    driver: np.ndarray | None
    efficient: np.ndarray
    eta: np.ndarray
    xi: np.ndarray


@dataclass
class Simulation:
    y1: StepPath
    y2: StepPath
    asset1: AssetRealisation
    asset2: AssetRealisation
    config: MarketConfig

    def decomposition(self, times):
        """Cointegrating-error decomposition at ``times`` (checked against the paths)."""
        theta = self.config.weights[0]
        return coint_error_decomposition(
            self.asset1.clock,
            self.asset2.clock,
            self.asset1.efficient,
            self.asset2.efficient,
            self.asset1.xi,
            self.asset2.xi,
            theta,
            times,
            y1=sample_at(self.y1, times),
            y2=sample_at(self.y2, times),
        )


def _event_budget(asset: AssetConfig, base_horizon: float) -> int:
    mean = asset.durations.intensity * base_horizon
    return int(1.1 * mean + 10.0 * math.sqrt(mean + 1.0) + 32)


def _realise_asset(asset: AssetConfig, horizon: float, rngs) -> AssetRealisation:
    r_dur, r_eff, r_noise = rngs
    base_horizon = horizon if asset.deformation is None else float(asset.deformation(horizon))
    count = _event_budget(asset, base_horizon)
    while True:
        extra = 1 if isinstance(asset.durations, dur.LmsdSpec) else 0
        tau, driver = dur.generate(asset.durations, count + extra, r_dur)
        tau = tau[:count]
        if tau.sum() > base_horizon:
            break
        count *= 2
    base = EventClock(np.cumsum(tau), base_horizon)
    clock = base if asset.deformation is None else deform_clock(base, asset.deformation)
    clock = EventClock(clock.times, horizon)
    efficient = gen_efficient(asset.efficient, count, r_eff)
    xi, eta = gen_noise(asset.noise, driver, count, r_noise)
    return AssetRealisation(clock, tau, driver, efficient, eta, xi)


def _one_path(clock_own, clock_other, e_own, eta_own, e_other, weight, horizon) -> StepPath:
    n = clock_own.count(horizon)
    t = clock_own.times[:n]
    level = np.cumsum(np.asarray(e_own[:n], dtype=float) + np.asarray(eta_own[:n], dtype=float))
    # N_other(t_own,k): asset-2 events at or before each asset-1 event
    cross_count = clock_other.count(t)
    other_sums = np.concatenate([[0.0], np.cumsum(np.asarray(e_other, dtype=float))])
    return StepPath(t, level + weight * other_sums[cross_count], 0.0, horizon)


def assemble_paths(clock1, clock2, e1, e2, eta1, eta2, weights, horizon: float) -> tuple[StepPath, StepPath]:
    """Both price paths from given clocks and shocks.

    y1 jumps only at asset-1 events: its own shocks so far plus ``weights[0]``
    times the asset-2 efficient shocks seen up to that event; y2 symmetrically
    with ``weights[1]``.  Shock arrays must cover every event up to ``horizon``.
    """
    t21, t12 = weights
    for clock, e, eta in ((clock1, e1, eta1), (clock2, e2, eta2)):
        need = clock.count(horizon)
        if len(e) < need or len(eta) < need:
            raise InputError(f"shock arrays cover {min(len(e), len(eta))} events, need {need}")
    y1 = _one_path(clock1, clock2, e1, eta1, e2, t21, horizon)
    y2 = _one_path(clock2, clock1, e2, eta2, e1, t12, horizon)
    return y1, y2


def simulate(config: MarketConfig, seed=None, horizon: float | None = None) -> Simulation:
    """Exact simulation of both log-price paths up to the horizon."""
    horizon = float(config.horizon if horizon is None else horizon)
    streams = rng_streams(seed, 6)
    a1 = _realise_asset(config.asset1, horizon, streams[0:3])
    a2 = _realise_asset(config.asset2, horizon, streams[3:6])
    y1, y2 = assemble_paths(a1.clock, a2.clock, a1.efficient, a2.efficient, a1.eta, a2.eta, config.weights, horizon)
    if y1.times.size == 0 and y2.times.size == 0:
        warnings.warn("horizon contains no events; both paths are identically zero", stacklevel=2)
    return Simulation(y1, y2, a1, a2, replace(config, horizon=horizon))


def sigma_levels(config: MarketConfig) -> np.ndarray:
    """Covariance matrix of the Brownian limit of n^{-1/2} y(n .)."""
    t21, t12 = config.weights
    v1 = config.asset1.intensity * config.asset1.efficient.variance
    v2 = config.asset2.intensity * config.asset2.efficient.variance
    return np.array(
        [
            [v1 + t21**2 * v2, t12 * v1 + t21 * v2],
            [t12 * v1 + t21 * v2, t12**2 * v1 + v2],
        ]
    )


@dataclass
class LevelsStatistics:
    n: int
    empirical: np.ndarray
    theoretical: np.ndarray
    reps: int

    @property
    def relative_error(self) -> np.ndarray:
        return np.abs(self.empirical - self.theoretical) / np.abs(self.theoretical)


def levels_fclt_statistics(config: MarketConfig, n_grid, reps: int, seed=None) -> list[LevelsStatistics]:
    """Empirical covariance of n^{-1/2} (y1(n), y2(n)) over replications, per n."""
    if reps < 500:
        raise ConfigError("levels statistics need at least 500 replications")
    theory = sigma_levels(config)
    out = []
    root = np.random.SeedSequence(seed) if not isinstance(seed, np.random.SeedSequence) else seed
    for n, child in zip(n_grid, root.spawn(len(n_grid))):
        draws = np.empty((reps, 2))
        for r, rep_seed in enumerate(child.spawn(reps)):
            sim = simulate(config, rep_seed, horizon=float(n))
            draws[r] = sample_at(sim.y1, n), sample_at(sim.y2, n)
        draws /= math.sqrt(n)
        out.append(LevelsStatistics(int(n), np.cov(draws, rowvar=False), theory, reps))
    return out
