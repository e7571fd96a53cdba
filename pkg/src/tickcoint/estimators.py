"""Estimators of the cointegrating parameter and of the memory parameter.

All estimators are pure functions of their inputs.  Discrete samples are
taken as ``x_1, ..., x_n`` with ``x_0 = 0`` prepended when differencing,
matching price levels that start from zero.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DegenerateInputError, InputError, ParameterError
from .market import StepPath, average_over, sample_at


def _cosine(t):
    return 0.5 * (1.0 - np.cos(2.0 * np.pi * t))


def _cosine_prime(t):
    return np.pi * np.sin(2.0 * np.pi * t)


def _sine(t):
    return np.sin(np.pi * t)


def _sine_prime(t):
    return np.pi * np.cos(np.pi * t)


TAPERS = {
    "cosine": (_cosine, _cosine_prime),
    "sine": (_sine, _sine_prime),
}


@dataclass(frozen=True)
class TaperConfig:
    """Taper ``h`` on [0, 1] with h(0) = h(1) = 0 and the number of frequencies ``m``."""

    taper: str = "cosine"
    m: int = 3

    def __post_init__(self):
        if self.taper not in TAPERS:
            raise ParameterError(f"unknown taper {self.taper!r}; choose from {sorted(TAPERS)}")
        if int(self.m) != self.m or self.m < 1:
            raise ParameterError("m must be a positive integer")

    def h(self, t):
        return TAPERS[self.taper][0](np.asarray(t, dtype=float))

    def h_prime(self, t):
        return TAPERS[self.taper][1](np.asarray(t, dtype=float))

    def h_ell(self, t, ell):
        """h_l(t) = h(t) exp(2 pi i l t); broadcasts over ``ell`` and ``t``."""
        t = np.asarray(t, dtype=float)
        return self.h(t) * np.exp(2j * np.pi * np.asarray(ell)[..., None] * t)

    def h_ell_prime(self, t, ell):
        t = np.asarray(t, dtype=float)
        ell = np.asarray(ell)[..., None]
        phase = np.exp(2j * np.pi * ell * t)
        return (self.h_prime(t) + 2j * np.pi * ell * self.h(t)) * phase

    def w_weights(self, n: int, ells=None) -> np.ndarray:
        """w_l(j, n) = n {h_l((j+1)/n) - h_l(j/n)} for j = 0..n-1; shape (len(ells), n)."""
        ells = np.arange(1, self.m + 1) if ells is None else np.atleast_1d(ells)
        grid = self.h_ell(np.arange(n + 1) / n, ells)
        return n * np.diff(grid, axis=-1)

    def omega_weights(self, n: int, ells=None) -> np.ndarray:
        """omega_l(j, n) = n {w_l(j+1, n) - w_l(j, n)} for j = 0..n-1 (w extended to j = n)."""
        ells = np.arange(1, self.m + 1) if ells is None else np.atleast_1d(ells)
        grid = self.h_ell(np.arange(n + 2) / n, ells)
        w = n * np.diff(grid, axis=-1)
        return n * np.diff(w, axis=-1)


@dataclass
class EstimateReport:
    estimator: str
    theta_hat: float
    n: int
    m: int | None = None
    delta: float | None = None
    dt: float | None = None
    denominator: float = math.nan
    flags: dict = field(default_factory=dict)

    def as_row(self) -> dict:
        return {
            "estimator": self.estimator,
            "theta_hat": self.theta_hat,
            "n": self.n,
            "m": "" if self.m is None else self.m,
            "delta": "" if self.delta is None else self.delta,
            "dt": "" if self.dt is None else self.dt,
        }


def _as_samples(x, name="x") -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise InputError(f"{name} must be one-dimensional")
    if not np.all(np.isfinite(x)):
        raise InputError(f"{name} contains non-finite values")
    return x


def _pair(y1, y2):
    y1 = _as_samples(y1, "y1")
    y2 = _as_samples(y2, "y2")
    if y1.shape != y2.shape:
        raise InputError(f"sample lengths differ: {y1.size} vs {y2.size}")
    if y1.size < 1:
        raise InputError("need at least one observation")
    return y1, y2


def ols_theta(y1, y2) -> float:
    """No-intercept regression coefficient sum(y2 y1) / sum(y2^2)."""
    y1, y2 = _pair(y1, y2)
    den = float(np.dot(y2, y2))
    if den <= 0:
        raise DegenerateInputError("regressor y2 is identically zero")
    return float(np.dot(y2, y1)) / den


def spurious_delta(y1, y2) -> float:
    """Regression of y1 on y2 when the pair is not cointegrated (same formula as OLS)."""
    return ols_theta(y1, y2)


def _check_frequencies(n: int, ells):
    if np.any(np.asarray(ells) >= n / 2):
        warnings.warn(f"frequency index reaches n/2 = {n / 2}; the taper estimator assumes l << n", stacklevel=3)


def tapered_dfts(x, cfg: TaperConfig = TaperConfig(), ells=None, method: str = "direct") -> np.ndarray:
    """Tapered DFTs of the first differences, one per frequency index in ``ells`` (default 1..m).

    ``method="direct"`` sums h_l(j/n) dx_j; ``method="parts"`` uses the
    summation-by-parts form -(1/n) sum_{j<n} w_l(j, n) x_j.
    """
    x = _as_samples(x)
    n = x.size
    if n < 2:
        raise InputError("need n >= 2 samples")
    ells = np.arange(1, cfg.m + 1) if ells is None else np.atleast_1d(ells)
    _check_frequencies(n, ells)
    if method == "direct":
        dx = np.diff(x, prepend=0.0)
        return cfg.h_ell(np.arange(1, n + 1) / n, ells) @ dx
    if method == "parts":
        levels = np.concatenate([[0.0], x[:-1]])  # x_0 .. x_{n-1}
        return -(cfg.w_weights(n, ells) @ levels) / n
    raise ParameterError(f"unknown DFT method {method!r}")


def tapered_dft(x, cfg: TaperConfig = TaperConfig(), ell: int = 1, method: str = "direct") -> complex:
    return complex(tapered_dfts(x, cfg, [ell], method)[0])


def taper_ratio(y1, y2, cfg: TaperConfig = TaperConfig()) -> tuple[complex, float]:
    """Complex ratio of averaged cross-periodogram to periodogram, and its denominator."""
    y1, y2 = _pair(y1, y2)
    if y1.size <= 2 * cfg.m:
        raise ConfigError(f"taper estimator needs n > 2m = {2 * cfg.m}, got n = {y1.size}")
    d1 = tapered_dfts(y1, cfg)
    d2 = tapered_dfts(y2, cfg)
    den = float(np.sum(np.abs(d2) ** 2))
    if den <= 0:
        raise DegenerateInputError("tapered periodogram of y2 vanishes")
    return complex(np.sum(d1 * np.conj(d2)) / den), den


def taper_theta(y1, y2, cfg: TaperConfig = TaperConfig()) -> float:
    """Real part of the tapered cross-periodogram ratio over frequencies 1..m."""
    return taper_ratio(y1, y2, cfg)[0].real


def window_averages(path: StepPath, delta: float, horizon: float | None = None) -> np.ndarray:
    """Exact window integrals over (k-1, k] delta for k = 1..floor(T / delta)."""
    horizon = path.horizon if horizon is None else horizon
    if not math.isfinite(horizon):
        raise InputError("a finite horizon is required for window averaging")
    # tolerate T / delta landing a hair below an integer
    n = int(math.floor(horizon / delta + 1e-9))
    if n < 1:
        raise ConfigError(f"horizon {horizon} holds no window of length {delta}")
    return average_over(path, delta, n)


def ctaper_theta(y1: StepPath, y2: StepPath, delta: float, cfg: TaperConfig = TaperConfig(), horizon=None) -> float:
    """Taper estimator applied to the exact window integrals of both paths."""
    if delta <= 0:
        raise ParameterError("delta must be positive")
    a1 = window_averages(y1, delta, horizon)
    a2 = window_averages(y2, delta, horizon)
    if a1.size < 2 * cfg.m + 1:
        raise ConfigError(f"only {a1.size} windows; the taper needs at least 2m + 1 = {2 * cfg.m + 1}")
    return taper_theta(a1, a2, cfg)


def sample_grid(path: StepPath, n: int, dt: float = 1.0) -> np.ndarray:
    """Samples y(j dt) for j = 1..n."""
    return sample_at(path, dt * np.arange(1, n + 1))


def estimate(
    estimator: str,
    y1: StepPath,
    y2: StepPath,
    n: int | None = None,
    cfg: TaperConfig = TaperConfig(),
    dt: float = 1.0,
    delta: float = 1.0,
) -> EstimateReport:
    """Run one named estimator on a pair of paths."""
    if estimator == "ctaper":
        horizon = y1.horizon if n is None else n * delta
        theta = ctaper_theta(y1, y2, delta, cfg, horizon)
        return EstimateReport("ctaper", theta, int(math.floor(horizon / delta + 1e-9)), cfg.m, delta, None)
    if n is None:
        n = int(math.floor(y1.horizon / dt + 1e-9))
    s1, s2 = sample_grid(y1, n, dt), sample_grid(y2, n, dt)
    if estimator in ("ols", "spurious"):
        theta = ols_theta(s1, s2)
        return EstimateReport(estimator, theta, n, None, None, dt, float(np.dot(s2, s2)))
    if estimator == "taper":
        ratio, den = taper_ratio(s1, s2, cfg)
        return EstimateReport("taper", ratio.real, n, cfg.m, None, dt, den, {"imag": ratio.imag})
    raise ParameterError(f"unknown estimator {estimator!r}")


def periodogram(x, m: int) -> np.ndarray:
    """I(omega_l) = |sum_t x_t exp(-i t omega_l)|^2 / (2 pi n) for l = 1..m."""
    x = _as_samples(x)
    n = x.size
    f = np.fft.rfft(x)[1 : m + 1]
    return np.abs(f) ** 2 / (2 * np.pi * n)


def gph_memory(x, bandwidth: int) -> float:
    """Log-periodogram (GPH) estimate of the memory parameter d.

    Regresses log I(omega_l) on -2 log|2 sin(omega_l / 2)| over l = 1..bandwidth
    and returns the slope.
    """
    x = _as_samples(x)
    n = x.size
    if bandwidth < 3:
        raise ParameterError(f"GPH needs at least 3 frequencies, got {bandwidth}")
    if bandwidth >= n / 2:
        raise ParameterError(f"bandwidth {bandwidth} must be below n/2 = {n / 2}")
    omega = 2 * np.pi * np.arange(1, bandwidth + 1) / n
    reg = -2.0 * np.log(np.abs(2.0 * np.sin(omega / 2.0)))
    with np.errstate(divide="ignore"):
        logi = np.log(periodogram(x, bandwidth))
    if not np.all(np.isfinite(logi)):
        raise DegenerateInputError("periodogram vanishes at a Fourier frequency")
    reg = reg - reg.mean()
    return float(np.dot(reg, logi - logi.mean()) / np.dot(reg, reg))
