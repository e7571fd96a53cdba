"""Efficient and microstructure shock sequences, including leverage couplings."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ConsistencyError, ParameterError
from .fracgauss import GaussianSpec, _rng, gen_fgn, gen_long_memory_gaussian, hermite, white_noise_spec

EFFICIENT_LAWS = ("gaussian", "two-point", "uniform")
REGIMES = ("none", "weak", "strong", "standard")
XI_CONSTRUCTIONS = ("independent-long-memory", "leverage-square", "leverage-hermite23", "martingale-product")
LEVERAGE_CONSTRUCTIONS = ("leverage-square", "leverage-hermite23", "martingale-product")


@dataclass(frozen=True)
class EfficientSpec:
    variance: float = 1.0
    law: str = "gaussian"

    def __post_init__(self):
        if self.variance <= 0:
            raise ParameterError("efficient shock variance must be positive")
        if self.law not in EFFICIENT_LAWS:
            raise ParameterError(f"unknown efficient shock law {self.law!r}")


def gen_efficient(spec: EfficientSpec, n: int, seed=None) -> np.ndarray:
    rng = _rng(seed)
    sd = math.sqrt(spec.variance)
    if spec.law == "gaussian":
        return sd * rng.standard_normal(n)
    if spec.law == "two-point":
        return sd * (2.0 * rng.integers(0, 2, n) - 1.0)
    return sd * math.sqrt(3.0) * rng.uniform(-1.0, 1.0, n)


@dataclass(frozen=True)
class NoiseSpec:
    """Microstructure noise.

    ``weak``: eta = scale * fGn(hurst), hurst in (0, 1/2).
    ``strong`` / ``standard``: eta_k = xi_k - xi_{k-1} with xi_0 = 0 and xi built by
    ``construction``; ``scale`` multiplies xi.  ``driver`` is the Gaussian spec for
    the independent long-memory construction.
    """

    regime: str = "none"
    hurst: float = 0.25
    scale: float = 1.0
    construction: str = "independent-long-memory"
    driver: GaussianSpec | None = None
    sigma: float = 1.0  # duration log-scale, used by martingale-product

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ParameterError(f"unknown noise regime {self.regime!r}")
        if self.scale < 0:
            raise ParameterError("noise scale must be nonnegative")
        if self.regime == "weak" and not 0.0 < self.hurst < 0.5:
            raise ParameterError(f"weak regime needs hurst in (0, 1/2), got {self.hurst}")
        if self.regime in ("strong", "standard") and self.construction not in XI_CONSTRUCTIONS:
            raise ParameterError(f"unknown xi construction {self.construction!r}")
        if (
            self.regime == "strong"
            and self.construction == "independent-long-memory"
            and self.driver is None
            and not 0.5 < self.hurst < 1.0
        ):
            raise ParameterError(f"strong regime needs hurst in (1/2, 1), got {self.hurst}")

    @property
    def needs_driver(self) -> bool:
        return self.regime in ("strong", "standard") and self.construction in LEVERAGE_CONSTRUCTIONS


def gen_weak_noise(spec: NoiseSpec, n: int, seed=None) -> np.ndarray:
    if spec.regime != "weak":
        raise ParameterError("gen_weak_noise needs the weak regime")
    if spec.scale == 0:
        return np.zeros(n)
    return spec.scale * gen_fgn(spec.hurst, n, seed)


def xi_transform(construction: str, y: np.ndarray) -> np.ndarray:
    if construction == "leverage-square":
        return hermite(2, y)
    if construction == "leverage-hermite23":
        return hermite(2, y) - 0.75 * hermite(3, y)
    raise ParameterError(f"{construction!r} is not a deterministic transform of the driver")


def gen_xi(spec: NoiseSpec, driver, n: int, seed=None) -> tuple[np.ndarray, np.ndarray]:
    """Level sequence ``xi`` (index 0..n, xi[0] = 0) and ``eta`` = diff(xi) (index 1..n).

    Leverage constructions use ``xi_k = g(Y_{k+1})``, so ``driver`` must hold
    Y_1..Y_{n+1} of the same asset's LMSD clock.
    """
    if spec.regime not in ("strong", "standard"):
        raise ParameterError("gen_xi needs the strong or standard regime")
    rng = _rng(seed)
    if spec.needs_driver:
        if driver is None:
            raise ConfigError(f"{spec.construction} needs the LMSD driver of the same asset")
        y = np.asarray(driver, dtype=float)
        if y.size < n + 1:
            raise ConfigError(f"driver holds {y.size} values, need {n + 1}")
    if spec.construction == "independent-long-memory":
        if spec.driver is not None:
            gspec = spec.driver
        elif spec.regime == "standard":
            gspec = white_noise_spec()
        else:
            gspec = GaussianSpec(kind="long-memory", hurst=spec.hurst, c=0.5)
        level = gen_long_memory_gaussian(gspec, n, rng)
    elif spec.construction == "martingale-product":
        zeta = 2.0 * rng.integers(0, 2, n) - 1.0
        level = zeta * np.exp(0.5 * spec.sigma * y[:n])
    else:
        level = xi_transform(spec.construction, y[1 : n + 1])
    xi = np.zeros(n + 1)
    xi[1:] = spec.scale * level
    return xi, np.diff(xi)


def gen_noise(spec: NoiseSpec, driver, n: int, seed=None) -> tuple[np.ndarray, np.ndarray]:
    """(xi, eta) for any regime; for non-difference regimes xi is the partial sum of eta."""
    if spec.regime == "none":
        return np.zeros(n + 1), np.zeros(n)
    if spec.regime == "weak":
        eta = gen_weak_noise(spec, n, seed)
        return np.concatenate([[0.0], np.cumsum(eta)]), eta
    return gen_xi(spec, driver, n, seed)


@dataclass(frozen=True)
class LeverageConstants:
    """Closed-form constants of the leverage constructions for LMSD(sigma) durations.

    ``m`` = E[xi_{k-1} tau_k], ``mu_star`` = lambda * m, ``lm_coefficient`` =
    c2 - lambda m c1 (the factor multiplying phi B_H in the calendar-time integral),
    ``corr_scale`` = corr(xi_k, exp(sigma Y_{k+1})).
    """

    construction: str
    sigma: float
    m: float
    mu_star: float
    lm_coefficient: float
    xi_variance: float
    corr_scale: float
    extra: dict = field(default_factory=dict)

    def corr_tau(self, innovation_second_moment: float) -> float:
        """corr(xi_k, tau_{k+1}) for unit-mean innovations with the given E[eps^2]."""
        s2 = self.sigma**2
        var_tau = innovation_second_moment * math.exp(2 * s2) - math.exp(s2)
        return self.m / math.sqrt(self.xi_variance * var_tau)

    def long_memory_scale(self, hurst: float, c: float) -> float:
        """c'' = phi * (c2 - lambda m c1) with phi^2 = c / (H (2H - 1))."""
        phi = math.sqrt(c / (hurst * (2 * hurst - 1)))
        return phi * abs(self.lm_coefficient)


def leverage_constants(construction: str, sigma: float = 1.0) -> LeverageConstants:
    # E[exp(sigma Y) H_j(Y)] = sigma^j exp(sigma^2 / 2)
    e = math.exp(0.5 * sigma * sigma)
    lam = 1.0 / e
    c1 = sigma * e
    if construction == "leverage-square":
        m = sigma**2 * e
        c2 = (sigma**3 + 2 * sigma) * e
        xi_var = 2.0
    elif construction == "leverage-hermite23":
        # Y H2 = H3 + 2 H1, Y H3 = H4 + 3 H2
        m = (sigma**2 - 0.75 * sigma**3) * e
        c2 = (sigma**3 + 2 * sigma - 0.75 * sigma**4 - 2.25 * sigma**2) * e
        xi_var = 2.0 + 0.75**2 * 6.0
    else:
        raise ParameterError(f"no closed form for {construction!r}")
    var_scale = math.exp(2 * sigma**2) - math.exp(sigma**2)
    return LeverageConstants(
        construction=construction,
        sigma=sigma,
        m=m,
        mu_star=lam * m,
        lm_coefficient=c2 - lam * m * c1,
        xi_variance=xi_var,
        corr_scale=m / math.sqrt(xi_var * var_scale),
        extra={"c1": c1, "c2": c2, "lambda": lam},
    )


@dataclass
class CointErrorDecomposition:
    r1: np.ndarray
    r2: np.ndarray
    noise1: np.ndarray
    noise2: np.ndarray
    theta: float

    @property
    def total(self) -> np.ndarray:
        return self.r1 - self.theta * self.r2 + self.noise1 - self.theta * self.noise2


def coint_error_decomposition(
    clock1,
    clock2,
    e1,
    e2,
    xi1,
    xi2,
    theta: float,
    times,
    y1=None,
    y2=None,
    tol: float = 1e-9,
) -> CointErrorDecomposition:
    """Split y1(t) - theta y2(t) into the two efficient-shock mismatch sums and the noise levels.

    ``xi_i`` are level sequences indexed 0..n with xi[0] the initial level, so the
    noise terms are xi_{i,N_i(t)} - xi_{i,0}.  When ``y1``/``y2`` samples are given the
    identity is checked to ``tol``.
    """
    times = np.asarray(times, dtype=float)
    n1 = clock1.count(times)
    n2 = clock2.count(times)
    ce1 = np.concatenate([[0.0], np.cumsum(e1)])
    ce2 = np.concatenate([[0.0], np.cumsum(e2)])
    last1 = clock1.event_time(n1)
    last2 = clock2.event_time(n2)
    n1_at_2 = np.where(n2 > 0, clock1.count(last2), 0)
    n2_at_1 = np.where(n1 > 0, clock2.count(last1), 0)
    xi1 = np.asarray(xi1, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    out = CointErrorDecomposition(
        r1=ce1[n1] - ce1[n1_at_2],
        r2=ce2[n2] - ce2[n2_at_1],
        noise1=xi1[n1] - xi1[0],
        noise2=xi2[n2] - xi2[0],
        theta=float(theta),
    )
    if y1 is not None and y2 is not None:
        lhs = np.asarray(y1) - theta * np.asarray(y2)
        gap = np.max(np.abs(lhs - out.total)) if lhs.size else 0.0
        if gap > tol:
            raise ConsistencyError(f"cointegrating-error decomposition off by {gap:.3g}")
    return out
