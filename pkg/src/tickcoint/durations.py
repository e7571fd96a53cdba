"""Stationary inter-trade duration models: LMSD, ACD and iid."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .fracgauss import GaussianSpec, _rng, gen_long_memory_gaussian

INNOVATION_LAWS = ("exponential", "lognormal", "unit")


def draw_innovations(law: str, n: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Positive unit-mean iid innovations.

    ``lognormal`` uses log-standard-deviation ``scale``; ``unit`` is the point
    mass at one.
    """
    if law == "exponential":
        return rng.standard_exponential(n)
    if law == "lognormal":
        return np.exp(scale * rng.standard_normal(n) - 0.5 * scale * scale)
    if law == "unit":
        return np.ones(n)
    raise ParameterError(f"unknown innovation law {law!r}")


def innovation_second_moment(law: str, scale: float = 1.0) -> float:
    if law == "exponential":
        return 2.0
    if law == "lognormal":
        return math.exp(scale * scale)
    if law == "unit":
        return 1.0
    raise ParameterError(f"unknown innovation law {law!r}")


@dataclass(frozen=True)
class LmsdSpec:
    sigma: float = 1.0
    driver: GaussianSpec = field(default_factory=GaussianSpec)
    innovation: str = "exponential"
    innovation_scale: float = 1.0

    def __post_init__(self):
        if self.sigma < 0:
            raise ParameterError("LMSD sigma must be nonnegative")
        if self.innovation not in INNOVATION_LAWS:
            raise ParameterError(f"unknown innovation law {self.innovation!r}")

    @property
    def intensity(self) -> float:
        return math.exp(-0.5 * self.sigma**2)


@dataclass(frozen=True)
class AcdSpec:
    omega: float = 0.2
    alpha: float = 0.1
    beta: float = 0.7
    innovation: str = "exponential"
    innovation_scale: float = 1.0
    burn_in: int = 10_000

    def __post_init__(self):
        if self.omega <= 0 or self.alpha < 0 or self.beta < 0:
            raise ParameterError("ACD requires omega > 0 and alpha, beta >= 0")
        if self.alpha + self.beta >= 1.0:
            raise ParameterError(f"nonstationary ACD: alpha + beta = {self.alpha + self.beta} >= 1")
        if self.innovation not in INNOVATION_LAWS:
            raise ParameterError(f"unknown innovation law {self.innovation!r}")
        if self.burn_in < 0:
            raise ParameterError("burn_in must be nonnegative")

    @property
    def intensity(self) -> float:
        return (1.0 - self.alpha - self.beta) / self.omega

    def warn_fifth_moment(self):
        """The second forward-recurrence bound needs a fifth-moment condition we do not check."""
        warnings.warn(
            "ACD durations: bounded second forward-recurrence moments require "
            "E[(beta + alpha*eps)^5] < inf, which is assumed, not verified",
            stacklevel=2,
        )


@dataclass(frozen=True)
class IidSpec:
    law: str = "exponential"
    mean: float = 1.0
    scale: float = 1.0

    def __post_init__(self):
        if self.law not in INNOVATION_LAWS + ("deterministic",):
            raise ParameterError(f"unknown duration law {self.law!r}")
        if self.mean <= 0:
            raise ParameterError("mean duration must be positive")

    @property
    def intensity(self) -> float:
        return 1.0 / self.mean


def gen_lmsd(spec: LmsdSpec, n: int, seed=None) -> tuple[np.ndarray, np.ndarray]:
    """Durations ``eps_k * exp(sigma * Y_k)`` and the Gaussian driver ``Y``."""
    rng = _rng(seed)
    y = gen_long_memory_gaussian(spec.driver, n, rng)
    eps = draw_innovations(spec.innovation, n, rng, spec.innovation_scale)
    return eps * np.exp(spec.sigma * y), y


def gen_acd(spec: AcdSpec, n: int, seed=None, return_psi: bool = False):
    """ACD durations started at the stationary mean, burn-in discarded."""
    rng = _rng(seed)
    total = n + spec.burn_in
    eps = draw_innovations(spec.innovation, total, rng, spec.innovation_scale)
    tau = np.empty(total)
    psi = np.empty(total)
    mean = spec.omega / (1.0 - spec.alpha - spec.beta)
    prev_tau = prev_psi = mean
    w, a, b = spec.omega, spec.alpha, spec.beta
    # scalar recursion; fast enough for 1e6 draws
    for k in range(total):
        p = w + a * prev_tau + b * prev_psi
        psi[k] = p
        prev_tau = tau[k] = p * eps[k]
        prev_psi = p
    tau, psi = tau[spec.burn_in :], psi[spec.burn_in :]
    return (tau, psi) if return_psi else tau


def gen_iid_durations(spec: IidSpec, n: int, seed=None) -> np.ndarray:
    rng = _rng(seed)
    if spec.law == "deterministic":
        return np.full(n, float(spec.mean))
    return spec.mean * draw_innovations(spec.law, n, rng, spec.scale)


def intensity(spec) -> float:
    return spec.intensity


def generate(spec, n: int, seed=None) -> tuple[np.ndarray, np.ndarray | None]:
    """Durations plus the Gaussian driver when the model has one."""
    if isinstance(spec, LmsdSpec):
        return gen_lmsd(spec, n, seed)
    if isinstance(spec, AcdSpec):
        return gen_acd(spec, n, seed), None
    if isinstance(spec, IidSpec):
        return gen_iid_durations(spec, n, seed), None
    raise ParameterError(f"unsupported duration spec {type(spec).__name__}")
