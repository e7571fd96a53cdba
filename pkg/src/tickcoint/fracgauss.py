"""Stationary Gaussian sequences, fractional Brownian motion and Hermite transforms.

Long-memory sequences are synthesised exactly by circulant embedding
(Davies-Harte).  When the embedding has negative eigenvalues we fall back to
a dense Cholesky factorisation for short sequences.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ParameterError, ResourceError

CHOLESKY_LIMIT = 4096
EIGEN_TOL = 1e-10


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class GaussianSpec:
    """Unit-variance stationary Gaussian sequence.

    ``kind="long-memory"`` uses the autocorrelation ``c * k**(2H-2)`` for
    ``k >= 1``; ``kind="summable"`` uses ``acov`` (lags 1, 2, ...), with zero
    beyond the supplied lags.  An empty ``acov`` gives white noise.
    """

    kind: str = "long-memory"
    hurst: float = 0.7
    c: float = 0.2
    acov: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.kind == "long-memory":
            if not 0.5 < self.hurst < 1.0:
                raise ParameterError(f"long-memory hurst must lie in (1/2, 1), got {self.hurst}")
            if not 0.0 < self.c <= 1.0:
                raise ParameterError(f"autocovariance constant c must lie in (0, 1], got {self.c}")
        elif self.kind == "summable":
            if np.any(np.abs(np.asarray(self.acov, dtype=float)) > 1.0):
                raise ParameterError("autocorrelations must not exceed 1 in absolute value")
        else:
            raise ParameterError(f"unknown Gaussian kind {self.kind!r}")

    def autocorrelation(self, lags) -> np.ndarray:
        lags = np.abs(np.asarray(lags, dtype=float))
        if self.kind == "long-memory":
            with np.errstate(divide="ignore"):
                out = self.c * lags ** (2.0 * self.hurst - 2.0)
            return np.where(lags == 0, 1.0, out)
        acov = np.asarray(self.acov, dtype=float)
        idx = lags.astype(int)
        out = np.zeros(idx.shape)
        inside = (idx >= 1) & (idx <= acov.size)
        out[inside] = acov[idx[inside] - 1]
        out[idx == 0] = 1.0
        return out

    @property
    def is_white(self) -> bool:
        return self.kind == "summable" and not np.any(np.asarray(self.acov, dtype=float))


def white_noise_spec() -> GaussianSpec:
    return GaussianSpec(kind="summable", acov=())


def fgn_autocovariance(hurst: float, lags) -> np.ndarray:
    """Autocovariance of unit-step fractional Gaussian noise."""
    k = np.abs(np.asarray(lags, dtype=float))
    h2 = 2.0 * hurst
    return 0.5 * (np.abs(k + 1) ** h2 - 2.0 * k**h2 + np.abs(k - 1) ** h2)


def _next_pow2(n: int) -> int:
    return 1 << max(int(n - 1).bit_length(), 0)


@lru_cache(maxsize=64)
def _embedding_sqrt_eigs(key: tuple, m: int):
    """Square roots of the circulant eigenvalues (scaled) or None if not PSD."""
    kind, params = key
    lags = np.arange(m + 1)
    if kind == "fgn":
        (hurst,) = params
        row = fgn_autocovariance(hurst, lags)
    else:
        row = GaussianSpec(*params).autocorrelation(lags)
    circ = np.concatenate([row, row[-2:0:-1]])
    eig = np.fft.fft(circ).real
    if eig.min() < -EIGEN_TOL * max(eig.max(), 1.0):
        return None
    return np.sqrt(np.clip(eig, 0.0, None) / circ.size)


def _spec_key(spec: GaussianSpec) -> tuple:
    return ("spec", (spec.kind, spec.hurst, spec.c, tuple(spec.acov)))


def _stationary_batch(key: tuple, acf, n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` independent rows of length ``n`` with autocovariance ``acf``."""
    m = _next_pow2(max(n, 2))
    sq = _embedding_sqrt_eigs(key, m)
    if sq is None:
        if n > CHOLESKY_LIMIT:
            raise ResourceError(
                f"circulant embedding is not nonnegative definite and n={n} exceeds "
                f"the Cholesky fallback limit {CHOLESKY_LIMIT}"
            )
        lags = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
        try:
            chol = np.linalg.cholesky(acf(lags))
        except np.linalg.LinAlgError:
            raise ParameterError("autocovariance is not positive definite at this length") from None
        return rng.standard_normal((count, n)) @ chol.T
    size = sq.size
    out = np.empty((count, n))
    chunk = max(1, 2**22 // size)
    for start in range(0, count, chunk):
        k = min(chunk, count - start)
        w = rng.standard_normal((k, size)) + 1j * rng.standard_normal((k, size))
        out[start : start + k] = np.fft.fft(sq * w, axis=1).real[:, :n]
    return out


def gen_long_memory_gaussian(spec: GaussianSpec, n: int, seed=None) -> np.ndarray:
    """Zero-mean unit-variance stationary Gaussian sequence of length ``n``."""
    if n < 1:
        raise ParameterError("n must be positive")
    rng = _rng(seed)
    if spec.is_white:
        return rng.standard_normal(n)
    return _stationary_batch(_spec_key(spec), spec.autocorrelation, n, 1, rng)[0]


def gen_fgn(hurst: float, n: int, seed=None, count: int | None = None) -> np.ndarray:
    """Unit-step fractional Gaussian noise (increments of standard FBM)."""
    if not 0.0 < hurst < 1.0:
        raise ParameterError(f"hurst must lie in (0, 1), got {hurst}")
    rng = _rng(seed)
    rows = 1 if count is None else count
    if hurst == 0.5:
        out = rng.standard_normal((rows, n))
    else:
        out = _stationary_batch(("fgn", (float(hurst),)), lambda k: fgn_autocovariance(hurst, k), n, rows, rng)
    return out[0] if count is None else out


@dataclass(frozen=True)
class FbmGrid:
    hurst: float
    times: np.ndarray
    values: np.ndarray


def fbm_covariance(hurst: float, s, t) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    h2 = 2.0 * hurst
    return 0.5 * (s**h2 - np.abs(t - s) ** h2 + t**h2)


def _check_grid(times: np.ndarray):
    if times.ndim != 1 or times.size < 2 or times[0] != 0.0:
        raise ParameterError("FBM grid must start at 0 and contain at least two points")
    if np.any(np.diff(times) <= 0):
        raise ParameterError("FBM grid must be strictly increasing")


def fbm_paths(hurst: float, times, count: int, seed=None) -> np.ndarray:
    """``count`` independent FBM paths on ``times``; shape (count, len(times))."""
    if not 0.0 < hurst < 1.0:
        raise ParameterError(f"hurst must lie in (0, 1), got {hurst}")
    times = np.asarray(times, dtype=float)
    _check_grid(times)
    rng = _rng(seed)
    steps = np.diff(times)
    out = np.zeros((count, times.size))
    if np.allclose(steps, steps[0], rtol=1e-12, atol=0.0):
        inc = gen_fgn(hurst, steps.size, rng, count=count) * steps[0] ** hurst
        np.cumsum(inc, axis=1, out=out[:, 1:])
        return out
    if times.size - 1 > CHOLESKY_LIMIT:
        raise ResourceError("non-uniform FBM grids are limited to the Cholesky size limit")
    t = times[1:]
    cov = fbm_covariance(hurst, t[:, None], t[None, :])
    chol = np.linalg.cholesky(cov)
    out[:, 1:] = rng.standard_normal((count, t.size)) @ chol.T
    return out


def gen_fbm(hurst: float, times, seed=None) -> FbmGrid:
    times = np.asarray(times, dtype=float)
    values = fbm_paths(hurst, times, 1, seed)[0]
    return FbmGrid(hurst=float(hurst), times=times, values=values)


def fbm_increments(fbm: FbmGrid) -> np.ndarray:
    return np.diff(fbm.values)


def hermite(k: int, x):
    """Probabilists' Hermite polynomial of order 2 or 3."""
    x = np.asarray(x, dtype=float)
    if k == 2:
        out = x * x - 1.0
    elif k == 3:
        out = x**3 - 3.0 * x
    else:
        raise ParameterError(f"unsupported Hermite order {k}")
    return out if out.ndim else float(out)
