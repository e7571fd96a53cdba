"""Event clocks and time deformations of the trading clock."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InputError, ValidationError

SEGMENT_KINDS = ("constant", "linear", "sine")
BISECTION_TOL = 1e-12
PROBE_COUNT = 256


@dataclass(frozen=True)
class EventClock:
    """Nondecreasing event times of one asset (ties allowed).

    ``times`` may extend past ``horizon``; the extra events are what makes the
    forward recurrence time computable up to the horizon.
    """

    times: np.ndarray
    horizon: float = math.inf

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1:
            raise InputError("event times must be one-dimensional")
        if t.size and (t[0] <= 0 or np.any(np.diff(t) < 0)):
            raise InputError("event times must be positive and nondecreasing")
        t.setflags(write=False)
        object.__setattr__(self, "times", t)

    def count(self, t):
        """N(t) = #{k : t_k <= t}."""
        out = np.searchsorted(self.times, t, side="right")
        return out if np.ndim(out) else int(out)

    def event_time(self, k):
        """t_k for k >= 1, and 0 for k = 0 (events at nonpositive times are not simulated)."""
        k = np.asarray(k)
        padded = np.concatenate([[0.0], self.times])
        out = padded[k]
        return out if out.ndim else float(out)

    def forward_recurrence(self, t):
        """A(t) = t_{N(t)+1} - t; nan when the next event was not generated."""
        t = np.asarray(t, dtype=float)
        nxt = np.searchsorted(self.times, t, side="right")
        padded = np.concatenate([self.times, [np.nan]])
        out = padded[nxt] - t
        return out if out.ndim else float(out)

    @property
    def n_within_horizon(self) -> int:
        return self.count(self.horizon)

    def is_simple(self) -> bool:
        return bool(np.all(np.diff(self.times) > 0))


def clock_from_durations(durations, horizon: float = math.inf) -> EventClock:
    d = np.asarray(durations, dtype=float)
    if np.any(d <= 0) or not np.all(np.isfinite(d)):
        raise InputError("durations must be finite and strictly positive")
    return EventClock(np.cumsum(d), horizon)


@dataclass(frozen=True)
class Segment:
    """Piece of a deformation on [s_k, s_{k+1}); increments relative to f(s_k).

    ``linear``: slope * x.  ``sine``: slope * x + amplitude * (sin(2 pi (s_k + x) / period)
    - sin(2 pi s_k / period)), which is the intraday seasonal shape.
    """

    kind: str
    slope: float = 1.0
    amplitude: float = 0.0
    period: float = 1.0

    def __post_init__(self):
        if self.kind not in SEGMENT_KINDS:
            raise ValidationError(f"unknown segment kind {self.kind!r}")


@dataclass(frozen=True)
class DeformationSpec:
    """Periodic piecewise description of a nondecreasing cadlag clock change f.

    ``breakpoints`` = (0, s_1, ..., s_K) with s_K the period P.  ``jumps[k]`` is
    the upward jump at ``breakpoints[k + 1]`` (the last one at each period end).
    f(0) = 0 and f(t + P) = f(t) + f(P).
    """

    breakpoints: tuple
    segments: tuple
    jumps: tuple
    min_length: float = 0.0
    max_nontrading: float = math.inf
    min_slope: float = 0.0
    max_jump: float = math.inf

    def __post_init__(self):
        object.__setattr__(self, "breakpoints", tuple(float(b) for b in self.breakpoints))
        object.__setattr__(self, "segments", tuple(self.segments))
        object.__setattr__(self, "jumps", tuple(float(j) for j in self.jumps))
        self.validate()

    def violations(self) -> list[str]:
        s = np.asarray(self.breakpoints)
        bad = []
        if s.size < 2 or s[0] != 0.0 or np.any(np.diff(s) <= 0):
            return ["breakpoints must start at 0 and strictly increase"]
        if len(self.segments) != s.size - 1 or len(self.jumps) != s.size - 1:
            return ["need one segment and one jump per interval"]
        lengths = np.diff(s)
        if np.any(lengths < self.min_length):
            bad.append(f"minimum interval length: an interval is shorter than delta0={self.min_length}")
        if any(j < 0 for j in self.jumps):
            bad.append("jumps must be nonnegative")
        if any(j > self.max_jump for j in self.jumps):
            bad.append(f"jump bound: a jump exceeds C={self.max_jump}")
        for k, seg in enumerate(self.segments):
            if seg.kind == "constant":
                continue
            lo = self._min_derivative(k)
            if lo <= 0:
                bad.append(f"segment {k} is not strictly increasing")
            elif lo < self.min_slope:
                bad.append(f"minimum slope: segment {k} has slope {lo:.6g} < delta1={self.min_slope}")
        # adjacent constant pieces without a jump form one nontrading period
        run = 0.0
        kinds = [seg.kind for seg in self.segments]
        for k, kind in enumerate(kinds * 2):
            idx = k % len(kinds)
            if kind == "constant":
                run += lengths[idx]
                if run > self.max_nontrading:
                    bad.append(f"maximum nontrading length: a nontrading period exceeds C0={self.max_nontrading}")
                    break
                if self.jumps[idx] > 0:
                    run = 0.0
            else:
                run = 0.0
        if all(kind == "constant" for kind in kinds) and sum(self.jumps) <= 0:
            bad.append("f never increases")
        return bad

    def validate(self):
        bad = self.violations()
        if bad:
            raise ValidationError("; ".join(bad))

    def _min_derivative(self, k: int) -> float:
        seg = self.segments[k]
        if seg.kind == "linear":
            return seg.slope
        a, b = self.breakpoints[k], self.breakpoints[k + 1]
        grid = np.linspace(a, b, 2049)
        deriv = seg.slope + 2 * np.pi * seg.amplitude / seg.period * np.cos(2 * np.pi * grid / seg.period)
        return float(deriv.min())

    @property
    def period(self) -> float:
        return self.breakpoints[-1]

    def _increment(self, k: int, x):
        seg = self.segments[k]
        if seg.kind == "constant":
            return np.zeros_like(x)
        if seg.kind == "linear":
            return seg.slope * x
        s0 = self.breakpoints[k]
        w = 2 * np.pi / seg.period
        return seg.slope * x + seg.amplitude * (np.sin(w * (s0 + x)) - np.sin(w * s0))

    def _tables(self):
        s = np.asarray(self.breakpoints)
        lengths = np.diff(s)
        base = np.zeros(s.size)
        right = np.zeros(lengths.size)
        for k in range(lengths.size):
            right[k] = base[k] + float(self._increment(k, np.asarray(lengths[k])))
            base[k + 1] = right[k] + self.jumps[k]
        return s, base, right

    @property
    def gamma(self) -> float:
        """Asymptotic slope lim f(t)/t."""
        _, base, _ = self._tables()
        return base[-1] / self.period

    def __call__(self, t):
        scalar = np.ndim(t) == 0
        t = np.atleast_1d(np.asarray(t, dtype=float))
        s, base, _ = self._tables()
        period, total = s[-1], base[-1]
        p = np.floor(t / period)
        local = t - p * period
        k = np.clip(np.searchsorted(s, local, side="right") - 1, 0, len(self.segments) - 1)
        out = p * total + base[k]
        for idx in np.unique(k):
            sel = k == idx
            out[sel] += self._increment(int(idx), local[sel] - s[idx])
        return float(out[0]) if scalar else out

    def inverse(self, u):
        """Left-continuous generalised inverse inf{t >= 0 : f(t) >= u}."""
        scalar = np.ndim(u) == 0
        u = np.atleast_1d(np.asarray(u, dtype=float))
        s, base, right = self._tables()
        period, total = s[-1], base[-1]
        p = np.maximum(np.ceil(u / total) - 1.0, 0.0)
        local = u - p * total
        k = np.searchsorted(base, local, side="left")  # first k with base_k >= local
        out = np.where(local <= 0, 0.0, s[np.minimum(k, s.size - 1)])
        prev = k - 1
        inside = (local > 0) & (prev >= 0)
        inside &= right[np.clip(prev, 0, right.size - 1)] > local
        for idx in np.unique(prev[inside]):
            sel = inside & (prev == idx)
            out[sel] = s[idx] + self._segment_inverse(int(idx), local[sel] - base[idx])
        out = out + p * period
        return float(out[0]) if scalar else out

    def _segment_inverse(self, k: int, v: np.ndarray) -> np.ndarray:
        seg = self.segments[k]
        if seg.kind == "linear":
            return v / seg.slope
        lo = np.zeros_like(v)
        hi = np.full_like(v, self.breakpoints[k + 1] - self.breakpoints[k])
        while np.any(hi - lo > BISECTION_TOL * np.maximum(1.0, hi)):
            mid = 0.5 * (lo + hi)
            below = self._increment(k, mid) < v
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return hi


def identity_spec() -> DeformationSpec:
    return DeformationSpec((0.0, 1.0), (Segment("linear", 1.0),), (0.0,))


def linear_spec(gamma: float) -> DeformationSpec:
    return DeformationSpec((0.0, 1.0), (Segment("linear", gamma),), (0.0,))


def intraday_seasonal_spec(period: float, amplitude: float, min_slope: float = 1e-6) -> DeformationSpec:
    """f(t) = t + a sin(2 pi t / T), one differentiable trading segment per period."""
    if 1.0 - 2 * np.pi * abs(amplitude) / period < min_slope:
        raise ValidationError(
            f"amplitude {amplitude} too large: minimum slope 1 - 2*pi*a/T falls below {min_slope}"
        )
    if amplitude == 0:
        return DeformationSpec((0.0, float(period)), (Segment("linear", 1.0),), (0.0,), min_slope=min_slope)
    seg = Segment("sine", slope=1.0, amplitude=float(amplitude), period=float(period))
    return DeformationSpec((0.0, float(period)), (seg,), (0.0,), min_slope=min_slope)


def trading_schedule_spec(
    trading: float,
    closed: float,
    reopen_jump: float,
    slope: float = 1.0,
    **bounds,
) -> DeformationSpec:
    """Trading session of length ``trading`` then a closed period; f jumps on reopening."""
    return DeformationSpec(
        (0.0, float(trading), float(trading + closed)),
        (Segment("linear", slope), Segment("constant")),
        (0.0, float(reopen_jump)),
        **bounds,
    )


def deform_clock(base: EventClock, f: DeformationSpec, phase: float = 0.0) -> EventClock:
    """Event times f^<-(t~_n) of N(.) = N~(f(.)), optionally with f shifted by ``phase``.

    With a phase the clock change is f(t + phase) - f(phase).
    """
    f.validate()
    if phase:
        offset = float(f(phase))
        times = f.inverse(base.times + offset) - phase
        times = np.maximum(times, 0.0)
    else:
        times = f.inverse(base.times)
    horizon = math.inf if math.isinf(base.horizon) else float(f.inverse(base.horizon))
    # base events swallowed by f(0) would sit at t = 0, outside (0, inf); move them to the
    # first instant, keeping them as ties
    times = np.where(times <= 0, np.nextafter(0.0, 1.0), times)
    return EventClock(np.maximum.accumulate(times), horizon)


def forward_recurrence_moment(clocks, p: int, probes=None, margin: float = 0.0) -> float:
    """Monte Carlo estimate of sup over probe times of E[A(s)^p] across replicated clocks."""
    if p not in (1, 2):
        raise ValidationError("p must be 1 or 2")
    clocks = list(clocks)
    if len(clocks) < 2:
        raise ValidationError("at least two replicated clocks are required")
    if len(clocks) < 100:
        warnings.warn(f"only {len(clocks)} replications; the moment estimate is noisy", stacklevel=2)
    if probes is None:
        top = min(c.times[-1] for c in clocks) - margin
        probes = np.linspace(0.0, top, PROBE_COUNT, endpoint=False)
    probes = np.asarray(probes, dtype=float)
    a = np.vstack([c.forward_recurrence(probes) for c in clocks])
    if np.isnan(a).any():
        raise ValidationError("probe times extend past generated events; reduce probes or add margin")
    return float((a**p).mean(axis=0).max())
