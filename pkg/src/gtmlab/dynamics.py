"""Kicked phase-space maps and ensemble statistics.

Full map on the cylinder (theta on the circle, p unbounded):

    p'     = p + V'(theta)
    theta' = theta + p'        (mod 2*pi)

Because every kick changes p by an integer multiple of eta, the fractional
part beta = p mod eta never changes.  The reduced map tracks the integer
part n (p = beta + n*eta):

    n'     = n + j(theta)
    theta' = theta + beta + n'*eta   (mod 2*pi)

Ensembles are driven by a counter-based Philox generator keyed by the seed,
so trajectory i's initial condition is a pure function of (seed, i) and
results do not depend on evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from gtmlab.potential import TWO_PI, ChannelPotential, channel_index, kick_impulse

__all__ = [
    "PhasePoint",
    "ReducedState",
    "EnsembleSpec",
    "EnergySeries",
    "MomentumHistogram",
    "step",
    "step_reduced",
    "reduced_from_momentum",
    "momentum_of",
    "simulate_ensemble",
    "momentum_distribution",
    "growth_exponent",
    "standard_map_baseline",
    "orbit_trace",
]


class PhasePoint(NamedTuple):
    theta: float
    p: float


class ReducedState(NamedTuple):
    """Reduced coordinates: angle, integer momentum index, conserved beta."""

    theta: float
    n: int
    beta: float


def step(pot: ChannelPotential, point: PhasePoint) -> PhasePoint:
    """One kick of the full map."""
    p = point.p + kick_impulse(pot, point.theta)
    return PhasePoint((point.theta + p) % TWO_PI, p)


def step_reduced(pot: ChannelPotential, state: ReducedState) -> ReducedState:
    """One kick of the reduced map; beta is carried through untouched."""
    n = state.n + channel_index(pot, state.theta)
    theta = (state.theta + state.beta + n * pot.eta) % TWO_PI
    return ReducedState(theta, n, state.beta)


def reduced_from_momentum(eta: float, theta: float, p: float) -> ReducedState:
    """Split p into the conserved fraction beta in [0, eta) and integer index n."""
    n = math.floor(p / eta)
    return ReducedState(theta % TWO_PI, n, p - n * eta)


def momentum_of(state: ReducedState, eta: float) -> float:
    return state.beta + state.n * eta


@dataclass(frozen=True)
class EnsembleSpec:
    """Ensemble setup: size, duration, seeding, initial momenta, recording.

    theta0 is always uniform on [0, 2*pi).  p0_mode selects the initial
    momentum: "fixed" puts every trajectory at p0_value (beta follows from
    p0 mod eta); "uniform" draws p0 from [-eta/2, eta/2), averaging over
    the conserved beta.  The window is the trailing-average length used
    for the smoothed energy series and for histogram accumulation.
    """

    size: int
    kicks: int
    seed: int = 0
    p0_mode: str = "fixed"
    p0_value: float = 0.0
    window: int = 100
    record_stride: int | None = None

    def __post_init__(self) -> None:
        if self.size < 1:
            raise ValueError("ensemble size must be at least 1")
        if self.kicks < 1:
            raise ValueError("kick count must be at least 1")
        if self.p0_mode not in ("fixed", "uniform"):
            raise ValueError(f"unknown p0_mode {self.p0_mode!r}")
        if self.window < 1:
            raise ValueError("window must be at least 1")
        if self.window > self.kicks + 1:
            raise ValueError(
                f"window {self.window} exceeds recorded length {self.kicks + 1}")
        if self.record_stride is not None and self.record_stride < 1:
            raise ValueError("record_stride must be positive")


@dataclass(frozen=True)
class EnergySeries:
    """Mean squared momentum at recorded times, raw and trailing-averaged."""

    times: np.ndarray
    mean_p2: np.ndarray
    windowed_mean_p2: np.ndarray
    window: int


@dataclass(frozen=True)
class MomentumHistogram:
    """Momentum occupation probabilities accumulated over trailing kicks."""

    centers: np.ndarray
    probabilities: np.ndarray
    bin_width: float
    window: int
    samples: int


def record_times(kicks: int, stride: int | None = None) -> np.ndarray:
    """Recording grid: fixed stride, or a geometric grid (steps of ~1.1)."""
    if stride is not None:
        ts = np.arange(0, kicks + 1, stride, dtype=np.int64)
        if ts[-1] != kicks:
            ts = np.append(ts, kicks)
        return ts
    ts = [0]
    t = 1.0
    while t <= kicks:
        ts.append(int(round(t)))
        t = max(t * 1.1, t + 1.0)
    ts.append(kicks)
    return np.unique(np.asarray(ts, dtype=np.int64))


def _initial_conditions(spec: EnsembleSpec, eta: float):
    """Draw (theta0, n0, beta) arrays from the Philox stream keyed by seed."""
    rng = np.random.Generator(np.random.Philox(key=spec.seed))
    theta = rng.uniform(0.0, TWO_PI, spec.size)
    if spec.p0_mode == "fixed":
        p0 = np.full(spec.size, float(spec.p0_value))
    else:
        p0 = rng.uniform(-0.5 * eta, 0.5 * eta, spec.size)
    n = np.floor(p0 / eta)
    beta = p0 - n * eta
    return theta, n, beta


def _evolve_mean_p2(pot: ChannelPotential, theta, n, beta, kicks):
    """Iterate the reduced map in place; return mean p^2 after every kick.

    theta and n are float64 arrays mutated in place (n stays exactly
    integer-valued).  Returns an array of length kicks+1 whose entry t is
    the ensemble mean of p^2 after t kicks.
    """
    mu, eta = pot.mu, pot.eta
    size = theta.shape[0]
    raw = np.empty(kicks + 1)
    p = np.empty_like(theta)
    tmp = np.empty_like(theta)

    np.multiply(n, eta, out=p)
    p += beta
    np.square(p, out=tmp)
    raw[0] = tmp.sum() / size

    for t in range(1, kicks + 1):
        np.sin(theta, out=tmp)
        tmp *= mu
        tmp /= eta
        np.trunc(tmp, out=tmp)
        n += tmp
        np.multiply(n, eta, out=p)
        p += beta
        theta += p
        np.remainder(theta, TWO_PI, out=theta)
        np.square(p, out=tmp)
        raw[t] = tmp.sum() / size
    return raw


def _windowed(raw: np.ndarray, window: int) -> np.ndarray:
    """Trailing average over min(window, t+1) kicks at each time t."""
    csum = np.concatenate(([0.0], np.cumsum(raw)))
    t = np.arange(raw.shape[0])
    width = np.minimum(window, t + 1)
    return (csum[t + 1] - csum[t + 1 - width]) / width


def _series(raw: np.ndarray, spec: EnsembleSpec) -> EnergySeries:
    ts = record_times(spec.kicks, spec.record_stride)
    return EnergySeries(
        times=ts,
        mean_p2=raw[ts],
        windowed_mean_p2=_windowed(raw, spec.window)[ts],
        window=spec.window,
    )


def simulate_ensemble(pot: ChannelPotential, spec: EnsembleSpec) -> EnergySeries:
    """Evolve an ensemble under the reduced map and record mean p^2.

    Deterministic for a fixed spec: the Philox draws and the in-order
    pairwise reductions leave nothing machine-state dependent.
    """
    theta, n, beta = _initial_conditions(spec, pot.eta)
    raw = _evolve_mean_p2(pot, theta, n, beta, spec.kicks)
    return _series(raw, spec)


def momentum_distribution(pot: ChannelPotential, spec: EnsembleSpec) -> MomentumHistogram:
    """Histogram of momenta accumulated over the trailing `window` kicks.

    Bin width is eta when beta is shared by the whole ensemble (momenta
    live on the lattice beta + eta*Z) and eta/8 under beta averaging, so
    the sub-lattice structure stays visible.  Probabilities sum to one.
    """
    theta, n, beta = _initial_conditions(spec, pot.eta)
    mu, eta = pot.mu, pot.eta
    if spec.p0_mode == "fixed":
        width = eta
        anchor = float(beta[0])
    else:
        width = eta / 8.0
        anchor = 0.0

    start = spec.kicks - spec.window + 1
    p = np.empty_like(theta)
    tmp = np.empty_like(theta)
    counts = None
    idx_lo = 0

    for t in range(1, spec.kicks + 1):
        np.sin(theta, out=tmp)
        tmp *= mu
        tmp /= eta
        np.trunc(tmp, out=tmp)
        n += tmp
        np.multiply(n, eta, out=p)
        p += beta
        theta += p
        np.remainder(theta, TWO_PI, out=theta)
        if t >= start:
            idx = np.rint((p - anchor) / width).astype(np.int64)
            lo = int(idx.min())
            hi = int(idx.max())
            if counts is None:
                idx_lo = lo
                counts = np.zeros(hi - lo + 1, dtype=np.int64)
            else:
                if lo < idx_lo:
                    counts = np.concatenate(
                        [np.zeros(idx_lo - lo, dtype=np.int64), counts])
                    idx_lo = lo
                if hi >= idx_lo + counts.shape[0]:
                    counts = np.concatenate(
                        [counts, np.zeros(hi - idx_lo - counts.shape[0] + 1,
                                          dtype=np.int64)])
            counts += np.bincount(idx - idx_lo, minlength=counts.shape[0])

    total = int(counts.sum())
    centers = anchor + width * (idx_lo + np.arange(counts.shape[0]))
    return MomentumHistogram(
        centers=centers,
        probabilities=counts / total,
        bin_width=width,
        window=spec.window,
        samples=total,
    )


def growth_exponent(times, values, t_min: float, t_max: float) -> float:
    """Least-squares slope of log(values) against log(times) on [t_min, t_max].

    Requires at least three recorded points with positive time and value.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    mask = (times >= t_min) & (times <= t_max) & (times > 0) & (values > 0)
    if mask.sum() < 3:
        raise ValueError("need at least three recorded points in the fit window")
    slope, _ = np.polyfit(np.log(times[mask]), np.log(values[mask]), 1)
    return float(slope)


def standard_map_baseline(mu: float, spec: EnsembleSpec) -> EnergySeries:
    """Reference run with the smooth kick V'(theta) = mu*sin(theta).

    Same harness and seeding as simulate_ensemble but momentum is
    continuous: this is the classical benchmark whose chaotic regime grows
    mean p^2 linearly in time.  There is no momentum quantum here, so
    "uniform" p0 draws from [-1/2, 1/2).
    """
    rng = np.random.Generator(np.random.Philox(key=spec.seed))
    theta = rng.uniform(0.0, TWO_PI, spec.size)
    if spec.p0_mode == "fixed":
        p = np.full(spec.size, float(spec.p0_value))
    else:
        p = rng.uniform(-0.5, 0.5, spec.size)

    raw = np.empty(spec.kicks + 1)
    tmp = np.empty_like(theta)
    np.square(p, out=tmp)
    raw[0] = tmp.sum() / spec.size
    for t in range(1, spec.kicks + 1):
        np.sin(theta, out=tmp)
        tmp *= mu
        p += tmp
        theta += p
        np.remainder(theta, TWO_PI, out=theta)
        np.square(p, out=tmp)
        raw[t] = tmp.sum() / spec.size
    return _series(raw, spec)


def orbit_trace(pot: ChannelPotential, point: PhasePoint, steps: int):
    """Iterate the full map from one point; return (theta, p mod 2*pi) arrays.

    The momentum is reduced modulo 2*pi for the toral phase-portrait
    reading; the underlying evolution uses the unreduced momentum.
    """
    thetas = np.empty(steps + 1)
    ps = np.empty(steps + 1)
    cur = point
    thetas[0] = cur.theta % TWO_PI
    ps[0] = cur.p % TWO_PI
    for i in range(1, steps + 1):
        cur = step(pot, cur)
        thetas[i] = cur.theta
        ps[i] = cur.p % TWO_PI
    return thetas, ps
