"""Piecewise-linear kick potentials with quantized slopes.

The potential V is continuous, 2*pi-periodic and piecewise linear.  Its
slope is antisymmetric around half a turn (j(theta + pi) = -j(theta)) and
only takes the values j*eta for integer j ("channels"), with

    j(theta) = trunc(mu * sin(theta) / eta)

truncated toward zero.  Slopes change where mu*sin(theta)/eta crosses an
integer, i.e. at the solutions of sin(theta) = m*eta/mu, so every breakpoint
has the closed form asin(m*eta/mu) up to reflection and wrapping.  The
largest reachable channel is J = floor(mu/eta) and there are 2J+1 channels
(the extreme ones degenerate to measure zero when mu/eta is an exact
integer).

V is anchored by V(0) = 0, so the slope antisymmetry shows up as
V(theta + pi) + V(theta) = V(pi) for every theta; only V' enters the
dynamics and the additive anchor is a pure convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi

__all__ = [
    "ChannelPotential",
    "build_potential",
    "channel_index",
    "kick_impulse",
    "potential_value",
    "channel_intervals",
]


@dataclass(frozen=True)
class ChannelPotential:
    """Channelized potential on [0, 2*pi).

    Attributes
    ----------
    mu : float
        Kick strength of the smooth parent potential.
    eta : float
        Momentum quantum; all slopes are integer multiples of it.
    max_channel : int
        J = floor(mu/eta); channels run over -J..J.
    breakpoints : ndarray
        Sorted angles in [0, 2*pi) where the slope may change.  The first
        entry is 0.0.  Segment i spans [breakpoints[i], breakpoints[i+1])
        with the last segment wrapping to 2*pi.
    segment_channels : ndarray
        Integer channel of each segment.
    breakpoint_values : ndarray
        V at each breakpoint, accumulated from V(0) = 0.
    """

    mu: float
    eta: float
    max_channel: int
    breakpoints: np.ndarray = field(repr=False)
    segment_channels: np.ndarray = field(repr=False)
    breakpoint_values: np.ndarray = field(repr=False)

    @property
    def channel_count(self) -> int:
        return 2 * self.max_channel + 1


def build_potential(mu: float, eta: float) -> ChannelPotential:
    """Construct the channelized potential for kick strength mu and quantum eta.

    Raises
    ------
    ValueError
        If mu or eta is not a positive finite number.
    """
    mu = float(mu)
    eta = float(eta)
    if not (math.isfinite(mu) and mu > 0.0):
        raise ValueError(f"mu must be positive and finite, got {mu!r}")
    if not (math.isfinite(eta) and eta > 0.0):
        raise ValueError(f"eta must be positive and finite, got {eta!r}")

    j_max = int(math.floor(mu / eta))
    points = []
    for m in range(-j_max, j_max + 1):
        c = m * eta / mu
        if abs(c) > 1.0:
            continue
        a = math.asin(c)
        points.append(a % TWO_PI)
        points.append((math.pi - a) % TWO_PI)
    breakpoints = np.unique(np.asarray(points, dtype=float))
    # asin(0) = 0 guarantees a breakpoint at exactly 0.0, anchoring V(0) = 0.
    assert breakpoints[0] == 0.0

    widths = np.diff(np.append(breakpoints, TWO_PI))
    midpoints = breakpoints + 0.5 * widths
    segment_channels = np.trunc(mu * np.sin(midpoints) / eta).astype(np.int64)

    slopes = segment_channels * eta
    values = np.concatenate(([0.0], np.cumsum(slopes * widths)[:-1]))

    return ChannelPotential(
        mu=mu,
        eta=eta,
        max_channel=j_max,
        breakpoints=breakpoints,
        segment_channels=segment_channels,
        breakpoint_values=values,
    )


def channel_index(pot: ChannelPotential, theta):
    """Channel j(theta) = trunc(mu*sin(theta)/eta), elementwise.

    At an exact breakpoint mu*sin(theta)/eta is an integer and truncation
    returns it unchanged, i.e. the larger-|j| side of the crossing.
    """
    theta = np.asarray(theta, dtype=float)
    j = np.trunc(pot.mu * np.sin(theta) / pot.eta)
    if j.ndim == 0:
        return int(j)
    return j.astype(np.int64)


def _segment_channel(pot: ChannelPotential, theta):
    """Channel via binary search on the breakpoint table.

    Cross-check path for :func:`channel_index`; the two agree away from
    exact breakpoints.
    """
    theta = np.asarray(theta, dtype=float)
    wrapped = np.mod(theta, TWO_PI)
    idx = np.searchsorted(pot.breakpoints, wrapped, side="right") - 1
    j = pot.segment_channels[idx]
    if j.ndim == 0:
        return int(j)
    return j


def kick_impulse(pot: ChannelPotential, theta):
    """Momentum transferred by one kick at angle theta: V'(theta) = j(theta)*eta."""
    return channel_index(pot, theta) * pot.eta


def potential_value(pot: ChannelPotential, theta):
    """V(theta), anchored by V(0) = 0 and accumulated from the quantized slopes."""
    theta = np.asarray(theta, dtype=float)
    wrapped = np.mod(theta, TWO_PI)
    idx = np.searchsorted(pot.breakpoints, wrapped, side="right") - 1
    base = pot.breakpoint_values[idx]
    slope = pot.segment_channels[idx] * pot.eta
    value = base + slope * (wrapped - pot.breakpoints[idx])
    if value.ndim == 0:
        return float(value)
    return value


def channel_intervals(pot: ChannelPotential, j: int) -> list[tuple[float, float]]:
    """Maximal arcs on which the channel equals j.

    Returns a list of (start, end) pairs with start in [0, 2*pi) and
    start < end <= start + 2*pi; an arc crossing angle zero is returned
    unwrapped (end > 2*pi).  Arcs where 2*V'(theta) = 2*j*eta feed the
    lattice coupling row at offset 2*j.
    """
    j = int(j)
    if abs(j) > pot.max_channel:
        return []
    starts = pot.breakpoints
    ends = np.append(pot.breakpoints[1:], TWO_PI)
    mask = pot.segment_channels == j
    arcs: list[tuple[float, float]] = []
    for a, b, keep in zip(starts, ends, mask):
        if not keep:
            continue
        if arcs and math.isclose(arcs[-1][1], a, rel_tol=0.0, abs_tol=1e-15):
            arcs[-1] = (arcs[-1][0], b)
        else:
            arcs.append((a, b))
    # merge across the 0/2*pi seam so wrap-around arcs come out maximal
    if len(arcs) > 1 and arcs[0][0] == 0.0 and math.isclose(arcs[-1][1], TWO_PI, abs_tol=1e-15):
        first = arcs.pop(0)
        last = arcs.pop()
        arcs.append((last[0], first[1] + TWO_PI))
    elif len(arcs) == 1 and arcs[0] == (0.0, TWO_PI):
        pass
    return arcs
