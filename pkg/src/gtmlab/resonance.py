"""Integer dynamics of the reduced map at commensurate parameters.

When the angle increment ``lambda = beta/r = eta/s`` is a rational multiple
of 2*pi, say ``lambda = 2*pi*P/Q`` with gcd(P, Q) = 1, every angle visited
by the reduced map lies on the lattice ``theta0 + (2*pi/Q)*Z``.  Writing
the momentum as ``p = N*lambda`` (so ``N = r + n*s``), one kick becomes an
exact integer update

    N' = N + phi(M),    M' = M + N',

where ``theta = theta0 + M*lambda`` and ``phi(M) = s * channel_index(theta0
+ M*lambda)`` is periodic in M with period Q.  The update permutes the
Q x Q torus of ``(N mod Q, M mod Q)`` states, so every orbit is periodic up
to winding: after one period T the unwrapped integers advance by exactly
``(L*Q, K*Q)``.  Orbits with L != 0 gain ``L*Q*lambda/T`` momentum per kick
on average, which makes the ensemble-mean kinetic energy grow as t**2.

All updates use Python integers (arbitrary precision), so arbitrarily long
orbits are exact and overflow is impossible.  Angles of the lattice are
generated from the exact residue ``(M*P) mod Q``, never from accumulated
floating-point products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import gcd

import numpy as np

from .potential import TWO_PI, ChannelPotential, build_potential, channel_index

__all__ = [
    "BallisticPrediction",
    "CycleCensus",
    "ResonanceParams",
    "TorusCycle",
    "angle_averaged_prediction",
    "ballistic_coefficient",
    "cycle_census",
    "find_cycle",
    "integer_orbit",
    "integer_step",
    "inverse_integer_step",
    "lattice_angle",
    "resonance_params",
]


@dataclass(frozen=True)
class ResonanceParams:
    """Commensurate parameter set and the channel table of one angle seed.

    ``lam = 2*pi*P/Q`` is the elementary angle/momentum quantum;
    ``eta = s*lam`` and ``beta = r*lam`` with gcd(r, s) = 1, 0 <= r < s.
    ``phi[m]`` holds s times the kick channel at angle
    ``theta0 + 2*pi*((m*P) mod Q)/Q``.
    """

    mu: float
    P: int
    Q: int
    r: int
    s: int
    theta0: float
    lam: float
    eta: float
    beta: float
    phi: tuple[int, ...]
    potential: ChannelPotential


@dataclass(frozen=True)
class TorusCycle:
    """One periodic orbit of the torus map, with its winding numbers.

    Applying the integer map ``period`` times to the unwrapped start
    ``(N0, M0)`` yields exactly ``(N0 + momentum_winding*Q,
    M0 + angle_winding*Q)``.  ``start`` stores ``(N0 mod Q, M0 mod Q)``.
    """

    period: int
    angle_winding: int
    momentum_winding: int
    start: tuple[int, int]


@dataclass(frozen=True)
class CycleCensus:
    """Aggregate cycle statistics over torus states at one angle seed."""

    states: int
    ballistic_fraction: float
    mean_square_coefficient: float
    max_abs_coefficient: float
    max_period: int
    pairs: dict[tuple[int, int], int]
    mode: str


@dataclass(frozen=True)
class BallisticPrediction:
    """Exact angle-averaged ballistic statistics for a fixed start state.

    The channel table is piecewise constant in the angle seed theta0, so
    averaging over theta0 uniform on the circle reduces to a finite sum
    over arcs.  ``arc_coefficients`` holds ``(a, b, c)`` per arc: on
    theta0 in (a, b) the orbit launched from the start state has average
    momentum gain c per kick.
    """

    mean_square_coefficient: float
    ballistic_fraction: float
    arc_coefficients: tuple[tuple[float, float, float], ...]


def resonance_params(
    mu: float,
    P: int,
    Q: int,
    *,
    r: int = 0,
    s: int = 1,
    theta0: float = 0.0,
) -> ResonanceParams:
    """Build the commensurate parameter set for lambda = 2*pi*P/Q.

    Raises ValueError unless P, Q are coprime positive integers and
    0 <= r < s with gcd(r, s) = 1 (so beta = r*lam lies in [0, eta)).
    """
    for name, value in (("P", P), ("Q", Q), ("r", r), ("s", s)):
        if not isinstance(value, int):
            raise ValueError(f"{name} must be an integer, got {value!r}")
    if P < 1 or Q < 1:
        raise ValueError(f"P and Q must be positive, got P={P}, Q={Q}")
    if gcd(P, Q) != 1:
        raise ValueError(f"P={P} and Q={Q} must be coprime")
    if s < 1 or not 0 <= r < s:
        raise ValueError(f"need 0 <= r < s with s >= 1, got r={r}, s={s}")
    if gcd(r, s) != 1:
        raise ValueError(f"r={r} and s={s} must be coprime")
    if not math.isfinite(theta0):
        raise ValueError(f"theta0 must be finite, got {theta0!r}")

    lam = TWO_PI * P / Q
    eta = lam * s
    beta = lam * r
    pot = build_potential(mu, eta)
    theta0 = theta0 % TWO_PI
    phi = tuple(
        s * channel_index(pot, lattice_angle(theta0, m, P, Q)) for m in range(Q)
    )
    return ResonanceParams(
        mu=mu, P=P, Q=Q, r=r, s=s, theta0=theta0,
        lam=lam, eta=eta, beta=beta, phi=phi, potential=pot,
    )


def lattice_angle(theta0: float, M: int, P: int, Q: int) -> float:
    """Angle theta0 + M*lambda reduced to [0, 2*pi), computed exactly.

    The multiple of lambda is reduced through the integer residue
    (M*P) mod Q before any floating-point product, so the result does not
    lose accuracy for large M.
    """
    return (theta0 + TWO_PI * ((M * P) % Q) / Q) % TWO_PI


def integer_step(params: ResonanceParams, N: int, M: int) -> tuple[int, int]:
    """One exact kick: N' = N + phi(M mod Q), M' = M + N'."""
    N2 = N + params.phi[M % params.Q]
    return N2, M + N2


def inverse_integer_step(params: ResonanceParams, N: int, M: int) -> tuple[int, int]:
    """Exact inverse kick: M0 = M - N, N0 = N - phi(M0 mod Q)."""
    M0 = M - N
    return N - params.phi[M0 % params.Q], M0


def integer_orbit(
    params: ResonanceParams, N0: int, M0: int, steps: int
) -> tuple[list[int], list[int]]:
    """Unwrapped orbit (N_t, M_t) for t = 0..steps, as exact integers."""
    Ns = [N0]
    Ms = [M0]
    N, M = N0, M0
    for _ in range(steps):
        N, M = integer_step(params, N, M)
        Ns.append(N)
        Ms.append(M)
    return Ns, Ms


def find_cycle(params: ResonanceParams, N0: int, M0: int) -> TorusCycle:
    """Period and winding numbers of the torus orbit through (N0, M0).

    Iterates until the wrapped state first returns to its start; the torus
    map is a permutation of Q*Q states, so this happens within Q**2 steps.
    Winding numbers are read off the unwrapped integers: after ``period``
    steps they have advanced by (momentum_winding*Q, angle_winding*Q)
    relative to the unwrapped start actually supplied.
    """
    Q = params.Q
    start = (N0 % Q, M0 % Q)
    N, M = N0, M0
    for t in range(1, Q * Q + 1):
        N, M = integer_step(params, N, M)
        if (N % Q, M % Q) == start:
            dN = N - N0
            dM = M - M0
            if dN % Q or dM % Q:
                raise RuntimeError("winding numbers are not integral")
            return TorusCycle(
                period=t,
                angle_winding=dM // Q,
                momentum_winding=dN // Q,
                start=start,
            )
    raise RuntimeError("no return within Q**2 steps; torus map not a permutation")


def ballistic_coefficient(cycle: TorusCycle, params: ResonanceParams) -> float:
    """Average momentum gain per kick along the cycle: L*Q*lambda/T.

    Orbits with nonzero momentum winding L transport momentum at this
    constant mean rate, so their kinetic energy grows quadratically.
    """
    return cycle.momentum_winding * params.Q * params.lam / cycle.period


def cycle_census(
    params: ResonanceParams,
    sample: int | None = None,
    seed: int = 0,
) -> CycleCensus:
    """Statistics of (period, momentum winding) over the Q x Q torus.

    With ``sample=None`` every state is enumerated by walking each
    permutation cycle once (requires Q <= 2000).  Otherwise ``sample``
    start states are drawn uniformly with a counter-based generator.
    ``pairs`` maps (period, momentum_winding) to the number of states on
    such cycles; the mean square coefficient is taken state-by-state.
    """
    Q = params.Q
    pairs: dict[tuple[int, int], int] = {}
    sum_c2 = 0.0
    ballistic = 0
    max_abs_c = 0.0
    max_period = 0

    if sample is None:
        if Q > 2000:
            raise ValueError(
                f"exhaustive census over Q**2 = {Q*Q} states is too large; "
                "pass sample=<count> for Q > 2000"
            )
        visited = bytearray(Q * Q)
        for n0 in range(Q):
            for m0 in range(Q):
                if visited[n0 * Q + m0]:
                    continue
                N, M = n0, m0
                period = 0
                while True:
                    visited[(N % Q) * Q + (M % Q)] = 1
                    N, M = integer_step(params, N, M)
                    period += 1
                    if N % Q == n0 and M % Q == m0:
                        break
                L = (N - n0) // Q
                c = L * Q * params.lam / period
                key = (period, L)
                pairs[key] = pairs.get(key, 0) + period
                sum_c2 += period * c * c
                if L != 0:
                    ballistic += period
                max_abs_c = max(max_abs_c, abs(c))
                max_period = max(max_period, period)
        states = Q * Q
        mode = "exhaustive"
    else:
        if sample < 1:
            raise ValueError(f"sample must be positive, got {sample}")
        rng = np.random.Generator(np.random.Philox(key=seed))
        starts = rng.integers(0, Q, size=(sample, 2))
        for n0, m0 in starts:
            cyc = find_cycle(params, int(n0), int(m0))
            c = ballistic_coefficient(cyc, params)
            key = (cyc.period, cyc.momentum_winding)
            pairs[key] = pairs.get(key, 0) + 1
            sum_c2 += c * c
            if cyc.momentum_winding != 0:
                ballistic += 1
            max_abs_c = max(max_abs_c, abs(c))
            max_period = max(max_period, cyc.period)
        states = sample
        mode = "sampled"

    return CycleCensus(
        states=states,
        ballistic_fraction=ballistic / states,
        mean_square_coefficient=sum_c2 / states,
        max_abs_coefficient=max_abs_c,
        max_period=max_period,
        pairs=pairs,
        mode=mode,
    )


def _critical_angles(pot: ChannelPotential, P: int, Q: int) -> list[float]:
    """Sorted angle seeds where some entry of the channel table switches.

    phi[m] changes where theta0 + 2*pi*((m*P) mod Q)/Q crosses a kink of
    the kick, i.e. at theta0 = kink - lattice offset (mod 2*pi).  Nearby
    duplicates (within 1e-12) are merged.
    """
    crit = set()
    for b in pot.breakpoints:
        for m in range(Q):
            crit.add((float(b) - TWO_PI * ((m * P) % Q) / Q) % TWO_PI)
    vals = sorted(crit)
    merged: list[float] = []
    for v in vals:
        if not merged or v - merged[-1] > 1e-12:
            merged.append(v)
    # the list is cyclic: drop the last entry if it sits on top of the first
    if len(merged) > 1 and (merged[0] + TWO_PI) - merged[-1] <= 1e-12:
        merged.pop()
    return merged


def angle_averaged_prediction(
    mu: float,
    P: int,
    Q: int,
    *,
    r: int = 0,
    s: int = 1,
    n0: int = 0,
) -> BallisticPrediction:
    """Exact mean square ballistic coefficient over a uniform angle seed.

    For the ensemble launched from momentum p0 = beta + n0*eta (integer
    start N0 = r + n0*s, M0 = 0) with theta0 uniform on the circle, the
    channel table -- hence the whole integer orbit -- is constant on each
    arc between consecutive critical seeds, so the average of c**2 is the
    measure-weighted finite sum over arcs.  This is the exact coefficient
    of the t**2 law measured by ensemble simulation at the same
    parameters.
    """
    base = resonance_params(mu, P, Q, r=r, s=s, theta0=0.0)
    crit = _critical_angles(base.potential, P, Q)
    if not crit:
        crit = [0.0]
    N0 = r + n0 * s
    arcs: list[tuple[float, float, float]] = []
    mean_c2 = 0.0
    ballistic_measure = 0.0
    for i, a in enumerate(crit):
        b = crit[i + 1] if i + 1 < len(crit) else crit[0] + TWO_PI
        mid = 0.5 * (a + b)
        params = resonance_params(mu, P, Q, r=r, s=s, theta0=mid)
        cyc = find_cycle(params, N0, 0)
        c = ballistic_coefficient(cyc, params)
        w = (b - a) / TWO_PI
        mean_c2 += w * c * c
        if cyc.momentum_winding != 0:
            ballistic_measure += w
        arcs.append((a, b, c))
    return BallisticPrediction(
        mean_square_coefficient=mean_c2,
        ballistic_fraction=ballistic_measure,
        arc_coefficients=tuple(arcs),
    )
