"""Channelized potential: closed-form breakpoints, quantized slopes, symmetry."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.optimize import brentq

from gtmlab.potential import (
    TWO_PI,
    _segment_channel,
    build_potential,
    channel_index,
    channel_intervals,
    kick_impulse,
    potential_value,
)

# Frozen closed-form breakpoints for mu=3, eta=1.2 (sin(theta) = 0.4, 0.8).
ASIN_04 = 0.41151684606748806
ASIN_08 = 0.9272952180016123


@pytest.fixture(scope="module")
def pot312():
    return build_potential(3.0, 1.2)


def test_rejects_bad_parameters():
    for mu, eta in [(0.0, 1.0), (-3.0, 1.2), (3.0, 0.0), (3.0, -1.0),
                    (math.nan, 1.0), (1.0, math.inf)]:
        with pytest.raises(ValueError):
            build_potential(mu, eta)


def test_max_channel_examples(pot312):
    assert pot312.max_channel == 2
    assert pot312.channel_count == 5
    assert build_potential(1.0, 2.0).max_channel == 0
    assert build_potential(3.0, math.pi / 1.6180339887).max_channel == 1


def test_breakpoints_match_root_finder_oracle(pot312):
    # independent oracle: root-find sin(theta) = m*eta/mu on each quadrant
    assert abs(pot312.breakpoints[1] - ASIN_04) < 1e-12
    assert abs(pot312.breakpoints[2] - ASIN_08) < 1e-12
    for m in (1, 2):
        c = m * 1.2 / 3.0
        root = brentq(lambda t: math.sin(t) - c, 0.0, math.pi / 2, xtol=1e-14)
        assert abs(root - math.asin(c)) < 1e-12
        assert np.min(np.abs(pot312.breakpoints - root)) < 1e-12
        mirrored = brentq(lambda t: math.sin(t) - c, math.pi / 2, math.pi, xtol=1e-14)
        assert np.min(np.abs(pot312.breakpoints - mirrored)) < 1e-12


def test_breakpoint_partition_measure(pot312):
    widths = np.diff(np.append(pot312.breakpoints, TWO_PI))
    assert np.all(widths > 0)
    assert abs(widths.sum() - TWO_PI) < 1e-12


def test_slopes_are_exact_channel_multiples(pot312):
    theta = np.linspace(0.0, TWO_PI, 4096, endpoint=False)
    slopes = kick_impulse(pot312, theta)
    assert set(np.unique(slopes)) == {-2.4, -1.2, 0.0, 1.2, 2.4}


def test_channel_at_quarter_turn_truncates_toward_zero(pot312):
    # mu*sin(pi/2)/eta = 2.5 -> channel 2
    assert channel_index(pot312, math.pi / 2) == 2
    assert channel_index(pot312, 3 * math.pi / 2) == -2


def test_channel_index_agrees_with_binary_search(pot312):
    rng = np.random.default_rng(42)
    theta = rng.uniform(0.0, TWO_PI, 20000)
    # keep clear of breakpoints where the two conventions may differ
    dist = np.min(np.abs(theta[:, None] - pot312.breakpoints[None, :]), axis=1)
    theta = theta[dist > 1e-9]
    assert np.array_equal(channel_index(pot312, theta), _segment_channel(pot312, theta))


def test_antisymmetry_of_channels(pot312):
    rng = np.random.default_rng(7)
    theta = rng.uniform(0.0, TWO_PI, 10000)
    assert np.array_equal(channel_index(pot312, theta + math.pi),
                          -channel_index(pot312, theta))


def test_potential_antisymmetry_and_periodicity(pot312):
    # with the V(0) = 0 anchor, slope antisymmetry means
    # V(theta + pi) + V(theta) is the constant V(pi)
    rng = np.random.default_rng(11)
    theta = rng.uniform(0.0, TWO_PI, 2000)
    v = potential_value(pot312, theta)
    v_half = potential_value(pot312, math.pi)
    assert np.max(np.abs(potential_value(pot312, theta + math.pi) + v - v_half)) < 1e-12
    assert np.max(np.abs(potential_value(pot312, theta + TWO_PI) - v)) < 1e-12
    assert potential_value(pot312, 0.0) == 0.0


def test_potential_continuity_at_breakpoints(pot312):
    eps = 1e-13
    for b in pot312.breakpoints:
        left = potential_value(pot312, b - eps)
        right = potential_value(pot312, b + eps)
        assert abs(right - left) < 1e-12


def test_potential_value_matches_quadrature_oracle(pot312):
    # adaptive quadrature of the quantized slope, discontinuities declared
    for target in (math.pi / 3, math.pi, 5.0):
        pts = [b for b in pot312.breakpoints if 0.0 < b < target]
        oracle, err = quad(lambda t: kick_impulse(pot312, t), 0.0, target,
                           points=pts, limit=200)
        assert err < 1e-9
        assert abs(potential_value(pot312, target) - oracle) < 1e-6


def test_channel_intervals_examples(pot312):
    arcs = channel_intervals(pot312, 0)
    measure = sum(b - a for a, b in arcs)
    assert abs(measure - 4 * ASIN_04) < 1e-12
    # one arc straddles zero, one straddles pi
    assert len(arcs) == 2
    wrap = [a for a in arcs if a[1] > TWO_PI]
    assert len(wrap) == 1
    lo, hi = wrap[0]
    assert abs(lo - (TWO_PI - ASIN_04)) < 1e-12
    assert abs(hi - (TWO_PI + ASIN_04)) < 1e-12

    # single-channel potential covers the whole circle
    arcs0 = channel_intervals(build_potential(1.0, 2.0), 0)
    assert arcs0 == [(0.0, TWO_PI)]
    assert channel_intervals(pot312, 5) == []


def test_channel_intervals_cover_circle(pot312):
    total = 0.0
    for j in range(-pot312.max_channel, pot312.max_channel + 1):
        for a, b in channel_intervals(pot312, j):
            assert 0.0 <= a < TWO_PI
            assert a < b <= a + TWO_PI
            total += b - a
    assert abs(total - TWO_PI) < 1e-12


def test_interval_channels_match_pointwise(pot312):
    for j in range(-pot312.max_channel, pot312.max_channel + 1):
        for a, b in channel_intervals(pot312, j):
            mids = np.linspace(a, b, 17)[1:-1]
            assert np.all(channel_index(pot312, mids) == j)


def test_smooth_limit_sup_distance_decreases():
    # as eta -> 0 the potential approaches mu*(1 - cos(theta))
    mu = 3.0
    theta = np.linspace(0.0, TWO_PI, 8192, endpoint=False)
    smooth = -mu * np.cos(theta) + mu
    sups = []
    for eta in (0.5, 0.25, 0.125):
        pot = build_potential(mu, eta)
        sups.append(np.max(np.abs(potential_value(pot, theta) - smooth)))
    assert sups[0] > sups[1] > sups[2]


@settings(max_examples=60, deadline=None)
@given(
    mu=st.floats(min_value=0.3, max_value=12.0),
    eta=st.floats(min_value=0.05, max_value=5.0),
)
def test_partition_and_antisymmetry_property(mu, eta):
    pot = build_potential(mu, eta)
    widths = np.diff(np.append(pot.breakpoints, TWO_PI))
    assert abs(widths.sum() - TWO_PI) < 1e-12
    assert np.all(widths >= 0)
    assert np.max(np.abs(pot.segment_channels)) <= pot.max_channel

    rng = np.random.default_rng(3)
    theta = rng.uniform(0.0, TWO_PI, 512)
    assert np.array_equal(channel_index(pot, theta + math.pi),
                          -channel_index(pot, theta))
    v = potential_value(pot, theta)
    v_half = potential_value(pot, math.pi)
    assert np.max(np.abs(potential_value(pot, theta + math.pi) + v - v_half)) < 1e-10
