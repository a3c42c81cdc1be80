"""Tests for hopping tables, on-site phases, and pseudorandomness checks."""

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special
from scipy.integrate import quad
from scipy.stats import linregress

from gtmlab.lattice import (
    CouplingTable,
    OnSitePhaseGen,
    apply_row,
    chi_values,
    decay_profile,
    gtm_couplings,
    onsite_sequence,
    pseudorandomness_diagnostic,
    qkr_halfkick_couplings,
    qkr_tan_couplings,
)
from gtmlab.potential import TWO_PI, build_potential, channel_intervals

GOLDEN_MEAN = (1.0 + math.sqrt(5.0)) / 2.0


# ---------------------------------------------------------------------------
# channelized-kick couplings


def test_center_coupling_matches_arc_measure():
    # mu=3, eta=1.2: the zero-channel arcs are |sin(theta)| < 0.4, total
    # measure 4*asin(0.4), and W(0,0) is that measure over 2*pi.
    table = gtm_couplings(build_potential(3.0, 1.2), max_dk=8)
    exact = 4.0 * math.asin(0.4) / TWO_PI
    assert table.value(0, 0) == pytest.approx(exact, abs=1e-14)


def test_zero_harmonic_column_sums_to_one():
    table = gtm_couplings(build_potential(3.0, 1.2), max_dk=4)
    total = sum(table.value(dn, 0) for dn in table.dn_values)
    assert total == pytest.approx(1.0, abs=1e-12)


def test_structural_zeros_and_window():
    pot = build_potential(3.0, 1.2)
    table = gtm_couplings(pot, max_dk=16)
    J = pot.max_channel
    for dn in range(-2 * J + 1, 2 * J, 2):
        assert np.all(table.values[dn + 2 * J] == 0.0)
    # beyond the band window the couplings vanish identically
    assert table.value(2 * J + 2, 3) == 0.0
    assert table.value(-2 * J - 4, 0) == 0.0
    with pytest.raises(KeyError):
        table.value(0, 17)


def test_qkr_window_raises_outside():
    table = qkr_halfkick_couplings(1.0, 1.0, cutoff=4)
    with pytest.raises(KeyError):
        table.value(5, 0)
    with pytest.raises(KeyError):
        table.value(0, -5)


def test_rejects_bad_cutoffs():
    pot = build_potential(3.0, 1.2)
    with pytest.raises(ValueError):
        gtm_couplings(pot, max_dk=0)
    with pytest.raises(ValueError):
        qkr_halfkick_couplings(1.0, 1.0, cutoff=0)
    with pytest.raises(ValueError):
        qkr_halfkick_couplings(-1.0, 1.0)
    with pytest.raises(ValueError):
        qkr_halfkick_couplings(1.0, 0.0)


@settings(max_examples=30, deadline=None)
@given(
    mu=st.floats(0.5, 8.0),
    eta=st.floats(0.3, 3.0),
    dk=st.integers(-24, 24),
    channel=st.integers(-8, 8),
)
def test_coupling_symmetries(mu, eta, dk, channel):
    pot = build_potential(mu, eta)
    j = channel % (pot.max_channel + 1)
    dn = 2 * j
    table = gtm_couplings(pot, max_dk=24)
    w = table.value(dn, dk)
    # indicator functions are real: conjugate symmetry in the harmonic index
    assert table.value(dn, -dk) == pytest.approx(np.conj(w), abs=1e-13)
    # opposite channels are the half-period translates of each other
    assert table.value(-dn, dk) == pytest.approx((-1) ** dk * w, abs=1e-13)
    assert table.value(-dn, -dk) == pytest.approx(w, abs=1e-13)
    # even harmonics are real, odd harmonics purely imaginary
    if dk % 2 == 0:
        assert abs(w.imag) < 1e-13
    else:
        assert abs(w.real) < 1e-13


def _quadrature_coupling(pot, dn, dk):
    if dn % 2 or abs(dn) > 2 * pot.max_channel:
        return 0.0 + 0.0j
    total = 0.0 + 0.0j
    for a, b in channel_intervals(pot, dn // 2):
        if dk == 0:
            total += (b - a) / TWO_PI
        else:
            re, _ = quad(lambda t: 1.0, a, b, weight="cos", wvar=dk, epsabs=1e-14)
            im, _ = quad(lambda t: 1.0, a, b, weight="sin", wvar=dk, epsabs=1e-14)
            total += (re - 1j * im) / TWO_PI
    return total


def test_closed_form_matches_quadrature():
    pot = build_potential(3.0, 1.2)
    table = gtm_couplings(pot, max_dk=64)
    rng = np.random.default_rng(42)
    for _ in range(50):
        dn = 2 * int(rng.integers(-pot.max_channel, pot.max_channel + 1))
        dk = int(rng.integers(-64, 65))
        assert table.value(dn, dk) == pytest.approx(
            _quadrature_coupling(pot, dn, dk), abs=1e-10
        )


def _parseval_tail(pot, j, cutoff):
    """Exact sum of |W(2j, dk)|^2 over |dk| > cutoff.

    |W(k)|^2 = |sum of signed edge exponentials|^2 / (2*pi*k)^2 expands
    into pairwise cosine sums, summed over k > cutoff via the dilogarithm:
    sum_{k>K} cos(k*d)/k^2 = Re Li2(e^{i*d}) - partial sum.
    """
    edges = []
    for a, b in channel_intervals(pot, j):
        edges.append((a, 1.0))
        edges.append((b, -1.0))
    k = np.arange(1, cutoff + 1, dtype=float)
    total = mpmath.mpf(0)
    for e1, s1 in edges:
        for e2, s2 in edges:
            d = e1 - e2
            full = mpmath.re(mpmath.polylog(2, mpmath.exp(1j * mpmath.mpf(d))))
            partial = float(np.sum(np.cos(k * d) / k**2))
            total += s1 * s2 * (full - partial)
    # factor 2 for negative harmonics, 1/(2 pi)^2 from the coupling norm
    return float(2 * total) / (TWO_PI**2)


def test_row_power_matches_arc_measure():
    # Parseval per band row: the harmonic power of an indicator equals its
    # measure over 2*pi; the truncation tail is restored analytically.
    pot = build_potential(3.0, 1.2)
    cutoff = 2**14
    table = gtm_couplings(pot, max_dk=cutoff)
    for j in range(-pot.max_channel, pot.max_channel + 1):
        row = table.values[2 * j + 2 * pot.max_channel]
        partial = float(np.sum(np.abs(row) ** 2))
        tail = _parseval_tail(pot, j, cutoff)
        measure = sum(b - a for a, b in channel_intervals(pot, j))
        assert partial + tail == pytest.approx(measure / TWO_PI, abs=1e-8)
        assert tail > 1e-7  # the tail genuinely matters at this tolerance


def test_harmonic_decay_bounded_for_rich_channels():
    # With several channels the product |dk| * max|W| stays within a
    # factor 10 across dk in [16, 1024].
    table = gtm_couplings(build_potential(6.0, 0.9), max_dk=1024)
    offsets, profile = decay_profile(table, "k")
    sel = (offsets >= 16) & (offsets <= 1024)
    scaled = offsets[sel] * profile[sel]
    assert scaled.max() / scaled.min() < 10.0


def test_harmonic_decay_ratio_diverges_for_single_channel():
    # With one channel the oscillating arc factors dip together and the
    # factor-10 envelope genuinely fails: the bound needs rich channels.
    pot = build_potential(3.0, math.pi / GOLDEN_MEAN)
    assert pot.max_channel == 1
    table = gtm_couplings(pot, max_dk=1024)
    offsets, profile = decay_profile(table, "k")
    sel = (offsets >= 16) & (offsets <= 1024)
    scaled = offsets[sel] * profile[sel]
    assert scaled.max() / scaled.min() > 100.0


def test_decay_profile_layout():
    pot = build_potential(3.0, 1.2)
    table = gtm_couplings(pot, max_dk=32)
    offs_n, prof_n = decay_profile(table, "n")
    assert offs_n.tolist() == list(range(2 * pot.max_channel + 1))
    assert np.all(prof_n[1::2] == 0.0)
    offs_k, prof_k = decay_profile(table, "k")
    assert offs_k.size == 33
    mags = table.magnitudes
    for dk in (0, 7, 32):
        col = np.maximum(mags[:, 32 + dk], mags[:, 32 - dk])
        assert prof_k[dk] == pytest.approx(col.max(), abs=0)
    with pytest.raises(ValueError):
        decay_profile(table, "x")


# ---------------------------------------------------------------------------
# quantum-rotor couplings


def test_halfkick_zero_strength_is_identity():
    table = qkr_halfkick_couplings(0.0, 1.0, cutoff=8)
    expect = np.zeros_like(table.values)
    expect[8, 8] = 1.0
    np.testing.assert_array_equal(table.values, expect)


def test_tan_zero_strength_is_empty():
    table = qkr_tan_couplings(0.0, 1.0, cutoff=8)
    assert np.all(table.values == 0.0)


def test_halfkick_total_power_is_unity():
    # the generating function has unit modulus, so the coefficient power
    # sums to one; the window tail is far below the stated tolerance
    table = qkr_halfkick_couplings(2.0, 1.0, cutoff=32)
    assert np.sum(np.abs(table.values) ** 2) == pytest.approx(1.0, abs=1e-12)


def test_halfkick_matches_bessel_expansion():
    # expanding e^{-i x sin(theta) sin(phi)} in phi-harmonics gives
    # W(n, k) as the n-th Fourier coefficient of J_{-k}(x sin(theta))
    x = 2.0
    table = qkr_halfkick_couplings(2.0, 1.0, cutoff=32)

    def oracle(n, k):
        re, _ = quad(
            lambda t: special.jv(-k, x * math.sin(t)) * math.cos(n * t),
            0.0, TWO_PI, epsabs=1e-13, limit=200,
        )
        im, _ = quad(
            lambda t: special.jv(-k, x * math.sin(t)) * math.sin(n * t),
            0.0, TWO_PI, epsabs=1e-13, limit=200,
        )
        return (re - 1j * im) / TWO_PI

    for n, k in [(0, 0), (1, 1), (2, 2), (3, 1), (-2, 4), (5, -3), (0, 2), (4, -2)]:
        assert table.value(n, k) == pytest.approx(oracle(n, k), abs=1e-10)


def test_halfkick_parity_structure():
    table = qkr_halfkick_couplings(2.0, 1.0, cutoff=8)
    for n in range(-8, 9):
        for k in range(-8, 9):
            w = table.value(n, k)
            if (n + k) % 2:
                assert abs(w) < 1e-15
            elif n % 2 == 0:
                assert abs(w.imag) < 1e-14
            else:
                assert abs(w.real) < 1e-14


def test_halfkick_decay_is_exponential():
    table = qkr_halfkick_couplings(2.0, 1.0, cutoff=32)
    offsets, profile = decay_profile(table, "k")
    mask = (profile > 1e-13) & (offsets >= 3)
    fit = linregress(offsets[mask], np.log(profile[mask]))
    assert abs(fit.rvalue) > 0.99
    assert fit.slope < -1.0


def test_tables_symmetric_in_axes():
    # both generating functions are symmetric under swapping the angles
    for table in (
        qkr_halfkick_couplings(1.7, 1.0, cutoff=12),
        qkr_tan_couplings(0.9, 1.0, cutoff=12),
    ):
        np.testing.assert_allclose(table.values, table.values.T, atol=1e-14)


def test_tan_support_is_odd_odd():
    table = qkr_tan_couplings(0.5, 1.0, cutoff=16)
    nn, kk = np.meshgrid(table.dn_values, table.dk_values, indexing="ij")
    outside = (nn % 2 == 0) | (kk % 2 == 0)
    assert np.abs(table.values[outside]).max() < 1e-15


def test_tan_coefficients_decay_fast():
    table = qkr_tan_couplings(0.5, 1.0, cutoff=32)
    nn, kk = np.meshgrid(table.dn_values, table.dk_values, indexing="ij")
    radius = np.maximum(np.abs(nn), np.abs(kk))
    assert np.abs(table.values)[radius >= 20].max() < 1e-8


def test_tan_matches_direct_quadrature():
    x = 0.5
    table = qkr_tan_couplings(x, 1.0, cutoff=8)

    def oracle(n, k):
        # odd-odd coefficients of a real function odd in both angles
        def inner(t):
            r, _ = quad(
                lambda p: math.tan(x * math.sin(t) * math.sin(p)) * math.sin(k * p),
                0.0, TWO_PI, epsabs=1e-12, limit=200,
            )
            return r

        out, _ = quad(lambda t: inner(t) * math.sin(n * t), 0.0, TWO_PI,
                      epsabs=1e-11, limit=200)
        return -out / TWO_PI**2

    for n, k in [(1, 1), (3, 1), (1, 5)]:
        got = table.value(n, k)
        assert abs(got.imag) < 1e-14
        assert got.real == pytest.approx(oracle(n, k), abs=1e-12)


def test_tan_rejects_singular_strength():
    with pytest.raises(ValueError, match="non-integrable"):
        qkr_tan_couplings(2.0, 1.0)
    with pytest.raises(ValueError, match="half-kick"):
        qkr_tan_couplings(math.pi / 2, 1.0)


def test_results_independent_of_starting_grid():
    a = qkr_halfkick_couplings(2.0, 1.0, cutoff=16, grid=256)
    b = qkr_halfkick_couplings(2.0, 1.0, cutoff=16, grid=1024)
    np.testing.assert_allclose(a.values, b.values, atol=1e-12)


# ---------------------------------------------------------------------------
# on-site phases


def test_chi_closed_form_examples():
    gen = OnSitePhaseGen(scale=0.8, beta=0.3, omega=0.0)
    k = np.arange(-5, 6)
    np.testing.assert_allclose(chi_values(gen, 0, k), -gen.beta * k / 2.0, atol=0)
    n = np.arange(-5, 6)
    np.testing.assert_array_equal(chi_values(gen, n, 0), np.zeros(11))
    shifted = OnSitePhaseGen(scale=0.8, beta=0.3, omega=1.234)
    # chi depends on the spectral parameter only through the shift omega/2
    assert chi_values(shifted, 5, 9) - chi_values(gen, 5, 9) == pytest.approx(
        0.617, abs=1e-15
    )


def test_onsite_table_flags_poles():
    gen = OnSitePhaseGen(scale=1.0, beta=0.5, omega=math.pi)
    table = onsite_sequence(gen, [0, 1], [0, 1])
    assert table.pole[0, 0]  # chi = pi/2 exactly
    assert np.isnan(table.z[0, 0])
    assert not table.pole[1, 1]
    assert np.isfinite(table.z[1, 1])
    assert table.chi.shape == (2, 2)
    assert table.chi[0, 0] == pytest.approx(math.pi / 2, abs=0)


def test_rational_parameters_give_exact_periods():
    # scale = 2*pi/5 and beta = 2*pi/3 make chi mod pi periodic with
    # period 10 in the band index and 30 in the harmonic index
    gen = OnSitePhaseGen(scale=TWO_PI / 5, beta=TWO_PI / 3, omega=0.7)
    table = onsite_sequence(gen, np.arange(40), np.arange(90))
    frac = np.mod(table.chi, math.pi)

    def circ_gap(a, b):
        d = np.abs(a - b)
        return np.minimum(d, math.pi - d).max()

    assert circ_gap(frac[0:20], frac[10:30]) < 1e-9
    assert circ_gap(frac[:, 0:30], frac[:, 30:60]) < 1e-9


def test_rational_row_takes_finitely_many_values():
    # scale = 2*pi/Q, beta = 0: a row at harmonic k steps by pi*k/(2Q)
    # mod pi, so it visits 2Q/gcd(k, 2Q) values: 2Q for odd k, Q for even
    gen = OnSitePhaseGen(scale=TWO_PI / 5, beta=0.0, omega=0.3)
    n = np.arange(10_000)
    row1 = np.mod(chi_values(gen, n, 1), math.pi)
    row2 = np.mod(chi_values(gen, n, 2), math.pi)
    assert len(set(np.round(row1, 9))) == 10
    assert len(set(np.round(row2, 9))) == 5


# ---------------------------------------------------------------------------
# applying the phased hopping sum


def test_apply_row_matches_brute_force():
    pot = build_potential(3.0, 1.2)
    table = gtm_couplings(pot, max_dk=3)
    gen = OnSitePhaseGen(scale=pot.eta, beta=0.37, omega=0.9)
    rng = np.random.default_rng(5)
    field = rng.normal(size=(6, 7)) + 1j * rng.normal(size=(6, 7))
    n0, k0 = -2, 4
    got = apply_row(table, gen, field, n0=n0, k0=k0)
    expect = np.zeros_like(got)
    mags, phs = table.magnitudes, table.phases
    for i in range(6):
        for j in range(7):
            acc = 0.0 + 0.0j
            for a, dn in enumerate(table.dn_values):
                for b, dk in enumerate(table.dk_values):
                    si, sj = i - dn, j - dk
                    if 0 <= si < 6 and 0 <= sj < 7:
                        chi = float(chi_values(gen, n0 + si, k0 + sj))
                        acc += mags[a, b] * math.sin(chi + phs[a, b]) * field[si, sj]
            expect[i, j] = acc
    np.testing.assert_allclose(got, expect, atol=1e-12)


def test_apply_row_is_linear_and_validates():
    table = qkr_halfkick_couplings(1.0, 1.0, cutoff=4)
    gen = OnSitePhaseGen(scale=1.0, beta=0.2, omega=0.5)
    rng = np.random.default_rng(9)
    u = rng.normal(size=(5, 5))
    v = rng.normal(size=(5, 5))
    left = apply_row(table, gen, 2.0 * u + v)
    right = 2.0 * apply_row(table, gen, u) + apply_row(table, gen, v)
    np.testing.assert_allclose(left, right, atol=1e-12)
    with pytest.raises(ValueError):
        apply_row(table, gen, np.zeros(5))


# ---------------------------------------------------------------------------
# pseudorandomness diagnostics


def _golden_gen(omega=1.0):
    scale = math.pi / GOLDEN_MEAN
    return OnSitePhaseGen(scale=scale, beta=scale / math.sqrt(2.0), omega=omega)


def test_incommensurate_phases_pass_diagnostic():
    report = pseudorandomness_diagnostic(_golden_gen())
    assert report.passed
    for s in report.slices:
        assert s.ks_distance < report.ks_threshold
    diag = report.slice_named("diagonal")
    assert diag.max_autocorrelation < report.autocorr_threshold
    assert diag.autocorrelation[0] == pytest.approx(1.0, abs=0)


def test_linear_slices_stay_sign_correlated():
    # rows and columns are arithmetic progressions mod pi: they pass the
    # equidistribution test yet their sign sequences keep order-one
    # correlations, which is why only the diagonal gates decorrelation
    report = pseudorandomness_diagnostic(_golden_gen())
    assert report.slice_named("row").max_autocorrelation > 0.5
    assert report.slice_named("column").max_autocorrelation > 0.5


def test_constant_slice_fails_equidistribution():
    report = pseudorandomness_diagnostic(_golden_gen(), row_k=0)
    assert report.slice_named("row").ks_distance > 0.5
    assert not report.passed


def test_diagnostic_validation_and_lookup():
    with pytest.raises(ValueError):
        pseudorandomness_diagnostic(_golden_gen(), length=10, max_lag=50)
    report = pseudorandomness_diagnostic(_golden_gen(), length=500)
    with pytest.raises(KeyError):
        report.slice_named("antidiagonal")


def test_diagnostic_is_deterministic():
    a = pseudorandomness_diagnostic(_golden_gen())
    b = pseudorandomness_diagnostic(_golden_gen())
    assert a.slice_named("diagonal").ks_distance == b.slice_named("diagonal").ks_distance
    np.testing.assert_array_equal(
        a.slice_named("row").autocorrelation, b.slice_named("row").autocorrelation
    )


def test_table_dataclass_round_trip():
    offsets = np.array([-1, 0, 1])
    values = np.array([[0.0, 0.5j, 0.0]] * 3, dtype=complex)
    table = CouplingTable(
        model="custom",
        dn_values=offsets,
        dk_values=offsets.copy(),
        values=values,
        params={"mu": 1.0},
    )
    assert table.value(0, 0) == 0.5j
    assert table.magnitudes[1, 1] == 0.5
    assert table.phases[1, 1] == pytest.approx(math.pi / 2)
