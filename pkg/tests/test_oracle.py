"""Tests for reference moments, assembled targets, bounds, and diagnostics."""

import math

import numpy as np
import pytest

from schurlsd.oracle import (
    assemble_moments,
    carleman_diagnostic,
    catalan_number,
    moment_bound,
    moment_matrix_is_psd,
    pair_matched_count,
    semicircle_cdf,
    semicircle_moments,
)
from schurlsd.words import canonicalize, enumerate_pair_matched, is_catalan


# --- counting helpers -------------------------------------------------------------


def test_catalan_numbers():
    assert [catalan_number(k) for k in range(7)] == [1, 1, 2, 5, 14, 42, 132]
    with pytest.raises(ValueError):
        catalan_number(-1)


def test_pair_matched_counts():
    assert [pair_matched_count(two_k) for two_k in (2, 4, 6, 8)] == [1, 3, 15, 105]
    for bad in (0, 3, -2):
        with pytest.raises(ValueError):
            pair_matched_count(bad)


# --- semicircle moments ------------------------------------------------------------


def test_semicircle_moments_catalan_pattern():
    ms = semicircle_moments(12)
    for h in range(1, 13):
        expected = float(catalan_number(h // 2)) if h % 2 == 0 else 0.0
        assert ms.moment(h) == expected
    with pytest.raises(ValueError):
        ms.moment(13)
    with pytest.raises(ValueError):
        semicircle_moments(0)


def test_semicircle_cdf_hand_values():
    assert semicircle_cdf(-2.5) == 0.0
    assert semicircle_cdf(-2.0) == pytest.approx(0.0, abs=1e-12)
    assert semicircle_cdf(0.0) == pytest.approx(0.5)
    assert semicircle_cdf(2.0) == pytest.approx(1.0)
    assert semicircle_cdf(3.0) == 1.0
    arr = semicircle_cdf(np.array([-3.0, 0.0, 3.0]))
    assert np.allclose(arr, [0.0, 0.5, 1.0])


def test_semicircle_cdf_moments_by_quadrature():
    """Stieltjes sums of x^h against the CDF reproduce the moment sequence."""
    xs = np.linspace(-2.0, 2.0, 2_000_001)
    cdf = semicircle_cdf(xs)
    mids = (xs[:-1] + xs[1:]) / 2.0
    steps = np.diff(cdf)
    ms = semicircle_moments(8)
    for h in range(1, 9):
        quad = float(np.sum(mids**h * steps))
        assert abs(quad - ms.moment(h)) <= 1e-6


# --- assembled targets ----------------------------------------------------------------


@pytest.mark.parametrize("two_k", [2, 4, 6, 8, 10, 12])
def test_wigner_p_table_assembles_to_semicircle(two_k):
    p_table = {w: (1.0 if is_catalan(w) else 0.0) for w in enumerate_pair_matched(two_k)}
    assert assemble_moments(p_table, two_k) == float(catalan_number(two_k // 2))


def test_assemble_moments_pair_form():
    words = enumerate_pair_matched(4)
    diag = {(w, w): 1.0 for w in words}
    assert assemble_moments(diag, 4) == pytest.approx(3.0)
    with_off = dict(diag)
    with_off[(words[0], words[1])] = 0.25
    assert assemble_moments(with_off, 4) == pytest.approx(3.25)


def test_assemble_moments_errors():
    words = enumerate_pair_matched(4)
    with pytest.raises(ValueError):
        assemble_moments({}, 4)
    missing = {w: 1.0 for w in words[:-1]}
    with pytest.raises(ValueError, match=str(words[-1])):
        assemble_moments(missing, 4)
    short_diag = {(w, w): 1.0 for w in words[:-1]}
    with pytest.raises(ValueError, match=str(words[-1])):
        assemble_moments(short_diag, 4)
    wrong_len = {w: 1.0 for w in enumerate_pair_matched(6)}
    with pytest.raises(ValueError):
        assemble_moments(wrong_len, 4)


# --- bounds ------------------------------------------------------------------------------


def test_moment_bound_values():
    assert moment_bound(2, 1) == 1
    assert moment_bound(4, 1) == 3
    assert moment_bound(4, 2) == 12
    assert moment_bound(6, 1) == 15
    assert moment_bound(6, 2) == 120
    assert moment_bound(8, 2) == 105 * 16
    with pytest.raises(ValueError):
        moment_bound(4, 0)


def test_semicircle_respects_its_own_bound():
    ms = semicircle_moments(12)
    for two_k in (2, 4, 6, 8, 10, 12):
        assert ms.moment(two_k) <= moment_bound(two_k, 1)


# --- Carleman diagnostic -----------------------------------------------------------------


def test_carleman_semicircle_is_divergent_like():
    report = carleman_diagnostic(semicircle_moments(24), k_max=12)
    assert report.trend == "divergent-like"
    assert report.partial_sum >= report.terms[0]
    assert report.lower_bound == pytest.approx(12 * report.terms[-1])


def test_carleman_factorial_growth_is_suspect():
    # beta_h = h!: even moments (2k)! grow too fast for the sum to visibly diverge
    values = [float(math.factorial(h)) for h in range(1, 25)]
    report = carleman_diagnostic(values, k_max=12)
    assert report.trend == "suspect"


def test_carleman_validation():
    with pytest.raises(ValueError):
        carleman_diagnostic(semicircle_moments(8), k_max=1)
    with pytest.raises(ValueError):
        carleman_diagnostic(semicircle_moments(6), k_max=4)
    with pytest.raises(ValueError):
        carleman_diagnostic([0.0, -1.0, 0.0, 1.0], k_max=2)


# --- moment-matrix sanity ------------------------------------------------------------------


def test_moment_matrix_psd_for_semicircle():
    assert moment_matrix_is_psd(semicircle_moments(12))


def test_moment_matrix_rejects_impossible_sequence():
    # beta_4 < beta_2^2 violates Cauchy-Schwarz, so no law has these moments
    assert not moment_matrix_is_psd([0.0, 1.0, 0.0, 0.5])
