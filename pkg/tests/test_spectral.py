"""Tests for spectra, moment estimation, ESD, KS distance, and histograms."""

import numpy as np
import pytest

from schurlsd.ensemble import MatrixRealization, ProductSpec, product_realization
from schurlsd.oracle import semicircle_cdf
from schurlsd.spectral import (
    ESD,
    eigen_decomposition,
    eigenvalues,
    histogram,
    ks_distance,
    mc_moments,
    moment_from_spectrum,
    moment_from_trace,
    moments_from_spectra,
    trial_spectra,
)


def _diag(values):
    arr = np.diag(np.asarray(values, dtype=float))
    return MatrixRealization(n=len(values), entries=arr, scaled=True, provenance="test")


def _spec(**overrides):
    base = dict(
        link_x="toeplitz",
        link_y="hankel",
        dist_x="rademacher",
        dist_y="rademacher",
        n=30,
        master_seed=11,
        trials=4,
    )
    base.update(overrides)
    return ProductSpec(**base)


# --- eigenvalues and residuals -----------------------------------------------------


def test_eigenvalues_of_diagonal_matrix():
    s = eigenvalues(_diag([3.0, 1.0, 2.0]))
    assert np.allclose(s.eigenvalues, [1.0, 2.0, 3.0])
    assert s.n == 3


def test_eigenvalues_requires_scaled():
    m = MatrixRealization(n=2, entries=np.eye(2), scaled=False, provenance="test")
    with pytest.raises(ValueError):
        eigenvalues(m)


def test_eigenvalues_rejects_non_finite():
    bad = _diag([1.0, np.nan])
    with pytest.raises(ValueError):
        eigenvalues(bad)


@pytest.mark.parametrize("trial", [0, 1])
def test_eigen_decomposition_residual(trial):
    m = product_realization(_spec(n=50), trial)
    spectrum, vecs = eigen_decomposition(m)
    n = m.n
    fro = np.linalg.norm(m.entries)
    residual = np.linalg.norm(m.entries @ vecs - vecs * spectrum.eigenvalues)
    assert residual <= 1e-10 * n * fro
    assert np.linalg.norm(vecs.T @ vecs - np.eye(n)) <= 1e-10 * n


# --- moments: two independent routes ---------------------------------------------------


def test_moment_hand_values():
    s = eigenvalues(_diag([1.0, 2.0, 3.0]))
    assert moment_from_spectrum(s, 1) == pytest.approx(2.0)
    assert moment_from_spectrum(s, 2) == pytest.approx(14.0 / 3.0)
    m = _diag([1.0, 2.0, 3.0])
    assert moment_from_trace(m, 2) == pytest.approx(14.0 / 3.0)


@pytest.mark.parametrize("kind_pair", [("toeplitz", "hankel"), ("wigner", "symcirc")])
@pytest.mark.parametrize("n", [10, 30, 50])
def test_trace_and_spectrum_routes_agree(kind_pair, n):
    x, y = kind_pair
    m = product_realization(_spec(link_x=x, link_y=y, n=n), trial=0)
    s = eigenvalues(m)
    for h in range(1, 7):
        via_spectrum = moment_from_spectrum(s, h)
        via_trace = moment_from_trace(m, h)
        scale = max(abs(via_trace), 1.0)
        assert abs(via_spectrum - via_trace) <= 1e-8 * scale


def test_moment_order_validation():
    s = eigenvalues(_diag([1.0, 2.0]))
    with pytest.raises(ValueError):
        moment_from_spectrum(s, 0)
    with pytest.raises(ValueError):
        moment_from_trace(_diag([1.0]), 9)


# --- across-trial aggregation -----------------------------------------------------------


def test_moments_from_spectra_mean_variance_stderr():
    spectra = [eigenvalues(_diag([1.0, 1.0])), eigenvalues(_diag([3.0, 3.0]))]
    (est,) = moments_from_spectra(spectra, 1)
    assert est.mean == pytest.approx(2.0)
    assert est.variance == pytest.approx(2.0)  # ddof-1 sample variance of {1, 3}
    assert est.stderr == pytest.approx(1.0)
    assert est.trials == 2


def test_moments_from_spectra_needs_two_trials():
    with pytest.raises(ValueError):
        moments_from_spectra([eigenvalues(_diag([1.0]))], 2)


def test_mc_moments_deterministic_across_threads():
    spec = _spec(trials=6)
    one = mc_moments(spec, 6, threads=1)
    three = mc_moments(spec, 6, threads=3)
    assert [(m.mean, m.variance) for m in one] == [(m.mean, m.variance) for m in three]
    again = mc_moments(spec, 6, threads=1)
    assert [(m.mean, m.variance) for m in one] == [(m.mean, m.variance) for m in again]


def test_trial_spectra_order_independent_of_threads():
    spec = _spec(trials=5)
    seq = trial_spectra(spec, threads=1)
    par = trial_spectra(spec, threads=4)
    for a, b in zip(seq, par):
        assert np.array_equal(a.eigenvalues, b.eigenvalues)


# --- ESD --------------------------------------------------------------------------------


def test_esd_is_a_cdf():
    esd = ESD([0.5, -1.0, 2.0, 0.5])
    xs = np.linspace(-3, 3, 101)
    vals = esd.cdf(xs)
    assert np.all(np.diff(vals) >= 0)
    assert esd.cdf(-5.0) == 0.0
    assert esd.cdf(5.0) == 1.0


def test_esd_hand_values():
    esd = ESD([1.0, 2.0, 3.0])
    assert esd.cdf(0.5) == 0.0
    assert esd.cdf(1.0) == pytest.approx(1 / 3)
    assert esd.cdf(2.9) == pytest.approx(2 / 3)
    assert esd.cdf(3.0) == 1.0


def test_esd_from_spectra_pools_everything():
    spec = _spec(trials=3, n=20)
    esd = ESD.from_spectra(trial_spectra(spec))
    assert esd.n_points == 60


def test_esd_rejects_empty():
    with pytest.raises(ValueError):
        ESD([])


# --- KS distance ---------------------------------------------------------------------------


def test_ks_point_mass_against_semicircle():
    # a single atom at 0: the ESD jumps 0 -> 1 where the semicircle CDF is 1/2
    assert ks_distance(ESD([0.0]), semicircle_cdf) == pytest.approx(0.5)


def test_ks_against_itself_is_small():
    # sampling the reference law's quantiles gives KS ~ 1/(2m)
    m = 1000
    qs = (np.arange(m) + 0.5) / m
    xs = np.linspace(-2, 2, 400001)
    cdf = semicircle_cdf(xs)
    points = np.interp(qs, cdf, xs)
    assert ks_distance(ESD(points), semicircle_cdf) <= 1.0 / m


def test_ks_uses_both_sides_of_each_jump():
    # two atoms at +/-2: ESD is 1/2 on (-2, 2) but 0/1 outside the support gap
    assert ks_distance(ESD([-2.0, 2.0]), semicircle_cdf) == pytest.approx(0.5)


# --- histogram ---------------------------------------------------------------------------


def test_histogram_density_hand_value():
    esd = ESD([0.25, 0.75])
    centers, density = histogram(esd, bins=2, lo=0.0, hi=1.0)
    assert np.allclose(centers, [0.25, 0.75])
    assert np.allclose(density, [1.0, 1.0])


def test_histogram_integrates_to_in_window_fraction():
    esd = ESD([-10.0, 0.1, 0.2, 0.9])
    centers, density = histogram(esd, bins=4, lo=0.0, hi=1.0)
    width = 0.25
    assert density.sum() * width == pytest.approx(3 / 4)


def test_histogram_validation():
    esd = ESD([0.0])
    with pytest.raises(ValueError):
        histogram(esd, bins=0, lo=0.0, hi=1.0)
    with pytest.raises(ValueError):
        histogram(esd, bins=2, lo=1.0, hi=1.0)
