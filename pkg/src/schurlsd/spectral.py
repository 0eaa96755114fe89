"""Spectra, empirical distribution functions, and Monte Carlo moment estimates."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .ensemble import MatrixRealization, ProductSpec, product_realization

__all__ = [
    "ESD",
    "MomentEstimate",
    "Spectrum",
    "eigen_decomposition",
    "eigenvalues",
    "histogram",
    "ks_distance",
    "mc_moments",
    "moment_from_spectrum",
    "moment_from_trace",
    "moments_from_spectra",
    "trial_spectra",
]

#: Monte Carlo moment orders are capped here; higher orders are too noisy at
#: the dimensions this tool runs to be worth reporting.
MAX_MC_ORDER = 8


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues of one scaled realization, ascending."""

    eigenvalues: np.ndarray
    n: int


@dataclass(frozen=True)
class MomentEstimate:
    """Across-trial estimate of one spectral moment.

    ``variance`` is the sample variance across trials (ddof 1) and
    ``stderr`` is sqrt(variance / trials).
    """

    h: int
    mean: float
    variance: float
    stderr: float
    trials: int
    n: int


class ESD:
    """Empirical spectral distribution: a right-continuous step CDF."""

    def __init__(self, points: Sequence[float]):
        arr = np.sort(np.asarray(points, dtype=float))
        if arr.size == 0:
            raise ValueError("ESD needs at least one point")
        self.points = arr

    @classmethod
    def from_spectra(cls, spectra: Iterable[Spectrum]) -> "ESD":
        return cls(np.concatenate([s.eigenvalues for s in spectra]))

    @property
    def n_points(self) -> int:
        return int(self.points.size)

    def cdf(self, x):
        pos = np.searchsorted(self.points, np.asarray(x, dtype=float), side="right")
        out = pos / self.points.size
        return float(out) if np.isscalar(x) else out


def _require_scaled(m: MatrixRealization, op: str) -> None:
    if not m.scaled:
        raise ValueError(f"{op} requires a scaled realization")


def eigenvalues(m: MatrixRealization) -> Spectrum:
    _require_scaled(m, "eigenvalues")
    if not np.all(np.isfinite(m.entries)):
        raise ValueError("matrix has non-finite entries")
    return Spectrum(eigenvalues=np.linalg.eigvalsh(m.entries), n=m.n)


def eigen_decomposition(m: MatrixRealization) -> tuple[Spectrum, np.ndarray]:
    """Eigenvalues plus orthonormal eigenvectors (columns), for residual checks."""
    _require_scaled(m, "eigen_decomposition")
    if not np.all(np.isfinite(m.entries)):
        raise ValueError("matrix has non-finite entries")
    vals, vecs = np.linalg.eigh(m.entries)
    return Spectrum(eigenvalues=vals, n=m.n), vecs


def moment_from_spectrum(spectrum: Spectrum, h: int) -> float:
    """(1/n) sum of eigenvalue h-th powers."""
    if h < 1:
        raise ValueError(f"moment order must be >= 1, got {h}")
    return float(np.mean(spectrum.eigenvalues**h))


def moment_from_trace(m: MatrixRealization, h: int) -> float:
    """(1/n) trace(A^h) by repeated multiplication; the route that never
    touches the eigensolver, kept as its independent cross-check. h <= 8."""
    if not 1 <= h <= MAX_MC_ORDER:
        raise ValueError(f"moment order must be in 1..{MAX_MC_ORDER}, got {h}")
    _require_scaled(m, "moment_from_trace")
    power = m.entries
    for _ in range(h - 1):
        power = power @ m.entries
    return float(np.trace(power)) / m.n


def trial_spectra(spec: ProductSpec, threads: int = 1) -> list[Spectrum]:
    """Spectra of all trials, in trial order regardless of thread count."""
    trials = range(spec.trials)
    work = lambda t: eigenvalues(product_realization(spec, t))
    if threads <= 1:
        return [work(t) for t in trials]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(work, trials))


def moments_from_spectra(spectra: Sequence[Spectrum], h_max: int) -> list[MomentEstimate]:
    """Across-trial moment estimates for h = 1..h_max from drawn spectra.

    Aggregation is a fixed left-to-right sum in trial order, so results are
    bitwise identical for any thread count used to produce the spectra.
    """
    if len(spectra) < 2:
        raise ValueError("moment estimation needs >= 2 trials for an across-trial variance")
    if not 1 <= h_max <= MAX_MC_ORDER:
        raise ValueError(f"h_max must be in 1..{MAX_MC_ORDER}, got {h_max}")
    trials = len(spectra)
    n = spectra[0].n
    per_trial = [
        [moment_from_spectrum(s, h) for h in range(1, h_max + 1)] for s in spectra
    ]
    out = []
    for h in range(1, h_max + 1):
        mean = 0.0
        for row in per_trial:
            mean += row[h - 1]
        mean /= trials
        var = 0.0
        for row in per_trial:
            var += (row[h - 1] - mean) ** 2
        var /= trials - 1
        out.append(
            MomentEstimate(
                h=h,
                mean=mean,
                variance=var,
                stderr=(var / trials) ** 0.5,
                trials=trials,
                n=n,
            )
        )
    return out


def mc_moments(spec: ProductSpec, h_max: int, threads: int = 1) -> list[MomentEstimate]:
    """Across-trial moment estimates for h = 1..h_max of a product run."""
    if spec.trials < 2:
        raise ValueError("mc_moments needs trials >= 2 for an across-trial variance")
    return moments_from_spectra(trial_spectra(spec, threads=threads), h_max)


def ks_distance(esd: ESD, ref_cdf: Callable) -> float:
    """sup_x |F_esd - F_ref| over both one-sided gaps at the sample points."""
    pts = esd.points
    m = pts.size
    ref = np.asarray(ref_cdf(pts), dtype=float)
    upper = np.max(np.arange(1, m + 1) / m - ref)
    lower = np.max(ref - np.arange(0, m) / m)
    return float(max(upper, lower))


def histogram(esd: ESD, bins: int, lo: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
    """Density-normalized histogram on [lo, hi]: (bin centers, densities).

    Density integrates to the fraction of points inside the window, so the
    normalizer is the total point count, not the in-window count.
    """
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    counts, edges = np.histogram(esd.points, bins=bins, range=(lo, hi))
    width = (hi - lo) / bins
    centers = (edges[:-1] + edges[1:]) / 2.0
    return centers, counts / (esd.n_points * width)
