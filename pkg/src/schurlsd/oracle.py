"""Reference moment targets: semicircle values, assembled per-word limits, bounds.

The Monte Carlo channel is judged against the targets produced here. For the
semicircle the even moments are Catalan numbers and the CDF has a closed
form; for the other limit laws no closed-form density is used anywhere, and
targets are assembled by summing per-word limits over all pair-matched words.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence, Union

import numpy as np

from .words import Word, enumerate_pair_matched

__all__ = [
    "CarlemanReport",
    "MomentSequence",
    "assemble_moments",
    "carleman_diagnostic",
    "catalan_number",
    "moment_bound",
    "moment_matrix_is_psd",
    "pair_matched_count",
    "semicircle_cdf",
    "semicircle_moments",
]

MAX_MOMENT_ORDER = 30


def catalan_number(k: int) -> int:
    if k < 0:
        raise ValueError(f"Catalan number needs k >= 0, got {k}")
    return math.comb(2 * k, k) // (k + 1)


def pair_matched_count(two_k: int) -> int:
    """Number of pair-matched words of length 2k: (2k)! / (2^k k!)."""
    if two_k <= 0 or two_k % 2 != 0:
        raise ValueError(f"need a positive even length, got {two_k}")
    k = two_k // 2
    return math.factorial(two_k) // (2**k * math.factorial(k))


@dataclass(frozen=True)
class MomentSequence:
    """Moments beta_1..beta_{h_max} of a limit law, with a short provenance tag."""

    values: tuple[float, ...]
    source: str

    @property
    def h_max(self) -> int:
        return len(self.values)

    def moment(self, h: int) -> float:
        if not 1 <= h <= self.h_max:
            raise ValueError(f"moment order {h} outside 1..{self.h_max}")
        return self.values[h - 1]


def semicircle_moments(h_max: int) -> MomentSequence:
    """Standard semicircle moments: odd orders 0, order 2k the k-th Catalan number."""
    if not 1 <= h_max <= MAX_MOMENT_ORDER:
        raise ValueError(f"h_max must be in 1..{MAX_MOMENT_ORDER}, got {h_max}")
    vals = tuple(
        float(catalan_number(h // 2)) if h % 2 == 0 else 0.0
        for h in range(1, h_max + 1)
    )
    return MomentSequence(vals, "semicircle")


PTable = Mapping  # Word -> float, or (Word, Word) -> float


def assemble_moments(p_table: PTable, two_k: int) -> float:
    """Sum per-word limits over all pair-matched words of length ``two_k``.

    ``p_table`` maps either single words or (word, word2) pairs to limit
    values. For the pair form every diagonal entry must be present
    (off-diagonal entries are optional and added when supplied); a
    diagonal-only table is the usual shape once off-diagonal limits are
    known to vanish. A missing required word raises, naming the word.
    """
    words = enumerate_pair_matched(two_k)
    if not p_table:
        raise ValueError(f"empty p-table, expected entries for {len(words)} words")
    paired_keys = any(isinstance(k, tuple) for k in p_table.keys())
    total = 0.0
    if paired_keys:
        for w in words:
            if (w, w) not in p_table:
                raise ValueError(f"p-table is missing diagonal word {w}")
        for (w, w2), p in sorted(
            p_table.items(), key=lambda kv: (str(kv[0][0]), str(kv[0][1]))
        ):
            if w.h != two_k or w2.h != two_k:
                raise ValueError(f"p-table entry ({w}, {w2}) has length != {two_k}")
            total += float(p)
    else:
        for w in words:
            if w not in p_table:
                raise ValueError(f"p-table is missing word {w}")
            total += float(p_table[w])
    return total


def moment_bound(two_k: int, delta: int) -> int:
    """Upper bound (2k)!/(2^k k!) * delta^k on the 2k-th limit moment."""
    if delta < 1:
        raise ValueError(f"delta must be >= 1, got {delta}")
    return pair_matched_count(two_k) * delta ** (two_k // 2)


@dataclass(frozen=True)
class CarlemanReport:
    """Diagnostic for divergence of sum_k beta_{2k}^(-1/2k). Never a pass/fail gate.

    ``lower_bound`` is k_max times the last term, a valid bound on the partial
    sum when terms are non-increasing. ``trend`` is "suspect" when the terms
    decay about as fast as 1/k or faster (so divergence, even if real, would
    not be numerically visible), otherwise "divergent-like".
    """

    k_max: int
    terms: tuple[float, ...]
    partial_sum: float
    lower_bound: float
    trend: str


def carleman_diagnostic(
    moments: Union[MomentSequence, Sequence[float]], k_max: int
) -> CarlemanReport:
    """Partial Carleman sum over even moments beta_2..beta_{2 k_max}."""
    values = moments.values if isinstance(moments, MomentSequence) else tuple(moments)
    if k_max < 2:
        raise ValueError(f"k_max must be >= 2, got {k_max}")
    if len(values) < 2 * k_max:
        raise ValueError(f"need moments up to order {2 * k_max}, got {len(values)}")
    terms = []
    for k in range(1, k_max + 1):
        b = float(values[2 * k - 1])
        if b <= 0:
            raise ValueError(f"even moment beta_{2 * k} must be positive, got {b}")
        terms.append(b ** (-1.0 / (2 * k)))
    partial = 0.0
    for t in terms:
        partial += t
    # Local decay exponent d log t / d log k over the tail half; a median at
    # or below -0.8 means the terms shrink at least about harmonically.
    tail = range(max(2, k_max // 2 + 1), k_max + 1)
    slopes = sorted(
        math.log(terms[k - 1] / terms[k - 2]) / math.log(k / (k - 1)) for k in tail
    )
    median = slopes[len(slopes) // 2]
    trend = "suspect" if median <= -0.8 else "divergent-like"
    return CarlemanReport(
        k_max=k_max,
        terms=tuple(terms),
        partial_sum=partial,
        lower_bound=k_max * terms[-1],
        trend=trend,
    )


def semicircle_cdf(x):
    """CDF of the standard semicircle law on [-2, 2]. Accepts scalars or arrays."""
    arr = np.asarray(x, dtype=float)
    t = np.clip(arr, -2.0, 2.0)
    out = 0.5 + t * np.sqrt(4.0 - t * t) / (4.0 * np.pi) + np.arcsin(t / 2.0) / np.pi
    out = np.clip(out, 0.0, 1.0)
    if np.isscalar(x) or arr.ndim == 0:
        return float(out)
    return out


def moment_matrix_is_psd(
    moments: Union[MomentSequence, Sequence[float]], tol: float = 1e-9
) -> bool:
    """Check the moment matrix M[i, j] = beta_{i+j} (beta_0 = 1) is PSD.

    A failed check means the sequence cannot be the moments of any
    distribution; used as a sanity gate on assembled targets.
    """
    values = moments.values if isinstance(moments, MomentSequence) else tuple(moments)
    m = [1.0, *(float(v) for v in values)]
    size = len(values) // 2 + 1
    mat = np.array([[m[i + j] for j in range(size)] for i in range(size)])
    return bool(np.linalg.eigvalsh(mat).min() >= -tol)
