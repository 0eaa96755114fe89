"""Exact counting of link-constrained circuits and per-word limit estimation.

A circuit of length h at dimension n is a closed index path pi(0..h),
pi(0) = pi(h), with vertices in 1..n. For a word w the matched circuit class
of a link L contains the circuits whose matched positions carry equal
L-labels (positions i, j with w[i] = w[j] force L(pi(i-1), pi(i)) =
L(pi(j-1), pi(j))); the slope variant instead forces s(i) + s(j) = 0 (up to
+-n for the circulant fold), with s(i) = pi(i) - pi(i-1).

Counting walks positions left to right. A vertex is a free n-way choice at
generating positions; elsewhere it is restricted to the columns of the
current row holding the required label, which a per-(row, label) index
bounds by the link's row repeat bound. The walk is vectorized over frontier
states and split into chunks whenever the next expansion would exceed the
row cap, so memory stays bounded while counts remain exact integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .linkfn import LinkFunction, link_name, parse_link, profile, value_table
from .linkfn import Transform, compose, is_injective_on_range, transform_name
from .words import Word, canonicalize, enumerate_pair_matched, is_catalan, is_pair_matched

__all__ = [
    "Circuit",
    "CircuitClassCount",
    "InvarianceEntry",
    "InvarianceReport",
    "PEstimate",
    "RelationEntry",
    "RelationReport",
    "SearchBudgetError",
    "check_compatible",
    "check_implies_wigner",
    "check_invariance_containment",
    "check_leadsto_wigner",
    "count_pi_prime",
    "count_pi_star",
    "count_pi_star_joint",
    "default_ladder",
    "estimate_p",
    "p_table",
    "p_table_joint",
]

NODE_BUDGET = 1_000_000_000
MAX_FRONTIER_ROWS = 2_000_000
MAX_SWEEP_ORDER = 6
MAX_IMPLIES_DIM = 64

SLOPE_LINK_KINDS = ("toeplitz", "symcirc")


class SearchBudgetError(RuntimeError):
    """The requested count would exceed the enumeration budget."""


@dataclass(frozen=True)
class Circuit:
    """A closed index path with 1-based vertices."""

    values: tuple[int, ...]
    n: int

    def __post_init__(self) -> None:
        if len(self.values) < 2:
            raise ValueError("a circuit has at least two vertices")
        if self.values[0] != self.values[-1]:
            raise ValueError(f"circuit is not closed: {self.values}")
        if not all(1 <= v <= self.n for v in self.values):
            raise ValueError(f"circuit vertices outside 1..{self.n}: {self.values}")

    @property
    def h(self) -> int:
        return len(self.values) - 1


@dataclass(frozen=True)
class CircuitClassCount:
    """Exact size of one matched circuit class.

    ``normalizer_exponent`` is 1 + h/2; count / n**exponent is the finite-n
    ratio whose n -> infinity limit is the word's contribution to a moment.
    """

    link: str
    word: Word
    n: int
    count: int
    normalizer_exponent: int
    variant: str = "star"
    link2: Optional[str] = None
    word2: Optional[Word] = None

    @property
    def ratio(self) -> float:
        return self.count / float(self.n) ** self.normalizer_exponent


@dataclass(frozen=True)
class PEstimate:
    """Extrapolated per-word limit from a ladder of exact counts.

    Fits ratio(n) = p + c/n by least squares; ``p`` is the intercept clamped
    at zero (class sizes cannot have negative limits), ``slope`` is c and
    ``residual`` the root-mean-square fit residual.
    """

    ns: tuple[int, ...]
    ratios: tuple[float, ...]
    p: float
    slope: float
    residual: float


# --- constraint backends ----------------------------------------------------


class _LinkSystem:
    """Label-equality constraints of one link at one dimension.

    Holds the label code matrix plus, per row, the columns grouped by code
    (CSR layout), so "columns of row r with code t" is a slice.
    """

    def __init__(self, link: LinkFunction, n: int):
        codes, values = value_table(link, n)
        k = len(values)
        if n * (k + 1) > 200_000_000:
            raise SearchBudgetError(
                f"per-row label index needs {n * (k + 1):.2g} cells at n={n}"
            )
        self.n = n
        self.codes = codes
        counts = np.bincount(
            (np.arange(n, dtype=np.int64)[:, None] * k + codes).ravel(),
            minlength=n * k,
        ).reshape(n, k)
        indptr = np.zeros((n, k + 1), dtype=np.int64)
        np.cumsum(counts, axis=1, out=indptr[:, 1:])
        self.indptr = indptr
        self.cols = np.argsort(codes, axis=1, kind="stable")
        self.branch_bound = int(counts.max())

    def record(self, prev: np.ndarray, v: np.ndarray) -> np.ndarray:
        return self.codes[prev, v]

    def expand(self, prev: np.ndarray, stored: np.ndarray):
        start = self.indptr[prev, stored]
        lens = self.indptr[prev, stored + 1] - start
        total = int(lens.sum())
        idx = np.repeat(np.arange(prev.size, dtype=np.int64), lens)
        if total == 0:
            return idx, np.empty(0, dtype=np.int64)
        offs = np.arange(total, dtype=np.int64) - np.repeat(np.cumsum(lens) - lens, lens)
        flat = np.repeat(prev * self.n + start, lens) + offs
        return idx, self.cols.ravel()[flat]

    def check(self, prev: np.ndarray, v: np.ndarray, stored: np.ndarray) -> np.ndarray:
        return self.codes[prev, v] == stored


class _SlopeSystem:
    """Slope-sum constraints: matched positions must have s(i) + s(j) in a
    fixed offset set ({0}, or {0, +-n} for the circulant fold)."""

    def __init__(self, link_kind: str, n: int):
        self.n = n
        self.wraps = (0,) if link_kind == "toeplitz" else (-n, 0, n)
        self.branch_bound = len(self.wraps)

    def record(self, prev: np.ndarray, v: np.ndarray) -> np.ndarray:
        return v - prev

    def expand(self, prev: np.ndarray, stored: np.ndarray):
        base = prev - stored
        cand = base[None, :] + np.asarray(self.wraps, dtype=np.int64)[:, None]
        idx = np.tile(np.arange(prev.size, dtype=np.int64), len(self.wraps))
        v = cand.ravel()
        ok = (v >= 0) & (v < self.n)
        return idx[ok], v[ok]

    def check(self, prev: np.ndarray, v: np.ndarray, stored: np.ndarray) -> np.ndarray:
        s = v - prev + stored
        mask = s == 0
        if len(self.wraps) > 1:
            mask |= (s == self.n) | (s == -self.n)
        return mask


def _count_constrained(words, systems, n: int, max_rows: int) -> int:
    """Count circuits satisfying every system's constraints for its word.

    All words share length h. Vertices are 0-based internally; slopes are
    shift-invariant and label codes are indexed 0-based, so counts match
    the 1-based definition exactly.
    """
    h = words[0].h
    first = [{} for _ in systems]
    last = [{} for _ in systems]
    for si, w in enumerate(words):
        for pos, x in enumerate(w.letters, start=1):
            first[si].setdefault(x, pos)
            last[si][x] = pos

    plans = []
    free_positions = 0
    bounds = []
    for pos in range(1, h + 1):
        acts = [
            (si, w.letters[pos - 1], first[si][w.letters[pos - 1]] == pos)
            for si, w in enumerate(words)
        ]
        reqs = [(si, x) for si, x, rec in acts if not rec]
        plans.append(acts)
        if pos == h:
            bounds.append(1)
        elif reqs:
            bounds.append(min(systems[si].branch_bound for si, _ in reqs))
        else:
            bounds.append(n)
            free_positions += 1

    est = float(n) ** (1 + free_positions)
    if est > NODE_BUDGET:
        raise SearchBudgetError(
            f"estimated {est:.3g} search nodes at n={n} with "
            f"{free_positions + 1} free vertices exceed budget {NODE_BUDGET:.0g}"
        )

    def step(frontier, pos):
        acts = plans[pos - 1]
        prev = frontier["prev"]
        if pos == h:
            v = frontier["pi0"]
            mask = np.ones(prev.size, dtype=bool)
            for si, x, rec in acts:
                if not rec:
                    mask &= systems[si].check(prev, v, frontier[(si, x)])
            return None, int(np.count_nonzero(mask))

        reqs = [(si, x) for si, x, rec in acts if not rec]
        if reqs:
            gsi, gx = min(reqs, key=lambda r: systems[r[0]].branch_bound)
            idx, v = systems[gsi].expand(prev, frontier[(gsi, gx)])
            mask = None
            for si, x in reqs:
                if (si, x) == (gsi, gx):
                    continue
                m = systems[si].check(prev[idx], v, frontier[(si, x)][idx])
                mask = m if mask is None else mask & m
            if mask is not None:
                idx, v = idx[mask], v[mask]
        else:
            idx = np.repeat(np.arange(prev.size, dtype=np.int64), n)
            v = np.tile(np.arange(n, dtype=np.int64), prev.size)

        new = {}
        for key, arr in frontier.items():
            if key == "prev":
                continue
            if key == "pi0" or last[key[0]][key[1]] > pos:
                new[key] = arr[idx]
        prev_sel = prev[idx]
        for si, x, rec in acts:
            if rec and last[si][x] > pos:
                new[(si, x)] = systems[si].record(prev_sel, v)
        new["prev"] = v
        return new, None

    def run(frontier, pos):
        rows = frontier["prev"].size
        if rows == 0:
            return 0
        if pos < h and rows > 1 and rows * bounds[pos - 1] > max_rows:
            parts = min(rows, math.ceil(rows * bounds[pos - 1] / max_rows))
            total = 0
            for sl in np.array_split(np.arange(rows), parts):
                total += run({k: a[sl] for k, a in frontier.items()}, pos)
            return total
        new, count = step(frontier, pos)
        if count is not None:
            return count
        return run(new, pos + 1)

    start = np.arange(n, dtype=np.int64)
    return run({"pi0": start, "prev": start.copy()}, 1)


# --- public counting ops ----------------------------------------------------


def _as_link(link) -> LinkFunction:
    return parse_link(link) if isinstance(link, str) else link


def _as_word(word) -> Word:
    return word if isinstance(word, Word) else canonicalize(word)


def count_pi_star(link, word, n: int, max_rows: int = MAX_FRONTIER_ROWS) -> CircuitClassCount:
    """Exact size of the matched circuit class of ``word`` under ``link``."""
    link_fn = _as_link(link)
    w = _as_word(word)
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    count = _count_constrained([w], [_LinkSystem(link_fn, n)], n, max_rows)
    return CircuitClassCount(
        link=link_name(link_fn),
        word=w,
        n=n,
        count=count,
        normalizer_exponent=w.h // 2 + 1,
    )


def count_pi_prime(link, word, n: int, max_rows: int = MAX_FRONTIER_ROWS) -> CircuitClassCount:
    """Exact size of the slope-constrained circuit class (pair-matched words).

    Defined for the links whose label equality reduces to slope sums:
    ``toeplitz`` (s(i) + s(j) = 0) and ``symcirc`` (s(i) + s(j) in {0, +-n}).
    """
    link_fn = _as_link(link)
    if link_fn.kind not in SLOPE_LINK_KINDS:
        raise ValueError(
            f"slope counting is defined for {SLOPE_LINK_KINDS}, got {link_name(link_fn)}"
        )
    w = _as_word(word)
    if not is_pair_matched(w):
        raise ValueError(f"slope counting needs a pair-matched word, got {w}")
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    count = _count_constrained([w], [_SlopeSystem(link_fn.kind, n)], n, max_rows)
    return CircuitClassCount(
        link=link_name(link_fn),
        word=w,
        n=n,
        count=count,
        normalizer_exponent=w.h // 2 + 1,
        variant="prime",
    )


def count_pi_star_joint(
    link_x, link_y, word_x, word_y, n: int, max_rows: int = MAX_FRONTIER_ROWS
) -> CircuitClassCount:
    """Exact size of the intersection of two matched circuit classes.

    At a position constrained by both words the expansion uses whichever
    link has the smaller row repeat bound and the other acts as a filter.
    """
    lx, ly = _as_link(link_x), _as_link(link_y)
    wx, wy = _as_word(word_x), _as_word(word_y)
    if wx.h != wy.h:
        raise ValueError(f"word lengths differ: {wx} has {wx.h}, {wy} has {wy.h}")
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    systems = [_LinkSystem(lx, n), _LinkSystem(ly, n)]
    count = _count_constrained([wx, wy], systems, n, max_rows)
    return CircuitClassCount(
        link=link_name(lx),
        word=wx,
        n=n,
        count=count,
        normalizer_exponent=wx.h // 2 + 1,
        link2=link_name(ly),
        word2=wy,
    )


# --- extrapolation and relation checks ---------------------------------------


def default_ladder(two_k: int) -> tuple[int, ...]:
    """Dimension ladders keeping exact counting cheap: one extra rung for
    fourth-order words, where n=64 is still instant."""
    return (8, 16, 32, 64) if two_k <= 4 else (8, 16, 32)


def estimate_p(counts: Sequence[CircuitClassCount]) -> PEstimate:
    """Fit ratio(n) = p + c/n over a ladder of counts for one class."""
    if len(counts) < 3:
        raise ValueError(f"extrapolation needs at least 3 ladder points, got {len(counts)}")
    ns = tuple(c.n for c in counts)
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError(f"ladder dimensions must be strictly increasing, got {ns}")
    ids = {(c.link, c.word, c.link2, c.word2, c.variant) for c in counts}
    if len(ids) != 1:
        raise ValueError("ladder mixes counts of different circuit classes")
    ratios = tuple(c.ratio for c in counts)
    design = np.column_stack([np.ones(len(ns)), 1.0 / np.asarray(ns, dtype=float)])
    coef, *_ = np.linalg.lstsq(design, np.asarray(ratios), rcond=None)
    fit = design @ coef
    residual = float(np.sqrt(np.mean((fit - np.asarray(ratios)) ** 2)))
    return PEstimate(
        ns=ns,
        ratios=ratios,
        p=max(float(coef[0]), 0.0),
        slope=float(coef[1]),
        residual=residual,
    )


def p_table(link, two_k: int, ladder: Optional[Sequence[int]] = None) -> dict:
    """Per-word limit estimates for all pair-matched words of length 2k."""
    ns = tuple(ladder) if ladder else default_ladder(two_k)
    out = {}
    for w in enumerate_pair_matched(two_k):
        out[w] = estimate_p([count_pi_star(link, w, n) for n in ns])
    return out


def p_table_joint(
    link_x,
    link_y,
    two_k: int,
    ladder: Optional[Sequence[int]] = None,
    diagonal_only: bool = False,
) -> dict:
    """Joint per-word-pair limit estimates under a pair of links."""
    ns = tuple(ladder) if ladder else default_ladder(two_k)
    ws = enumerate_pair_matched(two_k)
    out = {}
    for wx in ws:
        for wy in ws:
            if diagonal_only and wx != wy:
                continue
            out[(wx, wy)] = estimate_p(
                [count_pi_star_joint(link_x, link_y, wx, wy, n) for n in ns]
            )
    return out


def check_implies_wigner(link_x, link_y, n: int) -> bool:
    """Do joint label equalities force index-pair equality at dimension n?

    True when every cell class of the label pair (L_X, L_Y) is contained in
    {(i, j), (j, i)} for a single unordered pair.
    """
    if not 1 <= n <= MAX_IMPLIES_DIM:
        raise ValueError(f"dimension must be in 1..{MAX_IMPLIES_DIM}, got {n}")
    codes_x, _ = value_table(_as_link(link_x), n)
    codes_y, _ = value_table(_as_link(link_y), n)
    pair = codes_x * np.int64(int(codes_y.max()) + 1) + codes_y
    seen: dict[int, tuple[int, int]] = {}
    for i in range(n):
        row = pair[i]
        for j in range(n):
            key = int(row[j])
            cell = seen.get(key)
            if cell is None:
                seen[key] = (i, j)
            elif cell != (i, j) and cell != (j, i):
                return False
    return True


@dataclass(frozen=True)
class RelationEntry:
    word: Word
    word2: Word
    estimate: PEstimate
    expected: float
    passed: bool


@dataclass(frozen=True)
class RelationReport:
    kind: str
    link_x: str
    link_y: str
    two_k: int
    ladder: tuple[int, ...]
    tol: float
    entries: tuple[RelationEntry, ...]

    @property
    def all_pass(self) -> bool:
        return all(e.passed for e in self.entries)


def _sweep_order(two_k: int) -> None:
    if two_k % 2 != 0 or not 2 <= two_k <= MAX_SWEEP_ORDER:
        raise ValueError(f"relation sweeps cover even orders 2..{MAX_SWEEP_ORDER}, got {two_k}")


def check_compatible(
    link_x, link_y, two_k: int, ladder: Optional[Sequence[int]] = None, tol: float = 0.03
) -> RelationReport:
    """Off-diagonal joint limits must vanish for a compatible link pair."""
    _sweep_order(two_k)
    ns = tuple(ladder) if ladder else default_ladder(two_k)
    ws = enumerate_pair_matched(two_k)
    entries = []
    for wx in ws:
        for wy in ws:
            if wx == wy:
                continue
            est = estimate_p([count_pi_star_joint(link_x, link_y, wx, wy, n) for n in ns])
            entries.append(RelationEntry(wx, wy, est, 0.0, est.p <= tol))
    return RelationReport(
        kind="compatible",
        link_x=link_name(_as_link(link_x)),
        link_y=link_name(_as_link(link_y)),
        two_k=two_k,
        ladder=ns,
        tol=tol,
        entries=tuple(entries),
    )


def check_leadsto_wigner(
    link_x, link_y, two_k: int, ladder: Optional[Sequence[int]] = None, tol: float = 0.03
) -> RelationReport:
    """Diagonal joint limits must match the non-crossing indicator (1 for
    Catalan words, 0 otherwise) when the product's limit is the semicircle."""
    _sweep_order(two_k)
    ns = tuple(ladder) if ladder else default_ladder(two_k)
    entries = []
    for w in enumerate_pair_matched(two_k):
        est = estimate_p([count_pi_star_joint(link_x, link_y, w, w, n) for n in ns])
        expected = 1.0 if is_catalan(w) else 0.0
        entries.append(RelationEntry(w, w, est, expected, abs(est.p - expected) <= tol))
    return RelationReport(
        kind="leadsto",
        link_x=link_name(_as_link(link_x)),
        link_y=link_name(_as_link(link_y)),
        two_k=two_k,
        ladder=ns,
        tol=tol,
        entries=tuple(entries),
    )


@dataclass(frozen=True)
class InvarianceEntry:
    word: Word
    count_base: int
    count_composed: int
    count_joint: int
    subset_ok: bool
    counts_equal: bool


@dataclass(frozen=True)
class InvarianceReport:
    link: str
    transform: str
    two_k: int
    n: int
    injective: bool
    entries: tuple[InvarianceEntry, ...]

    @property
    def all_subset(self) -> bool:
        return all(e.subset_ok for e in self.entries)

    @property
    def all_equal(self) -> bool:
        return all(e.counts_equal for e in self.entries)


def check_invariance_containment(
    link, transform: Transform, two_k: int, n: int
) -> InvarianceReport:
    """Transformed labels can only merge constraints, never add them.

    For every word the base class must be contained in the composed class
    (joint count equals base count); with a transform injective on the
    base's label range the classes coincide and the plain counts agree too.
    """
    _sweep_order(two_k)
    base = _as_link(link)
    composed = compose(transform, base)
    entries = []
    for w in enumerate_pair_matched(two_k):
        cb = count_pi_star(base, w, n).count
        cc = count_pi_star(composed, w, n).count
        cj = count_pi_star_joint(base, composed, w, w, n).count
        entries.append(
            InvarianceEntry(
                word=w,
                count_base=cb,
                count_composed=cc,
                count_joint=cj,
                subset_ok=cj == cb,
                counts_equal=cb == cc,
            )
        )
    return InvarianceReport(
        link=link_name(base),
        transform=transform_name(transform),
        two_k=two_k,
        n=n,
        injective=is_injective_on_range(transform, base, n),
        entries=tuple(entries),
    )
