"""Seeded realizations of patterned matrices and their entrywise products.

Determinism contract: a realization is a pure function of (link, input
distribution, n, seed). One value is drawn per distinct link label, in
ascending canonical label order, from a PCG64 generator; per-trial seeds are
derived from the master seed with the splitmix-style mixer below, whose
constants are part of the external interface.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .linkfn import LinkFunction, link_name, parse_link, value_table

__all__ = [
    "INPUT_DISTRIBUTIONS",
    "MatrixRealization",
    "ProductSpec",
    "child_seed",
    "matrix_to_csv",
    "product_realization",
    "realize",
    "realize_pair",
    "sample_inputs",
    "scale",
    "schur_product",
    "splitmix64",
    "stream_seed",
]

#: Supported mean-0 variance-1 input laws.
INPUT_DISTRIBUTIONS = ("rademacher", "uniform", "gaussian")

_UNIFORM_HALF_WIDTH = math.sqrt(3.0)  # uniform on [-sqrt(3), sqrt(3)] has variance 1

# splitmix64 avalanche constants; fixed, public, and load-bearing for
# reproducibility of every seeded run.
_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

#: Role tags entering the seed mix: ASCII 'X' and 'Y'.
ROLE_TAGS = {"X": 88, "Y": 89}


def splitmix64(x: int) -> int:
    """One splitmix64 step: add the odd gamma, then xor-shift avalanche."""
    z = (int(x) + _GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


def stream_seed(master_seed: int, index: int) -> int:
    """Element ``index`` of the splitmix64 stream started at ``master_seed``.

    Used to give each product of a multi-product run its own master seed;
    indices are positions in the full fixed product list, so a subset run
    sees the same seeds as a full run.
    """
    if index < 0:
        raise ValueError(f"stream index must be >= 0, got {index}")
    return splitmix64((int(master_seed) + index * _GAMMA) & _MASK64)


def child_seed(master_seed: int, role: str, trial: int) -> int:
    """Derive the stream seed for one role of one trial.

    chain: splitmix64(master) xor role-tag, mixed; xor trial, mixed. The X
    and Y streams of a trial and all trials are pairwise disjoint by
    avalanche; changing the role never touches the other role's stream.
    """
    if role not in ROLE_TAGS:
        raise ValueError(f"role must be one of {sorted(ROLE_TAGS)}, got {role!r}")
    if trial < 0:
        raise ValueError(f"trial index must be >= 0, got {trial}")
    s = splitmix64(master_seed)
    s = splitmix64(s ^ ROLE_TAGS[role])
    return splitmix64(s ^ trial)


def sample_inputs(dist: str, size: int, rng: np.random.Generator) -> np.ndarray:
    if dist == "rademacher":
        return rng.integers(0, 2, size=size).astype(np.float64) * 2.0 - 1.0
    if dist == "uniform":
        return rng.uniform(-_UNIFORM_HALF_WIDTH, _UNIFORM_HALF_WIDTH, size=size)
    if dist == "gaussian":
        return rng.standard_normal(size)
    raise ValueError(f"unknown input distribution {dist!r}")


@dataclass
class MatrixRealization:
    """One drawn matrix. ``entries`` is exactly symmetric by construction
    (equal labels share a draw and the label map is symmetric)."""

    n: int
    entries: np.ndarray
    scaled: bool
    provenance: str


def _as_link(link) -> LinkFunction:
    return parse_link(link) if isinstance(link, str) else link


def realize(link, dist: str, n: int, seed: int) -> MatrixRealization:
    """Draw one unscaled patterned matrix.

    Draws exactly one value per distinct label (k_n draws, e.g. 3 for a
    3 x 3 toeplitz pattern), assigned in ascending label order, then
    scatters them through the label code matrix.
    """
    if dist not in INPUT_DISTRIBUTIONS:
        raise ValueError(f"unknown input distribution {dist!r}")
    link_fn = _as_link(link)
    codes, values = value_table(link_fn, n)
    rng = np.random.Generator(np.random.PCG64(seed))
    draws = sample_inputs(dist, len(values), rng)
    entries = draws[codes]
    prov = f"{link_name(link_fn)}|{dist}|n={n}|seed={seed}"
    return MatrixRealization(n=n, entries=entries, scaled=False, provenance=prov)


def schur_product(x: MatrixRealization, y: MatrixRealization) -> MatrixRealization:
    """Entrywise product of two unscaled realizations of the same dimension."""
    if x.n != y.n:
        raise ValueError(f"dimension mismatch: {x.n} vs {y.n}")
    if x.scaled or y.scaled:
        raise ValueError("schur_product expects unscaled factors")
    return MatrixRealization(
        n=x.n,
        entries=x.entries * y.entries,
        scaled=False,
        provenance=f"schur({x.provenance}; {y.provenance})",
    )


def scale(m: MatrixRealization) -> MatrixRealization:
    """Multiply by n^(-1/2). Scaling twice is a state error."""
    if m.scaled:
        raise ValueError("realization is already scaled")
    return MatrixRealization(
        n=m.n,
        entries=m.entries * (m.n ** -0.5),
        scaled=True,
        provenance=m.provenance,
    )


def matrix_to_csv(m: MatrixRealization) -> str:
    """Row-major CSV with 17 significant digits per entry."""
    buf = io.StringIO()
    np.savetxt(buf, m.entries, fmt="%.17g", delimiter=",")
    return buf.getvalue()


@dataclass(frozen=True)
class ProductSpec:
    """Everything that determines a Monte Carlo product run.

    All randomness is a pure function of this record: trial t uses seeds
    child_seed(master_seed, "X", t) and child_seed(master_seed, "Y", t).
    """

    link_x: str
    link_y: str
    dist_x: str
    dist_y: str
    n: int
    master_seed: int
    trials: int

    def __post_init__(self) -> None:
        parse_link(self.link_x)
        parse_link(self.link_y)
        for d in (self.dist_x, self.dist_y):
            if d not in INPUT_DISTRIBUTIONS:
                raise ValueError(f"unknown input distribution {d!r}")
        if self.n < 1:
            raise ValueError(f"dimension must be >= 1, got {self.n}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError(f"master_seed must fit in 64 bits, got {self.master_seed}")


def realize_pair(spec: ProductSpec, trial: int) -> tuple[MatrixRealization, MatrixRealization]:
    x = realize(spec.link_x, spec.dist_x, spec.n, child_seed(spec.master_seed, "X", trial))
    y = realize(spec.link_y, spec.dist_y, spec.n, child_seed(spec.master_seed, "Y", trial))
    return x, y


def product_realization(spec: ProductSpec, trial: int) -> MatrixRealization:
    """Scaled Schur product for one trial."""
    x, y = realize_pair(spec, trial)
    return scale(schur_product(x, y))
