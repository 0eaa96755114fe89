"""Symmetric link functions: the pattern vocabulary for structured matrices.

A link function maps a 1-based index pair (i, j) of an n x n symmetric
matrix to the label of the input variable occupying that cell; cells with
equal labels share one random draw. Everything downstream (matrix
realization, repeat bounds, exact circuit counting) consumes links through
``eval_link`` / ``value_table`` / ``profile``.

Built-in links and their label formulas, with d = |i - j| and m = (i + j) mod n:

==============  =======================================
wigner          (min(i, j), max(i, j))
toeplitz        d
hankel          i + j
symcirc         min(d, n - d)
revcirc         m
dsymhankel      min(m, n - m)
==============  =======================================

The folded formulas for ``symcirc`` and ``dsymhankel`` are evaluated in
integer arithmetic: the fold n/2 - |n/2 - t| equals min(t, n - t) exactly on
0 <= t <= n, for odd n as well, so no rounding can occur.

Links compose with value transforms (``square``, ``coprime_power``,
``table_transform``); a transform changes labels, and only an injective one
is guaranteed to preserve the label partition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Optional, Union

import numpy as np

__all__ = [
    "BUILTIN_KINDS",
    "LinkFunction",
    "LinkProfile",
    "PowerValue",
    "Transform",
    "TransformError",
    "apply_transform",
    "builtin_link",
    "compose",
    "coprime_power",
    "delta_ladder",
    "eval_link",
    "is_injective_on_range",
    "link_name",
    "parse_link",
    "profile",
    "profile_product",
    "square",
    "table_transform",
    "value_sort_key",
    "value_table",
]

BUILTIN_KINDS = ("wigner", "toeplitz", "hankel", "symcirc", "revcirc", "dsymhankel")


class TransformError(ValueError):
    """A transform was applied to a value outside its domain."""


@dataclass(frozen=True)
class PowerValue:
    """The label a^i * b^j stored as tagged exponents.

    Kept unevaluated so comparisons never form huge powers; for coprime bases
    a, b >= 2 exponent equality and power equality coincide, which is why the
    constructor of ``coprime_power`` enforces that range.
    """

    base_a: int
    base_b: int
    exp_i: int
    exp_j: int


#: A link label: a non-negative integer, an ordered index pair (a <= b), or a
#: tagged power. Equality is structural; ints and tuples never compare equal.
LinkValue = Union[int, tuple[int, int], PowerValue]


def value_sort_key(value: LinkValue):
    """Total order across label kinds, used for canonical draw order."""
    if isinstance(value, bool):
        raise TypeError("booleans are not link values")
    if isinstance(value, int):
        return (0, (value,))
    if isinstance(value, tuple):
        return (1, value)
    if isinstance(value, PowerValue):
        return (2, (value.base_a, value.base_b, value.exp_i, value.exp_j))
    raise TypeError(f"not a link value: {value!r}")


# --- transforms -------------------------------------------------------------


@dataclass(frozen=True)
class Transform:
    """A map on link labels. ``injective`` is a claim, verified per range via
    ``is_injective_on_range`` rather than trusted."""

    kind: str
    bases: Optional[tuple[int, int]] = None
    table: Optional[tuple[tuple, ...]] = None
    injective: bool = True

    def __post_init__(self) -> None:
        if self.kind not in ("square", "coprimepower", "usertable"):
            raise ValueError(f"unknown transform kind {self.kind!r}")


def square() -> Transform:
    """t -> t**2 on scalar labels (injective on the non-negative range)."""
    return Transform("square")


def coprime_power(a: int, b: int) -> Transform:
    """(i, j) -> a^i * b^j on pair labels, stored as a ``PowerValue``.

    Requires coprime a, b >= 2: with a base equal to 1 distinct exponent
    pairs can evaluate to the same power, so the tagged-exponent
    representation would misreport equality.
    """
    for v in (a, b):
        if not isinstance(v, int) or v < 2:
            raise ValueError(f"coprime_power bases must be integers >= 2, got {a}, {b}")
    if math.gcd(a, b) != 1:
        raise ValueError(f"coprime_power bases must be coprime, got {a}, {b}")
    return Transform("coprimepower", bases=(a, b))


def table_transform(mapping: Mapping) -> Transform:
    """Explicit label map. Injectivity is read off the table values."""
    if not mapping:
        raise ValueError("table_transform needs a non-empty mapping")
    items = tuple(sorted(mapping.items(), key=lambda kv: value_sort_key(kv[0])))
    injective = len({value_sort_key(v) for _, v in items}) == len(items)
    return Transform("usertable", table=items, injective=injective)


def apply_transform(transform: Transform, value: LinkValue) -> LinkValue:
    if transform.kind == "square":
        if isinstance(value, int) and not isinstance(value, bool):
            return value * value
        raise TransformError(f"square is undefined on non-scalar label {value!r}")
    if transform.kind == "coprimepower":
        if isinstance(value, tuple) and len(value) == 2:
            a, b = transform.bases
            return PowerValue(a, b, value[0], value[1])
        raise TransformError(f"coprime_power is undefined on non-pair label {value!r}")
    lookup = dict(transform.table)
    if value not in lookup:
        raise TransformError(f"table transform is undefined on label {value!r}")
    return lookup[value]


def transform_name(transform: Transform) -> str:
    if transform.kind == "coprimepower":
        a, b = transform.bases
        return f"coprimepower({a},{b})"
    return transform.kind


# --- link functions ---------------------------------------------------------


@dataclass(frozen=True)
class LinkFunction:
    """A built-in link or a transform composed over a base link."""

    kind: str
    transform: Optional[Transform] = None
    base: Optional["LinkFunction"] = None

    def __post_init__(self) -> None:
        if self.kind == "composed":
            if self.transform is None or self.base is None:
                raise ValueError("composed link needs a transform and a base")
        elif self.kind not in BUILTIN_KINDS:
            raise ValueError(f"unknown link kind {self.kind!r}")
        elif self.transform is not None or self.base is not None:
            raise ValueError(f"built-in link {self.kind!r} takes no transform or base")


def builtin_link(kind: str) -> LinkFunction:
    return LinkFunction(kind)


def compose(transform: Transform, base: LinkFunction) -> LinkFunction:
    return LinkFunction("composed", transform=transform, base=base)


def link_name(link: LinkFunction) -> str:
    if link.kind != "composed":
        return link.kind
    inner = link_name(link.base)
    if link.transform.kind == "coprimepower":
        a, b = link.transform.bases
        return f"coprimepower({a},{b},{inner})"
    return f"{link.transform.kind}({inner})"


def parse_link(text: str) -> LinkFunction:
    """Parse ``wigner`` / ... / ``square(toeplitz)`` / ``coprimepower(2,3,wigner)``.

    Table transforms have no textual form; build them programmatically.
    """
    s = text.strip().lower()
    if s in BUILTIN_KINDS:
        return builtin_link(s)
    if s.endswith(")") and "(" in s:
        head, _, rest = s.partition("(")
        args = [a.strip() for a in rest[:-1].split(",")]
        if head == "square" and len(args) == 1:
            return compose(square(), parse_link(args[0]))
        if head == "coprimepower" and len(args) == 3:
            try:
                a, b = int(args[0]), int(args[1])
            except ValueError:
                raise ValueError(f"bad coprimepower bases in link name {text!r}") from None
            return compose(coprime_power(a, b), parse_link(args[2]))
    raise ValueError(f"cannot parse link name {text!r}")


def _check_indices(i: int, j: int, n: int) -> None:
    if n < 1:
        raise ValueError(f"matrix dimension must be >= 1, got {n}")
    if not (1 <= i <= n and 1 <= j <= n):
        raise ValueError(f"indices ({i}, {j}) outside 1..{n}")


def eval_link(link: LinkFunction, i: int, j: int, n: int) -> LinkValue:
    """Label of cell (i, j), 1-based. Exact integer arithmetic throughout."""
    _check_indices(i, j, n)
    kind = link.kind
    if kind == "wigner":
        return (min(i, j), max(i, j))
    if kind == "toeplitz":
        return abs(i - j)
    if kind == "hankel":
        return i + j
    if kind == "symcirc":
        d = abs(i - j)
        return min(d, n - d)
    if kind == "revcirc":
        return (i + j) % n
    if kind == "dsymhankel":
        m = (i + j) % n
        return min(m, n - m)
    return apply_transform(link.transform, eval_link(link.base, i, j, n))


@lru_cache(maxsize=64)
def value_table(link: LinkFunction, n: int) -> tuple[np.ndarray, list]:
    """All cell labels at dimension n, as (codes, values).

    ``values`` lists the distinct labels in ascending canonical order and
    ``codes`` is the n x n int array with ``values[codes[i, j]]`` equal to
    the label of cell (i+1, j+1). The code matrix is what realization and
    circuit counting actually consume; labels themselves are only
    materialized once per distinct value.

    Results are cached (Monte Carlo runs request the same table once per
    trial) and the code matrix is returned read-only for that reason.
    """
    if n < 1:
        raise ValueError(f"matrix dimension must be >= 1, got {n}")
    idx = np.arange(1, n + 1, dtype=np.int64)
    I, J = idx[:, None], idx[None, :]
    kind = link.kind
    if kind == "wigner":
        a = np.minimum(I, J)
        b = np.maximum(I, J)
        codes = (a - 1) * (n + 1) - (a - 1) * a // 2 + (b - a)
        values = [(int(x), int(y)) for x in range(1, n + 1) for y in range(x, n + 1)]
    elif kind == "toeplitz":
        codes = np.abs(I - J)
        values = list(range(n))
    elif kind == "hankel":
        codes = I + J - 2
        values = list(range(2, 2 * n + 1))
    elif kind == "symcirc":
        d = np.abs(I - J)
        codes = np.minimum(d, n - d)
        values = list(range(n // 2 + 1))
    elif kind == "revcirc":
        codes = (I + J) % n
        values = list(range(n))
    elif kind == "dsymhankel":
        m = (I + J) % n
        codes = np.minimum(m, n - m)
        values = list(range(n // 2 + 1))
    else:
        base_codes, base_values = value_table(link.base, n)
        mapped = [apply_transform(link.transform, v) for v in base_values]
        order = sorted(range(len(mapped)), key=lambda t: value_sort_key(mapped[t]))
        remap = np.empty(len(mapped), dtype=np.int64)
        values = []
        prev_key = None
        for t in order:
            key = value_sort_key(mapped[t])
            if key != prev_key:
                values.append(mapped[t])
                prev_key = key
            remap[t] = len(values) - 1
        codes = remap[base_codes]
    codes.setflags(write=False)
    return codes, values


# --- profiles ---------------------------------------------------------------


@dataclass(frozen=True)
class LinkProfile:
    """Finite-n combinatorial profile of a link (or product of links).

    ``delta``: most repeats of one label within a row (for a product, the
    documented cross bound min(delta_x, delta_y), not a row scan);
    ``kn``: number of distinct labels; ``alphan``: most cells sharing one label.
    """

    n: int
    delta: int
    kn: int
    alphan: int


def _row_delta(codes: np.ndarray) -> int:
    delta = 0
    for row in codes:
        _, counts = np.unique(row, return_counts=True)
        delta = max(delta, int(counts.max()))
    return delta


def profile(link: LinkFunction, n: int) -> LinkProfile:
    codes, values = value_table(link, n)
    counts = np.bincount(codes.ravel(), minlength=len(values))
    return LinkProfile(
        n=n, delta=_row_delta(codes), kn=len(values), alphan=int(counts.max())
    )


def profile_product(linkX: LinkFunction, linkY: LinkFunction, n: int) -> LinkProfile:
    """Profile of the label-pair map (i, j) -> (L_X(i, j), L_Y(i, j)).

    ``kn``/``alphan`` are exact scans of the pair labels. ``delta`` is the
    product bound min(delta_X, delta_Y): a pair label repeats in a row no
    more often than either coordinate does.
    """
    codes_x, values_x = value_table(linkX, n)
    codes_y, values_y = value_table(linkY, n)
    pair = codes_x * len(values_y) + codes_y
    _, counts = np.unique(pair, return_counts=True)
    delta = min(_row_delta(codes_x), _row_delta(codes_y))
    return LinkProfile(n=n, delta=delta, kn=len(counts), alphan=int(counts.max()))


def is_injective_on_range(transform: Transform, base: LinkFunction, n: int) -> bool:
    """Verify injectivity of ``transform`` on the labels ``base`` produces at n."""
    _, values = value_table(base, n)
    mapped = {value_sort_key(apply_transform(transform, v)) for v in values}
    return len(mapped) == len(values)


def delta_ladder(link: LinkFunction, ns) -> dict[int, int]:
    """Per-n row repeat bounds, for checking the bound has stabilized.

    Built-in links stabilize by n = 4 (at 1 or 2); a growing sequence means
    the link does not admit a dimension-free repeat bound.
    """
    return {int(n): profile(link, int(n)).delta for n in ns}
