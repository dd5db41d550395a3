"""Exact dyadic geometry: intervals, rectangles, layers, sign assignments.

Everything here is integer arithmetic.  An interval is a (level, offset)
pair meaning [offset/2^level, (offset+1)/2^level); a rectangle is one
interval per coordinate; measures are counts of finest cells.  No floating
point enters at any stage.

Canonical orders (shared by files, ids, and reports, and relied on for
bit-exact reproducibility):

- layers of volume 2^(-n) in dimension d are the compositions of n into d
  non-negative parts, in ascending lexicographic order of the part tuple;
- within a layer, rectangles are ordered by their offset tuples
  lexicographically, first coordinate most significant;
- rectangle ids are layer-major: id = layer_index * 2^n + offset_rank.

A sign assignment stores one sign in {-1,+1} per rectangle of volume
2^(-n), indexed by rectangle id.  Its text file format is two lines:

    n=<n> d=<d>
    +-++-...          (one '+' or '-' per rectangle, id order)

with an optional trailing newline.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Iterator, Sequence

from .errors import (
    DimensionMismatch,
    GridTooLarge,
    IdOutOfRange,
    OffsetOutOfRange,
    SignFileError,
    WrongVolume,
)

GRID_BIT_BUDGET = 40
"""Hard cap on d*(n+1): the cell grid has 2^(d*(n+1)) cells and must fit."""


def check_grid_budget(n: int, d: int) -> None:
    """Raise GridTooLarge unless the (2^(n+1))^d cell grid is addressable."""
    if n < 0 or d < 1:
        raise ValueError(f"need n >= 0 and d >= 1, got n={n}, d={d}")
    bits = d * (n + 1)
    if bits > GRID_BIT_BUDGET:
        raise GridTooLarge(
            f"grid needs {bits} bits of cell index, budget is {GRID_BIT_BUDGET} "
            f"(n={n}, d={d})"
        )


@dataclass(frozen=True)
class DyadicInterval:
    """Half-open dyadic interval [offset/2^level, (offset+1)/2^level)."""

    level: int
    offset: int

    def __post_init__(self):
        if self.level < 0:
            raise ValueError(f"interval level must be >= 0, got {self.level}")
        if not 0 <= self.offset < (1 << self.level):
            raise OffsetOutOfRange(
                f"offset {self.offset} outside [0, 2^{self.level})"
            )

    @property
    def left(self) -> Fraction:
        return Fraction(self.offset, 1 << self.level)

    @property
    def right(self) -> Fraction:
        return Fraction(self.offset + 1, 1 << self.level)

    def half(self, upper: bool) -> "DyadicInterval":
        """Lower (upper=False) or upper (upper=True) half, one level finer."""
        return DyadicInterval(self.level + 1, 2 * self.offset + int(upper))

    def cell_span(self, grid_level: int) -> tuple[int, int]:
        """Half-open cell-index range [start, stop) on the 2^grid_level grid."""
        if grid_level < self.level:
            raise ValueError(
                f"grid level {grid_level} finer than interval level {self.level}"
            )
        width = 1 << (grid_level - self.level)
        return self.offset * width, (self.offset + 1) * width

    def __str__(self) -> str:
        return f"[{self.left}, {self.right})"


def interval_new(level: int, offset: int) -> DyadicInterval:
    """Construct [offset/2^level, (offset+1)/2^level); validates the offset."""
    return DyadicInterval(level, offset)


class IntervalRelation(Enum):
    DISJOINT = "disjoint"
    EQUAL = "equal"
    FIRST_CONTAINS_SECOND = "first_contains_second"
    SECOND_CONTAINS_FIRST = "second_contains_first"


def interval_relate(first: DyadicInterval, second: DyadicInterval) -> IntervalRelation:
    """Relation of two dyadic intervals.

    Two dyadic intervals are equal, nested, or disjoint; partial overlap
    cannot occur.  Nesting is a prefix test on offsets: the coarser interval
    contains the finer one iff the finer offset, shifted down by the level
    difference, equals the coarser offset.
    """
    if first.level == second.level:
        if first.offset == second.offset:
            return IntervalRelation.EQUAL
        return IntervalRelation.DISJOINT
    if first.level < second.level:
        if (second.offset >> (second.level - first.level)) == first.offset:
            return IntervalRelation.FIRST_CONTAINS_SECOND
        return IntervalRelation.DISJOINT
    if (first.offset >> (first.level - second.level)) == second.offset:
        return IntervalRelation.SECOND_CONTAINS_FIRST
    return IntervalRelation.DISJOINT


def haar_at(interval: DyadicInterval, t: Fraction | int) -> int:
    """Haar value at point t: -1 on the left half, +1 on the right, 0 outside.

    t is compared exactly, so it should be an exact rational (callers in this
    package always pass dyadic points, typically cell left endpoints).
    """
    t = Fraction(t)
    if t < interval.left or t >= interval.right:
        return 0
    mid = Fraction(2 * interval.offset + 1, 1 << (interval.level + 1))
    return -1 if t < mid else 1


@dataclass(frozen=True)
class DyadicRect:
    """Cartesian product of dyadic intervals, one per coordinate."""

    coords: tuple[DyadicInterval, ...]

    def __post_init__(self):
        if not self.coords:
            raise ValueError("rectangle needs at least one coordinate")

    @property
    def d(self) -> int:
        return len(self.coords)

    @property
    def levels(self) -> tuple[int, ...]:
        return tuple(iv.level for iv in self.coords)

    @property
    def offsets(self) -> tuple[int, ...]:
        return tuple(iv.offset for iv in self.coords)

    @property
    def level_sum(self) -> int:
        """Volume exponent: the rectangle's volume is 2^(-level_sum)."""
        return sum(iv.level for iv in self.coords)

    def cell_count(self, n: int) -> int:
        """Number of finest cells of the (2^(n+1))^d grid inside this rect."""
        return 1 << (self.d * (n + 1) - self.level_sum)

    def intersect(self, other: "DyadicRect") -> "DyadicRect | None":
        """Intersection rectangle, or None when disjoint."""
        if self.d != other.d:
            raise DimensionMismatch(f"d={self.d} vs d={other.d}")
        out = []
        for a, b in zip(self.coords, other.coords):
            rel = interval_relate(a, b)
            if rel is IntervalRelation.DISJOINT:
                return None
            out.append(a if a.level >= b.level else b)
        return DyadicRect(tuple(out))

    def __str__(self) -> str:
        return " x ".join(str(iv) for iv in self.coords)


def rect(levels: Sequence[int], offsets: Sequence[int]) -> DyadicRect:
    """Build a rectangle from parallel level/offset sequences."""
    if len(levels) != len(offsets):
        raise DimensionMismatch("levels and offsets differ in length")
    return DyadicRect(tuple(DyadicInterval(l, o) for l, o in zip(levels, offsets)))


def unit_cube(d: int) -> DyadicRect:
    return rect([0] * d, [0] * d)


@dataclass(frozen=True)
class LayerSpec:
    """One layer: all rectangles of volume 2^(-n) with a fixed level shape."""

    n: int
    shape: tuple[int, ...]

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"n must be >= 0, got {self.n}")
        if not self.shape:
            raise ValueError("shape needs at least one coordinate")
        if any(k < 0 for k in self.shape):
            raise ValueError(f"shape parts must be >= 0: {self.shape}")
        if sum(self.shape) != self.n:
            raise ValueError(f"shape {self.shape} does not sum to n={self.n}")

    @property
    def d(self) -> int:
        return len(self.shape)


def layer_count(n: int, d: int) -> int:
    """Number of layers: compositions of n into d non-negative parts."""
    return comb(n + d - 1, d - 1)


def rect_count(n: int, d: int) -> int:
    """Total rectangles of volume 2^(-n): one sign per id in [0, rect_count)."""
    return layer_count(n, d) << n


@lru_cache(maxsize=None)
def enumerate_layers(n: int, d: int) -> tuple[LayerSpec, ...]:
    """All layers for (n, d), shapes in ascending lexicographic order."""
    if n < 0 or d < 1:
        raise ValueError(f"need n >= 0 and d >= 1, got n={n}, d={d}")

    def compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
        if parts == 1:
            yield (total,)
            return
        for first in range(total + 1):
            for tail in compositions(total - first, parts - 1):
                yield (first,) + tail

    return tuple(LayerSpec(n, s) for s in compositions(n, d))


@lru_cache(maxsize=None)
def _layer_index_map(n: int, d: int) -> dict[tuple[int, ...], int]:
    return {spec.shape: i for i, spec in enumerate(enumerate_layers(n, d))}


def layer_rects(spec: LayerSpec) -> list[DyadicRect]:
    """The 2^n rectangles of one layer, offsets lexicographic (first
    coordinate most significant).  They partition the unit cube."""
    out = []
    for rank in range(1 << spec.n):
        out.append(_rect_in_layer(spec, rank))
    return out


def _rect_in_layer(spec: LayerSpec, rank: int) -> DyadicRect:
    # Decode the mixed-radix rank (first coordinate most significant).
    offsets = [0] * spec.d
    rest = rank
    for t in range(spec.d - 1, -1, -1):
        radix = 1 << spec.shape[t]
        offsets[t] = rest % radix
        rest //= radix
    return rect(spec.shape, offsets)


def _rank_in_layer(spec: LayerSpec, offsets: Sequence[int]) -> int:
    rank = 0
    for k, o in zip(spec.shape, offsets):
        rank = (rank << k) | o
    return rank


def rect_id(n: int, d: int, r: DyadicRect) -> int:
    """Canonical id of a volume-2^(-n) rectangle (layer-major order)."""
    if r.d != d:
        raise DimensionMismatch(f"rect has d={r.d}, expected {d}")
    if r.level_sum != n:
        raise WrongVolume(
            f"rect has volume 2^-{r.level_sum}, expected 2^-{n}: {r}"
        )
    layer_idx = _layer_index_map(n, d)[r.levels]
    return (layer_idx << n) | _rank_in_layer(LayerSpec(n, r.levels), r.offsets)


def id_rect(n: int, d: int, rect_id_value: int) -> DyadicRect:
    """Inverse of rect_id."""
    total = rect_count(n, d)
    if not 0 <= rect_id_value < total:
        raise IdOutOfRange(f"id {rect_id_value} outside [0, {total})")
    layer_idx, rank = divmod(rect_id_value, 1 << n)
    return _rect_in_layer(enumerate_layers(n, d)[layer_idx], rank)


@dataclass(frozen=True)
class SignAssignment:
    """One sign in {-1,+1} per volume-2^(-n) rectangle, id order."""

    n: int
    d: int
    signs: tuple[int, ...]

    def __post_init__(self):
        expected = rect_count(self.n, self.d)
        if len(self.signs) != expected:
            raise ValueError(
                f"need {expected} signs for n={self.n}, d={self.d}, "
                f"got {len(self.signs)}"
            )
        if any(s not in (-1, 1) for s in self.signs):
            raise ValueError("signs must all be -1 or +1")

    @classmethod
    def all_ones(cls, n: int, d: int) -> "SignAssignment":
        return cls(n, d, (1,) * rect_count(n, d))

    @classmethod
    def all_minus(cls, n: int, d: int) -> "SignAssignment":
        return cls(n, d, (-1,) * rect_count(n, d))

    @classmethod
    def from_string(cls, n: int, d: int, text: str) -> "SignAssignment":
        expected = rect_count(n, d)
        if len(text) != expected:
            raise SignFileError(
                f"sign string has length {len(text)}, expected {expected} "
                f"for n={n}, d={d}"
            )
        bad = set(text) - {"+", "-"}
        if bad:
            raise SignFileError(f"sign string has invalid characters: {sorted(bad)}")
        return cls(n, d, tuple(1 if c == "+" else -1 for c in text))

    @classmethod
    def random(cls, n: int, d: int, seed: int, sample: int = 0) -> "SignAssignment":
        """Seeded sample; see hsb.rng for the exact stream definition."""
        from . import rng

        values = rng.sign_values(seed, rect_count(n, d), sample)
        return cls(n, d, tuple(int(v) for v in values))

    def sign_string(self) -> str:
        return "".join("+" if s > 0 else "-" for s in self.signs)

    def sign_of(self, r: DyadicRect) -> int:
        return self.signs[rect_id(self.n, self.d, r)]

    def with_flipped(self, index: int) -> "SignAssignment":
        if not 0 <= index < len(self.signs):
            raise IdOutOfRange(f"id {index} outside [0, {len(self.signs)})")
        signs = list(self.signs)
        signs[index] = -signs[index]
        return SignAssignment(self.n, self.d, tuple(signs))

    def digest(self) -> int:
        from .digest import fnv1a64

        return fnv1a64(self.sign_string().encode("ascii"))


def format_sign_file(sa: SignAssignment) -> str:
    return f"n={sa.n} d={sa.d}\n{sa.sign_string()}\n"


def parse_sign_file(text: str) -> SignAssignment:
    """Parse the two-line sign file format; errors name the offending line."""
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if len(lines) < 2:
        raise SignFileError(f"line {len(lines) + 1}: missing (file has {len(lines)} lines, needs 2)")
    if len(lines) > 2:
        raise SignFileError("line 3: unexpected extra content")
    header = lines[0].split()
    if len(header) != 2 or not header[0].startswith("n=") or not header[1].startswith("d="):
        raise SignFileError(f"line 1: expected 'n=<n> d=<d>', got {lines[0]!r}")
    try:
        n = int(header[0][2:])
        d = int(header[1][2:])
    except ValueError:
        raise SignFileError(f"line 1: non-integer n or d in {lines[0]!r}") from None
    if n < 0 or d < 1:
        raise SignFileError(f"line 1: need n >= 0 and d >= 1, got n={n} d={d}")
    try:
        return SignAssignment.from_string(n, d, lines[1])
    except SignFileError as e:
        raise SignFileError(f"line 2: {e}") from None


def write_sign_file(path, sa: SignAssignment) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(format_sign_file(sa))


def read_sign_file(path) -> SignAssignment:
    with open(path, "r", encoding="ascii") as fh:
        return parse_sign_file(fh.read())
