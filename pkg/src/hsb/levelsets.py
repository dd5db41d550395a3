"""Exact level-set histograms and the binomial level-set law.

The central identity checked here: for d=2, any sign assignment, and any
dyadic rectangle Q with level sum a+b <= n+1 (volume >= 2^(-n-1)), the number
of finest cells in Q where the field equals n+1-2k is exactly

    2^(n+1-a-b) * C(n+1, k)        for every 0 <= k <= n+1.

All counts are finest-cell counts: the measure of a level set inside Q is
count / 4^(n+1).  The verifier enumerates every admissible Q and compares
exact integers; there is no tolerance anywhere.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterator, NamedTuple, Optional

import numpy as np

from .digest import hex64
from .dyadic import DyadicRect, SignAssignment, rect, unit_cube
from .errors import DimensionMismatch, RegionTooFine, RegionTooSmall
from .field import GridField, eval_grid_fast, rect_cell_slices
from .parallel import map_chunked


@dataclass(frozen=True)
class LevelHistogram:
    """Exact counts of finest cells per field value within a region."""

    n: int
    counts: dict[int, int]
    region: DyadicRect

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def measures(self) -> dict[int, Fraction]:
        """Counts as exact measures (fractions of the unit cube)."""
        cells = 1 << (self.region.d * (self.n + 1))
        return {v: Fraction(c, cells) for v, c in sorted(self.counts.items())}

    def negated(self) -> "LevelHistogram":
        return LevelHistogram(
            self.n, {-v: c for v, c in self.counts.items()}, self.region
        )


def histogram(field: GridField, q: DyadicRect) -> LevelHistogram:
    """Exact level-set histogram of the field restricted to Q.

    Q must be a union of whole cells: every coordinate level <= n+1.
    """
    if q.d != field.d:
        raise DimensionMismatch(f"region has d={q.d}, field has d={field.d}")
    for iv in q.coords:
        if iv.level > field.n + 1:
            raise RegionTooFine(
                f"region level {iv.level} exceeds cell level {field.n + 1}"
            )
    block = field.values[rect_cell_slices(field.n, q)]
    lo = int(block.min())
    counts = np.bincount((block.astype(np.int64) - lo).ravel())
    out = {lo + v: int(c) for v, c in enumerate(counts) if c}
    return LevelHistogram(field.n, out, q)


def binomial_expected(n: int, q: DyadicRect, k: int) -> int:
    """Cell count the binomial law predicts for value n+1-2k on Q (d=2).

    Valid only under the law's hypothesis a+b <= n+1, where it is an exact
    integer 2^(n+1-a-b) * C(n+1, k).
    """
    if q.d != 2:
        raise DimensionMismatch(f"binomial law is two-dimensional, got d={q.d}")
    if not 0 <= k <= n + 1:
        raise ValueError(f"k must be in [0, {n + 1}], got {k}")
    a, b = q.levels
    if a + b > n + 1:
        raise RegionTooSmall(
            f"region has volume 2^-{a + b} < 2^-{n + 1}; the law does not apply"
        )
    return (1 << (n + 1 - a - b)) * comb(n + 1, k)


def binomial_scaled(n: int, q: DyadicRect, k: int) -> Fraction:
    """The law's prediction |Q|/2^(n+1) * C(n+1,k) in cell units, as an exact
    fraction, without the volume hypothesis.  Below the volume threshold this
    is generally not an integer, which is exactly what the tightness search
    exhibits."""
    if q.d != 2:
        raise DimensionMismatch(f"binomial law is two-dimensional, got d={q.d}")
    return Fraction(comb(n + 1, k), 1 << (q.level_sum - n - 1)) if q.level_sum >= n + 1 else Fraction(
        comb(n + 1, k) * (1 << (n + 1 - q.level_sum))
    )


class Mismatch(NamedTuple):
    value: int
    got: int
    expected: int


@dataclass(frozen=True)
class QOutcome:
    a: int
    b: int
    ox: int
    oy: int
    passed: bool
    mismatch: Optional[Mismatch]  # first failing value, k ascending


@dataclass(frozen=True)
class VerifyReport:
    n: int
    signs_digest: int
    outcomes: tuple[QOutcome, ...]
    total_q: int

    @property
    def passed(self) -> bool:
        return all(o.passed for o in self.outcomes)

    @property
    def failures(self) -> list[QOutcome]:
        return [o for o in self.outcomes if not o.passed]

    def jsonl_lines(self) -> Iterator[str]:
        """Line-oriented JSON: header object, then one object per Q."""
        header = {
            "v": 1,
            "n": self.n,
            "signsDigest": hex64(self.signs_digest),
            "totalQ": self.total_q,
        }
        yield json.dumps(header, sort_keys=True)
        for o in self.outcomes:
            entry = {
                "a": o.a,
                "b": o.b,
                "ox": o.ox,
                "oy": o.oy,
                "pass": o.passed,
                "mismatches": []
                if o.mismatch is None
                else [
                    {
                        "value": o.mismatch.value,
                        "got": o.mismatch.got,
                        "expected": o.mismatch.expected,
                    }
                ],
            }
            yield json.dumps(entry, sort_keys=True)


def region_specs(n: int) -> list[tuple[int, int, int, int]]:
    """Canonical enumeration of every Q the law covers: level sum s
    ascending, then a ascending, then positions lexicographic."""
    out = []
    for s in range(n + 2):
        for a in range(s + 1):
            b = s - a
            for ox in range(1 << a):
                for oy in range(1 << b):
                    out.append((a, b, ox, oy))
    return out


def expected_q_total(n: int) -> int:
    return sum((s + 1) << s for s in range(n + 2))


def verify_theorem(n: int, signs: SignAssignment, workers: int = 1) -> VerifyReport:
    """Check the binomial law exactly on every dyadic Q with level sum <= n+1.

    Per Q, histogram counts are compared against 2^(n+1-a-b)*C(n+1,k) for all
    k; the first mismatching k (if any) is recorded and the scan moves to the
    next Q.  Outcome order follows region_specs regardless of worker count.
    """
    if signs.d != 2:
        raise DimensionMismatch(f"verifier is two-dimensional, got d={signs.d}")
    field = eval_grid_fast(n, signs)
    side = 1 << (n + 1)
    # Value v maps to code j = (v + n+1)/2 = n+1-k; by symmetry of the
    # binomial coefficients the expected count at code j is C(n+1,j)*2^(n+1-s).
    codes = ((field.values.astype(np.int16) + (n + 1)) >> 1).astype(np.uint8)
    binom = np.array([comb(n + 1, j) for j in range(n + 2)], dtype=np.int64)

    def check_chunk(chunk) -> list[QOutcome]:
        out = []
        for a, b, ox, oy in chunk:
            wx, wy = 1 << (n + 1 - a), 1 << (n + 1 - b)
            counts = np.bincount(
                codes[ox * wx : (ox + 1) * wx, oy * wy : (oy + 1) * wy].ravel(),
                minlength=n + 2,
            )
            expected = binom << (n + 1 - a - b)
            if np.array_equal(counts, expected):
                out.append(QOutcome(a, b, ox, oy, True, None))
                continue
            mismatch = None
            for k in range(n + 2):  # k ascending = value descending
                j = n + 1 - k
                if counts[j] != expected[j]:
                    mismatch = Mismatch(n + 1 - 2 * k, int(counts[j]), int(expected[j]))
                    break
            out.append(QOutcome(a, b, ox, oy, False, mismatch))
        return out

    specs = region_specs(n)
    outcomes = map_chunked(check_chunk, specs, workers)
    return VerifyReport(n, signs.digest(), tuple(outcomes), len(specs))


class LpPower(NamedTuple):
    """Exact p-th power of the L^p norm: numerator / denominator."""

    numerator: int
    denominator: int

    def as_fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)


def lp_norm_pth_power(n: int, signs: SignAssignment, p: int) -> LpPower:
    """Sum of value^p over all cells, exactly, over the cell count.

    Restricted to even p, where the result is an integer-scaled rational and
    (by the binomial law on the full square) independent of the signs.
    """
    if signs.d != 2:
        raise DimensionMismatch(f"exact L^p path is two-dimensional, got d={signs.d}")
    if p <= 0 or p % 2:
        raise ValueError(f"p must be a positive even integer, got {p}")
    h = histogram(eval_grid_fast(n, signs), unit_cube(2))
    numerator = sum(c * v**p for v, c in h.counts.items())
    return LpPower(numerator, 1 << (2 * (n + 1)))


def binomial_moment(n: int, p: int) -> Fraction:
    """p-th moment of the full-square value distribution, in closed form:
    sum_k 2^-(n+1) C(n+1,k) (n+1-2k)^p."""
    if p <= 0 or p % 2:
        raise ValueError(f"p must be a positive even integer, got {p}")
    total = sum(comb(n + 1, k) * (n + 1 - 2 * k) ** p for k in range(n + 2))
    return Fraction(total, 1 << (n + 1))


def cp_scan(p: int, n_max: int) -> list[tuple[int, float]]:
    """Normalized L^p norms ||F||_p / sqrt(n+1) for n = 0..n_max.

    Computed from the closed-form moments, so no grid is built and n_max is
    not subject to the grid budget.  For p=2 every entry is exactly 1.0; for
    larger even p the entries approach the Gaussian moment limit
    (p-1)!!^(1/p) from below.
    """
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max}")
    out = []
    for n in range(n_max + 1):
        moment = binomial_moment(n, p)
        norm = float(moment) ** (1.0 / p)
        out.append((n, norm / float(n + 1) ** 0.5))
    return out
