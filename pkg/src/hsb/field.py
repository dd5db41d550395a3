"""Evaluation of the signed sum of Haar functions on the finest-cell grid.

The sum F = sum of sign(R) * h_R over all dyadic rectangles R of volume
2^(-n) is constant on each cell of the (2^(n+1))^d grid, so a full
description of F is one small integer per cell.

Bit convention (frozen; exhaustively tested against haar_at):

    For a layer of shape (k_1, ..., k_d) and a cell index c_t in coordinate
    t (0 <= c_t < 2^(n+1)):

        rectangle offset  o_t = c_t >> (n + 1 - k_t)
        half-of-interval  b_t = (c_t >> (n - k_t)) & 1      (0=left, 1=right)
        Haar factor           = 2*b_t - 1

    so for d=2 and layer shape (k, n-k), the x factor reads bit n-k of i and
    the y factor reads bit k of j.  The derivation: the rectangle's extent in
    coordinate t is 2^(n+1-k_t) cells, its halves are 2^(n-k_t) cells, and a
    cell sits in the right half exactly when bit n-k_t of its index is set.

Three evaluation paths exist on purpose:

- eval_grid:      reference path, literally eval_cell at every cell;
- eval_grid_fast: layer sweep, adding each layer's signed +/-1 block pattern
                  over the whole grid in one vectorized pass per layer;
- allones_value:  closed form for d=2 all-ones signs,
                  (n+1) - 2*popcount(bitreverse_{n+1}(i) XOR j).

The fast paths must agree with the reference bit for bit; the test suite
enforces this, exhaustively at small sizes.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .digest import fnv1a64
from .dyadic import (
    DyadicRect,
    SignAssignment,
    check_grid_budget,
    enumerate_layers,
    layer_count,
    rect_count,
)
from .errors import DimensionMismatch, IndexOutOfRange, SignFileError

DUMP_MAGIC = b"HSBF"
DUMP_VERSION = 1
_DUMP_HEADER = struct.Struct("<4sBBB9x")  # magic, version, n, d, zero padding


@dataclass(frozen=True)
class GridField:
    """Cell values of the signed Haar sum on the (2^(n+1))^d grid.

    values is a C-contiguous int array of shape (2^(n+1),)*d; the canonical
    flat order (first coordinate most significant) is values.ravel().  For
    d=2, |v| <= n+1 and v == n+1 (mod 2) at every cell; in general the bound
    and parity are the layer count.  Treat values as immutable.
    """

    n: int
    d: int
    values: np.ndarray

    @property
    def side(self) -> int:
        return 1 << (self.n + 1)

    def value_at(self, cell: tuple[int, ...]) -> int:
        return int(self.values[tuple(cell)])

    def flat(self) -> np.ndarray:
        return self.values.ravel()

    def copy(self) -> "GridField":
        return GridField(self.n, self.d, self.values.copy())


def _value_dtype(n: int, d: int):
    # Cell values are bounded by the layer count; int8 covers every d=2 case.
    return np.int8 if layer_count(n, d) <= 127 else np.int16


@lru_cache(maxsize=None)
def _layer_table(n: int, d: int) -> tuple:
    """Per-layer constants for cell evaluation.

    Each entry: (base id of the layer, per-coordinate offset shifts
    n+1-k_t, per-coordinate half-bit shifts n-k_t, per-coordinate widths k_t).
    """
    entries = []
    for layer_idx, spec in enumerate(enumerate_layers(n, d)):
        off_shifts = tuple(n + 1 - k for k in spec.shape)
        half_shifts = tuple(n - k for k in spec.shape)
        entries.append((layer_idx << n, off_shifts, half_shifts, spec.shape))
    return tuple(entries)


def eval_cell(n: int, signs: SignAssignment, cell) -> int:
    """Signed Haar sum at one cell; the per-cell reference path."""
    if signs.n != n:
        raise DimensionMismatch(f"signs have n={signs.n}, expected {n}")
    d = signs.d
    if len(cell) != d:
        raise DimensionMismatch(f"cell has {len(cell)} coordinates, d={d}")
    side = 1 << (n + 1)
    for c in cell:
        if not 0 <= c < side:
            raise IndexOutOfRange(f"cell index {c} outside [0, {side})")
    sv = signs.signs
    total = 0
    for base, off_shifts, half_shifts, shape in _layer_table(n, d):
        rank = 0
        prod = 1
        for c, os, hs, k in zip(cell, off_shifts, half_shifts, shape):
            rank = (rank << k) | (c >> os)
            if not (c >> hs) & 1:
                prod = -prod
        total += sv[base + rank] * prod
    return total


def eval_grid(n: int, signs: SignAssignment) -> GridField:
    """Reference grid: eval_cell applied to every cell, canonical order."""
    check_grid_budget(n, signs.d)
    d = signs.d
    side = 1 << (n + 1)
    sv = signs.signs
    table = _layer_table(n, d)
    out = np.empty((side,) * d, dtype=_value_dtype(n, d))
    flat = out.ravel()
    # Same loop as eval_cell, inlined over all cells in canonical order.
    idx = 0
    for cell in np.ndindex(*(side,) * d):
        total = 0
        for base, off_shifts, half_shifts, shape in table:
            rank = 0
            prod = 1
            for c, os, hs, k in zip(cell, off_shifts, half_shifts, shape):
                rank = (rank << k) | (c >> os)
                if not (c >> hs) & 1:
                    prod = -prod
            total += sv[base + rank] * prod
        flat[idx] = total
        idx += 1
    return GridField(n, d, out)


def _half_pattern(length: int) -> np.ndarray:
    """[-1]*(length/2) + [+1]*(length/2); length is a power of two >= 2."""
    out = np.ones(length, dtype=np.int8)
    out[: length // 2] = -1
    return out


def eval_grid_fast(n: int, signs: SignAssignment) -> GridField:
    """Layer sweep: per layer, one vectorized signed block-pattern pass.

    Produces output identical to eval_grid on every input.  Safe to call
    concurrently; writes only into its own output array.
    """
    check_grid_budget(n, signs.d)
    d = signs.d
    side = 1 << (n + 1)
    dtype = _value_dtype(n, d)
    sign_arr = np.asarray(signs.signs, dtype=np.int8)
    acc = np.zeros((side,) * d, dtype=dtype)
    for layer_idx, spec in enumerate(enumerate_layers(n, d)):
        base = layer_idx << n
        eps = sign_arr[base : base + (1 << n)].reshape(
            tuple(1 << k for k in spec.shape)
        )
        block = _half_pattern(1 << (n + 1 - spec.shape[0]))
        for k in spec.shape[1:]:
            block = np.multiply.outer(block, _half_pattern(1 << (n + 1 - k)))
        acc += np.kron(eps, block).astype(dtype, copy=False)
    return GridField(n, d, acc)


@lru_cache(maxsize=None)
def _bitrev_table(bits: int) -> np.ndarray:
    size = 1 << bits
    rev = np.zeros(size, dtype=np.int64)
    for i in range(size):
        r = 0
        x = i
        for _ in range(bits):
            r = (r << 1) | (x & 1)
            x >>= 1
        rev[i] = r
    return rev


def allones_value(n: int, i: int, j: int) -> int:
    """Closed form for the d=2 all-ones field at cell (i, j).

    Equals (n+1) - 2*popcount(bitreverse_{n+1}(i) XOR j): reversing the low
    n+1 bits of i lines up the x half-bit of layer k (bit n-k of i) with the
    y half-bit (bit k of j), so matching bits contribute +1 and differing
    bits -1.
    """
    side = 1 << (n + 1)
    if not (0 <= i < side and 0 <= j < side):
        raise IndexOutOfRange(f"cell ({i}, {j}) outside [0, {side})^2")
    rev = int(_bitrev_table(n + 1)[i])
    return (n + 1) - 2 * (rev ^ j).bit_count()


def allones_grid(n: int) -> GridField:
    """Vectorized allones_value over the whole d=2 grid."""
    check_grid_budget(n, 2)
    rev = _bitrev_table(n + 1)
    xor = rev[:, None] ^ np.arange(1 << (n + 1), dtype=np.int64)[None, :]
    pop = np.bitwise_count(xor.astype(np.uint64)).astype(np.int16)
    values = ((n + 1) - 2 * pop).astype(_value_dtype(n, 2))
    return GridField(n, 2, values)


def rect_cell_slices(n: int, r: DyadicRect) -> tuple[slice, ...]:
    """Cell-index slices of a rectangle on the (2^(n+1))^d grid."""
    out = []
    for iv in r.coords:
        start, stop = iv.cell_span(n + 1)
        out.append(slice(start, stop))
    return tuple(out)


def haar_block(n: int, r: DyadicRect) -> np.ndarray:
    """The +/-1 pattern of h_R on R's own cell block (int8)."""
    block = _half_pattern(1 << (n + 1 - r.coords[0].level))
    for iv in r.coords[1:]:
        block = np.multiply.outer(block, _half_pattern(1 << (n + 1 - iv.level)))
    return block


def field_digest(field: GridField) -> int:
    """FNV-1a over the canonical-order int8 bytes of the field."""
    data = np.ascontiguousarray(field.values, dtype=np.int8).tobytes()
    return fnv1a64(data)


def dump_field(field: GridField, path) -> None:
    """Binary dump: 16-byte header (magic, version, n, d), int8 cells."""
    header = _DUMP_HEADER.pack(DUMP_MAGIC, DUMP_VERSION, field.n, field.d)
    data = np.ascontiguousarray(field.values, dtype=np.int8).tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(data)


def load_field(path) -> GridField:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _DUMP_HEADER.size:
        raise SignFileError("field dump too short for header")
    magic, version, n, d = _DUMP_HEADER.unpack_from(raw)
    if magic != DUMP_MAGIC:
        raise SignFileError(f"bad magic {magic!r}, expected {DUMP_MAGIC!r}")
    if version != DUMP_VERSION:
        raise SignFileError(f"unsupported dump version {version}")
    side = 1 << (n + 1)
    expected = side**d
    body = raw[_DUMP_HEADER.size :]
    if len(body) != expected:
        raise SignFileError(
            f"field dump has {len(body)} cells, expected {expected}"
        )
    values = np.frombuffer(body, dtype=np.int8).reshape((side,) * d).copy()
    return GridField(n, d, values)
