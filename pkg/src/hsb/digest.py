"""64-bit FNV-1a digests used in reports.

Two digests appear in report files:

- sign digest: FNV-1a over the ASCII '+'/'-' string of a sign assignment in
  canonical rectangle-id order (the same string the sign-file format stores);
- field digest: FNV-1a over the raw int8 cell values of a grid field in
  canonical (row-major, first coordinate most significant) order.

Digests are rendered as 16 lowercase hex digits so 64-bit values survive any
JSON consumer.
"""

from __future__ import annotations

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK = (1 << 64) - 1


def fnv1a64(data: bytes) -> int:
    h = FNV_OFFSET
    for b in data:
        h = ((h ^ b) * FNV_PRIME) & _MASK
    return h


def hex64(value: int) -> str:
    return f"{value:016x}"
