"""Stable 64-bit content hash used to key the render cache.

FNV-1a over the UTF-8 encoding of the source. The algorithm is part of
the on-disk cache contract and must never change silently; bump the
renderer version instead.
"""

from __future__ import annotations

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK = 0xFFFFFFFFFFFFFFFF


def content_hash64(source: str) -> int:
    h = _FNV_OFFSET
    for byte in source.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & _MASK
    return h
