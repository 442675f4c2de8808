"""Content hash tests against independently computed FNV-1a 64 vectors."""
from __future__ import annotations

from hypothesis import given
from hypothesis import strategies as st

from texam.markup import content_hash64

# Reference vectors computed by hand from the FNV-1a definition:
# h = 0xCBF29CE484222325; for each byte: h ^= b; h *= 0x100000001B3 (mod 2^64).
KNOWN = {
    "": 0xCBF29CE484222325,
    "a": 0xAF63DC4C8601EC8C,
    "foobar": 0x85944171F73967E8,
}


def test_known_vectors():
    for text, expected in KNOWN.items():
        assert content_hash64(text) == expected


def test_hash_is_over_utf8_bytes():
    # multi-byte input must hash its UTF-8 encoding, not code points
    h = 0xCBF29CE484222325
    for b in "α".encode("utf-8"):
        h = ((h ^ b) * 0x100000001B3) % (1 << 64)
    assert content_hash64("α") == h


@given(st.text(max_size=200))
def test_hash_fits_64_bits(text: str):
    h = content_hash64(text)
    assert 0 <= h < (1 << 64)


@given(st.text(max_size=200))
def test_hash_is_stable(text: str):
    assert content_hash64(text) == content_hash64(text)


def test_small_changes_change_the_hash():
    base = content_hash64("question stem $x^2$")
    assert content_hash64("question stem $x^3$") != base
    assert content_hash64("question stem $x^2$ ") != base
