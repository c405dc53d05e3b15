"""Finite bit strings and their textual literals.

Two literal forms are accepted:

* plain: a run of ASCII ``0``/``1`` characters, most significant bit first;
* hex: ``x<hexdigits>:<nbits>``, e.g. ``xA3:8`` for ``10100011``. The hex
  digits are expanded MSB first and truncated to ``nbits``; padding bits must
  be zero. ``x:0`` is the canonical spelling of the empty string, which has no
  plain form that survives a line-oriented file.
"""

from __future__ import annotations

import re
from functools import total_ordering
from typing import Iterable, Iterator, Union

_PLAIN = re.compile(r"[01]*\Z")
_HEX = re.compile(r"x([0-9A-Fa-f]*):(\d+)\Z")

EMPTY_LITERAL = "x:0"


@total_ordering
class BitString:
    """Immutable bit sequence. Ordering is (length, lexicographic)."""

    __slots__ = ("_bits",)

    def __init__(self, bits: Union[str, "BitString", Iterable[int]] = ""):
        if isinstance(bits, BitString):
            bits = bits._bits
        elif not isinstance(bits, str):
            bits = "".join("1" if b else "0" for b in bits)
        if not _PLAIN.match(bits):
            raise ValueError(f"not a bit string: {bits!r}")
        self._bits = bits

    @classmethod
    def _raw(cls, bits: str) -> "BitString":
        obj = object.__new__(cls)
        obj._bits = bits
        return obj

    @property
    def bits(self) -> str:
        return self._bits

    def __len__(self) -> int:
        return len(self._bits)

    def __iter__(self) -> Iterator[int]:
        return (1 if c == "1" else 0 for c in self._bits)

    def __getitem__(self, item):
        if isinstance(item, slice):
            return BitString._raw(self._bits[item])
        return 1 if self._bits[item] == "1" else 0

    def __add__(self, other: "BitString") -> "BitString":
        if not isinstance(other, BitString):
            return NotImplemented
        return BitString._raw(self._bits + other._bits)

    def __mul__(self, n: int) -> "BitString":
        return BitString._raw(self._bits * n)

    def __eq__(self, other) -> bool:
        return isinstance(other, BitString) and self._bits == other._bits

    def __lt__(self, other: "BitString") -> bool:
        return (len(self._bits), self._bits) < (len(other._bits), other._bits)

    def __hash__(self) -> int:
        return hash(self._bits)

    def __repr__(self) -> str:
        return f"BitString({self._bits!r})"

    def __str__(self) -> str:
        return self.to_literal()

    def to_int(self) -> int:
        return int(self._bits, 2) if self._bits else 0

    @classmethod
    def from_int(cls, value: int, width: int) -> "BitString":
        if value < 0 or value >= 1 << width:
            raise ValueError(f"{value} does not fit in {width} bits")
        return cls._raw(format(value, f"0{width}b") if width else "")

    def to_literal(self) -> str:
        return self._bits if self._bits else EMPTY_LITERAL

    def to_hex(self) -> str:
        n = len(self._bits)
        if n == 0:
            return EMPTY_LITERAL
        padded = self._bits + "0" * (-n % 4)
        digits = "".join(format(int(padded[i:i + 4], 2), "X") for i in range(0, len(padded), 4))
        return f"x{digits}:{n}"

    @classmethod
    def parse(cls, text: str) -> "BitString":
        return parse_literal(text)


def parse_literal(text: str) -> BitString:
    """Parse a plain or hex bit-string literal."""
    text = text.strip()
    m = _HEX.match(text)
    if m:
        digits, nbits = m.group(1), int(m.group(2))
        expanded = "".join(format(int(d, 16), "04b") for d in digits)
        if len(expanded) < nbits or len(expanded) - nbits >= 4:
            raise ValueError(f"hex literal {text!r}: {len(digits)} digits cannot carry {nbits} bits")
        if "1" in expanded[nbits:]:
            raise ValueError(f"hex literal {text!r}: nonzero padding bits")
        return BitString._raw(expanded[:nbits])
    if not _PLAIN.match(text) or not text:
        raise ValueError(f"not a bit-string literal: {text!r}")
    return BitString._raw(text)


def all_strings(length: int) -> Iterator[BitString]:
    """Every bit string of ``length`` bits in lexicographic order."""
    if length == 0:
        yield BitString._raw("")
        return
    for v in range(1 << length):
        yield BitString._raw(format(v, f"0{length}b"))


EMPTY = BitString._raw("")
