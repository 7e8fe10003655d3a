"""Bit-exact label encoding: bitstrings, varints, section framing, term codec.

Labels are bitstrings built MSB-first.  A label is a sequence of sections,
each framed as (8-bit type, varint payload length in bits, payload), so a
decoder can walk arbitrary input without trusting it.
"""

from __future__ import annotations

from typing import List, Tuple, Union


class DecodeError(ValueError):
    """Raised when a bitstring cannot be decoded as the expected structure."""


class Bits:
    """Immutable bitstring, stored as (integer value, bit count), MSB-first."""

    __slots__ = ("value", "nbits")

    def __init__(self, value: int = 0, nbits: int = 0):
        if nbits < 0 or value < 0 or value >> nbits:
            raise ValueError("value does not fit in nbits")
        self.value = value
        self.nbits = nbits

    def __len__(self) -> int:
        return self.nbits

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Bits)
            and self.nbits == other.nbits
            and self.value == other.value
        )

    def __hash__(self) -> int:
        return hash((self.value, self.nbits))

    def __add__(self, other: "Bits") -> "Bits":
        return Bits((self.value << other.nbits) | other.value, self.nbits + other.nbits)

    def __repr__(self) -> str:
        return "Bits(%d bits)" % self.nbits

    def to_bytes(self) -> bytes:
        """Pack as bytes: LEB128 bit count, then payload padded to a byte."""
        head = _leb128(self.nbits)
        nbytes = (self.nbits + 7) // 8
        pad = nbytes * 8 - self.nbits
        return head + (self.value << pad).to_bytes(nbytes, "big")

    @classmethod
    def from_bytes(cls, data: bytes) -> "Bits":
        nbits, off = _read_leb128(data, 0)
        nbytes = (nbits + 7) // 8
        if len(data) - off < nbytes:
            raise DecodeError("truncated bitstring")
        pad = nbytes * 8 - nbits
        value = int.from_bytes(data[off : off + nbytes], "big") >> pad
        return cls(value, nbits)

    def to_hex(self) -> str:
        return self.to_bytes().hex()

    @classmethod
    def from_hex(cls, text: str) -> "Bits":
        try:
            data = bytes.fromhex(text)
        except ValueError as exc:
            raise DecodeError("bad hex: %s" % exc) from None
        return cls.from_bytes(data)


def _leb128(v: int) -> bytes:
    out = bytearray()
    while v >= 0x80:
        out.append(0x80 | (v & 0x7F))
        v >>= 7
    out.append(v)
    return bytes(out)


def _read_leb128(data: bytes, off: int) -> Tuple[int, int]:
    v = 0
    shift = 0
    while True:
        if off >= len(data) or shift > 63:
            raise DecodeError("truncated varint")
        b = data[off]
        off += 1
        v |= (b & 0x7F) << shift
        if not b & 0x80:
            return v, off
        shift += 7


class BitWriter:
    """Accumulates bits MSB-first."""

    __slots__ = ("value", "nbits")

    def __init__(self):
        self.value = 0
        self.nbits = 0

    def write_uint(self, v: int, width: int) -> None:
        if v < 0 or width < 0 or v >> width:
            raise ValueError("uint %d does not fit in %d bits" % (v, width))
        self.value = (self.value << width) | v
        self.nbits += width

    def write_bit(self, b: int) -> None:
        self.write_uint(1 if b else 0, 1)

    def write_varint(self, v: int) -> None:
        # 8-bit groups, low 7 bits of the value first, high bit = continue.
        if v < 0:
            raise ValueError("varint must be non-negative")
        while v >= 0x80:
            self.write_uint(0x80 | (v & 0x7F), 8)
            v >>= 7
        self.write_uint(v, 8)

    def write_bits(self, bits: Bits) -> None:
        self.value = (self.value << bits.nbits) | bits.value
        self.nbits += bits.nbits

    def getvalue(self) -> Bits:
        return Bits(self.value, self.nbits)


class BitReader:
    """Sequential reader over a Bits value; raises DecodeError on overrun."""

    __slots__ = ("bits", "pos")

    def __init__(self, bits: Bits):
        self.bits = bits
        self.pos = 0

    def remaining(self) -> int:
        return self.bits.nbits - self.pos

    def read_uint(self, width: int) -> int:
        if width < 0 or self.pos + width > self.bits.nbits:
            raise DecodeError("read past end of bitstring")
        shift = self.bits.nbits - self.pos - width
        self.pos += width
        return (self.bits.value >> shift) & ((1 << width) - 1)

    def read_bit(self) -> int:
        return self.read_uint(1)

    def read_varint(self) -> int:
        v = 0
        shift = 0
        while True:
            if shift > 63:
                raise DecodeError("varint too long")
            b = self.read_uint(8)
            v |= (b & 0x7F) << shift
            if not b & 0x80:
                return v
            shift += 7

    def read_bits(self, width: int) -> Bits:
        if width < 0 or self.pos + width > self.bits.nbits:
            raise DecodeError("read past end of bitstring")
        shift = self.bits.nbits - self.pos - width
        self.pos += width
        return Bits((self.bits.value >> shift) & ((1 << width) - 1), width)


def write_section(w: BitWriter, sec_type: int, payload: Bits) -> None:
    w.write_uint(sec_type, 8)
    w.write_varint(payload.nbits)
    w.write_bits(payload)


def read_sections(bits: Bits) -> List[Tuple[int, Bits]]:
    """Split a label into (type, payload) frames; DecodeError on bad framing."""
    r = BitReader(bits)
    out = []
    while r.remaining() > 0:
        t = r.read_uint(8)
        n = r.read_varint()
        out.append((t, r.read_bits(n)))
    return out


# A "term" is a non-negative int or a tuple of terms.  Canonical class states
# are terms, so one codec serves every property plugin.
Term = Union[int, Tuple]


def write_term(w: BitWriter, t: Term) -> None:
    if isinstance(t, int):
        w.write_bit(0)
        w.write_varint(t)
    elif isinstance(t, tuple):
        w.write_bit(1)
        w.write_varint(len(t))
        for item in t:
            write_term(w, item)
    else:
        raise ValueError("term must be int or tuple")


def read_term(r: BitReader, depth: int = 0) -> Term:
    if depth > 64:
        raise DecodeError("term nesting too deep")
    if r.read_bit() == 0:
        return r.read_varint()
    n = r.read_varint()
    if n > r.remaining():
        raise DecodeError("term length exceeds data")
    return tuple(read_term(r, depth + 1) for _ in range(n))
