"""Bit-exact wire codecs: addresses, datapoint values, telegrams.

Everything in this module is a pure function over values; all encoders have
an exact decoder inverse (DPT-9 is value-exact only for canonically encoded
words, see `encode_float16`).

Wire layouts implemented here:

* individual address: 16-bit word ``AAAA LLLL DDDDDDDD``
* group address, 3-level: ``MMMMM III SSSSSSSS`` (main/middle/sub),
  2-level: ``MMMMM SSSSSSSSSSS``, free: the raw 16-bit word
* telegram: ``[control][src hi][src lo][dst hi][dst lo][flags][payload...][checksum]``
  with control = priority in bits 7..6 and the repeat flag in bit 5, and
  flags = dest-type in bit 7 (1 = group) and payload length in bits 4..0
* checksum: bitwise complement of the XOR of all preceding octets
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

from .errors import DecodeError, EncodeError, FramingError, IntegrityError, RangeError

__all__ = [
    "IndividualAddress",
    "GroupAddress",
    "THREE_LEVEL",
    "TWO_LEVEL",
    "FREE",
    "DptId",
    "DPT_BOOL",
    "DPT_UNSIGNED8",
    "DPT_FLOAT16",
    "DPT_FLOAT32",
    "DptBool",
    "DptUnsigned8",
    "DptFloat16",
    "DptFloat32",
    "DptValue",
    "Telegram",
    "MAX_PAYLOAD",
    "FLOAT16_INVALID",
    "FLOAT16_MAX",
    "encode_individual",
    "decode_individual",
    "encode_group",
    "decode_group",
    "encode_dpt",
    "decode_dpt",
    "encode_value",
    "decode_value",
    "encode_float16",
    "decode_float16",
    "checksum",
    "encode_telegram",
    "decode_telegram",
]


def _check_range(name: str, value: int, lo: int, hi: int) -> None:
    if not isinstance(value, int) or isinstance(value, bool) or not lo <= value <= hi:
        raise RangeError(f"{name} must be an integer in {lo}..{hi}, got {value!r}")


# ---------------------------------------------------------------------------
# Addresses
# ---------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class IndividualAddress:
    """A device's physical address area.line.device (couplers use device 0)."""

    area: int
    line: int
    device: int

    def __post_init__(self) -> None:
        _check_range("area", self.area, 0, 15)
        _check_range("line", self.line, 0, 15)
        _check_range("device", self.device, 0, 255)

    @classmethod
    def parse(cls, text: str) -> "IndividualAddress":
        parts = text.split(".")
        if len(parts) != 3:
            raise RangeError(f"individual address must be A.L.D, got {text!r}")
        try:
            area, line, device = (int(p) for p in parts)
        except ValueError:
            raise RangeError(f"individual address must be numeric A.L.D, got {text!r}") from None
        return cls(area, line, device)

    def __str__(self) -> str:
        return f"{self.area}.{self.line}.{self.device}"


def encode_individual(addr: IndividualAddress) -> int:
    """Pack an individual address into its 16-bit word."""
    return (addr.area << 12) | (addr.line << 8) | addr.device


def decode_individual(word: int) -> IndividualAddress:
    """Inverse of `encode_individual`."""
    _check_range("word", word, 0, 0xFFFF)
    return IndividualAddress((word >> 12) & 0xF, (word >> 8) & 0xF, word & 0xFF)


THREE_LEVEL = "three_level"
TWO_LEVEL = "two_level"
FREE = "free"


@dataclass(frozen=True, eq=False)
class GroupAddress:
    """A 16-bit multicast address identifying one function on the bus.

    The raw word is canonical: two group addresses are equal iff their raw
    values are, whatever style they were written in. The compiler only ever
    allocates 3-level addresses; 2-level and free forms are accepted on input.
    """

    raw: int
    style: str = THREE_LEVEL

    def __post_init__(self) -> None:
        _check_range("raw", self.raw, 0, 0xFFFF)
        if self.style not in (THREE_LEVEL, TWO_LEVEL, FREE):
            raise RangeError(f"unknown group address style {self.style!r}")

    @classmethod
    def three_level(cls, main: int, middle: int, sub: int) -> "GroupAddress":
        _check_range("main", main, 0, 31)
        _check_range("middle", middle, 0, 7)
        _check_range("sub", sub, 0, 255)
        return cls((main << 11) | (middle << 8) | sub, THREE_LEVEL)

    @classmethod
    def two_level(cls, main: int, sub: int) -> "GroupAddress":
        _check_range("main", main, 0, 31)
        _check_range("sub", sub, 0, 2047)
        return cls((main << 11) | sub, TWO_LEVEL)

    @classmethod
    def free(cls, raw: int) -> "GroupAddress":
        return cls(raw, FREE)

    @classmethod
    def parse(cls, text: str) -> "GroupAddress":
        parts = text.split("/")
        try:
            if len(parts) == 3:
                return cls.three_level(int(parts[0]), int(parts[1]), int(parts[2]))
            if len(parts) == 2:
                return cls.two_level(int(parts[0]), int(parts[1]))
            if len(parts) == 1:
                return cls.free(int(parts[0]))
        except ValueError:
            pass
        raise RangeError(f"cannot parse group address {text!r}")

    @property
    def main(self) -> int:
        return (self.raw >> 11) & 0x1F

    @property
    def middle(self) -> int:
        return (self.raw >> 8) & 0x7

    @property
    def sub(self) -> int:
        return self.raw & 0xFF if self.style == THREE_LEVEL else self.raw & 0x7FF

    def __eq__(self, other: object) -> bool:
        if isinstance(other, GroupAddress):
            return self.raw == other.raw
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.raw)

    def __lt__(self, other: "GroupAddress") -> bool:
        return self.raw < other.raw

    def __str__(self) -> str:
        if self.style == THREE_LEVEL:
            return f"{self.main}/{self.middle}/{self.sub}"
        if self.style == TWO_LEVEL:
            return f"{self.main}/{self.sub}"
        return str(self.raw)


def encode_group(addr: GroupAddress) -> int:
    """Pack a group address into its 16-bit word (range-checked at construction)."""
    return addr.raw


def decode_group(word: int, style: str = THREE_LEVEL) -> GroupAddress:
    """Inverse of `encode_group` for the given style."""
    _check_range("word", word, 0, 0xFFFF)
    return GroupAddress(word, style)


# ---------------------------------------------------------------------------
# Datapoint types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DptId:
    """Datatype family DPT-main-sub; compatibility compares the main number only."""

    main: int
    sub: int | None = None

    def __post_init__(self) -> None:
        if self.main <= 0:
            raise RangeError(f"dpt main must be positive, got {self.main}")
        if self.sub is not None and self.sub < 0:
            raise RangeError(f"dpt sub must be non-negative, got {self.sub}")

    @classmethod
    def parse(cls, text: str) -> "DptId":
        parts = text.upper().split("-")
        if len(parts) in (2, 3) and parts[0] == "DPT":
            try:
                main = int(parts[1])
                sub = int(parts[2]) if len(parts) == 3 else None
                return cls(main, sub)
            except ValueError:
                pass
        raise RangeError(f"cannot parse datapoint type {text!r}")

    def same_family(self, other: "DptId") -> bool:
        return self.main == other.main

    def __str__(self) -> str:
        return f"DPT-{self.main}" if self.sub is None else f"DPT-{self.main}-{self.sub}"


DPT_BOOL = DptId(1)
DPT_UNSIGNED8 = DptId(5)
DPT_FLOAT16 = DptId(9)
DPT_FLOAT32 = DptId(14)

FLOAT16_INVALID = 0x7FFF
FLOAT16_MAX = 670760.96


@dataclass(frozen=True)
class DptBool:
    value: bool


@dataclass(frozen=True)
class DptUnsigned8:
    value: int

    def __post_init__(self) -> None:
        _check_range("unsigned8", self.value, 0, 255)


@dataclass(frozen=True)
class DptFloat16:
    value: float


@dataclass(frozen=True)
class DptFloat32:
    value: float


DptValue = DptBool | DptUnsigned8 | DptFloat16 | DptFloat32

_DPT_OF_VALUE = {DptBool: DPT_BOOL, DptUnsigned8: DPT_UNSIGNED8,
                 DptFloat16: DPT_FLOAT16, DptFloat32: DPT_FLOAT32}


def encode_float16(value: float) -> int:
    """Encode a real number into the 16-bit float word.

    Layout: bit 15 sign, bits 14..11 exponent E, bits 10..0 the low bits of a
    12-bit two's-complement mantissa M; the value is 0.01 * M * 2^E. Always
    picks the smallest exponent that fits (canonical form). 0x7FFF is the
    reserved invalid-data word and is never produced.
    """
    if value != value or value in (float("inf"), float("-inf")):
        raise EncodeError(f"cannot encode {value!r} as a 16-bit float")
    scaled = float(value) * 100.0
    for exponent in range(16):
        mantissa = round(scaled / (1 << exponent))
        if -2048 <= mantissa <= 2047:
            word = ((mantissa & 0x800) << 4) | (exponent << 11) | (mantissa & 0x7FF)
            if word == FLOAT16_INVALID:
                break
            return word
    raise EncodeError(f"{value!r} overflows the 16-bit float range (max {FLOAT16_MAX})")


def decode_float16(word: int) -> float:
    """Inverse of `encode_float16`; rejects the reserved invalid-data word."""
    _check_range("word", word, 0, 0xFFFF)
    if word == FLOAT16_INVALID:
        raise DecodeError("0x7FFF is the reserved invalid-data pattern for DPT-9")
    exponent = (word >> 11) & 0xF
    mantissa = word & 0x7FF
    if word & 0x8000:
        mantissa -= 2048
    return (mantissa << exponent) / 100.0


def encode_dpt(value: DptValue) -> bytes:
    """Encode a typed datapoint value into its payload bytes."""
    if isinstance(value, DptBool):
        return b"\x01" if value.value else b"\x00"
    if isinstance(value, DptUnsigned8):
        return bytes([value.value])
    if isinstance(value, DptFloat16):
        return encode_float16(value.value).to_bytes(2, "big")
    if isinstance(value, DptFloat32):
        return struct.pack(">f", value.value)
    raise EncodeError(f"not a datapoint value: {value!r}")


def decode_dpt(dpt: DptId, data: bytes) -> DptValue:
    """Decode payload bytes according to the datapoint family."""
    if dpt.main == 1:
        if len(data) != 1:
            raise DecodeError(f"DPT-1 needs 1 byte, got {len(data)}")
        if data[0] == 0:
            return DptBool(False)
        if data[0] == 1:
            return DptBool(True)
        raise DecodeError(f"DPT-1 byte must be 0 or 1, got {data[0]:#x}")
    if dpt.main == 5:
        if len(data) != 1:
            raise DecodeError(f"DPT-5 needs 1 byte, got {len(data)}")
        return DptUnsigned8(data[0])
    if dpt.main == 9:
        if len(data) != 2:
            raise DecodeError(f"DPT-9 needs 2 bytes, got {len(data)}")
        return DptFloat16(decode_float16(int.from_bytes(data, "big")))
    if dpt.main == 14:
        if len(data) != 4:
            raise DecodeError(f"DPT-14 needs 4 bytes, got {len(data)}")
        return DptFloat32(struct.unpack(">f", data)[0])
    raise DecodeError(f"unsupported datapoint family {dpt}")


def encode_value(dpt: DptId, value: object) -> bytes:
    """Encode a plain Python value (bool or number) for the given family."""
    if dpt.main == 1:
        if not isinstance(value, bool):
            raise EncodeError(f"DPT-1 carries booleans, got {value!r}")
        return encode_dpt(DptBool(value))
    if dpt.main == 5:
        return encode_dpt(DptUnsigned8(int(value)))  # type: ignore[arg-type]
    if dpt.main == 9:
        return encode_dpt(DptFloat16(float(value)))  # type: ignore[arg-type]
    if dpt.main == 14:
        return encode_dpt(DptFloat32(float(value)))  # type: ignore[arg-type]
    raise EncodeError(f"unsupported datapoint family {dpt}")


def decode_value(dpt: DptId, data: bytes) -> object:
    """Decode payload bytes into a plain Python value."""
    decoded = decode_dpt(dpt, data)
    return decoded.value


# ---------------------------------------------------------------------------
# Telegrams
# ---------------------------------------------------------------------------

MAX_PAYLOAD = 16


@dataclass(frozen=True)
class Telegram:
    """One bus packet: control, source, destination, payload.

    The checksum is not stored; it is computed on encode and verified on
    decode. Destination is either a group address (the normal case) or an
    individual address; the flags octet records which.
    """

    source: IndividualAddress
    destination: GroupAddress | IndividualAddress
    payload: bytes = b""
    priority: int = 3
    repeated: bool = False

    def __post_init__(self) -> None:
        _check_range("priority", self.priority, 0, 3)
        if not isinstance(self.payload, (bytes, bytearray)):
            raise EncodeError(f"payload must be bytes, got {type(self.payload).__name__}")
        object.__setattr__(self, "payload", bytes(self.payload))
        if len(self.payload) > MAX_PAYLOAD:
            raise RangeError(f"payload must be at most {MAX_PAYLOAD} bytes, got {len(self.payload)}")

    @property
    def is_group_addressed(self) -> bool:
        return isinstance(self.destination, GroupAddress)


def checksum(data: bytes) -> int:
    """Bitwise complement of the XOR of all octets; detects any single-byte corruption."""
    acc = 0
    for byte in data:
        acc ^= byte
    return acc ^ 0xFF


def encode_telegram(t: Telegram) -> bytes:
    """Serialize a telegram, appending the checksum octet."""
    control = (t.priority << 6) | (0x20 if t.repeated else 0)
    if t.is_group_addressed:
        dest_word = encode_group(t.destination)  # type: ignore[arg-type]
        flags = 0x80 | len(t.payload)
    else:
        dest_word = encode_individual(t.destination)  # type: ignore[arg-type]
        flags = len(t.payload)
    src_word = encode_individual(t.source)
    body = bytes([control, src_word >> 8, src_word & 0xFF,
                  dest_word >> 8, dest_word & 0xFF, flags]) + t.payload
    return body + bytes([checksum(body)])


def decode_telegram(data: bytes) -> Telegram:
    """Parse and verify an encoded telegram.

    Raises FramingError when the byte count does not match the declared
    payload length, IntegrityError when the checksum does not.
    """
    if len(data) < 7:
        raise FramingError(f"telegram needs at least 7 bytes, got {len(data)}")
    flags = data[5]
    length = flags & 0x1F
    if length > MAX_PAYLOAD:
        raise FramingError(f"declared payload length {length} exceeds {MAX_PAYLOAD}")
    expected = 6 + length + 1
    if len(data) < expected:
        raise FramingError(f"truncated telegram: expected {expected} bytes, got {len(data)}")
    if len(data) > expected:
        raise FramingError(f"trailing bytes after telegram: expected {expected}, got {len(data)}")
    if checksum(data[:-1]) != data[-1]:
        raise IntegrityError(
            f"checksum mismatch: computed {checksum(data[:-1]):#04x}, found {data[-1]:#04x}")
    control = data[0]
    source = decode_individual((data[1] << 8) | data[2])
    dest_word = (data[3] << 8) | data[4]
    destination: GroupAddress | IndividualAddress
    if flags & 0x80:
        destination = decode_group(dest_word, FREE)
    else:
        destination = decode_individual(dest_word)
    return Telegram(
        source=source,
        destination=destination,
        payload=data[6:6 + length],
        priority=(control >> 6) & 0x3,
        repeated=bool(control & 0x20),
    )
