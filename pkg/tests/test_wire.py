"""Wire codec tests: addresses, datapoint values, telegrams."""

import pytest
from hypothesis import given, strategies as st

from veriknx.errors import DecodeError, EncodeError, FramingError, IntegrityError, RangeError
from veriknx import wire
from veriknx.wire import (
    DptBool,
    DptFloat16,
    DptFloat32,
    DptUnsigned8,
    GroupAddress,
    IndividualAddress,
    Telegram,
    checksum,
    decode_dpt,
    decode_group,
    decode_individual,
    decode_telegram,
    encode_dpt,
    encode_group,
    encode_individual,
    encode_telegram,
)


def pack_bits(*fields):
    """Independent bit-packing oracle: fields are (value, width), big-endian."""
    word = 0
    for value, width in fields:
        word = (word << width) | value
    return word


class TestIndividualAddress:
    def test_zero(self):
        assert encode_individual(IndividualAddress(0, 0, 0)) == 0x0000

    def test_bit_arithmetic_oracle(self):
        assert encode_individual(IndividualAddress(1, 1, 10)) == pack_bits((1, 4), (1, 4), (10, 8))
        assert encode_individual(IndividualAddress(1, 1, 10)) == 0x110A
        assert encode_individual(IndividualAddress(15, 15, 255)) == pack_bits((15, 4), (15, 4), (255, 8))
        assert encode_individual(IndividualAddress(15, 15, 255)) == 0xFFFF

    def test_round_trip_exhaustive(self):
        for word in range(0x10000):
            assert encode_individual(decode_individual(word)) == word

    @pytest.mark.parametrize("area,line,device", [(16, 0, 0), (-1, 0, 0), (0, 16, 0), (0, 0, 256)])
    def test_out_of_range(self, area, line, device):
        with pytest.raises(RangeError):
            IndividualAddress(area, line, device)

    def test_range_error_names_field(self):
        with pytest.raises(RangeError, match="line"):
            IndividualAddress(0, 99, 0)

    def test_parse_str_round_trip(self):
        addr = IndividualAddress(1, 1, 10)
        assert IndividualAddress.parse(str(addr)) == addr
        with pytest.raises(RangeError):
            IndividualAddress.parse("1.1")


class TestGroupAddress:
    def test_bit_packing_oracle(self):
        assert encode_group(GroupAddress.three_level(0, 0, 1)) == pack_bits((0, 5), (0, 3), (1, 8))
        assert encode_group(GroupAddress.three_level(0, 0, 1)) == 0x0001
        assert encode_group(GroupAddress.three_level(1, 2, 3)) == pack_bits((1, 5), (2, 3), (3, 8))
        assert encode_group(GroupAddress.three_level(1, 2, 3)) == 0x0A03
        assert encode_group(GroupAddress.three_level(31, 7, 255)) == 0xFFFF

    def test_two_level_packing(self):
        assert encode_group(GroupAddress.two_level(1, 3)) == pack_bits((1, 5), (3, 11))
        assert encode_group(GroupAddress.two_level(31, 2047)) == 0xFFFF

    def test_round_trip_exhaustive_three_level(self):
        for word in range(0x10000):
            addr = decode_group(word)
            assert encode_group(GroupAddress.three_level(addr.main, addr.middle, addr.sub)) == word

    def test_round_trip_exhaustive_two_level(self):
        for word in range(0x10000):
            addr = decode_group(word, wire.TWO_LEVEL)
            assert encode_group(GroupAddress.two_level(addr.main, addr.sub)) == word

    def test_address_space_is_65536(self):
        words = {encode_group(GroupAddress.three_level(m, i, s))
                 for m in range(32) for i in range(8) for s in range(256)}
        assert len(words) == 65536

    @pytest.mark.parametrize("main,middle,sub", [(32, 0, 0), (0, 8, 0), (0, 0, 256), (-1, 0, 0)])
    def test_component_out_of_range(self, main, middle, sub):
        with pytest.raises(RangeError):
            GroupAddress.three_level(main, middle, sub)

    def test_equality_ignores_style(self):
        assert GroupAddress.three_level(0, 0, 1) == GroupAddress.free(1)
        assert hash(GroupAddress.three_level(0, 0, 1)) == hash(GroupAddress.free(1))

    def test_parse_and_str(self):
        assert GroupAddress.parse("1/2/3") == GroupAddress.three_level(1, 2, 3)
        assert GroupAddress.parse("1/300") == GroupAddress.two_level(1, 300)
        assert GroupAddress.parse("2563") == GroupAddress.free(2563)
        assert str(GroupAddress.three_level(1, 2, 3)) == "1/2/3"


class TestDpt:
    def test_bool_cases(self):
        assert encode_dpt(DptBool(True)) == b"\x01"
        assert encode_dpt(DptBool(False)) == b"\x00"
        assert decode_dpt(wire.DPT_BOOL, b"\x01") == DptBool(True)

    def test_float16_zero(self):
        assert encode_dpt(DptFloat16(0.0)) == b"\x00\x00"

    def test_float16_formula_oracle(self):
        # 0x0C00: sign 0, exponent 1, mantissa 0x400 -> 0.01 * 1024 * 2
        word = 0x0C00
        exponent = (word >> 11) & 0xF
        mantissa = word & 0x7FF
        assert 0.01 * mantissa * 2 ** exponent == 20.48
        assert decode_dpt(wire.DPT_FLOAT16, b"\x0c\x00") == DptFloat16(20.48)

    def test_float16_negative(self):
        # -1.0 = 0.01 * -100 * 2^0; mantissa -100 two's complement
        word = wire.encode_float16(-1.0)
        assert word & 0x8000
        assert wire.decode_float16(word) == -1.0

    def test_float16_value_round_trip_all_words(self):
        for word in range(0x10000):
            if word == wire.FLOAT16_INVALID:
                continue
            value = wire.decode_float16(word)
            again = wire.encode_float16(value)
            assert wire.decode_float16(again) == value

    def test_float16_word_round_trip_canonical(self):
        # canonical words: mantissa does not fit at any smaller exponent,
        # except zero which canonically encodes with exponent 0
        for word in range(0x10000):
            if word == wire.FLOAT16_INVALID:
                continue
            exponent = (word >> 11) & 0xF
            mantissa = word & 0x7FF
            if word & 0x8000:
                mantissa -= 2048
            canonical = exponent == 0 or not -2048 <= 2 * mantissa <= 2047
            if canonical:
                assert wire.encode_float16(wire.decode_float16(word)) == word

    def test_float16_invalid_word_rejected(self):
        with pytest.raises(DecodeError):
            wire.decode_float16(0x7FFF)

    def test_float16_overflow(self):
        with pytest.raises(EncodeError):
            wire.encode_float16(700000.0)
        with pytest.raises(EncodeError):
            wire.encode_float16(float("nan"))

    @given(st.floats(min_value=-670000, max_value=670000, allow_nan=False))
    def test_float16_error_bound(self, value):
        word = wire.encode_float16(value)
        exponent = (word >> 11) & 0xF
        assert abs(wire.decode_float16(word) - value) <= 0.005 * 2 ** exponent + 1e-9

    def test_unsigned8_round_trip(self):
        for v in range(256):
            assert decode_dpt(wire.DPT_UNSIGNED8, encode_dpt(DptUnsigned8(v))) == DptUnsigned8(v)
        with pytest.raises(RangeError):
            DptUnsigned8(256)

    @given(st.floats(width=32, allow_nan=False))
    def test_float32_round_trip(self, value):
        assert decode_dpt(wire.DPT_FLOAT32, encode_dpt(DptFloat32(value))) == DptFloat32(value)

    def test_length_mismatch(self):
        with pytest.raises(DecodeError):
            decode_dpt(wire.DPT_FLOAT16, b"\x00")
        with pytest.raises(DecodeError):
            decode_dpt(wire.DPT_BOOL, b"\x00\x00")

    def test_dpt_id_parse(self):
        assert wire.DptId.parse("DPT-9") == wire.DptId(9)
        assert wire.DptId.parse("DPT-9-1") == wire.DptId(9, 1)
        assert wire.DptId(9, 1).same_family(wire.DptId(9, 7))
        assert not wire.DptId(9).same_family(wire.DptId(1))


def make_telegram(**overrides):
    base = dict(
        source=IndividualAddress(1, 1, 10),
        destination=GroupAddress.three_level(0, 0, 2),
        payload=b"\x01",
        priority=2,
        repeated=False,
    )
    base.update(overrides)
    return Telegram(**base)


class TestTelegram:
    def test_checksum_hand_computed(self):
        # complement of xor: 0xBC ^ 0x11 ^ 0x0A = 0xA7, complemented 0x58
        assert checksum(bytes([0xBC, 0x11, 0x0A])) == 0x58

    def test_empty_payload_round_trip(self):
        t = make_telegram(payload=b"")
        assert decode_telegram(encode_telegram(t)) == t

    def test_round_trip_with_payload(self):
        t = make_telegram(payload=b"\x0c\x00", repeated=True)
        assert decode_telegram(encode_telegram(t)) == t

    def test_individual_destination_round_trip(self):
        t = make_telegram(destination=IndividualAddress(2, 3, 4))
        back = decode_telegram(encode_telegram(t))
        assert back == t
        assert not back.is_group_addressed

    @given(
        st.integers(0, 15), st.integers(0, 15), st.integers(0, 255),
        st.integers(0, 0xFFFF), st.binary(max_size=16), st.integers(0, 3), st.booleans(),
    )
    def test_round_trip_random(self, area, line, device, dest, payload, priority, repeated):
        t = Telegram(
            source=IndividualAddress(area, line, device),
            destination=GroupAddress.free(dest),
            payload=payload,
            priority=priority,
            repeated=repeated,
        )
        assert decode_telegram(encode_telegram(t)) == t

    def test_single_bit_flip_detected(self):
        # exhaustive single-bit-flip oracle on one fixture
        encoded = encode_telegram(make_telegram())
        for i in range(len(encoded)):
            for bit in range(8):
                corrupted = bytearray(encoded)
                corrupted[i] ^= 1 << bit
                with pytest.raises(DecodeError):
                    decode_telegram(bytes(corrupted))
                if i != 5:  # flips outside the flags octet keep the framing intact
                    with pytest.raises(IntegrityError):
                        decode_telegram(bytes(corrupted))

    def test_single_byte_corruption_detected(self):
        encoded = encode_telegram(make_telegram(payload=b"\x00\x01\x02"))
        for i in range(len(encoded)):
            if i == 5:
                continue
            for replacement in (0x00, 0xFF, encoded[i] ^ 0x41):
                if replacement == encoded[i]:
                    continue
                corrupted = bytearray(encoded)
                corrupted[i] = replacement
                with pytest.raises(IntegrityError):
                    decode_telegram(bytes(corrupted))

    def test_truncated_is_framing_error(self):
        encoded = encode_telegram(make_telegram())
        with pytest.raises(FramingError):
            decode_telegram(encoded[:-1])
        with pytest.raises(FramingError):
            decode_telegram(encoded[:3])
        with pytest.raises(FramingError):
            decode_telegram(encoded + b"\x00")

    def test_payload_too_long(self):
        with pytest.raises(RangeError):
            make_telegram(payload=b"\x00" * 17)
