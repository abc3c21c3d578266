import numpy as np
import pytest

from calculus.codec import SerializationError, decode_value, encode_value
from calculus.export import Export, message_size


def test_integers_use_narrowest_width():
    assert encode_value(5) == b"\x03\x05"
    assert encode_value(300) == b"\x04\x2c\x01"
    assert encode_value(-1) == b"\x07\xff"
    assert len(encode_value(0xFFFFFFFF)) == 5
    assert len(encode_value(-(2 ** 40))) == 9


def test_bool_and_none_are_single_bytes():
    assert encode_value(None) == b"\x00"
    assert encode_value(False) == b"\x01"
    assert encode_value(True) == b"\x02"
    assert encode_value(np.bool_(True)) == b"\x02"


def test_numpy_scalars_encode_like_python_scalars():
    assert encode_value(np.int64(7)) == encode_value(7)
    assert encode_value(np.float32(0.5)) == encode_value(0.5)


def test_short_composites_use_a_one_byte_length():
    assert encode_value((1, 2)) == b"\x4e\x02\x03\x01\x03\x02"
    assert encode_value("ab") == b"\x4c\x02ab"
    assert encode_value(()) == b"\x4e\x00"
    long = tuple(range(300))
    assert encode_value(long)[:3] == b"\x0e\x2c\x01"
    assert decode_value(encode_value(long)) == long


def test_sets_and_dicts_are_order_independent():
    assert encode_value({3, 1, 2}) == encode_value(frozenset([2, 1, 3]))
    assert encode_value({"b": 1, "a": 2}) == encode_value({"a": 2, "b": 1})


def test_nested_value_survives_decoding():
    value = (1, -7, 2.5, float("inf"), "pallet", b"\x00\x01", [1, 2], frozenset({(1, 2), (3, 4)}), {1: None})
    assert decode_value(encode_value(value)) == value


def test_unencodable_values_raise():
    with pytest.raises(SerializationError):
        encode_value(object())
    with pytest.raises(SerializationError):
        encode_value(2 ** 64)


def test_malformed_buffers_raise():
    with pytest.raises(SerializationError):
        decode_value(b"\x03\x05\x00")
    with pytest.raises(SerializationError):
        decode_value(b"\x05\x01")
    with pytest.raises(SerializationError):
        decode_value(b"\xee")


def test_empty_export_is_header_only():
    export = Export(device=4, round=1)
    assert message_size(export) == 8
    assert export.encode() == b"\x04\x00\x00\x00\x01\x00\x00\x00"


def test_export_size_grows_with_every_entry():
    entries = {}
    sizes = []
    for key in range(5):
        entries[key * 977] = encode_value(key)
        sizes.append(message_size(Export(1, 1, dict(entries))))
    assert sizes == sorted(set(sizes))


def test_export_size_matches_encoding():
    export = Export(9, 3, {17: encode_value((1, 2)), 5: encode_value("x")})
    assert export.size == len(export.encode())


def test_random_exports_survive_the_wire():
    rng = np.random.default_rng(7)
    for _ in range(50):
        entries = {}
        for _ in range(int(rng.integers(0, 12))):
            value = (int(rng.integers(-1000, 1000)), float(rng.random()), frozenset(int(x) for x in rng.integers(0, 50, 3)))
            entries[int(rng.integers(0, 2 ** 32))] = encode_value(value)
        export = Export(int(rng.integers(0, 2 ** 32)), int(rng.integers(1, 10 ** 6)), entries)
        decoded = Export.decode(export.encode())
        assert decoded == export
        assert decoded.encode() == export.encode()


def test_export_decodes_values_lazily():
    export = Export(1, 1, {42: encode_value([1, 2, 3])})
    assert export.value(42) == [1, 2, 3]
    assert export.value(43, "missing") == "missing"
