"""
Deterministic binary encoding of values exchanged between devices.

Every value is written as a one-byte tag followed by a little-endian payload.
Integers use the narrowest width that holds them, composites carry a u8 or u16
length prefix, and sets and dict keys are ordered by their encoded bytes so
equal values always produce identical bytes.
"""

import struct
from typing import Any, Tuple

import numpy as np


class SerializationError(ValueError):
    """Raised when a value cannot be encoded or a buffer cannot be decoded."""


TAG_NONE = 0x00
TAG_FALSE = 0x01
TAG_TRUE = 0x02
TAG_U8 = 0x03
TAG_U16 = 0x04
TAG_U32 = 0x05
TAG_U64 = 0x06
TAG_I8 = 0x07
TAG_I16 = 0x08
TAG_I32 = 0x09
TAG_I64 = 0x0A
TAG_F64 = 0x0B
TAG_STR = 0x0C
TAG_BYTES = 0x0D
TAG_TUPLE = 0x0E
TAG_LIST = 0x0F
TAG_SET = 0x10
TAG_DICT = 0x11

# Length-prefixed tags OR-ed with SHORT carry a u8 length instead of a u16.
SHORT = 0x40
_LENGTH_TAGS = frozenset((TAG_STR, TAG_BYTES, TAG_TUPLE, TAG_LIST, TAG_SET, TAG_DICT))

_UNSIGNED = ((0xFF, TAG_U8, "<B"), (0xFFFF, TAG_U16, "<H"), (0xFFFFFFFF, TAG_U32, "<I"),
             (0xFFFFFFFFFFFFFFFF, TAG_U64, "<Q"))
_SIGNED = ((0x7F, TAG_I8, "<b"), (0x7FFF, TAG_I16, "<h"), (0x7FFFFFFF, TAG_I32, "<i"),
           (0x7FFFFFFFFFFFFFFF, TAG_I64, "<q"))
_INT_FORMATS = {tag: fmt for _, tag, fmt in _UNSIGNED + _SIGNED}

_U16 = struct.Struct("<H")
_F64 = struct.Struct("<d")
MAX_LENGTH = 0xFFFF


def encode_value(value: Any) -> bytes:
    """
    Encode a value into its canonical byte form.

    Args:
        value: None, bool, int, float, str, bytes, tuple, list, set, frozenset
            or dict (numpy scalars are accepted and treated as Python scalars)

    Returns:
        Encoded bytes

    Raises:
        SerializationError: if the value (or a nested value) is not encodable
    """
    out = bytearray()
    _encode_into(value, out)
    return bytes(out)


def _encode_into(value: Any, out: bytearray) -> None:
    if value is None:
        out.append(TAG_NONE)
    elif isinstance(value, (bool, np.bool_)):
        out.append(TAG_TRUE if value else TAG_FALSE)
    elif isinstance(value, (int, np.integer)):
        _encode_int(int(value), out)
    elif isinstance(value, (float, np.floating)):
        out.append(TAG_F64)
        out += _F64.pack(float(value))
    elif isinstance(value, str):
        data = value.encode("utf-8")
        _encode_length(TAG_STR, len(data), out)
        out += data
    elif isinstance(value, (bytes, bytearray)):
        _encode_length(TAG_BYTES, len(value), out)
        out += value
    elif isinstance(value, tuple):
        _encode_length(TAG_TUPLE, len(value), out)
        for item in value:
            _encode_into(item, out)
    elif isinstance(value, list):
        _encode_length(TAG_LIST, len(value), out)
        for item in value:
            _encode_into(item, out)
    elif isinstance(value, (set, frozenset)):
        _encode_length(TAG_SET, len(value), out)
        for item in sorted(encode_value(item) for item in value):
            out += item
    elif isinstance(value, dict):
        _encode_length(TAG_DICT, len(value), out)
        pairs = sorted((encode_value(k), encode_value(v)) for k, v in value.items())
        for key_bytes, value_bytes in pairs:
            out += key_bytes
            out += value_bytes
    else:
        raise SerializationError(f"Cannot encode value of type {type(value).__name__}")


def _encode_int(value: int, out: bytearray) -> None:
    table = _UNSIGNED if value >= 0 else _SIGNED
    magnitude = value if value >= 0 else -value - 1
    for limit, tag, fmt in table:
        if magnitude <= limit:
            out.append(tag)
            out += struct.pack(fmt, value)
            return
    raise SerializationError(f"Integer {value} does not fit in 64 bits")


def _encode_length(tag: int, length: int, out: bytearray) -> None:
    if length > MAX_LENGTH:
        raise SerializationError(f"Composite of length {length} exceeds {MAX_LENGTH}")
    if length <= 0xFF:
        out.append(tag | SHORT)
        out.append(length)
    else:
        out.append(tag)
        out += _U16.pack(length)


def decode_value(data: bytes) -> Any:
    """
    Decode a buffer holding exactly one encoded value.

    Args:
        data: Encoded bytes

    Returns:
        The decoded value (tuples stay tuples, sets become frozensets)

    Raises:
        SerializationError: on truncated, trailing or unknown data
    """
    value, offset = decode_at(data, 0)
    if offset != len(data):
        raise SerializationError(f"{len(data) - offset} trailing bytes after value")
    return value


def decode_at(data: bytes, offset: int) -> Tuple[Any, int]:
    """
    Decode one value starting at offset.

    Args:
        data: Buffer
        offset: Position of the value's tag byte

    Returns:
        Tuple of (value, offset just past the value)
    """
    try:
        return _decode(data, offset)
    except (struct.error, IndexError, UnicodeDecodeError) as e:
        raise SerializationError(f"Malformed value at offset {offset}: {e}")


def skip_value(data: bytes, offset: int) -> int:
    """Return the offset just past the value starting at offset."""
    return decode_at(data, offset)[1]


def _decode(data: bytes, offset: int) -> Tuple[Any, int]:
    tag = data[offset]
    offset += 1
    if tag == TAG_NONE:
        return None, offset
    if tag == TAG_FALSE:
        return False, offset
    if tag == TAG_TRUE:
        return True, offset
    if tag in _INT_FORMATS:
        fmt = _INT_FORMATS[tag]
        return struct.unpack_from(fmt, data, offset)[0], offset + struct.calcsize(fmt)
    if tag == TAG_F64:
        return _F64.unpack_from(data, offset)[0], offset + _F64.size
    if tag & ~SHORT not in _LENGTH_TAGS:
        raise SerializationError(f"Unknown tag 0x{tag:02x}")
    if tag & SHORT:
        tag &= ~SHORT
        length = data[offset]
        offset += 1
    else:
        length = _U16.unpack_from(data, offset)[0]
        offset += _U16.size

    if tag in (TAG_STR, TAG_BYTES):
        raw = bytes(data[offset:offset + length])
        if len(raw) != length:
            raise SerializationError("Truncated string payload")
        return (raw.decode("utf-8") if tag == TAG_STR else raw), offset + length
    if tag == TAG_DICT:
        result = {}
        for _ in range(length):
            key, offset = _decode(data, offset)
            result[key], offset = _decode(data, offset)
        return result, offset
    items = []
    for _ in range(length):
        item, offset = _decode(data, offset)
        items.append(item)
    if tag == TAG_TUPLE:
        return tuple(items), offset
    if tag == TAG_SET:
        return frozenset(items), offset
    return items, offset
