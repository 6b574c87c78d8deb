"""Recursive Length Prefix codec with strict (canonical-only) decoding.

An item is either a byte string (``bytes``) or a list of items. Decoding
always yields ``bytes`` and ``list``; encoding also accepts ``bytearray``,
``tuple`` and non-negative ``int`` (minimal big-endian) for convenience.
"""

from __future__ import annotations

from typing import List, Union

RlpItem = Union[bytes, List["RlpItem"]]

DEFAULT_MAX_DEPTH = 64


class RlpError(ValueError):
    """Malformed or unencodable RLP data."""


class RlpTruncatedError(RlpError):
    pass


class RlpNonCanonicalError(RlpError):
    pass


class RlpTrailingBytesError(RlpError):
    pass


class RlpDepthError(RlpError):
    pass


def uint_to_rlp_bytes(value: int) -> bytes:
    if value < 0:
        raise ValueError("RLP integers are unsigned")
    return value.to_bytes((value.bit_length() + 7) // 8, "big")


def rlp_bytes_to_uint(data: bytes) -> int:
    """Inverse of :func:`uint_to_rlp_bytes`; rejects leading zero bytes."""
    if data[:1] == b"\x00":
        raise RlpNonCanonicalError("integer has leading zero byte")
    return int.from_bytes(data, "big")


def _length_prefix(length: int, offset: int) -> bytes:
    if length <= 55:
        return bytes([offset + length])
    len_bytes = uint_to_rlp_bytes(length)
    if len(len_bytes) > 8:
        raise RlpError("payload too long for RLP")
    return bytes([offset + 55 + len(len_bytes)]) + len_bytes


def rlp_encode(item, max_depth: int = DEFAULT_MAX_DEPTH) -> bytes:
    out = bytearray()
    _encode_into(item, out, max_depth)
    return bytes(out)


def _encode_into(item, out: bytearray, depth_left: int) -> None:
    if isinstance(item, int) and not isinstance(item, bool):
        item = uint_to_rlp_bytes(item)
    if isinstance(item, (bytes, bytearray, memoryview)):
        item = bytes(item)
        if len(item) == 1 and item[0] < 0x80:
            out += item
        else:
            out += _length_prefix(len(item), 0x80)
            out += item
        return
    if isinstance(item, (list, tuple)):
        if depth_left <= 0:
            raise RlpDepthError("item nesting exceeds depth limit")
        payload = bytearray()
        for child in item:
            _encode_into(child, payload, depth_left - 1)
        out += _length_prefix(len(payload), 0xC0)
        out += payload
        return
    raise TypeError(f"cannot RLP-encode {type(item).__name__}")


def rlp_decode(data: bytes, max_depth: int = DEFAULT_MAX_DEPTH) -> RlpItem:
    data = bytes(data)
    item, end = _decode_at(data, 0, len(data), max_depth)
    if end != len(data):
        raise RlpTrailingBytesError(f"{len(data) - end} trailing bytes after RLP item")
    return item


def _read_header(data: bytes, pos: int, limit: int):
    """Return (is_list, payload_start, payload_len) for the item at pos."""
    if pos >= limit:
        raise RlpTruncatedError("unexpected end of input")
    b0 = data[pos]
    if b0 < 0x80:
        return False, pos, 1
    if b0 <= 0xB7:
        length = b0 - 0x80
        if length == 1:
            if pos + 1 >= limit:
                raise RlpTruncatedError("string payload truncated")
            if data[pos + 1] < 0x80:
                raise RlpNonCanonicalError("single byte below 0x80 must encode as itself")
        return False, pos + 1, length
    if b0 <= 0xBF:
        start, length = _read_long_length(data, pos, limit, b0 - 0xB7)
        return False, start, length
    if b0 <= 0xF7:
        return True, pos + 1, b0 - 0xC0
    start, length = _read_long_length(data, pos, limit, b0 - 0xF7)
    return True, start, length


def _read_long_length(data: bytes, pos: int, limit: int, len_of_len: int):
    start = pos + 1 + len_of_len
    if start > limit:
        raise RlpTruncatedError("length field truncated")
    len_bytes = data[pos + 1 : start]
    if len_bytes[0] == 0:
        raise RlpNonCanonicalError("length field has leading zero byte")
    length = int.from_bytes(len_bytes, "big")
    if length <= 55:
        raise RlpNonCanonicalError("long-form length used for payload of 55 bytes or fewer")
    return start, length


def _decode_at(data: bytes, pos: int, limit: int, depth_left: int):
    is_list, start, length = _read_header(data, pos, limit)
    end = start + length
    if end > limit:
        raise RlpTruncatedError("payload extends past end of input")
    if not is_list:
        return data[start:end], end
    if depth_left <= 0:
        raise RlpDepthError("item nesting exceeds depth limit")
    items = []
    cur = start
    while cur < end:
        child, cur = _decode_at(data, cur, end, depth_left - 1)
        items.append(child)
    return items, end
