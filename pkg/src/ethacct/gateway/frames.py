"""Link framing and gateway messages.

Frame layout (all integers big-endian)::

    0xAA | msg_type (1) | payload_len (2) | payload | crc16 (2)

The CRC is CRC-16/CCITT-FALSE (poly 0x1021, init 0xFFFF) over
``msg_type || payload_len || payload``.

Message payloads:

    NonceQuery  0x01   address (20)
    NonceReply  0x02   nonce (8)
    SubmitRaw   0x03   raw transaction bytes
    Ack         0x04   status (1) | nonce (8)
"""

from __future__ import annotations

import binascii
import enum
import struct
from dataclasses import dataclass
from typing import List, Optional, Union

from ..chainstub.state import TxStatus

MAGIC = 0xAA
HEADER_LEN = 4
CRC_LEN = 2
MAX_PAYLOAD = 0xFFFF


class FrameError(ValueError):
    pass


class CrcError(FrameError):
    pass


class MsgType(enum.IntEnum):
    NONCE_QUERY = 0x01
    NONCE_REPLY = 0x02
    SUBMIT_RAW = 0x03
    ACK = 0x04


def crc16_ccitt(data: bytes) -> int:
    return binascii.crc_hqx(data, 0xFFFF)


@dataclass(frozen=True)
class Frame:
    msg_type: int
    payload: bytes

    def encode(self) -> bytes:
        if len(self.payload) > MAX_PAYLOAD:
            raise FrameError("payload too large for a frame")
        body = struct.pack(">BH", self.msg_type, len(self.payload)) + self.payload
        return bytes([MAGIC]) + body + struct.pack(">H", crc16_ccitt(body))

    @classmethod
    def decode(cls, data: bytes) -> "Frame":
        """Decode exactly one frame."""
        if len(data) < HEADER_LEN + CRC_LEN:
            raise FrameError("frame truncated")
        if data[0] != MAGIC:
            raise FrameError("bad magic byte")
        msg_type, length = struct.unpack(">BH", data[1:4])
        if len(data) != HEADER_LEN + length + CRC_LEN:
            raise FrameError("frame length does not match payload_len")
        body = data[1 : HEADER_LEN + length]
        (crc,) = struct.unpack(">H", data[-2:])
        if crc16_ccitt(body) != crc:
            raise CrcError("CRC mismatch")
        return cls(msg_type, bytes(data[HEADER_LEN : HEADER_LEN + length]))


class FrameReader:
    """Incremental frame extractor for a byte stream.

    ``feed`` returns complete frames; a frame failing its CRC is returned as
    a :class:`CrcError` instance in the output list so callers can react.
    Bytes before a magic byte are skipped.
    """

    def __init__(self):
        self._buf = bytearray()

    def feed(self, data: bytes) -> List[Union[Frame, CrcError]]:
        self._buf += data
        out: List[Union[Frame, CrcError]] = []
        while True:
            start = self._buf.find(bytes([MAGIC]))
            if start < 0:
                self._buf.clear()
                return out
            del self._buf[:start]
            if len(self._buf) < HEADER_LEN:
                return out
            length = int.from_bytes(self._buf[2:4], "big")
            total = HEADER_LEN + length + CRC_LEN
            if len(self._buf) < total:
                return out
            chunk = bytes(self._buf[:total])
            del self._buf[:total]
            try:
                out.append(Frame.decode(chunk))
            except CrcError as exc:
                out.append(exc)

    def clear(self) -> None:
        self._buf.clear()


@dataclass(frozen=True)
class NonceQuery:
    address: bytes


@dataclass(frozen=True)
class NonceReply:
    nonce: int


@dataclass(frozen=True)
class SubmitRaw:
    raw: bytes


@dataclass(frozen=True)
class Ack:
    status: TxStatus
    nonce: int


Message = Union[NonceQuery, NonceReply, SubmitRaw, Ack]


def encode_message(msg: Message) -> Frame:
    if isinstance(msg, NonceQuery):
        if len(msg.address) != 20:
            raise FrameError("address must be 20 bytes")
        return Frame(MsgType.NONCE_QUERY, bytes(msg.address))
    if isinstance(msg, NonceReply):
        return Frame(MsgType.NONCE_REPLY, struct.pack(">Q", msg.nonce))
    if isinstance(msg, SubmitRaw):
        return Frame(MsgType.SUBMIT_RAW, bytes(msg.raw))
    if isinstance(msg, Ack):
        return Frame(MsgType.ACK, struct.pack(">BQ", int(msg.status), msg.nonce))
    raise TypeError(f"not a gateway message: {msg!r}")


def decode_message(frame: Frame) -> Message:
    t, p = frame.msg_type, frame.payload
    if t == MsgType.NONCE_QUERY:
        if len(p) != 20:
            raise FrameError("NonceQuery payload must be 20 bytes")
        return NonceQuery(p)
    if t == MsgType.NONCE_REPLY:
        if len(p) != 8:
            raise FrameError("NonceReply payload must be 8 bytes")
        return NonceReply(struct.unpack(">Q", p)[0])
    if t == MsgType.SUBMIT_RAW:
        return SubmitRaw(p)
    if t == MsgType.ACK:
        if len(p) != 9:
            raise FrameError("Ack payload must be 9 bytes")
        status, nonce = struct.unpack(">BQ", p)
        try:
            return Ack(TxStatus(status), nonce)
        except ValueError:
            raise FrameError(f"unknown Ack status {status}") from None
    raise FrameError(f"unknown message type 0x{t:02x}")


def pack(msg: Message) -> bytes:
    return encode_message(msg).encode()


def unpack(data: bytes) -> Message:
    return decode_message(Frame.decode(data))
