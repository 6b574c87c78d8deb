"""Node side of the gateway link.

:class:`NodeService` consumes frames from the device, answers NonceQuery
with the backend's transaction count and SubmitRaw with an Ack. Frames
with a bad CRC are dropped without reply, so the device times out and
retransmits. A retransmitted SubmitRaw that is byte-identical to the last
accepted one is answered from cache instead of being resubmitted. Rejected
submissions are not cached: they changed nothing, and the device resends the
same bytes once, say, its balance has been topped up.
"""

from __future__ import annotations

import logging
import queue
import threading
from typing import Optional, Protocol

from ..gateway.frames import (
    Ack,
    CrcError,
    FrameError,
    FrameReader,
    NonceQuery,
    NonceReply,
    SubmitRaw,
    decode_message,
    pack,
)
from .state import Receipt, TxStatus

log = logging.getLogger(__name__)


class Backend(Protocol):
    def get_transaction_count(self, addr: bytes) -> int: ...

    def submit_raw(self, raw: bytes) -> Receipt: ...


class NodeService:
    def __init__(self, backend: Backend):
        self.backend = backend
        self._reader = FrameReader()
        self._last_submit: Optional[bytes] = None
        self._last_ack: Optional[bytes] = None
        self.dropped_frames = 0
        self.submissions = 0

    def feed(self, data: bytes) -> bytes:
        """Process incoming link bytes and return the bytes to send back."""
        out = bytearray()
        for item in self._reader.feed(data):
            if isinstance(item, CrcError):
                self.dropped_frames += 1
                continue
            try:
                msg = decode_message(item)
            except FrameError as exc:
                log.info("dropping malformed frame: %s", exc)
                self.dropped_frames += 1
                continue
            reply = self._handle(msg)
            if reply is not None:
                out += reply
        return bytes(out)

    def _handle(self, msg) -> Optional[bytes]:
        if isinstance(msg, NonceQuery):
            return pack(NonceReply(self.backend.get_transaction_count(msg.address)))
        if isinstance(msg, SubmitRaw):
            if msg.raw == self._last_submit and self._last_ack is not None:
                return self._last_ack
            self.submissions += 1
            receipt = self.backend.submit_raw(msg.raw)
            nonce = receipt.consumed_nonce if receipt.consumed_nonce is not None else 0
            ack = pack(Ack(receipt.status, nonce))
            if receipt.status == TxStatus.ACCEPTED:
                self._last_submit, self._last_ack = msg.raw, ack
            return ack
        log.info("ignoring unexpected %s from device", type(msg).__name__)
        return None

    def serve(self, inbox: "queue.Queue[bytes]", outbox: "queue.Queue[bytes]", stop: threading.Event) -> None:
        """Service a queue-based link until ``stop`` is set."""
        while not stop.is_set():
            try:
                data = inbox.get(timeout=0.05)
            except queue.Empty:
                continue
            reply = self.feed(data)
            if reply:
                outbox.put(reply)


__all__ = ["Backend", "NodeService", "TxStatus"]
