"""Byte links between the device and the node.

A link has two methods: ``write(data)`` and ``read(timeout) -> bytes``,
where an empty result means nothing arrived before the timeout.
"""

from __future__ import annotations

import queue
import threading
import time
from typing import Callable, List, Optional, Tuple

# fault hook: (direction, frame_bytes) -> replacement bytes, or None to drop
FaultHook = Callable[[str, bytes], Optional[bytes]]


class LoopbackLink:
    """Synchronous in-process link to a :class:`~ethacct.chainstub.node.NodeService`.

    Replies are computed during ``write`` and queued; ``read`` with nothing
    queued returns immediately, standing in for a timeout without waiting
    for it. Every chunk that crosses the link is recorded in ``trace`` as
    ``("tx" | "rx", bytes)`` *after* fault injection.
    """

    def __init__(self, node, fault: Optional[FaultHook] = None, delay: float = 0.0):
        self.node = node
        self.fault = fault
        self.delay = delay
        self.trace: List[Tuple[str, bytes]] = []
        self._rx: List[bytes] = []

    def _inject(self, direction: str, data: bytes) -> Optional[bytes]:
        if self.fault is None:
            return data
        return self.fault(direction, data)

    def write(self, data: bytes) -> None:
        if self.delay:
            time.sleep(self.delay)
        data = self._inject("tx", bytes(data))
        if data is None:
            return
        self.trace.append(("tx", data))
        reply = self.node.feed(data)
        if reply:
            reply = self._inject("rx", reply)
            if reply is not None:
                self._rx.append(reply)

    def read(self, timeout: float) -> bytes:
        if not self._rx:
            return b""
        data = self._rx.pop(0)
        self.trace.append(("rx", data))
        return data


class QueueLink:
    """Device end of a queue pair whose node end runs on another thread."""

    def __init__(self):
        self.to_node: "queue.Queue[bytes]" = queue.Queue()
        self.from_node: "queue.Queue[bytes]" = queue.Queue()

    def write(self, data: bytes) -> None:
        self.to_node.put(bytes(data))

    def read(self, timeout: float) -> bytes:
        try:
            return self.from_node.get(timeout=timeout)
        except queue.Empty:
            return b""

    def start_node(self, node) -> Callable[[], None]:
        """Run ``node.serve`` on a daemon thread; returns a stop function."""
        stop = threading.Event()
        t = threading.Thread(target=node.serve, args=(self.to_node, self.from_node, stop), daemon=True)
        t.start()

        def _stop():
            stop.set()
            t.join(timeout=1.0)

        return _stop


class SerialLink:
    """Wraps a serial-port-like object (``read(n)``, ``write(b)``, ``timeout`` attribute)."""

    def __init__(self, port, chunk: int = 4096):
        self.port = port
        self.chunk = chunk

    def write(self, data: bytes) -> None:
        self.port.write(data)
        flush = getattr(self.port, "flush", None)
        if flush:
            flush()

    def read(self, timeout: float) -> bytes:
        self.port.timeout = timeout
        return self.port.read(self.chunk) or b""
