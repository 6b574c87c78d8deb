"""JSON-RPC relay to a real Ethereum node.

Only three methods are used: ``eth_sendRawTransaction``,
``eth_getTransactionCount`` (queried at the ``"pending"`` tag) and
``eth_getBalance``. Node errors are raised verbatim as :class:`RelayError`.
"""

from __future__ import annotations

import itertools
import json
import logging
import urllib.error
import urllib.request
from typing import Any, Optional, Union

from ..transaction import TransactionError, decode_raw
from ..rlp import RlpError
from .state import Receipt, TxStatus

log = logging.getLogger(__name__)


class RelayError(RuntimeError):
    """Transport failure or JSON-RPC error object returned by the node."""

    def __init__(self, message: str, code: Optional[int] = None, data: Any = None):
        super().__init__(message)
        self.code = code
        self.message = message
        self.data = data


class RpcRelay:
    def __init__(self, url: str, timeout: float = 10.0):
        self.url = url
        self.timeout = timeout
        self._ids = itertools.count(1)

    def call(self, method: str, params: list) -> Any:
        body = json.dumps({"jsonrpc": "2.0", "id": next(self._ids), "method": method, "params": params})
        req = urllib.request.Request(
            self.url, data=body.encode(), headers={"Content-Type": "application/json"}, method="POST"
        )
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                reply = json.loads(resp.read())
        except urllib.error.HTTPError as exc:
            # some nodes answer JSON-RPC errors with a non-200 status
            try:
                reply = json.loads(exc.read())
            except ValueError:
                raise RelayError(f"HTTP {exc.code}: {exc.reason}") from None
        except (urllib.error.URLError, OSError, ValueError) as exc:
            raise RelayError(f"transport error: {exc}") from None
        if reply.get("error"):
            err = reply["error"]
            raise RelayError(err.get("message", str(err)), err.get("code"), err.get("data"))
        return reply.get("result")

    def send_raw_transaction(self, raw: Union[bytes, str]) -> str:
        if isinstance(raw, (bytes, bytearray)):
            raw = "0x" + bytes(raw).hex()
        return self.call("eth_sendRawTransaction", [raw])

    def get_transaction_count(self, addr: bytes, block: str = "pending") -> int:
        return int(self.call("eth_getTransactionCount", [_addr_hex(addr), block]), 16)

    def get_balance(self, addr: bytes, block: str = "latest") -> int:
        return int(self.call("eth_getBalance", [_addr_hex(addr), block]), 16)


def _addr_hex(addr: Union[bytes, str]) -> str:
    if isinstance(addr, str):
        return addr.lower()
    return "0x" + bytes(addr).hex()


def relay_submit(endpoint: str, raw_hex: str) -> str:
    """Forward a 0x-hex raw transaction unchanged; returns the node's tx hash."""
    return RpcRelay(endpoint).send_raw_transaction(raw_hex)


_ERROR_PATTERNS = (
    ("nonce too low", TxStatus.NONCE_TOO_LOW),
    ("already known", TxStatus.NONCE_TOO_LOW),
    ("insufficient funds", TxStatus.INSUFFICIENT_BALANCE),
    ("nonce too high", TxStatus.NONCE_TOO_HIGH_PENDING),
    ("txpool is full", TxStatus.POOL_FULL),
)


def classify_node_error(message: str) -> TxStatus:
    low = message.lower()
    for needle, status in _ERROR_PATTERNS:
        if needle in low:
            return status
    return TxStatus.INVALID_SIGNATURE


class RelayBackend:
    """Adapts :class:`RpcRelay` to the node-service backend interface."""

    def __init__(self, relay: RpcRelay):
        self.relay = relay
        self.last_error: Optional[RelayError] = None

    def get_transaction_count(self, addr: bytes) -> int:
        return self.relay.get_transaction_count(addr, "pending")

    def submit_raw(self, raw: bytes) -> Receipt:
        try:
            nonce: Optional[int] = decode_raw(raw).body.nonce
        except (RlpError, TransactionError):
            nonce = None
        try:
            tx_hash = self.relay.send_raw_transaction(raw)
        except RelayError as exc:
            if exc.code is None:
                raise
            self.last_error = exc
            log.warning("node rejected transaction: %s (code %s)", exc.message, exc.code)
            return Receipt(classify_node_error(exc.message), nonce, 0)
        return Receipt(TxStatus.ACCEPTED, nonce, 0, tx_hash=bytes.fromhex(tx_hash[2:]))


__all__ = ["RelayBackend", "RelayError", "RpcRelay", "classify_node_error", "relay_submit"]
