"""Minimal JSON-RPC development node backed by :class:`ChainState`.

Serves the relay's three methods with geth-style error messages, so the
relay path can be exercised without an external node.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional

from ..transaction import decode_raw
from .state import ChainState, TxStatus

_ERRORS = {
    TxStatus.NONCE_TOO_LOW: "nonce too low",
    TxStatus.INSUFFICIENT_BALANCE: "insufficient funds for gas * price + value",
    TxStatus.INVALID_SIGNATURE: "invalid sender",
    TxStatus.POOL_FULL: "txpool is full",
}


def _hexbytes(text) -> bytes:
    if not isinstance(text, str) or text[:2].lower() != "0x":
        raise ValueError("expected 0x-prefixed hex string")
    return bytes.fromhex(text[2:])


class _RpcError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


def dispatch(state: ChainState, method: str, params: list):
    if method == "eth_sendRawTransaction":
        try:
            raw = _hexbytes(params[0])
        except (ValueError, IndexError) as exc:
            raise _RpcError(-32602, f"invalid argument 0: {exc}") from None
        receipt = state.submit_raw(raw)
        if receipt.status in (TxStatus.ACCEPTED, TxStatus.NONCE_TOO_HIGH_PENDING):
            return "0x" + decode_raw(raw).hash.hex()
        raise _RpcError(-32000, _ERRORS[receipt.status])
    if method in ("eth_getTransactionCount", "eth_getBalance"):
        try:
            addr = _hexbytes(params[0])
        except (ValueError, IndexError) as exc:
            raise _RpcError(-32602, f"invalid argument 0: {exc}") from None
        tag = params[1] if len(params) > 1 else "latest"
        if method == "eth_getBalance":
            return hex(state.balance(addr))
        count = state.get_transaction_count(addr)
        if tag == "pending":
            pool = state.pending.get(addr, {})
            while count in pool:
                count += 1
        return hex(count)
    if method == "eth_chainId":
        return hex(state.chain_id)
    raise _RpcError(-32601, f"the method {method} does not exist/is not available")


def make_server(state: ChainState, host: str = "127.0.0.1", port: int = 0) -> ThreadingHTTPServer:
    lock = threading.Lock()

    class Handler(BaseHTTPRequestHandler):
        def do_POST(self):
            length = int(self.headers.get("Content-Length", 0))
            try:
                req = json.loads(self.rfile.read(length))
            except ValueError:
                return self._reply({"jsonrpc": "2.0", "id": None, "error": {"code": -32700, "message": "parse error"}})
            rid = req.get("id")
            try:
                with lock:
                    result = dispatch(state, req.get("method", ""), req.get("params") or [])
                self._reply({"jsonrpc": "2.0", "id": rid, "result": result})
            except _RpcError as exc:
                self._reply({"jsonrpc": "2.0", "id": rid, "error": {"code": exc.code, "message": exc.message}})

        def _reply(self, obj):
            body = json.dumps(obj).encode()
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def log_message(self, fmt, *args):
            pass

    return ThreadingHTTPServer((host, port), Handler)


def serve_in_thread(state: ChainState, host: str = "127.0.0.1", port: int = 0):
    """Start a server on a daemon thread. Returns ``(server, url)``."""
    server = make_server(state, host, port)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    h, p = server.server_address[:2]
    return server, f"http://{h}:{p}"


__all__ = ["dispatch", "make_server", "serve_in_thread"]
