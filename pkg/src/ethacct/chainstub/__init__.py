"""In-process chain stub, its link-side node service, and a JSON-RPC relay."""

from .relay import RelayBackend, RelayError, RpcRelay, relay_submit
from .state import ChainState, LogEntry, Receipt, TxStatus, tx_cost


def submit_raw(state: ChainState, raw: bytes) -> Receipt:
    return state.submit_raw(raw)


def faucet(state: ChainState, addr: bytes, amount: int) -> int:
    return state.faucet(addr, amount)


def get_transaction_count(state: ChainState, addr: bytes) -> int:
    return state.get_transaction_count(addr)


__all__ = [
    "ChainState",
    "LogEntry",
    "Receipt",
    "RelayBackend",
    "RelayError",
    "RpcRelay",
    "TxStatus",
    "faucet",
    "get_transaction_count",
    "relay_submit",
    "submit_raw",
    "tx_cost",
]
