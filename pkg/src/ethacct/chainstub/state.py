"""In-process chain validator.

A sequential validator with no blocks: every submitted raw transaction is
decoded, its sender recovered, and its nonce compared to the sender's
account nonce. Gas is charged flat (``gas_limit * gas_price``) and burned.
"""

from __future__ import annotations

import enum
import logging
import threading
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from ..account import Address
from ..ecdsa import RecoveryError
from ..rlp import RlpError
from ..transaction import SignedTransaction, TransactionError, contract_address, decode_raw, recover_sender

log = logging.getLogger(__name__)

U256_MAX = 2**256 - 1
DEFAULT_CHAIN_ID = 3
MAX_PENDING_PER_ADDRESS = 64


class TxStatus(enum.IntEnum):
    """Outcome of a submission. Values are the Ack wire codes."""

    ACCEPTED = 0
    NONCE_TOO_LOW = 1
    NONCE_TOO_HIGH_PENDING = 2
    INSUFFICIENT_BALANCE = 3
    INVALID_SIGNATURE = 4
    POOL_FULL = 5


@dataclass(frozen=True)
class Receipt:
    status: TxStatus
    consumed_nonce: Optional[int]
    new_balance: int
    sender: Optional[Address] = None
    tx_hash: Optional[bytes] = None


@dataclass
class AccountRecord:
    balance: int = 0
    nonce: int = 0


@dataclass(frozen=True)
class LogEntry:
    sender: Address
    tx: SignedTransaction
    tx_hash: bytes


def tx_cost(tx) -> int:
    """Up-front charge for a transaction under the flat gas model."""
    return tx.gas_limit * tx.gas_price + tx.value


@dataclass
class ChainState:
    chain_id: int = DEFAULT_CHAIN_ID
    accounts: Dict[bytes, AccountRecord] = field(default_factory=dict)
    pending: Dict[bytes, Dict[int, SignedTransaction]] = field(default_factory=dict)
    log: List[LogEntry] = field(default_factory=list)
    max_pending: int = MAX_PENDING_PER_ADDRESS
    total_faucet: int = 0
    total_burned: int = 0

    def __post_init__(self):
        self._lock = threading.RLock()

    def _record(self, addr: bytes) -> AccountRecord:
        addr = bytes(addr)
        rec = self.accounts.get(addr)
        if rec is None:
            rec = self.accounts[addr] = AccountRecord()
        return rec

    def balance(self, addr: bytes) -> int:
        rec = self.accounts.get(bytes(addr))
        return rec.balance if rec else 0

    def get_transaction_count(self, addr: bytes) -> int:
        rec = self.accounts.get(bytes(addr))
        return rec.nonce if rec else 0

    def faucet(self, addr: bytes, amount: int) -> int:
        if amount < 0:
            raise ValueError("faucet amount must be non-negative")
        with self._lock:
            rec = self._record(addr)
            credited = min(amount, U256_MAX - rec.balance)
            if credited < amount:
                log.warning("faucet to %s saturated at 2**256-1", Address(bytes(addr)))
            rec.balance += credited
            self.total_faucet += credited
            return rec.balance

    def submit_raw(self, raw: bytes) -> Receipt:
        try:
            stx = decode_raw(raw)
            sender = recover_sender(stx)
        except (RlpError, TransactionError, RecoveryError, ValueError) as exc:
            log.info("rejecting undecodable transaction: %s", exc)
            return Receipt(TxStatus.INVALID_SIGNATURE, None, 0)
        tx = stx.body
        if tx.chain_id != self.chain_id:
            # the signature commits to a different chain; treat as not valid here
            return Receipt(TxStatus.INVALID_SIGNATURE, tx.nonce, self.balance(sender), sender)

        with self._lock:
            rec = self._record(sender)
            if tx.nonce < rec.nonce:
                return Receipt(TxStatus.NONCE_TOO_LOW, tx.nonce, rec.balance, sender)
            if tx.nonce > rec.nonce:
                pool = self.pending.setdefault(bytes(sender), {})
                if tx.nonce not in pool and len(pool) >= self.max_pending:
                    return Receipt(TxStatus.POOL_FULL, tx.nonce, rec.balance, sender)
                pool[tx.nonce] = stx
                return Receipt(TxStatus.NONCE_TOO_HIGH_PENDING, tx.nonce, rec.balance, sender)
            if rec.balance < tx_cost(tx):
                return Receipt(TxStatus.INSUFFICIENT_BALANCE, tx.nonce, rec.balance, sender)
            entry = self._apply(sender, stx)
            self._drain(sender)
            return Receipt(TxStatus.ACCEPTED, tx.nonce, self.balance(sender), sender, entry.tx_hash)

    def _apply(self, sender: Address, stx: SignedTransaction) -> LogEntry:
        tx = stx.body
        rec = self._record(sender)
        gas = tx.gas_limit * tx.gas_price
        rec.balance -= gas + tx.value
        self.total_burned += gas
        dest = tx.to if tx.to else contract_address(sender, tx.nonce)
        self._record(dest).balance += tx.value
        rec.nonce += 1
        entry = LogEntry(sender, stx, stx.hash)
        self.log.append(entry)
        return entry

    def _drain(self, sender: Address) -> None:
        pool = self.pending.get(bytes(sender))
        if not pool:
            return
        rec = self._record(sender)
        for stale in [n for n in pool if n < rec.nonce]:
            del pool[stale]
        while rec.nonce in pool:
            stx = pool[rec.nonce]
            if rec.balance < tx_cost(stx.body):
                break
            del pool[rec.nonce]
            self._apply(sender, stx)
        if not pool:
            del self.pending[bytes(sender)]

    def pending_count(self, addr: bytes) -> int:
        return len(self.pending.get(bytes(addr), ()))

    def total_balance(self) -> int:
        return sum(rec.balance for rec in self.accounts.values())
