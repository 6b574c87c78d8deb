"""Device-side gateway state machine.

The session owns the account and its nonce. It bootstraps the nonce from
the chain, then submits one signed transaction at a time and waits for the
node's Ack before producing the next. The local nonce only advances on an
``ACCEPTED`` Ack; any other status leaves it unchanged so the same nonce is
reused once the problem is fixed.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

from ..account import AccountState
from ..bench import BenchStats, stats
from ..chainstub.state import TxStatus
from ..transaction import LegacyTransaction, sign_transaction
from .frames import Ack, CrcError, FrameError, FrameReader, NonceQuery, NonceReply, SubmitRaw, decode_message, pack

log = logging.getLogger(__name__)

BASE_GAS = 21000
DEFAULT_GAS_PRICE = 20 * 10**9


class GatewayError(RuntimeError):
    pass


class LinkTimeout(GatewayError):
    """No valid reply within the retry budget."""


class BootstrapError(GatewayError):
    pass


def data_gas(data: bytes) -> int:
    """Intrinsic calldata gas: 4 per zero byte, 16 per non-zero byte."""
    zeros = data.count(0)
    return 4 * zeros + 16 * (len(data) - zeros)


@dataclass
class RetryPolicy:
    timeout_s: float = 2.0
    retries: int = 3
    backoff_s: float = 0.1

    def backoff(self, attempt: int) -> float:
        return self.backoff_s * attempt


@dataclass
class TxTemplate:
    to: bytes
    gas_price: int = DEFAULT_GAS_PRICE
    gas_limit: int = BASE_GAS
    value: int = 0
    chain_id: int = 3
    data_surcharge: bool = True

    def build(self, nonce: int, data: bytes) -> LegacyTransaction:
        gas = self.gas_limit + (data_gas(data) if self.data_surcharge else 0)
        return LegacyTransaction(
            nonce=nonce,
            gas_price=self.gas_price,
            gas_limit=gas,
            to=self.to,
            value=self.value,
            data=data,
            chain_id=self.chain_id,
        )


@dataclass
class GatewaySession:
    account: AccountState
    link: object
    template: TxTemplate
    retry: RetryPolicy = field(default_factory=RetryPolicy)
    sleep: Callable[[float], None] = time.sleep
    clock: Callable[[], float] = time.monotonic
    bootstrapped: bool = False
    in_flight: bool = False
    retransmits: int = 0
    crc_failures: int = 0

    def __post_init__(self):
        self._reader = FrameReader()

    def exchange(self, frame: bytes, want: type, accept: Callable = lambda m: True):
        """Send ``frame`` and wait for a matching reply, retransmitting on timeout or CRC failure."""
        for attempt in range(self.retry.retries + 1):
            if attempt:
                self.retransmits += 1
                self.sleep(self.retry.backoff(attempt))
            self._reader.clear()
            self.link.write(frame)
            reply = self._await(want, accept)
            if reply is not None:
                return reply
        raise LinkTimeout(f"no {want.__name__} after {self.retry.retries + 1} attempts")

    def _await(self, want: type, accept: Callable):
        deadline = self.clock() + self.retry.timeout_s
        while True:
            remaining = deadline - self.clock()
            if remaining <= 0:
                return None
            chunk = self.link.read(remaining)
            if not chunk:
                return None
            corrupted = False
            for item in self._reader.feed(chunk):
                if isinstance(item, CrcError):
                    self.crc_failures += 1
                    corrupted = True
                    continue
                try:
                    msg = decode_message(item)
                except FrameError as exc:
                    log.info("ignoring malformed reply: %s", exc)
                    continue
                if isinstance(msg, want) and accept(msg):
                    return msg
            if corrupted:
                return None


def bootstrap_nonce(session: GatewaySession) -> int:
    try:
        reply = session.exchange(pack(NonceQuery(session.account.address)), NonceReply)
    except LinkTimeout as exc:
        session.bootstrapped = False
        raise BootstrapError(f"nonce bootstrap failed: {exc}") from exc
    session.account.next_nonce = reply.nonce
    session.bootstrapped = True
    return reply.nonce


def submit_one(session: GatewaySession, data: bytes) -> Ack:
    if not session.bootstrapped:
        raise GatewayError("session has not bootstrapped its nonce")
    if session.in_flight:
        raise GatewayError("a transaction is already in flight")
    acct = session.account
    tx = session.template.build(acct.next_nonce, bytes(data))
    raw = sign_transaction(tx, acct.secret)
    session.in_flight = True
    try:
        ack = session.exchange(pack(SubmitRaw(raw)), Ack, lambda a: a.nonce == tx.nonce)
    finally:
        session.in_flight = False
    if ack.status == TxStatus.ACCEPTED:
        acct.next_nonce += 1
    return ack


@dataclass
class StreamReport:
    accepted: int = 0
    acks: List[Ack] = field(default_factory=list)
    accepted_nonces: List[int] = field(default_factory=list)
    resubmissions: int = 0
    retransmits: int = 0
    resyncs: int = 0
    latency: Optional[BenchStats] = None
    next_index: int = 0
    completed: bool = False
    error: Optional[str] = None


StallHook = Callable[[GatewaySession, Ack], None]


def run_stream(
    session: GatewaySession,
    payloads: Sequence[bytes],
    max_stalls: int = 3,
    on_stall: Optional[StallHook] = None,
    max_resyncs: int = 3,
) -> StreamReport:
    """Submit payloads in order, one in flight at a time.

    * ``INSUFFICIENT_BALANCE``: call ``on_stall`` (or back off) and resubmit
      the same payload at the same nonce; give up after ``max_stalls``
      consecutive stalls.
    * ``NONCE_TOO_LOW`` / ``NONCE_TOO_HIGH_PENDING``: re-bootstrap the nonce
      and resubmit.
    * ``INVALID_SIGNATURE`` / ``POOL_FULL`` or a link failure: stop.

    A stopped stream reports partial progress; ``next_index`` is the first
    payload not yet accepted.
    """
    report = StreamReport()
    latencies: List[int] = []
    start_retransmits = session.retransmits
    stalls = resyncs = 0
    i = 0
    while i < len(payloads):
        t0 = time.perf_counter_ns()
        try:
            ack = submit_one(session, payloads[i])
        except GatewayError as exc:
            report.error = str(exc)
            break
        report.acks.append(ack)
        if ack.status == TxStatus.ACCEPTED:
            latencies.append(time.perf_counter_ns() - t0)
            report.accepted += 1
            report.accepted_nonces.append(ack.nonce)
            stalls = resyncs = 0
            i += 1
            continue
        report.resubmissions += 1
        if ack.status == TxStatus.INSUFFICIENT_BALANCE:
            stalls += 1
            if stalls > max_stalls:
                report.error = f"balance not refilled after {max_stalls} retries at nonce {ack.nonce}"
                break
            if on_stall is not None:
                on_stall(session, ack)
            else:
                session.sleep(session.retry.backoff(stalls))
        elif ack.status in (TxStatus.NONCE_TOO_LOW, TxStatus.NONCE_TOO_HIGH_PENDING):
            resyncs += 1
            if resyncs > max_resyncs:
                report.error = f"nonce did not resynchronize after {max_resyncs} attempts"
                break
            try:
                bootstrap_nonce(session)
            except GatewayError as exc:
                report.error = str(exc)
                break
            report.resyncs += 1
        else:
            report.error = f"transaction rejected: {ack.status.name}"
            break
    report.next_index = i
    report.completed = i == len(payloads)
    report.retransmits = session.retransmits - start_retransmits
    if latencies:
        report.latency = stats(latencies)
    return report
