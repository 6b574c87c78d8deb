"""Legacy EIP-155 transactions: build, sign, encode, decode, recover sender.

Signing pipeline::

    fields + (chain_id, 0, 0)  --rlp-->  payload  --keccak-->  digest
    digest --ecdsa--> (r, s, parity);  v = 35 + 2*chain_id + parity
    (nonce, gas_price, gas_limit, to, value, data, v, r, s)  --rlp-->  raw
"""

from __future__ import annotations

from dataclasses import dataclass

from .account import Address, derive_address
from .curve import N
from .ecdsa import HALF_N, PrivateKey, RecoverableSignature, recover, sign
from .keccak import keccak256
from .rlp import RlpError, rlp_bytes_to_uint, rlp_decode, rlp_encode

U64_MAX = 2**64 - 1
U256_MAX = 2**256 - 1
EIP155_V_OFFSET = 35


class TransactionError(ValueError):
    """Raw bytes do not describe a supported, well-formed signed transaction."""


class UnsupportedTxFormat(TransactionError):
    pass


class HighSError(TransactionError):
    pass


def _check_uint(name: str, value: int, bound: int) -> None:
    if not isinstance(value, int) or isinstance(value, bool) or not 0 <= value <= bound:
        raise TransactionError(f"{name} out of range: {value!r}")


@dataclass(frozen=True)
class LegacyTransaction:
    nonce: int
    gas_price: int
    gas_limit: int
    to: bytes
    value: int
    data: bytes = b""
    chain_id: int = 1

    def __post_init__(self):
        _check_uint("nonce", self.nonce, U64_MAX)
        _check_uint("gas_price", self.gas_price, U256_MAX)
        _check_uint("gas_limit", self.gas_limit, U64_MAX)
        _check_uint("value", self.value, U256_MAX)
        _check_uint("chain_id", self.chain_id, U64_MAX)
        if len(self.to) not in (0, 20):
            raise TransactionError(f"'to' must be 0 or 20 bytes, got {len(self.to)}")
        # normalize Address / bytearray so equality is on plain bytes
        object.__setattr__(self, "to", bytes(self.to))
        object.__setattr__(self, "data", bytes(self.data))

    def _head(self) -> list:
        return [self.nonce, self.gas_price, self.gas_limit, self.to, self.value, self.data]


@dataclass(frozen=True)
class SignedTransaction:
    body: LegacyTransaction
    r: int
    s: int
    v: int

    @property
    def y_parity(self) -> int:
        return (self.v - EIP155_V_OFFSET) & 1

    @property
    def signature(self) -> RecoverableSignature:
        return RecoverableSignature(self.r, self.s, self.y_parity)

    def encode(self) -> bytes:
        return rlp_encode(self.body._head() + [self.v, self.r, self.s])

    @property
    def hash(self) -> bytes:
        return keccak256(self.encode())


def signing_payload(tx: LegacyTransaction) -> bytes:
    # (r, s, v) placeholder of (0, 0, chain_id) in EIP-155 order: chain_id, then empty r and s
    return rlp_encode(tx._head() + [tx.chain_id, b"", b""])


def signing_hash(tx: LegacyTransaction) -> bytes:
    return keccak256(signing_payload(tx))


def v_for(chain_id: int, y_parity: int) -> int:
    return EIP155_V_OFFSET + 2 * chain_id + y_parity


def sign_transaction_full(tx: LegacyTransaction, key: PrivateKey) -> SignedTransaction:
    sig = sign(signing_hash(tx), key)
    return SignedTransaction(tx, sig.r, sig.s, v_for(tx.chain_id, sig.y_parity))


def sign_transaction(tx: LegacyTransaction, key: PrivateKey) -> bytes:
    """Return the raw transaction bytes, ready for ``eth_sendRawTransaction``."""
    return sign_transaction_full(tx, key).encode()


def decode_raw(raw: bytes) -> SignedTransaction:
    item = rlp_decode(raw)  # RlpError subclasses propagate unchanged
    if not isinstance(item, list):
        raise TransactionError("raw transaction is not an RLP list")
    if len(item) != 9:
        raise TransactionError(f"expected 9 fields, got {len(item)}")
    if any(isinstance(x, list) for x in item):
        raise TransactionError("transaction fields must be byte strings")
    nonce, gas_price, gas_limit, to, value, data, v, r, s = item
    try:
        nonce_i, gas_price_i, gas_limit_i, value_i, v_i, r_i, s_i = (
            rlp_bytes_to_uint(x) for x in (nonce, gas_price, gas_limit, value, v, r, s)
        )
    except RlpError as exc:
        raise TransactionError(str(exc)) from None
    for name, x, width in (("gas_price", gas_price, 32), ("value", value, 32), ("r", r, 32), ("s", s, 32)):
        if len(x) > width:
            raise TransactionError(f"{name} wider than 256 bits")
    if v_i < EIP155_V_OFFSET:
        raise UnsupportedTxFormat(f"v={v_i} is not an EIP-155 value")
    if not (1 <= r_i < N and 1 <= s_i < N):
        raise TransactionError("signature component out of range")
    if s_i > HALF_N:
        raise HighSError("s is in the upper half of the group order")
    chain_id = (v_i - EIP155_V_OFFSET) // 2
    body = LegacyTransaction(
        nonce=nonce_i,
        gas_price=gas_price_i,
        gas_limit=gas_limit_i,
        to=to,
        value=value_i,
        data=data,
        chain_id=chain_id,
    )
    return SignedTransaction(body, r_i, s_i, v_i)


def recover_sender(stx: SignedTransaction) -> Address:
    pub = recover(signing_hash(stx.body), stx.signature)
    return derive_address(pub)


def contract_address(sender: bytes, nonce: int) -> Address:
    """Address of a contract created by ``sender`` at ``nonce``."""
    return Address(keccak256(rlp_encode([bytes(sender), nonce]))[-20:])
