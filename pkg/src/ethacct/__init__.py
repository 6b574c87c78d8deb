"""Ethereum account toolkit for constrained signers.

secp256k1 ECDSA with recovery, Keccak-256, strict RLP, legacy EIP-155
transactions, and a device/node nonce-synchronization protocol with an
in-process chain stub.
"""

from .account import AccountState, Address, account_footprint, derive_address, rehydrate
from .ecdsa import PrivateKey, PublicKey, RecoverableSignature, keygen, recover, sign, verify
from .keccak import keccak256
from .rlp import rlp_decode, rlp_encode
from .transaction import (
    LegacyTransaction,
    SignedTransaction,
    decode_raw,
    recover_sender,
    sign_transaction,
    signing_payload,
)

__version__ = "0.1.0"
