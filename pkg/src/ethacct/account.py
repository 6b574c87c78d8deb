"""Account identity: address derivation and the persisted account record."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from .ecdsa import KeyFormatError, PrivateKey, PublicKey
from .keccak import keccak256

SECRET_KEY_BYTES = 32
PUBLIC_KEY_BYTES = 64
ADDRESS_BYTES = 20
NONCE_BYTES = 8
MAX_NONCE = 2**64 - 1


class Address(bytes):
    """A 20-byte account address. Renders as lowercase 0x-hex."""

    def __new__(cls, data: bytes):
        if len(data) != ADDRESS_BYTES:
            raise ValueError(f"address must be {ADDRESS_BYTES} bytes, got {len(data)}")
        return super().__new__(cls, data)

    @classmethod
    def from_hex(cls, text: str) -> "Address":
        text = text.strip()
        if text[:2].lower() == "0x":
            text = text[2:]
        return cls(bytes.fromhex(text))

    def hex0x(self) -> str:
        return "0x" + self.hex()

    def __str__(self) -> str:
        return self.hex0x()

    def __repr__(self) -> str:
        return f"Address({self.hex0x()})"


def derive_address(pub: PublicKey) -> Address:
    # hash the raw 64-byte x||y; a leading 0x04 would change the address
    return Address(keccak256(pub.to_bytes())[-ADDRESS_BYTES:])


def account_footprint(form: str) -> int:
    """Bytes needed to persist an account: ``"full"`` or ``"reduced"`` form."""
    if form == "full":
        return SECRET_KEY_BYTES + PUBLIC_KEY_BYTES + ADDRESS_BYTES + NONCE_BYTES
    if form == "reduced":
        return SECRET_KEY_BYTES + NONCE_BYTES
    raise ValueError(f"unknown account form {form!r}")


@dataclass
class AccountState:
    secret: PrivateKey
    public: PublicKey = field(repr=False)
    address: Address
    next_nonce: int = 0

    def __post_init__(self):
        if not 0 <= self.next_nonce <= MAX_NONCE:
            raise ValueError("nonce must fit in 64 bits")

    def to_text(self) -> str:
        """Reduced form: secret hex, then the decimal nonce."""
        return f"{self.secret.to_hex()}\n{self.next_nonce}\n"


def rehydrate(secret: PrivateKey, nonce: int = 0) -> AccountState:
    pub = secret.public_key()
    return AccountState(secret=secret, public=pub, address=derive_address(pub), next_nonce=nonce)


def parse_account(text: str) -> tuple[PrivateKey, Optional[int]]:
    """Parse an account file body. The nonce line is optional."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise KeyFormatError("account file is empty")
    secret = PrivateKey.from_hex(lines[0])
    nonce = None
    if len(lines) > 1:
        try:
            nonce = int(lines[1], 10)
        except ValueError:
            raise KeyFormatError(f"bad nonce line {lines[1]!r}") from None
        if not 0 <= nonce <= MAX_NONCE:
            raise KeyFormatError("nonce must fit in 64 bits")
    if len(lines) > 2:
        raise KeyFormatError("unexpected extra lines in account file")
    return secret, nonce


def load_account(path: Union[str, Path]) -> tuple[AccountState, bool]:
    """Load an account file. Returns the state and whether a nonce was stored."""
    secret, nonce = parse_account(Path(path).read_text())
    return rehydrate(secret, nonce or 0), nonce is not None


def save_account(state: AccountState, path: Union[str, Path]) -> None:
    Path(path).write_text(state.to_text())
