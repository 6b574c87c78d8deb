"""ECDSA over secp256k1 with recoverable, low-s signatures.

Nonces are derived deterministically from (key, digest) following RFC 6979
with HMAC-SHA256, so signing is a pure function and no RNG is needed after
key generation.
"""

from __future__ import annotations

import hashlib
import hmac
import os
from dataclasses import dataclass, field
from typing import Callable, Optional

from .curve import (
    G,
    N,
    AffinePoint,
    is_on_curve,
    lift_x,
    mul_add_public,
    scalar_inv,
    scalar_mul,
)

HALF_N = N // 2

EntropySource = Callable[[int], bytes]


class EntropyError(RuntimeError):
    """The entropy source could not supply a full block."""


class RecoveryError(ValueError):
    """No public key can be recovered from the signature."""


class KeyFormatError(ValueError):
    pass


@dataclass(frozen=True)
class PublicKey:
    point: AffinePoint

    def __post_init__(self):
        if self.point.infinity or not is_on_curve(self.point):
            raise ValueError("public key must be a finite point on secp256k1")

    def to_bytes(self) -> bytes:
        return self.point.to_bytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "PublicKey":
        return cls(AffinePoint.from_bytes(data))


@dataclass(frozen=True)
class PrivateKey:
    d: int = field(repr=False)

    def __post_init__(self):
        if not 1 <= self.d < N:
            raise ValueError("private key out of range [1, n-1]")

    def to_bytes(self) -> bytes:
        return self.d.to_bytes(32, "big")

    @classmethod
    def from_bytes(cls, data: bytes) -> "PrivateKey":
        if len(data) != 32:
            raise KeyFormatError(f"private key must be 32 bytes, got {len(data)}")
        return cls(int.from_bytes(data, "big"))

    @classmethod
    def from_hex(cls, text: str) -> "PrivateKey":
        """Parse 64 hex digits, optional 0x prefix, surrounding whitespace ignored."""
        text = text.strip()
        if text[:2].lower() == "0x":
            text = text[2:]
        if len(text) != 64:
            raise KeyFormatError("private key hex must be 64 digits")
        try:
            raw = bytes.fromhex(text)
        except ValueError as exc:
            raise KeyFormatError(f"invalid private key hex: {exc}") from None
        try:
            return cls.from_bytes(raw)
        except ValueError as exc:
            raise KeyFormatError(str(exc)) from None

    def to_hex(self) -> str:
        return self.to_bytes().hex()

    def public_key(self) -> PublicKey:
        return PublicKey(scalar_mul(self.d, G))


@dataclass(frozen=True)
class RecoverableSignature:
    r: int
    s: int
    y_parity: int

    def __post_init__(self):
        if self.y_parity not in (0, 1):
            raise ValueError("y_parity must be 0 or 1")


def keygen(entropy: Optional[EntropySource] = None, max_draws: int = 64):
    """Draw a private key by rejection sampling 32-byte blocks.

    Returns ``(PrivateKey, PublicKey)``. ``entropy(n)`` must return ``n``
    bytes; a short read or an exception from the source is an
    :class:`EntropyError`.
    """
    if entropy is None:
        entropy = os.urandom
    for _ in range(max_draws):
        try:
            block = entropy(32)
        except Exception as exc:
            raise EntropyError(f"entropy source failed: {exc}") from exc
        if block is None or len(block) != 32:
            raise EntropyError("entropy source exhausted")
        d = int.from_bytes(block, "big")
        if 1 <= d < N:
            sk = PrivateKey(d)
            return sk, sk.public_key()
    raise EntropyError(f"no valid scalar in {max_draws} draws")


def _bits2int(data: bytes) -> int:
    # qlen == 256 == 8 * len(digest), so no shift is needed
    return int.from_bytes(data, "big")


def rfc6979_nonces(d: int, digest: bytes):
    """Yield the RFC 6979 (HMAC-SHA256) candidate nonce sequence for (d, digest)."""
    x = d.to_bytes(32, "big")
    h1 = (_bits2int(digest) % N).to_bytes(32, "big")
    v = b"\x01" * 32
    k = b"\x00" * 32
    k = hmac.new(k, v + b"\x00" + x + h1, hashlib.sha256).digest()
    v = hmac.new(k, v, hashlib.sha256).digest()
    k = hmac.new(k, v + b"\x01" + x + h1, hashlib.sha256).digest()
    v = hmac.new(k, v, hashlib.sha256).digest()
    while True:
        v = hmac.new(k, v, hashlib.sha256).digest()
        cand = _bits2int(v)
        if 1 <= cand < N:
            yield cand
        k = hmac.new(k, v + b"\x00", hashlib.sha256).digest()
        v = hmac.new(k, v, hashlib.sha256).digest()


def _check_digest(digest: bytes) -> None:
    if len(digest) != 32:
        raise ValueError(f"digest must be 32 bytes, got {len(digest)}")


def sign(digest: bytes, key: PrivateKey) -> RecoverableSignature:
    _check_digest(digest)
    z = _bits2int(digest) % N
    for k in rfc6979_nonces(key.d, digest):
        R = scalar_mul(k, G)
        # a bare parity bit can only recover R when r == x(R); x(R) >= n has probability ~2^-128
        if R.x >= N:
            continue
        r = R.x
        if r == 0:
            continue
        s = scalar_inv(k) * (z + r * key.d) % N
        if s == 0:
            continue
        y_parity = R.y & 1
        if s > HALF_N:
            s = N - s
            y_parity ^= 1
        return RecoverableSignature(r, s, y_parity)
    raise AssertionError("unreachable")


def verify(digest: bytes, sig: RecoverableSignature, pub: PublicKey) -> bool:
    if len(digest) != 32:
        return False
    r, s = sig.r, sig.s
    if not (1 <= r < N and 1 <= s < N):
        return False
    z = _bits2int(digest) % N
    w = scalar_inv(s)
    pt = mul_add_public(z * w % N, r * w % N, pub.point)
    if pt.infinity:
        return False
    return pt.x % N == r


def recover(digest: bytes, sig: RecoverableSignature) -> PublicKey:
    _check_digest(digest)
    r, s = sig.r, sig.s
    if not (1 <= r < N and 1 <= s < N):
        raise RecoveryError("signature component out of range")
    R = lift_x(r, sig.y_parity)
    if R is None:
        raise RecoveryError("r is not the x-coordinate of a curve point")
    z = _bits2int(digest) % N
    rinv = scalar_inv(r)
    # Q = r^-1 (s R - z G) = (-z r^-1) G + (s r^-1) R
    Q = mul_add_public(-z * rinv % N, s * rinv % N, R)
    if Q.infinity:
        raise RecoveryError("recovered point is at infinity")
    return PublicKey(Q)
