"""Shared generators for fuzz-style tests."""

import random

from ethacct.curve import N
from ethacct.ecdsa import PrivateKey
from ethacct.rlp import rlp_encode
from ethacct.transaction import LegacyTransaction

BOUNDARY_INTS = (0, 1, 127, 128, 255, 256, 2**64 - 1)


def random_rlp_item(rng: random.Random, depth: int = 0):
    roll = rng.random()
    if depth >= 6 or roll < 0.6:
        kind = rng.random()
        if kind < 0.2:
            return bytes([rng.randrange(0x80)])
        if kind < 0.5:
            return rng.randbytes(rng.randrange(0, 8))
        # straddle the 55/56 short/long boundary
        return rng.randbytes(rng.choice([54, 55, 56, 57, rng.randrange(0, 300)]))
    return [random_rlp_item(rng, depth + 1) for _ in range(rng.randrange(0, 6))]


def header_length_positions(encoded: bytes):
    """Indices of the top-level prefix byte and any long-form length bytes."""
    b0 = encoded[0]
    if b0 < 0x80:
        return []
    if 0xB7 < b0 <= 0xBF:
        return [0] + list(range(1, 1 + b0 - 0xB7))
    if b0 > 0xF7:
        return [0] + list(range(1, 1 + b0 - 0xF7))
    return [0]


def class_bounds(prefix: int):
    """Inclusive prefix-byte range of the encoding class that ``prefix`` belongs to."""
    for lo, hi in ((0x80, 0xB7), (0xB8, 0xBF), (0xC0, 0xF7), (0xF8, 0xFF)):
        if lo <= prefix <= hi:
            return lo, hi
    raise ValueError(prefix)


def upward_length_mutations(encoded: bytes):
    """Yield encodings with one top-level length byte increased.

    The prefix byte moves up within its class, or by one across a
    short/long boundary; long-form length bytes move up by any amount.
    """
    for pos in header_length_positions(encoded):
        orig = encoded[pos]
        if pos == 0:
            lo, hi = class_bounds(orig)
            candidates = set(range(orig + 1, hi + 1))
            if orig in (0xB7, 0xF7):
                candidates.add(orig + 1)
        else:
            candidates = set(range(orig + 1, 0x100))
        for new in sorted(candidates):
            yield encoded[:pos] + bytes([new]) + encoded[pos + 1 :]


def random_tx(rng: random.Random, chain_id: int = 3) -> LegacyTransaction:
    def pick(bound):
        if rng.random() < 0.3:
            return rng.choice([b for b in BOUNDARY_INTS if b <= bound] + [bound])
        return rng.randrange(0, bound + 1)

    return LegacyTransaction(
        nonce=pick(2**64 - 1),
        gas_price=pick(2**256 - 1),
        gas_limit=pick(2**64 - 1),
        to=b"" if rng.random() < 0.05 else rng.randbytes(20),
        value=pick(2**256 - 1),
        data=rng.randbytes(rng.choice([0, 1, 31, 55, 56, rng.randrange(0, 400)])),
        chain_id=chain_id,
    )


def keccak_vector_input(vec) -> bytes:
    if "input_hex" in vec:
        return bytes.fromhex(vec["input_hex"])
    if "input_ascii" in vec:
        return vec["input_ascii"].encode()
    if "input_repeat" in vec:
        unit, count = vec["input_repeat"]
        return bytes.fromhex(unit) * count
    return bytes(range(vec["input_range_twice"])) * 2


def random_key(rng: random.Random) -> PrivateKey:
    return PrivateKey(rng.randrange(1, N))
