"""Keccak-256 as used by Ethereum.

This is the original Keccak submission padding (domain byte 0x01), not
FIPS-202 SHA3-256 (0x06). The two differ on every input, including b"".
"""

from __future__ import annotations

RATE = 136  # bytes: 1088-bit rate, 512-bit capacity
DIGEST_SIZE = 32

_MASK = (1 << 64) - 1

_RC = (
    0x0000000000000001, 0x0000000000008082, 0x800000000000808A, 0x8000000080008000,
    0x000000000000808B, 0x0000000080000001, 0x8000000080008081, 0x8000000000008009,
    0x000000000000008A, 0x0000000000000088, 0x0000000080008009, 0x000000008000000A,
    0x000000008000808B, 0x800000000000008B, 0x8000000000008089, 0x8000000000008003,
    0x8000000000008002, 0x8000000000000080, 0x000000000000800A, 0x800000008000000A,
    0x8000000080008081, 0x8000000000008080, 0x0000000080000001, 0x8000000080008008,
)

# rotation offsets indexed by lane x + 5*y
_ROT = (
    0, 1, 62, 28, 27,
    36, 44, 6, 55, 20,
    3, 10, 43, 25, 39,
    41, 45, 15, 21, 8,
    18, 2, 61, 56, 14,
)

# (source lane, destination lane, rotation) for the combined rho+pi step:
# B[y, 2x+3y] = rot(A[x, y], r[x, y])
_RHO_PI = tuple(
    (x + 5 * y, y + 5 * ((2 * x + 3 * y) % 5), _ROT[x + 5 * y])
    for y in range(5)
    for x in range(5)
)


def keccak_f1600(a: list) -> None:
    """Apply the 24-round permutation to 25 64-bit lanes in place."""
    b = [0] * 25
    for rc in _RC:
        # theta
        c0 = a[0] ^ a[5] ^ a[10] ^ a[15] ^ a[20]
        c1 = a[1] ^ a[6] ^ a[11] ^ a[16] ^ a[21]
        c2 = a[2] ^ a[7] ^ a[12] ^ a[17] ^ a[22]
        c3 = a[3] ^ a[8] ^ a[13] ^ a[18] ^ a[23]
        c4 = a[4] ^ a[9] ^ a[14] ^ a[19] ^ a[24]
        d0 = c4 ^ (((c1 << 1) | (c1 >> 63)) & _MASK)
        d1 = c0 ^ (((c2 << 1) | (c2 >> 63)) & _MASK)
        d2 = c1 ^ (((c3 << 1) | (c3 >> 63)) & _MASK)
        d3 = c2 ^ (((c4 << 1) | (c4 >> 63)) & _MASK)
        d4 = c3 ^ (((c0 << 1) | (c0 >> 63)) & _MASK)
        for y in (0, 5, 10, 15, 20):
            a[y] ^= d0
            a[y + 1] ^= d1
            a[y + 2] ^= d2
            a[y + 3] ^= d3
            a[y + 4] ^= d4
        # rho + pi
        for src, dst, r in _RHO_PI:
            v = a[src]
            b[dst] = ((v << r) | (v >> (64 - r))) & _MASK if r else v
        # chi
        for y in (0, 5, 10, 15, 20):
            b0, b1, b2, b3, b4 = b[y], b[y + 1], b[y + 2], b[y + 3], b[y + 4]
            a[y] = b0 ^ (~b1 & b2)
            a[y + 1] = b1 ^ (~b2 & b3)
            a[y + 2] = b2 ^ (~b3 & b4)
            a[y + 3] = b3 ^ (~b4 & b0)
            a[y + 4] = b4 ^ (~b0 & b1)
        # iota
        a[0] ^= rc


class Keccak256:
    """Incremental hasher with a hashlib-like surface (update / digest / copy)."""

    name = "keccak256"
    digest_size = DIGEST_SIZE
    block_size = RATE

    def __init__(self, data: bytes = b""):
        self._state = [0] * 25
        self._buf = bytearray()
        if data:
            self.update(data)

    def update(self, data: bytes) -> "Keccak256":
        self._buf += data
        full = len(self._buf) - len(self._buf) % RATE
        for off in range(0, full, RATE):
            self._absorb(self._buf, off)
        del self._buf[:full]
        return self

    def _absorb(self, block, off: int) -> None:
        st = self._state
        for i in range(RATE // 8):
            st[i] ^= int.from_bytes(block[off + 8 * i : off + 8 * i + 8], "little")
        keccak_f1600(st)

    def copy(self) -> "Keccak256":
        other = Keccak256()
        other._state = list(self._state)
        other._buf = bytearray(self._buf)
        return other

    def digest(self) -> bytes:
        st = list(self._state)
        block = bytearray(self._buf)
        pad = RATE - len(block)
        block += b"\x00" * pad
        block[len(self._buf)] ^= 0x01
        block[RATE - 1] ^= 0x80
        for i in range(RATE // 8):
            st[i] ^= int.from_bytes(block[8 * i : 8 * i + 8], "little")
        keccak_f1600(st)
        return b"".join(lane.to_bytes(8, "little") for lane in st[:4])

    def hexdigest(self) -> str:
        return self.digest().hex()


def keccak256(data: bytes) -> bytes:
    return Keccak256(data).digest()
