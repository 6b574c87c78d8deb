"""secp256k1 field and group arithmetic.

Curve: y^2 = x^3 + 7 over GF(p). Points cross the module boundary in
affine form; Jacobian coordinates are used internally.

Secret scalars go through :func:`scalar_mul`, a Montgomery ladder over a
length-regularized scalar so that every call performs the same sequence of
doublings and additions. Public scalars (verification, recovery) use
:func:`mul_add_public`, which is faster and branches freely.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple


@dataclass(frozen=True)
class CurveParams:
    p: int
    a: int
    b: int
    gx: int
    gy: int
    n: int
    h: int


SECP256K1 = CurveParams(
    p=0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEFFFFFC2F,
    a=0,
    b=7,
    gx=0x79BE667EF9DCBBAC55A06295CE870B07029BFCDB2DCE28D959F2815B16F81798,
    gy=0x483ADA7726A3C4655DA4FBFC0E1108A8FD17B448A68554199C47D08FFB10D4B8,
    n=0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141,
    h=1,
)

P = SECP256K1.p
N = SECP256K1.n
B = SECP256K1.b

if P != 2**256 - 2**32 - 2**9 - 2**8 - 2**7 - 2**6 - 2**4 - 1:
    raise AssertionError("secp256k1 field prime constant is corrupt")


@dataclass(frozen=True)
class AffinePoint:
    x: int = 0
    y: int = 0
    infinity: bool = False

    def __neg__(self) -> "AffinePoint":
        if self.infinity:
            return self
        return AffinePoint(self.x, (P - self.y) % P)

    def to_bytes(self) -> bytes:
        """64-byte x || y, big-endian. Infinity has no encoding."""
        if self.infinity:
            raise ValueError("point at infinity has no byte encoding")
        return self.x.to_bytes(32, "big") + self.y.to_bytes(32, "big")

    @classmethod
    def from_bytes(cls, data: bytes) -> "AffinePoint":
        if len(data) == 65 and data[0] == 4:
            data = data[1:]
        if len(data) != 64:
            raise ValueError(f"expected 64-byte point encoding, got {len(data)}")
        pt = cls(int.from_bytes(data[:32], "big"), int.from_bytes(data[32:], "big"))
        if not is_on_curve(pt):
            raise ValueError("point is not on secp256k1")
        return pt


INFINITY = AffinePoint(infinity=True)
G = AffinePoint(SECP256K1.gx, SECP256K1.gy)


def field_inv(x: int) -> int:
    x %= P
    if x == 0:
        raise ZeroDivisionError("0 has no inverse mod p")
    return pow(x, P - 2, P)


def scalar_inv(x: int) -> int:
    x %= N
    if x == 0:
        raise ZeroDivisionError("0 has no inverse mod n")
    return pow(x, N - 2, N)


def field_sqrt(x: int) -> Optional[int]:
    """Square root mod p, or None. p = 3 mod 4 so a single exponentiation works."""
    root = pow(x % P, (P + 1) // 4, P)
    if root * root % P != x % P:
        return None
    return root


def is_on_curve(pt: AffinePoint) -> bool:
    if pt.infinity:
        return True
    if not (0 <= pt.x < P and 0 <= pt.y < P):
        return False
    return (pt.y * pt.y - pt.x * pt.x * pt.x - B) % P == 0


def lift_x(x: int, odd: int) -> Optional[AffinePoint]:
    """The curve point with the given x and y parity, or None if x is not on the curve."""
    if not 0 <= x < P:
        return None
    y = field_sqrt(x * x * x + B)
    if y is None:
        return None
    if y & 1 != odd:
        y = P - y
    return AffinePoint(x, y)


# --- Jacobian internals: (X, Y, Z) represents (X/Z^2, Y/Z^3); Z == 0 is infinity.

_Jac = Tuple[int, int, int]
_JINF: _Jac = (0, 1, 0)


def _to_jac(pt: AffinePoint) -> _Jac:
    return _JINF if pt.infinity else (pt.x, pt.y, 1)


def _from_jac(q: _Jac) -> AffinePoint:
    x, y, z = q
    if z % P == 0:
        return INFINITY
    zi = pow(z, P - 2, P)
    zi2 = zi * zi % P
    return AffinePoint(x * zi2 % P, y * zi2 * zi % P)


def _jdouble(q: _Jac) -> _Jac:
    x, y, z = q
    if z == 0 or y == 0:
        return _JINF
    yy = y * y % P
    s = 4 * x * yy % P
    m = 3 * x * x % P
    x3 = (m * m - 2 * s) % P
    y3 = (m * (s - x3) - 8 * yy * yy) % P
    z3 = 2 * y * z % P
    return (x3, y3, z3)


def _jadd(q1: _Jac, q2: _Jac) -> _Jac:
    x1, y1, z1 = q1
    x2, y2, z2 = q2
    if z1 == 0:
        return q2
    if z2 == 0:
        return q1
    z1z1 = z1 * z1 % P
    z2z2 = z2 * z2 % P
    u1 = x1 * z2z2 % P
    u2 = x2 * z1z1 % P
    s1 = y1 * z2 * z2z2 % P
    s2 = y2 * z1 * z1z1 % P
    if u1 == u2:
        if s1 != s2:
            return _JINF
        return _jdouble(q1)
    h = (u2 - u1) % P
    r = (s2 - s1) % P
    hh = h * h % P
    hhh = h * hh % P
    v = u1 * hh % P
    x3 = (r * r - hhh - 2 * v) % P
    y3 = (r * (v - x3) - s1 * hhh) % P
    z3 = h * z1 * z2 % P
    return (x3, y3, z3)


def _jadd_affine(q1: _Jac, x2: int, y2: int) -> _Jac:
    # mixed addition, second operand has Z = 1
    x1, y1, z1 = q1
    if z1 == 0:
        return (x2, y2, 1)
    z1z1 = z1 * z1 % P
    u2 = x2 * z1z1 % P
    s2 = y2 * z1 * z1z1 % P
    if x1 == u2:
        if y1 != s2:
            return _JINF
        return _jdouble(q1)
    h = (u2 - x1) % P
    r = (s2 - y1) % P
    hh = h * h % P
    hhh = h * hh % P
    v = x1 * hh % P
    x3 = (r * r - hhh - 2 * v) % P
    y3 = (r * (v - x3) - y1 * hhh) % P
    z3 = h * z1 % P
    return (x3, y3, z3)


def point_add(p1: AffinePoint, p2: AffinePoint) -> AffinePoint:
    return _from_jac(_jadd(_to_jac(p1), _to_jac(p2)))


def point_double(pt: AffinePoint) -> AffinePoint:
    return _from_jac(_jdouble(_to_jac(pt)))


def _regularize(k: int) -> int:
    # k + n or k + 2n, whichever has bit 256 set, so the ladder length is fixed
    k1 = k + N
    return k1 if k1 >> 256 else k1 + N


def scalar_mul(k: int, pt: AffinePoint = G) -> AffinePoint:
    """k * pt with a fixed 257-step Montgomery ladder.

    The loop body is identical for 0 and 1 bits: both registers are updated
    each step and selection happens through an arithmetic swap, not a branch.
    """
    k %= N
    if pt.infinity:
        return INFINITY
    base = _to_jac(pt)
    kr = _regularize(k)
    r0, r1 = base, _jdouble(base)
    prev = 0
    for i in range(255, -1, -1):
        bit = (kr >> i) & 1
        swap = bit ^ prev
        mask = -swap
        r0, r1 = _cswap(r0, r1, mask)
        prev = bit
        r1 = _jadd(r0, r1)
        r0 = _jdouble(r0)
    r0, r1 = _cswap(r0, r1, -prev)
    return _from_jac(r0)


def _cswap(a: _Jac, b: _Jac, mask: int) -> Tuple[_Jac, _Jac]:
    # mask is 0 (keep) or -1 (swap); xor-select avoids a data-dependent branch
    t0 = (a[0] ^ b[0]) & mask
    t1 = (a[1] ^ b[1]) & mask
    t2 = (a[2] ^ b[2]) & mask
    return (a[0] ^ t0, a[1] ^ t1, a[2] ^ t2), (b[0] ^ t0, b[1] ^ t1, b[2] ^ t2)


def mul_add_public(u1: int, u2: int, q: AffinePoint) -> AffinePoint:
    """u1*G + u2*q via interleaved double-and-add. Variable time: public inputs only."""
    u1 %= N
    u2 %= N
    gq = _jadd(_to_jac(G), _to_jac(q))
    gq_aff = _from_jac(gq)
    table = {
        1: (G.x, G.y, False),
        2: (q.x, q.y, q.infinity),
        3: (gq_aff.x, gq_aff.y, gq_aff.infinity),
    }
    acc = _JINF
    for i in range(max(u1.bit_length(), u2.bit_length()) - 1, -1, -1):
        acc = _jdouble(acc)
        sel = ((u1 >> i) & 1) | (((u2 >> i) & 1) << 1)
        if sel:
            x, y, inf = table[sel]
            if not inf:
                acc = _jadd_affine(acc, x, y)
    return _from_jac(acc)
