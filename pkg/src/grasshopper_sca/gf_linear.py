"""GF(2^8) arithmetic and the Kuznyechik linear layer.

All block functions take uint8 arrays whose last axis has 16 entries in
internal order (index ``i`` is ``x_i``) and broadcast over any leading
axes, so a batch of traces is processed in one call.
"""

from __future__ import annotations

import numpy as np

# x^8 + x^7 + x^6 + x + 1
MODULUS = 0x1C3

# coefficients of l() for (x_15, ..., x_0)
L_COEFFS = (148, 32, 133, 16, 194, 192, 1, 251, 1, 192, 194, 16, 133, 32, 148, 1)
# same vector indexed by internal position i (coefficient of x_i)
COEFF_BY_INDEX = np.array(L_COEFFS[::-1], dtype=np.uint8)

_POSITIONS = np.arange(16)


def gf_mul_slow(a: int, b: int, modulus: int = MODULUS) -> int:
    """Shift-and-add multiply with reduction after every shift."""
    result = 0
    a &= 0xFF
    b &= 0xFF
    while b:
        if b & 1:
            result ^= a
        b >>= 1
        a <<= 1
        if a & 0x100:
            a ^= modulus
    return result


def _build_mul_table(modulus: int = MODULUS) -> np.ndarray:
    a = np.arange(256, dtype=np.uint16)[:, None].repeat(256, axis=1)
    b = np.arange(256, dtype=np.uint16)[None, :].repeat(256, axis=0)
    acc = np.zeros((256, 256), dtype=np.uint16)
    for _ in range(8):
        acc ^= np.where(b & 1, a, 0).astype(np.uint16)
        b = b >> 1
        a = a << 1
        a = np.where(a & 0x100, a ^ modulus, a)
    table = acc.astype(np.uint8)
    table.setflags(write=False)
    return table


MUL_TABLE = _build_mul_table()


def gf_mul(a, b):
    """Field product; accepts ints or integer arrays (broadcasting)."""
    out = MUL_TABLE[np.asarray(a, dtype=np.uint8), np.asarray(b, dtype=np.uint8)]
    return int(out) if out.ndim == 0 else out


def gf_inv(a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("0 has no inverse in GF(2^8)")
    return int(np.flatnonzero(MUL_TABLE[a] == 1)[0])


def little_l(x: np.ndarray) -> np.ndarray:
    """The byte-valued linear form l(x_15, ..., x_0)."""
    x = np.asarray(x, dtype=np.uint8)
    return np.bitwise_xor.reduce(MUL_TABLE[COEFF_BY_INDEX, x], axis=-1)


def big_r(x: np.ndarray) -> np.ndarray:
    """One LFSR step: bytes move down one index, l(x) enters at index 15."""
    x = np.asarray(x, dtype=np.uint8)
    out = np.empty_like(x)
    out[..., :15] = x[..., 1:]
    out[..., 15] = little_l(x)
    return out


def big_r_inv(y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=np.uint8)
    out = np.empty_like(y)
    out[..., 1:] = y[..., :15]
    # coefficient of x_0 is 1, so x_0 = l(x) ^ sum_{i>=1} c_i x_i
    partial = np.bitwise_xor.reduce(MUL_TABLE[COEFF_BY_INDEX[1:], y[..., :15]], axis=-1)
    out[..., 0] = y[..., 15] ^ partial
    return out


def big_l_iter(x: np.ndarray) -> np.ndarray:
    """Reference L: sixteen applications of R."""
    for _ in range(16):
        x = big_r(x)
    return x


def big_l_inv_iter(x: np.ndarray) -> np.ndarray:
    for _ in range(16):
        x = big_r_inv(x)
    return x


def _fused_table(transform) -> np.ndarray:
    # row (p, v) is transform(block with x_p = v and zeros elsewhere)
    units = np.zeros((16, 256, 16), dtype=np.uint8)
    units[_POSITIONS[:, None], np.arange(256)[None, :], _POSITIONS[:, None]] = np.arange(256, dtype=np.uint8)
    table = transform(units)
    table.setflags(write=False)
    return table


class LinearTables:
    """Precomputed lookup tables for the fast linear layer.

    ``mul_tables[p]`` is the 256-entry product table for the coefficient of
    ``x_p``; ``l_fused[p, v]`` is the 16-byte contribution of ``x_p = v`` to
    L(x), and ``l_inv_fused`` the same for L^-1.
    """

    def __init__(self):
        self.mul_tables = MUL_TABLE[COEFF_BY_INDEX]
        self.l_fused = _fused_table(big_l_iter)
        self.l_inv_fused = _fused_table(big_l_inv_iter)


TABLES = LinearTables()


def _apply_fused(table: np.ndarray, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.uint8)
    return np.bitwise_xor.reduce(table[_POSITIONS, x], axis=-2)


def big_l(x: np.ndarray) -> np.ndarray:
    """L(x) via the fused position/value table."""
    return _apply_fused(TABLES.l_fused, x)


def big_l_inv(x: np.ndarray) -> np.ndarray:
    return _apply_fused(TABLES.l_inv_fused, x)


def big_l_pow(x: np.ndarray, n: int) -> np.ndarray:
    """Apply L ``n`` times (``n = 0`` returns a copy of ``x``)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    x = np.array(x, dtype=np.uint8)
    for _ in range(n):
        x = big_l(x)
    return x
