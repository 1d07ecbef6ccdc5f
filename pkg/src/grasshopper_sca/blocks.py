"""Block and key encodings shared across the package.

Wire form (hex strings, files, ``bytes``) is always most significant byte
first. Kuznyechik arrays use the *internal* order, where index ``i`` holds
``x_i`` of the state ``x_15 || ... || x_0``; converting between the two is
a byte reversal along the last axis.
"""

from __future__ import annotations

import string

import numpy as np

BLOCK_SIZE = 16
KEY_SIZE = 32

_HEX_DIGITS = frozenset(string.hexdigits)


def parse_hex(text: str, nbytes: int, what: str = "value") -> bytes:
    """Parse a hex string of exactly ``nbytes`` bytes.

    Raises ValueError on a bad length or a non-hex character.
    """
    text = text.strip()
    if len(text) != 2 * nbytes:
        raise ValueError(f"{what} must be {2 * nbytes} hex characters, got {len(text)}")
    if not set(text) <= _HEX_DIGITS:
        raise ValueError(f"{what} contains non-hex characters")
    return bytes.fromhex(text)


def to_hex(data) -> str:
    return bytes(np.asarray(data, dtype=np.uint8)).hex()


def wire_to_internal(data) -> np.ndarray:
    """Wire-order bytes (``..., 16``) to internal ``x_i`` order."""
    arr = np.frombuffer(data, dtype=np.uint8) if isinstance(data, (bytes, bytearray)) else np.asarray(data, dtype=np.uint8)
    if arr.shape[-1] != BLOCK_SIZE:
        raise ValueError(f"block must be {BLOCK_SIZE} bytes, got {arr.shape[-1]}")
    return arr[..., ::-1].copy()


def internal_to_wire(block: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(np.asarray(block, dtype=np.uint8)[..., ::-1])


def internal_to_bytes(block: np.ndarray) -> bytes:
    return internal_to_wire(block).tobytes()


def block_from_hex(text: str) -> np.ndarray:
    """Hex string to an internal-order Kuznyechik block."""
    return wire_to_internal(parse_hex(text, BLOCK_SIZE, "block"))


def block_to_hex(block: np.ndarray) -> str:
    return internal_to_bytes(block).hex()


def random_bytes(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.integers(0, 256, size=shape, dtype=np.uint8)
