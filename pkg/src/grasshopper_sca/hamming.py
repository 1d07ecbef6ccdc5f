"""Hamming weight / distance over byte arrays."""

import numpy as np

HW8 = np.array([bin(v).count("1") for v in range(256)], dtype=np.uint8)
HW8.setflags(write=False)


def hamming_weight(x) -> np.ndarray:
    """Total set bits along the last axis."""
    return HW8[np.asarray(x, dtype=np.uint8)].sum(axis=-1, dtype=np.int64)


def hamming_distance(a, b) -> np.ndarray:
    return hamming_weight(np.bitwise_xor(np.asarray(a, dtype=np.uint8), np.asarray(b, dtype=np.uint8)))
