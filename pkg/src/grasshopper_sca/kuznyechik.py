"""Kuznyechik (GOST R 34.12-2015) block cipher.

Blocks are uint8 arrays in internal order (see :mod:`grasshopper_sca.blocks`)
and every routine broadcasts over leading axes. Master keys are 32 wire-order
bytes: the first 16 become ``K_1``, the last 16 ``K_2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .blocks import KEY_SIZE, internal_to_bytes, internal_to_wire, wire_to_internal
from .gf_linear import big_l, big_l_inv, big_l_inv_iter, big_l_iter

SBOX = np.array([
    252, 238, 221, 17, 207, 110, 49, 22, 251, 196, 250, 218, 35, 197, 4, 77,
    233, 119, 240, 219, 147, 46, 153, 186, 23, 54, 241, 187, 20, 205, 95, 193,
    249, 24, 101, 90, 226, 92, 239, 33, 129, 28, 60, 66, 139, 1, 142, 79,
    5, 132, 2, 174, 227, 106, 143, 160, 6, 11, 237, 152, 127, 212, 211, 31,
    235, 52, 44, 81, 234, 200, 72, 171, 242, 42, 104, 162, 253, 58, 206, 204,
    181, 112, 14, 86, 8, 12, 118, 18, 191, 114, 19, 71, 156, 183, 93, 135,
    21, 161, 150, 41, 16, 123, 154, 199, 243, 145, 120, 111, 157, 158, 178, 177,
    50, 117, 25, 61, 255, 53, 138, 126, 109, 84, 198, 128, 195, 189, 13, 87,
    223, 245, 36, 169, 62, 168, 67, 201, 215, 121, 214, 246, 124, 34, 185, 3,
    224, 15, 236, 222, 122, 148, 176, 188, 220, 232, 40, 80, 78, 51, 10, 74,
    167, 151, 96, 115, 30, 0, 98, 68, 26, 184, 56, 130, 100, 159, 38, 65,
    173, 69, 70, 146, 39, 94, 85, 47, 140, 163, 165, 125, 105, 213, 149, 59,
    7, 88, 179, 64, 134, 172, 29, 247, 48, 55, 107, 228, 136, 217, 231, 137,
    225, 27, 131, 73, 76, 63, 248, 254, 141, 83, 170, 144, 202, 216, 133, 97,
    32, 113, 103, 164, 45, 43, 9, 91, 203, 155, 37, 208, 190, 229, 108, 82,
    89, 166, 116, 210, 230, 244, 180, 192, 209, 102, 175, 194, 57, 75, 99, 182,
], dtype=np.uint8)
SBOX_INV = np.argsort(SBOX).astype(np.uint8)
SBOX.setflags(write=False)
SBOX_INV.setflags(write=False)

NUM_ROUNDS = 9  # full (X, S, L) rounds; a final X with k_10 follows


def _round_constants() -> np.ndarray:
    units = np.zeros((32, 16), dtype=np.uint8)
    units[:, 0] = np.arange(1, 33)
    consts = big_l(units)
    consts.setflags(write=False)
    return consts


# C_j for j = 1..32 lives at ROUND_CONSTANTS[j - 1]
ROUND_CONSTANTS = _round_constants()


def s_layer(x: np.ndarray) -> np.ndarray:
    return SBOX[np.asarray(x, dtype=np.uint8)]


def s_layer_inv(x: np.ndarray) -> np.ndarray:
    return SBOX_INV[np.asarray(x, dtype=np.uint8)]


def x_layer(x: np.ndarray, k: np.ndarray) -> np.ndarray:
    return np.bitwise_xor(np.asarray(x, dtype=np.uint8), np.asarray(k, dtype=np.uint8))


def _lsx(a: np.ndarray, k: np.ndarray, reference: bool = False) -> np.ndarray:
    lin = big_l_iter if reference else big_l
    return lin(s_layer(x_layer(a, k)))


def feistel_step(a1, a0, c, reference: bool = False):
    """F[c](a1, a0) = (LSX[c](a1) ^ a0, a1)."""
    return _lsx(a1, c, reference) ^ a0, a1


def feistel_step_inv(b1, b0, c):
    """Inverse of :func:`feistel_step`: (b0, LSX[c](b0) ^ b1)."""
    return b0, _lsx(b0, c) ^ b1


@dataclass(frozen=True)
class RoundKeys:
    """Ten subkeys ``k_1..k_10`` at ``subkeys[..., i - 1, :]``.

    ``key_states`` records the 256-bit Feistel register ``a1 || a0`` before
    the first step and after each of the 32 steps (shape ``(33, ..., 32)``);
    the leakage simulator uses it for key-expansion events.
    """

    subkeys: np.ndarray
    key_states: np.ndarray = field(repr=False)
    constants: np.ndarray = field(default=ROUND_CONSTANTS, repr=False)

    def __getitem__(self, i: int) -> np.ndarray:
        """1-based subkey access, ``rk[10]`` is ``k_10``."""
        if not 1 <= i <= 10:
            raise IndexError("subkeys are numbered 1..10")
        return self.subkeys[..., i - 1, :]


def split_master_key(master_key) -> tuple[np.ndarray, np.ndarray]:
    mk = np.frombuffer(master_key, dtype=np.uint8) if isinstance(master_key, (bytes, bytearray)) else np.asarray(master_key, dtype=np.uint8)
    if mk.shape[-1] != KEY_SIZE:
        raise ValueError(f"master key must be {KEY_SIZE} bytes, got {mk.shape[-1]}")
    return wire_to_internal(mk[..., :16]), wire_to_internal(mk[..., 16:])


def key_schedule(master_key, reference: bool = False) -> RoundKeys:
    """Derive ``k_1..k_10`` with 32 constant-keyed Feistel steps.

    ``master_key`` is ``bytes`` or a uint8 array of shape ``(..., 32)``.
    """
    a1, a0 = split_master_key(master_key)
    subkeys = [a1, a0]
    states = [np.concatenate([a1, a0], axis=-1)]
    for i in range(4):
        for j in range(8):
            a1, a0 = feistel_step(a1, a0, ROUND_CONSTANTS[8 * i + j], reference)
            states.append(np.concatenate([a1, a0], axis=-1))
        subkeys += [a1, a0]
    return RoundKeys(np.stack(subkeys, axis=-2), np.stack(states))


def recover_master_from_pair(k_odd, k_even, pair_index: int) -> bytes:
    """Walk the Feistel network backwards from ``(k_{2i+1}, k_{2i+2})``.

    ``pair_index`` is ``i`` in 1..4, so ``(k_9, k_10)`` is pair 4. Returns the
    32-byte wire-order master key.
    """
    if not 1 <= pair_index <= 4:
        raise ValueError(f"pair_index must be in 1..4, got {pair_index}")
    a1 = np.asarray(k_odd, dtype=np.uint8)
    a0 = np.asarray(k_even, dtype=np.uint8)
    for j in range(8 * pair_index - 1, -1, -1):
        a1, a0 = feistel_step_inv(a1, a0, ROUND_CONSTANTS[j])
    return internal_to_bytes(a1) + internal_to_bytes(a0)


@dataclass
class RoundTrace:
    """Register snapshots of one (possibly batched) encryption.

    ``initial`` is the state entering round 1 (the plaintext, or the masked
    plaintext for the masked routine). ``after_x``, ``after_s`` and
    ``after_l`` have shape ``(9, ..., 16)``; ``final_xor`` is the state after
    ``X[k_10]`` and ``output`` the returned ciphertext (they differ only
    when an unmasking step follows).
    """

    plaintext: np.ndarray
    initial: np.ndarray
    after_x: np.ndarray
    after_s: np.ndarray
    after_l: np.ndarray
    final_xor: np.ndarray
    output: np.ndarray
    key_states: np.ndarray
    masked: bool = False

    def round_output(self, i: int) -> np.ndarray:
        """State after round ``i`` (round 0 is the round-1 input)."""
        return self.initial if i == 0 else self.after_l[i - 1]

    def register_events(self) -> list[tuple[str, np.ndarray, np.ndarray]]:
        """Ordered ``(label, previous, current)`` register transfers.

        Two state registers are modelled: a working register rewritten by
        every X, S and L layer, and a round register latched once per round
        (event ``rN.latch``). Key expansion updates a separate 256-bit
        register. Plaintext loading starts from a cleared register.
        """
        events = []
        for j in range(1, len(self.key_states)):
            events.append((f"keyexp.{j:02d}", self.key_states[j - 1], self.key_states[j]))
        prev = np.zeros_like(self.plaintext)
        events.append(("load", prev, self.plaintext))
        prev = self.plaintext
        if self.masked:
            events.append(("mask", prev, self.initial))
            prev = self.initial
        for r in range(NUM_ROUNDS):
            events.append((f"r{r + 1}.X", prev, self.after_x[r]))
            events.append((f"r{r + 1}.S", self.after_x[r], self.after_s[r]))
            events.append((f"r{r + 1}.L", self.after_s[r], self.after_l[r]))
            events.append((f"r{r + 1}.latch", self.round_output(r), self.after_l[r]))
            prev = self.after_l[r]
        events.append(("r10.X", prev, self.final_xor))
        if self.masked:
            events.append(("unmask", self.final_xor, self.output))
        return events


def encrypt(p, rk: RoundKeys, reference: bool = False) -> np.ndarray:
    lin = big_l_iter if reference else big_l
    state = np.asarray(p, dtype=np.uint8)
    for i in range(1, NUM_ROUNDS + 1):
        state = lin(s_layer(x_layer(state, rk[i])))
    return x_layer(state, rk[10])


def encrypt_with_trace(p, rk: RoundKeys) -> tuple[np.ndarray, RoundTrace]:
    p = np.asarray(p, dtype=np.uint8)
    xs, ss, ls = [], [], []
    state = p
    for i in range(1, NUM_ROUNDS + 1):
        xs.append(x_layer(state, rk[i]))
        ss.append(s_layer(xs[-1]))
        ls.append(big_l(ss[-1]))
        state = ls[-1]
    c = x_layer(state, rk[10])
    trace = RoundTrace(p, p, np.stack(xs), np.stack(ss), np.stack(ls), c, c, rk.key_states)
    return c, trace


def decrypt(c, rk: RoundKeys, reference: bool = False) -> np.ndarray:
    lin_inv = big_l_inv_iter if reference else big_l_inv
    state = x_layer(c, rk[10])
    for i in range(NUM_ROUNDS, 0, -1):
        state = x_layer(s_layer_inv(lin_inv(state)), rk[i])
    return state


class Kuznyechik:
    """Byte-oriented convenience wrapper around the array routines."""

    def __init__(self, key: bytes):
        if len(key) != KEY_SIZE:
            raise ValueError(f"key must be {KEY_SIZE} bytes")
        self.round_keys = key_schedule(key)

    def encrypt(self, block: bytes) -> bytes:
        return internal_to_bytes(encrypt(wire_to_internal(block), self.round_keys))

    def decrypt(self, block: bytes) -> bytes:
        return internal_to_bytes(decrypt(wire_to_internal(block), self.round_keys))

    def subkeys_hex(self) -> list[str]:
        return [bytes(k).hex() for k in internal_to_wire(self.round_keys.subkeys)]
