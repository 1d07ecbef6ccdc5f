"""Boolean masking of Kuznyechik.

The plaintext is XORed with a 128-bit mask ``m``. Round ``i`` sees its
state masked by ``L^(i-1)(m)`` and uses S-box tables recoded for that mask,
so after ``X[k_10]`` the state carries ``L^9(m)`` and one final XOR removes
it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gf_linear import big_l, big_l_pow
from .kuznyechik import NUM_ROUNDS, SBOX, RoundKeys, RoundTrace, x_layer

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> tuple[int, int]:
    """One splitmix64 step; returns (new state, output)."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x, z ^ (z >> 31)


def derive_seed(seed: int, index: int) -> int:
    """Independent 64-bit seed for stream ``index`` of a master seed."""
    _, a = splitmix64(seed & _MASK64)
    _, b = splitmix64(a ^ (index & _MASK64))
    return b


class MaskGenerator:
    """xorshift64* generator for masks. Not cryptographically strong.

    The state is initialised through splitmix64 so any 64-bit seed
    (including 0) gives a valid non-zero state.
    """

    def __init__(self, seed: int = 0, entropy: bytes | None = None):
        if entropy is not None:
            seed ^= int.from_bytes(entropy[:8].ljust(8, b"\0"), "little")
        self.seed = seed & _MASK64
        _, state = splitmix64(self.seed)
        self._state = state or 0x9E3779B97F4A7C15

    @classmethod
    def for_trace(cls, seed: int, index: int) -> "MaskGenerator":
        return cls(derive_seed(seed, index))

    def next_u64(self) -> int:
        x = self._state
        x ^= x >> 12
        x ^= (x << 25) & _MASK64
        x ^= x >> 27
        self._state = x
        return (x * 0x2545F4914F6CDD1D) & _MASK64

    def fresh_mask(self) -> np.ndarray:
        """16 pseudo-random bytes as an internal-order block."""
        raw = self.next_u64().to_bytes(8, "little") + self.next_u64().to_bytes(8, "little")
        return np.frombuffer(raw, dtype=np.uint8).copy()


def masked_sbox_tables(mask_bytes: np.ndarray) -> np.ndarray:
    """Tables ``T`` with ``T[y ^ mb] = S[y] ^ mb``, one per mask byte.

    Output shape is ``mask_bytes.shape + (256,)``.
    """
    mb = np.asarray(mask_bytes, dtype=np.uint8)[..., None]
    z = np.arange(256, dtype=np.uint8)
    return SBOX[z ^ mb] ^ mb


@dataclass(frozen=True)
class MaskSchedule:
    """Per-round masks and recoded S-box tables for a base mask ``m``.

    ``round_masks[i - 1]`` is ``L^(i-1)(m)`` and ``masked_sboxes[i - 1][..., p, :]``
    is the round-``i`` table for byte position ``p``. Batched masks
    (shape ``(N, 16)``) give one schedule per trace.
    """

    base_mask: np.ndarray
    round_masks: np.ndarray
    masked_sboxes: np.ndarray

    @property
    def output_mask(self) -> np.ndarray:
        """``L^9(m)``, removed after the final key addition."""
        return big_l(self.round_masks[-1])


def build_mask_schedule(m) -> MaskSchedule:
    m = np.asarray(m, dtype=np.uint8)
    masks = [m]
    for _ in range(NUM_ROUNDS - 1):
        masks.append(big_l(masks[-1]))
    round_masks = np.stack(masks)
    return MaskSchedule(m, round_masks, masked_sbox_tables(round_masks))


def _masked_s(state: np.ndarray, tables: np.ndarray) -> np.ndarray:
    tables = np.broadcast_to(tables, state.shape + (256,))
    return np.take_along_axis(tables, state[..., None].astype(np.intp), axis=-1)[..., 0]


def masked_encrypt_with_trace(p, rk: RoundKeys, ms: MaskSchedule) -> tuple[np.ndarray, RoundTrace]:
    p = np.asarray(p, dtype=np.uint8)
    initial = p ^ ms.base_mask
    state = initial
    xs, ss, ls = [], [], []
    for i in range(1, NUM_ROUNDS + 1):
        xs.append(x_layer(state, rk[i]))
        ss.append(_masked_s(xs[-1], ms.masked_sboxes[i - 1]))
        ls.append(big_l(ss[-1]))
        state = ls[-1]
    final = x_layer(state, rk[10])
    c = final ^ ms.output_mask
    trace = RoundTrace(p, initial, np.stack(xs), np.stack(ss), np.stack(ls), final, c, rk.key_states, masked=True)
    return c, trace


def masked_encrypt(p, rk: RoundKeys, ms: MaskSchedule) -> np.ndarray:
    return masked_encrypt_with_trace(p, rk, ms)[0]


def unmask_power(m: np.ndarray) -> np.ndarray:
    """``L^9(m)`` computed directly, independent of a schedule."""
    return big_l_pow(m, NUM_ROUNDS)
