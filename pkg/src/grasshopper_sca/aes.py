"""AES-256 encryption with register capture, the positive-control CPA target.

Arrays hold bytes in FIPS-197 input order (index ``4c + r`` is row ``r`` of
column ``c``), which is also the wire order. Only encryption is provided.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gf_linear import gf_mul_slow
from .hamming import HW8

AES_MODULUS = 0x11B
NUM_ROUNDS = 14


def _build_sbox() -> np.ndarray:
    inv = [0] * 256
    for a in range(1, 256):
        for b in range(1, 256):
            if gf_mul_slow(a, b, AES_MODULUS) == 1:
                inv[a] = b
                break
    sbox = np.zeros(256, dtype=np.uint8)
    for x in range(256):
        b = inv[x]
        s = b
        for shift in range(1, 5):
            s ^= ((b << shift) | (b >> (8 - shift))) & 0xFF
        sbox[x] = s ^ 0x63
    return sbox


SBOX = _build_sbox()
INV_SBOX = np.argsort(SBOX).astype(np.uint8)
XTIME = np.array([gf_mul_slow(v, 2, AES_MODULUS) for v in range(256)], dtype=np.uint8)

# destination b of ShiftRows reads source SHIFT_SRC[b]
SHIFT_SRC = np.array([(b % 4) + 4 * ((b // 4 + b % 4) % 4) for b in range(16)])
RCON = [0x01, 0x02, 0x04, 0x08, 0x10, 0x20, 0x40]


def expand_key(key) -> np.ndarray:
    """AES-256 key expansion; returns round keys of shape ``(15, 16)``."""
    key = np.frombuffer(key, dtype=np.uint8) if isinstance(key, (bytes, bytearray)) else np.asarray(key, dtype=np.uint8)
    if key.shape != (32,):
        raise ValueError("AES-256 key must be 32 bytes")
    words = [key[4 * i:4 * i + 4].copy() for i in range(8)]
    for i in range(8, 60):
        t = words[i - 1].copy()
        if i % 8 == 0:
            t = SBOX[np.roll(t, -1)]
            t[0] ^= RCON[i // 8 - 1]
        elif i % 8 == 4:
            t = SBOX[t]
        words.append(words[i - 8] ^ t)
    return np.concatenate(words).reshape(15, 16)


def sub_bytes(s: np.ndarray) -> np.ndarray:
    return SBOX[s]


def shift_rows(s: np.ndarray) -> np.ndarray:
    return s[..., SHIFT_SRC]


def mix_columns(s: np.ndarray) -> np.ndarray:
    cols = s.reshape(s.shape[:-1] + (4, 4))
    a0, a1, a2, a3 = (cols[..., r] for r in range(4))
    total = a0 ^ a1 ^ a2 ^ a3
    out = np.stack([
        a0 ^ total ^ XTIME[a0 ^ a1],
        a1 ^ total ^ XTIME[a1 ^ a2],
        a2 ^ total ^ XTIME[a2 ^ a3],
        a3 ^ total ^ XTIME[a3 ^ a0],
    ], axis=-1)
    return out.reshape(s.shape)


@dataclass
class AesRoundTrace:
    """Per-layer snapshots; layer arrays have shape ``(14, ..., 16)``.

    ``after_mc[13]`` is unused (the last round skips MixColumns) and holds
    the ShiftRows output. ``after_ark[13]`` is the ciphertext.
    """

    plaintext: np.ndarray
    initial: np.ndarray
    after_sb: np.ndarray
    after_sr: np.ndarray
    after_mc: np.ndarray
    after_ark: np.ndarray
    round_keys: np.ndarray

    @property
    def ciphertext(self) -> np.ndarray:
        return self.after_ark[-1]

    def round_output(self, i: int) -> np.ndarray:
        return self.initial if i == 0 else self.after_ark[i - 1]

    def register_events(self) -> list[tuple[str, np.ndarray, np.ndarray]]:
        """Same register model as the Kuznyechik trace: a working register
        per layer, a round register latched per round, and a key register
        stepping through the round keys."""
        events = []
        for j in range(1, len(self.round_keys)):
            events.append((f"keyexp.{j:02d}", self.round_keys[j - 1], self.round_keys[j]))
        events.append(("load", np.zeros_like(self.plaintext), self.plaintext))
        events.append(("r0.ARK", self.plaintext, self.initial))
        for r in range(NUM_ROUNDS):
            tag = f"r{r + 1}"
            prev = self.round_output(r)
            events.append((f"{tag}.SB", prev, self.after_sb[r]))
            events.append((f"{tag}.SR", self.after_sb[r], self.after_sr[r]))
            if r < NUM_ROUNDS - 1:
                events.append((f"{tag}.MC", self.after_sr[r], self.after_mc[r]))
            events.append((f"{tag}.ARK", self.after_mc[r], self.after_ark[r]))
            events.append((f"{tag}.latch", prev, self.after_ark[r]))
        return events


def aes256_encrypt_with_trace(p, key) -> tuple[np.ndarray, AesRoundTrace]:
    rks = expand_key(key)
    p = np.asarray(p, dtype=np.uint8)
    state = p ^ rks[0]
    initial = state
    sbs, srs, mcs, arks = [], [], [], []
    for r in range(1, NUM_ROUNDS + 1):
        sbs.append(sub_bytes(state))
        srs.append(shift_rows(sbs[-1]))
        mcs.append(mix_columns(srs[-1]) if r < NUM_ROUNDS else srs[-1])
        arks.append(mcs[-1] ^ rks[r])
        state = arks[-1]
    trace = AesRoundTrace(p, initial, np.stack(sbs), np.stack(srs), np.stack(mcs), np.stack(arks), rks)
    return state, trace


def aes256_encrypt(p, key) -> np.ndarray:
    """Encrypt wire-order block(s) ``p`` of shape ``(..., 16)``."""
    return aes256_encrypt_with_trace(p, key)[0]


def aes_last_round_hypothesis(c, byte_index: int, guess) -> np.ndarray:
    """Hamming distance of the round register byte overwritten in round 14.

    Guessing round-14 key byte ``byte_index`` recovers the pre-SubBytes
    value that ShiftRows moved there; that value sat at position
    ``SHIFT_SRC[byte_index]``, which the ciphertext byte at the same
    position then replaced.
    """
    c = np.asarray(c, dtype=np.uint8)
    guess = np.asarray(guess, dtype=np.uint8)
    before = INV_SBOX[c[..., byte_index, None] ^ guess] if guess.ndim else INV_SBOX[c[..., byte_index] ^ guess]
    after = c[..., SHIFT_SRC[byte_index], None] if guess.ndim else c[..., SHIFT_SRC[byte_index]]
    return HW8[before ^ after]
