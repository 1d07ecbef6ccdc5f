"""Simulated power traces from register activity.

Each register transfer reported by a cipher's round trace becomes one
event; an event emits ``samples_per_event`` samples of
``alpha * model(prev, curr) + beta`` plus i.i.d. Gaussian noise.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from . import aes, kuznyechik
from .blocks import KEY_SIZE, internal_to_wire, wire_to_internal
from .hamming import HW8
from .masking import MaskGenerator, build_mask_schedule, masked_encrypt_with_trace

CIPHERS = ("aes256", "kuznyechik", "kuznyechik-masked")
MODELS = ("hamming_weight", "hamming_distance", "single_bit")
REMASK_MODES = ("per-key", "per-block")


@dataclass(frozen=True)
class LeakageConfig:
    model: str = "hamming_distance"
    alpha: float = 1.0
    beta: float = 0.0
    sigma: float = 0.0
    samples_per_event: int = 1
    seed: int = 0
    bit_index: int = 0

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown leakage model {self.model!r}; expected one of {MODELS}")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if self.samples_per_event < 1:
            raise ValueError("samples_per_event must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")
        if not 0 <= self.bit_index < 256:
            raise ValueError("bit_index must be in 0..255")


def leakage_level(prev, curr, cfg: LeakageConfig) -> np.ndarray:
    """Noise-free leakage ``alpha * model + beta`` over the last axis."""
    curr = np.asarray(curr, dtype=np.uint8)
    if cfg.model == "hamming_weight":
        v = HW8[curr].sum(axis=-1, dtype=np.int64)
    elif cfg.model == "hamming_distance":
        v = HW8[np.asarray(prev, dtype=np.uint8) ^ curr].sum(axis=-1, dtype=np.int64)
    else:
        byte, bit = divmod(cfg.bit_index, 8)
        if byte >= curr.shape[-1]:
            # register narrower than the selected bit never toggles it
            v = np.zeros(curr.shape[:-1], dtype=np.int64)
        else:
            v = ((curr[..., byte] >> bit) & 1).astype(np.int64)
    return cfg.alpha * v + cfg.beta


def leak_value(prev, curr, cfg: LeakageConfig, rng: np.random.Generator | None = None) -> float:
    """One leakage sample for a single register transfer."""
    level = float(leakage_level(prev, curr, cfg))
    if cfg.sigma > 0:
        rng = rng if rng is not None else np.random.default_rng(cfg.seed)
        level += rng.normal(0.0, cfg.sigma)
    return level


@dataclass
class Trace:
    plaintext: np.ndarray
    ciphertext: np.ndarray
    samples: np.ndarray
    event_index_map: dict[str, int]


@dataclass
class TraceSet:
    """Traces sharing one key, one leakage config and one event map.

    Plaintexts and ciphertexts are wire-order ``(N, 16)`` arrays; samples
    are float32 ``(N, S)``. Only a fingerprint of the key is kept.
    """

    cipher: str
    key_fingerprint: bytes
    config: LeakageConfig
    plaintexts: np.ndarray
    ciphertexts: np.ndarray
    samples: np.ndarray
    event_map: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.cipher not in CIPHERS:
            raise ValueError(f"unknown cipher {self.cipher!r}")
        n = len(self.samples)
        if self.plaintexts.shape != (n, 16) or self.ciphertexts.shape != (n, 16):
            raise ValueError("plaintext/ciphertext arrays must be (N, 16)")

    def __len__(self) -> int:
        return len(self.samples)

    def __getitem__(self, i: int) -> Trace:
        return Trace(self.plaintexts[i], self.ciphertexts[i], self.samples[i], self.event_map)

    def __iter__(self) -> Iterator[Trace]:
        return (self[i] for i in range(len(self)))

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    def event_slice(self, label: str) -> slice:
        start = self.event_map[label]
        return slice(start, start + self.config.samples_per_event)

    def window(self, prefix: str) -> np.ndarray:
        """Sample indices of every event whose label starts with ``prefix``."""
        idx = [np.arange(self.event_slice(lab).start, self.event_slice(lab).stop)
               for lab in self.event_map if lab.startswith(prefix)]
        if not idx:
            raise KeyError(f"no events match {prefix!r}")
        return np.concatenate(idx)

    def subset(self, n: int) -> "TraceSet":
        return TraceSet(self.cipher, self.key_fingerprint, self.config,
                        self.plaintexts[:n], self.ciphertexts[:n], self.samples[:n], dict(self.event_map))

    def structurally_equal(self, other: "TraceSet") -> bool:
        return (self.cipher == other.cipher and self.key_fingerprint == other.key_fingerprint
                and self.config == other.config and self.event_map == other.event_map
                and np.array_equal(self.plaintexts, other.plaintexts)
                and np.array_equal(self.ciphertexts, other.ciphertexts)
                and self.samples.dtype == other.samples.dtype
                and np.array_equal(self.samples, other.samples))


def key_fingerprint(cipher: str, key: bytes) -> bytes:
    return hashlib.sha256(cipher.encode() + b"\0" + bytes(key)).digest()


def trace_rng(seed: int, index: int) -> np.random.Generator:
    """Generator for trace ``index``; independent of batching order."""
    return np.random.default_rng([seed, index])


def capture(cipher: str, key: bytes, plaintexts: np.ndarray, masks: np.ndarray | None = None):
    """Encrypt wire-order plaintexts; return (wire ciphertexts, round trace)."""
    if cipher == "aes256":
        return aes.aes256_encrypt_with_trace(plaintexts, key)
    if cipher not in ("kuznyechik", "kuznyechik-masked"):
        raise ValueError(f"unknown cipher {cipher!r}; expected one of {CIPHERS}")
    rk = kuznyechik.key_schedule(key)
    p = wire_to_internal(plaintexts)
    if cipher == "kuznyechik":
        c, trace = kuznyechik.encrypt_with_trace(p, rk)
    else:
        c, trace = masked_encrypt_with_trace(p, rk, build_mask_schedule(masks))
    return internal_to_wire(c), trace


def _event_levels(trace, cfg: LeakageConfig, n: int) -> tuple[list[str], np.ndarray]:
    labels, cols = [], []
    for label, prev, curr in trace.register_events():
        labels.append(label)
        cols.append(np.broadcast_to(leakage_level(prev, curr, cfg), (n,)))
    return labels, np.stack(cols, axis=1)


def simulate_traces(cipher: str, key: bytes, n: int, cfg: LeakageConfig, *,
                    mask_seed: int = 0, remask: str = "per-key", chunk: int = 1024) -> TraceSet:
    """Encrypt ``n`` random plaintexts and synthesize their traces.

    Trace ``i`` draws its plaintext and noise from ``(cfg.seed, i)`` and,
    for per-block remasking, its mask from ``(mask_seed, i)``; the output
    therefore does not depend on ``chunk``.
    """
    if cipher not in CIPHERS:
        raise ValueError(f"unknown cipher {cipher!r}; expected one of {CIPHERS}")
    if n < 1:
        raise ValueError("n must be >= 1")
    if len(key) != KEY_SIZE:
        raise ValueError(f"key must be {KEY_SIZE} bytes")
    if remask not in REMASK_MODES:
        raise ValueError(f"remask must be one of {REMASK_MODES}")
    key = bytes(key)
    key_mask = MaskGenerator(mask_seed).fresh_mask()

    plaintexts = np.empty((n, 16), dtype=np.uint8)
    ciphertexts = np.empty((n, 16), dtype=np.uint8)
    samples = None
    labels: list[str] = []
    spe = cfg.samples_per_event
    for start in range(0, n, chunk):
        stop = min(n, start + chunk)
        rngs = [trace_rng(cfg.seed, i) for i in range(start, stop)]
        pt = np.stack([r.integers(0, 256, 16, dtype=np.uint8) for r in rngs])
        masks = None
        if cipher == "kuznyechik-masked":
            if remask == "per-block":
                masks = np.stack([MaskGenerator.for_trace(mask_seed, i).fresh_mask() for i in range(start, stop)])
            else:
                masks = key_mask
        ct, trace = capture(cipher, key, pt, masks)
        labels, levels = _event_levels(trace, cfg, stop - start)
        levels = np.repeat(levels, spe, axis=1)
        if cfg.sigma > 0:
            levels = levels + cfg.sigma * np.stack([r.standard_normal(levels.shape[1]) for r in rngs])
        if samples is None:
            samples = np.empty((n, levels.shape[1]), dtype=np.float32)
        plaintexts[start:stop] = pt
        ciphertexts[start:stop] = ct
        samples[start:stop] = levels
    event_map = {label: i * spe for i, label in enumerate(labels)}
    return TraceSet(cipher, key_fingerprint(cipher, key), cfg, plaintexts, ciphertexts, samples, event_map)
