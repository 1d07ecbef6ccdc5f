"""SCTR binary trace files and CSV export.

Layout (all integers and floats little-endian)::

    offset  size  field
    0       4     magic b"SCTR"
    4       2     version (u16) = 1
    6       1     cipher id (u8): 0 aes256, 1 kuznyechik, 2 kuznyechik-masked
    7       4     trace count N (u32)
    11      4     samples per trace S (u32)
    15      1     leakage model tag (u8): 0 hamming_weight, 1 hamming_distance, 2 single_bit
    16      1     single-bit index (u8)
    17      8     alpha (f64)
    25      8     beta (f64)
    33      8     sigma (f64)
    41      4     samples per event (u32)
    45      8     seed (u64)
    53      32    key fingerprint (SHA-256)
    85      4     event count E (u32)
    89      ...   E entries: label length (u16), UTF-8 label, sample offset (u32)

followed by N records of 16 plaintext bytes, 16 ciphertext bytes and S
float32 samples.
"""

from __future__ import annotations

import csv
import io
import os
import struct

import numpy as np

from .cpa import CorrelationMatrix
from .leakage import CIPHERS, MODELS, LeakageConfig, TraceSet

MAGIC = b"SCTR"
VERSION = 1
_FIXED = struct.Struct("<4sHBIIBBdddIQ32sI")
_LABEL_LEN = struct.Struct("<H")
_OFFSET = struct.Struct("<I")


class TraceFormatError(ValueError):
    """Malformed SCTR data."""


class BadMagicError(TraceFormatError):
    pass


class UnsupportedVersionError(TraceFormatError):
    pass


class LengthMismatchError(TraceFormatError):
    pass


def _encode_header(ts: TraceSet) -> bytes:
    cfg = ts.config
    parts = [_FIXED.pack(
        MAGIC, VERSION, CIPHERS.index(ts.cipher), len(ts), ts.n_samples,
        MODELS.index(cfg.model), cfg.bit_index, cfg.alpha, cfg.beta, cfg.sigma,
        cfg.samples_per_event, cfg.seed, ts.key_fingerprint, len(ts.event_map),
    )]
    for label, offset in ts.event_map.items():
        raw = label.encode("utf-8")
        parts += [_LABEL_LEN.pack(len(raw)), raw, _OFFSET.pack(offset)]
    return b"".join(parts)


def header_size(ts: TraceSet) -> int:
    return len(_encode_header(ts))


def encode_trace_set(ts: TraceSet) -> bytes:
    if len(ts) == 0:
        raise ValueError("cannot write an empty trace set")
    records = np.empty(len(ts), dtype=[("pt", "u1", 16), ("ct", "u1", 16), ("s", "<f4", ts.n_samples)])
    records["pt"] = ts.plaintexts
    records["ct"] = ts.ciphertexts
    records["s"] = ts.samples
    return _encode_header(ts) + records.tobytes()


def write_trace_set(ts: TraceSet, destination) -> int:
    """Write ``ts`` to a path or binary file object; returns bytes written."""
    data = encode_trace_set(ts)
    if hasattr(destination, "write"):
        destination.write(data)
    else:
        with open(destination, "wb") as fh:
            fh.write(data)
    return len(data)


def decode_trace_set(data: bytes) -> TraceSet:
    if len(data) < 4 or data[:4] != MAGIC:
        raise BadMagicError(f"bad magic {data[:4]!r}, expected {MAGIC!r}")
    if len(data) < _FIXED.size:
        raise LengthMismatchError("file shorter than the fixed header")
    (_, version, cipher_id, n, n_samples, model_id, bit_index, alpha, beta, sigma,
     spe, seed, fingerprint, n_events) = _FIXED.unpack_from(data)
    if version != VERSION:
        raise UnsupportedVersionError(f"unsupported version {version}")
    if cipher_id >= len(CIPHERS) or model_id >= len(MODELS):
        raise TraceFormatError("unknown cipher or model tag")
    pos = _FIXED.size
    event_map = {}
    try:
        for _ in range(n_events):
            (size,) = _LABEL_LEN.unpack_from(data, pos)
            pos += _LABEL_LEN.size
            if pos + size > len(data):
                raise LengthMismatchError("event table runs past end of file")
            label = data[pos:pos + size].decode("utf-8")
            pos += size
            (offset,) = _OFFSET.unpack_from(data, pos)
            pos += _OFFSET.size
            event_map[label] = offset
    except struct.error as exc:
        raise LengthMismatchError("event table runs past end of file") from exc
    record = 32 + 4 * n_samples
    if len(data) - pos != n * record:
        raise LengthMismatchError(f"payload is {len(data) - pos} bytes, expected {n * record} for {n} traces")
    records = np.frombuffer(data, dtype=[("pt", "u1", 16), ("ct", "u1", 16), ("s", "<f4", n_samples)], count=n, offset=pos)
    cfg = LeakageConfig(MODELS[model_id], alpha, beta, sigma, spe, seed, bit_index)
    return TraceSet(CIPHERS[cipher_id], fingerprint, cfg,
                    records["pt"].copy(), records["ct"].copy(),
                    records["s"].astype(np.float32), event_map)


def read_trace_set(source) -> TraceSet:
    """Read an SCTR file from a path or binary file object."""
    if hasattr(source, "read"):
        return decode_trace_set(source.read())
    with open(source, "rb") as fh:
        return decode_trace_set(fh.read())


def export_csv(obj, destination) -> None:
    """Write a TraceSet (one row per trace, event labels as header) or a
    CorrelationMatrix (one row per guess, sample indices as header)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if isinstance(obj, TraceSet):
        spe = obj.config.samples_per_event
        header = []
        for label in obj.event_map:
            header += [label] if spe == 1 else [f"{label}[{k}]" for k in range(spe)]
        writer.writerow(header)
        for row in obj.samples:
            writer.writerow([repr(float(v)) for v in row])
    elif isinstance(obj, CorrelationMatrix):
        writer.writerow(["guess"] + [str(j) for j in range(obj.r.shape[1])])
        for g, row in enumerate(obj.r):
            writer.writerow([g] + ["" if np.isnan(v) else repr(float(v)) for v in row])
    else:
        raise TypeError(f"cannot export {type(obj).__name__}")
    text = buf.getvalue()
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        with open(os.fspath(destination), "w", newline="") as fh:
            fh.write(text)
