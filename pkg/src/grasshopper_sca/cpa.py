"""Correlation power analysis over :class:`~grasshopper_sca.leakage.TraceSet`.

Hypotheses are ``(N, 256)`` integer matrices, one column per key-byte
guess. A guess whose hypothesis is constant over all traces has no
defined correlation; such cells are flagged instead of being turned into
numbers, and an attack whose every guess is constant is reported as
structurally infeasible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import aes, kuznyechik
from .blocks import internal_to_wire, wire_to_internal
from .gf_linear import big_l_inv
from .hamming import HW8
from .leakage import TraceSet

GUESSES = np.arange(256, dtype=np.uint8)

ATTACKS = {
    # attack id -> (compatible ciphers, event-label prefix of the targeted round)
    "aes-last-round": (("aes256",), "r14."),
    "kuz-last-round-hd": (("kuznyechik", "kuznyechik-masked"), "r10."),
    "kuz-last-round-hw": (("kuznyechik", "kuznyechik-masked"), "r10."),
    "kuz-round9": (("kuznyechik", "kuznyechik-masked"), "r9."),
}
POLARITIES = ("positive", "negative", "abs")


class AttackError(ValueError):
    """Attack and trace set do not fit together."""


@dataclass
class CorrelationMatrix:
    """Pearson coefficients ``r[g, j]`` for guess ``g`` and sample ``j``.

    Cells in a zero-variance hypothesis row or sample column are NaN in
    ``r`` and marked in the two degenerate masks; use :meth:`defined`
    before reading them.
    """

    r: np.ndarray
    degenerate_rows: np.ndarray
    degenerate_cols: np.ndarray

    @property
    def defined(self) -> np.ndarray:
        return ~(self.degenerate_rows[:, None] | self.degenerate_cols[None, :])

    @property
    def all_degenerate(self) -> bool:
        return not self.defined.any()


def _constant(a: np.ndarray) -> np.ndarray:
    return np.all(a == a[:1], axis=0)


def pearson_matrix(h, t) -> CorrelationMatrix:
    """Correlate every hypothesis column of ``h`` (N, G) with every sample
    column of ``t`` (N, S)."""
    if isinstance(t, TraceSet):
        t = t.samples
    h = np.asarray(h)
    t = np.asarray(t)
    if h.ndim != 2 or t.ndim != 2:
        raise ValueError("hypotheses and samples must be 2-D (traces first)")
    if h.shape[0] != t.shape[0]:
        raise ValueError(f"trace count mismatch: {h.shape[0]} hypotheses vs {t.shape[0]} traces")
    if h.shape[0] < 2:
        raise ValueError("at least 2 traces are required")
    bad_rows = _constant(h)
    bad_cols = _constant(t)
    hc = h.astype(np.float64)
    hc -= hc.mean(axis=0)
    tc = t.astype(np.float64)
    tc -= tc.mean(axis=0)
    num = hc.T @ tc
    den = np.sqrt(np.outer((hc * hc).sum(axis=0), (tc * tc).sum(axis=0)))
    r = np.full(num.shape, np.nan)
    ok = ~(bad_rows[:, None] | bad_cols[None, :])
    r[ok] = np.clip(num[ok] / den[ok], -1.0, 1.0)
    return CorrelationMatrix(r, bad_rows, bad_cols)


def kuz_last_round_hypothesis(c, byte_index: int, guess, model: str = "hd") -> np.ndarray:
    """Last-round hypotheses; ``c`` is internal-order, ``byte_index`` is ``i`` of ``x_i``.

    The HD form compares the register before and after ``X[k_10]``; it
    reduces to ``HW(guess)`` and carries no ciphertext dependence.
    """
    c = np.asarray(c, dtype=np.uint8)[..., byte_index]
    guess = np.asarray(guess, dtype=np.uint8)
    if guess.ndim:
        c = c[..., None]
    before = c ^ guess
    if model == "hd":
        return HW8[c ^ before]
    if model == "hw":
        return HW8[before]
    raise ValueError(f"model must be 'hd' or 'hw', got {model!r}")


def kuz_round9_hypothesis(c, k10, byte_index: int, guess) -> np.ndarray:
    """HD between the round-8 and round-9 outputs at ``byte_index``, given ``k_10``.

    All arguments use internal order.
    """
    y = np.asarray(c, dtype=np.uint8) ^ np.asarray(k10, dtype=np.uint8)
    w = big_l_inv(y)
    pre = kuznyechik.SBOX_INV[w[..., byte_index]]
    out = y[..., byte_index]
    guess = np.asarray(guess, dtype=np.uint8)
    if guess.ndim:
        pre, out = pre[..., None], out[..., None]
    return HW8[pre ^ guess ^ out]


@dataclass
class ByteResult:
    byte_index: int
    best_guess: int | None
    peak_r: float | None
    peak_sample: int | None
    rank: int | None = None
    degenerate: bool = False


@dataclass
class AttackReport:
    attack: str
    cipher: str
    n_traces: int
    polarity: str
    window: np.ndarray
    bytes: list[ByteResult] = field(default_factory=list)
    true_key: np.ndarray | None = None

    @property
    def structurally_infeasible(self) -> bool:
        return all(b.degenerate for b in self.bytes)

    @property
    def ranks(self) -> np.ndarray:
        if any(b.rank is None for b in self.bytes):
            raise ValueError("report carries no true-key ranks")
        return np.array([b.rank for b in self.bytes])

    @property
    def mean_rank(self) -> float:
        return float(self.ranks.mean())

    def to_text(self) -> str:
        lines = [
            f"attack: {self.attack}",
            f"cipher: {self.cipher}",
            f"traces: {self.n_traces}",
            f"window: samples {self.window.min()}..{self.window.max()} ({len(self.window)} samples)",
            f"ranking: peak correlation, polarity={self.polarity}",
        ]
        if self.structurally_infeasible:
            lines.append("result: structurally infeasible (hypothesis constant over traces for every guess)")
        lines.append("byte  guess  peak_r     sample  rank")
        for b in self.bytes:
            if b.degenerate:
                lines.append(f"{b.byte_index:>4}  {'-':>5}  {'degenerate':>9}  {'-':>6}  {'-' if b.rank is None else b.rank:>4}")
            else:
                rank = "-" if b.rank is None else str(b.rank)
                lines.append(f"{b.byte_index:>4}  {b.best_guess:>5}  {b.peak_r:+.6f}  {b.peak_sample:>6}  {rank:>4}")
        if all(b.rank is not None for b in self.bytes):
            lines.append(f"mean rank: {self.mean_rank:.2f}")
            lines.append(f"bytes at rank 0: {int((self.ranks == 0).sum())}/16")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        rows = ["byte,guess,peak_r,sample,rank,degenerate"]
        for b in self.bytes:
            rows.append(",".join([
                str(b.byte_index),
                "" if b.best_guess is None else str(b.best_guess),
                "" if b.peak_r is None else repr(b.peak_r),
                "" if b.peak_sample is None else str(b.peak_sample),
                "" if b.rank is None else str(b.rank),
                str(int(b.degenerate)),
            ]))
        return "\n".join(rows) + "\n"


def hypotheses(attack: str, ts: TraceSet, byte_index: int, k10=None) -> np.ndarray:
    """(N, 256) hypothesis matrix for one key byte."""
    if attack == "aes-last-round":
        return aes_last_round_hypotheses(ts.ciphertexts, byte_index)
    c = wire_to_internal(ts.ciphertexts)
    if attack == "kuz-last-round-hd":
        return kuz_last_round_hypothesis(c, byte_index, GUESSES, "hd")
    if attack == "kuz-last-round-hw":
        return kuz_last_round_hypothesis(c, byte_index, GUESSES, "hw")
    if attack == "kuz-round9":
        if k10 is None:
            raise AttackError("kuz-round9 needs the tenth subkey (k10)")
        return kuz_round9_hypothesis(c, k10, byte_index, GUESSES)
    raise AttackError(f"unknown attack {attack!r}")


def aes_last_round_hypotheses(c, byte_index: int) -> np.ndarray:
    return aes.aes_last_round_hypothesis(c, byte_index, GUESSES)


def target_subkey(attack: str, master_key: bytes) -> np.ndarray:
    """Key bytes the attack recovers, indexed like its byte positions."""
    if attack == "aes-last-round":
        return aes.expand_key(master_key)[14]
    rk = kuznyechik.key_schedule(master_key)
    return rk[9] if attack == "kuz-round9" else rk[10]


def _scores(cm: CorrelationMatrix, polarity: str) -> np.ndarray:
    r = np.where(cm.defined, cm.r, np.nan)
    if polarity == "negative":
        r = -r
    elif polarity == "abs":
        r = np.abs(r)
    return r


def rank_of(scores: np.ndarray, true_guess: int) -> int:
    """Number of guesses scoring strictly higher than the true one.

    Guesses without a defined score rank below every defined one.
    """
    s = np.where(np.isnan(scores), -np.inf, scores)
    return int((s > s[true_guess]).sum())


def run_attack(ts: TraceSet, attack: str, *, true_key: bytes | None = None, k10=None,
               window=None, polarity: str = "positive", keep_matrices: bool = False):
    """CPA on all 16 key bytes.

    ``window`` overrides the default sample window (the attacked round's
    events) with explicit sample indices. ``k10`` is an internal-order
    block (or 16 wire bytes). With ``keep_matrices`` a list of per-byte
    :class:`CorrelationMatrix` objects is returned alongside the report.
    """
    if attack not in ATTACKS:
        raise AttackError(f"unknown attack {attack!r}; expected one of {tuple(ATTACKS)}")
    ciphers, prefix = ATTACKS[attack]
    if ts.cipher not in ciphers:
        raise AttackError(f"attack {attack!r} does not apply to {ts.cipher!r} traces")
    if polarity not in POLARITIES:
        raise ValueError(f"polarity must be one of {POLARITIES}")
    if isinstance(k10, (bytes, bytearray)):
        k10 = wire_to_internal(k10)
    if attack == "kuz-round9" and k10 is None:
        raise AttackError("kuz-round9 needs the tenth subkey (k10)")
    cols = ts.window(prefix) if window is None else np.asarray(window)
    t = ts.samples[:, cols]
    truth = None
    if true_key is not None:
        truth = target_subkey(attack, true_key)

    report = AttackReport(attack, ts.cipher, len(ts), polarity, cols, true_key=truth)
    matrices = []
    for b in range(16):
        cm = pearson_matrix(hypotheses(attack, ts, b, k10), t)
        matrices.append(cm)
        if cm.all_degenerate:
            report.bytes.append(ByteResult(b, None, None, None, None, degenerate=True))
            continue
        scores = _scores(cm, polarity)
        per_guess = np.nanmax(np.where(cm.defined, scores, -np.inf), axis=1)
        best = int(np.argmax(per_guess))
        j = int(np.nanargmax(np.where(cm.defined[best], scores[best], -np.inf)))
        rank = rank_of(per_guess, int(truth[b])) if truth is not None else None
        report.bytes.append(ByteResult(b, best, float(cm.r[best, j]), int(cols[j]), rank))
    return (report, matrices) if keep_matrices else report


def guessing_entropy(reports) -> np.ndarray:
    """Mean true-key rank per byte position across repeated attacks."""
    reports = list(reports)
    if not reports:
        raise ValueError("need at least one report")
    return np.mean([r.ranks for r in reports], axis=0)


def wire_subkey(block: np.ndarray, attack: str) -> np.ndarray:
    """Target subkey bytes in wire order for display."""
    return block if attack == "aes-last-round" else internal_to_wire(block)
