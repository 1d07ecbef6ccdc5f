import numpy as np
import pytest

from grasshopper_sca import cpa
from grasshopper_sca import kuznyechik as kz
from grasshopper_sca.blocks import wire_to_internal
from grasshopper_sca.hamming import HW8
from grasshopper_sca.leakage import LeakageConfig, simulate_traces
from conftest import RFC_KEY
from oracles import naive_pearson

G = np.arange(256, dtype=np.uint8)


def test_perfect_and_anti_correlation(rng):
    t = rng.normal(size=(30, 3))
    h = np.stack([t[:, 1], -t[:, 2], rng.normal(size=30)], axis=1)
    cm = cpa.pearson_matrix(h, t)
    assert cm.r[0, 1] == pytest.approx(1.0, abs=1e-12)
    assert cm.r[1, 2] == pytest.approx(-1.0, abs=1e-12)
    assert cm.r.shape == (3, 3)


@pytest.mark.parametrize("instance", range(50))
def test_matches_naive_oracle(instance):
    rng = np.random.default_rng(instance)
    n = int(rng.integers(2, 200))
    h = rng.integers(0, 9, size=(n, 6))
    t = rng.normal(size=(n, 4)) * 3 + 10
    cm = cpa.pearson_matrix(h, t)
    for g in range(6):
        for j in range(4):
            ref = naive_pearson(h[:, g].tolist(), t[:, j].tolist())
            if ref is None:
                assert not cm.defined[g, j]
            else:
                assert abs(cm.r[g, j] - ref) <= 1e-10


def test_degenerate_rows_and_columns_are_flagged(rng):
    h = rng.integers(0, 9, size=(20, 3))
    h[:, 1] = 4
    t = rng.normal(size=(20, 2))
    t[:, 0] = 7.0
    cm = cpa.pearson_matrix(h, t)
    assert cm.degenerate_rows.tolist() == [False, True, False]
    assert cm.degenerate_cols.tolist() == [True, False]
    assert cm.defined.tolist() == [[False, True], [False, False], [False, True]]
    assert np.all(np.abs(cm.r[cm.defined]) <= 1)


def test_dimension_errors(rng):
    with pytest.raises(ValueError):
        cpa.pearson_matrix(np.zeros((5, 2)), np.zeros((6, 2)))
    with pytest.raises(ValueError):
        cpa.pearson_matrix(np.zeros((1, 2)), np.zeros((1, 2)))


def test_scale_invariance(rng):
    h = rng.integers(0, 9, size=(500, 256))
    t = rng.normal(size=(500, 5))
    a = cpa.pearson_matrix(h, t)
    b = cpa.pearson_matrix(h, t * 37.5)
    assert np.max(np.abs(a.r - b.r)) <= 1e-9
    assert np.array_equal(np.argmax(np.abs(a.r).max(axis=1)), np.argmax(np.abs(b.r).max(axis=1)))


def test_last_round_hd_hypothesis_is_constant(rng):
    c = rng.integers(0, 256, (100, 16), dtype=np.uint8)
    for b in range(16):
        h = cpa.kuz_last_round_hypothesis(c, b, G, "hd")
        assert np.all(h == h[0])
        assert np.array_equal(h[0], HW8[G])
    assert np.array_equal(cpa.kuz_last_round_hypothesis(c, 3, 0, "hw"), HW8[c[:, 3]])
    h = cpa.kuz_last_round_hypothesis(c, 3, G, "hw")
    assert h.min() >= 0 and h.max() <= 8


def test_round9_hypothesis_matches_register(rng):
    rk = kz.key_schedule(RFC_KEY)
    p = rng.integers(0, 256, (300, 16), dtype=np.uint8)
    c, trace = kz.encrypt_with_trace(p, rk)
    for b in range(16):
        hyp = cpa.kuz_round9_hypothesis(c, rk[10], b, rk[9][b])
        actual = HW8[trace.round_output(8)[:, b] ^ trace.round_output(9)[:, b]]
        assert np.array_equal(hyp, actual)
    h = cpa.kuz_round9_hypothesis(c, rk[10], 0, G)
    assert h.shape == (300, 256) and h.max() <= 8


def test_rank_of():
    s = np.array([0.1, 0.5, np.nan, 0.3])
    assert cpa.rank_of(s, 1) == 0
    assert cpa.rank_of(s, 3) == 1
    assert cpa.rank_of(s, 2) == 3


def test_guessing_entropy():
    def rep(ranks):
        r = cpa.AttackReport("x", "aes256", 1, "positive", np.arange(1))
        r.bytes = [cpa.ByteResult(i, 0, 0.0, 0, rank) for i, rank in enumerate(ranks)]
        return r

    assert np.all(cpa.guessing_entropy([rep([0] * 16)]) == 0)
    assert np.all(cpa.guessing_entropy([rep([0] * 16), rep([255] * 16)]) == 127.5)
    rng = np.random.default_rng(12)
    runs = [rep(rng.integers(0, 256, 16)) for _ in range(100)]
    ge = cpa.guessing_entropy(runs)
    assert 96 <= ge.mean() <= 160
    with pytest.raises(ValueError):
        cpa.guessing_entropy([])
    bare = rep([0] * 16)
    bare.bytes[0].rank = None
    with pytest.raises(ValueError):
        cpa.guessing_entropy([bare])


def test_run_attack_compatibility_errors():
    ts = simulate_traces("kuznyechik", RFC_KEY, 20, LeakageConfig(sigma=1.0))
    with pytest.raises(cpa.AttackError):
        cpa.run_attack(ts, "aes-last-round")
    with pytest.raises(cpa.AttackError):
        cpa.run_attack(ts, "kuz-round9")
    with pytest.raises(cpa.AttackError):
        cpa.run_attack(ts, "nope")


def test_last_round_hd_reported_infeasible():
    ts = simulate_traces("kuznyechik", RFC_KEY, 200, LeakageConfig(sigma=1.0, seed=4))
    report = cpa.run_attack(ts, "kuz-last-round-hd", true_key=RFC_KEY)
    assert report.structurally_infeasible
    assert all(b.degenerate and b.rank is None for b in report.bytes)
    assert "structurally infeasible" in report.to_text()


def test_report_rank_consistency():
    ts = simulate_traces("aes256", bytes(range(32)), 400, LeakageConfig(sigma=1.0, seed=2))
    report = cpa.run_attack(ts, "aes-last-round", true_key=bytes(range(32)))
    truth = report.true_key
    for b in report.bytes:
        assert 0 <= b.rank <= 255
        assert (b.rank == 0) == (b.best_guess == truth[b.byte_index])
        assert b.peak_sample in report.window
    csv_lines = report.to_csv().strip().splitlines()
    assert len(csv_lines) == 17


def test_scaling_traces_keeps_best_guess():
    ts = simulate_traces("aes256", bytes(range(32)), 300, LeakageConfig(sigma=2.0, seed=8))
    a = cpa.run_attack(ts, "aes-last-round")
    ts.samples = ts.samples * np.float32(4.0)
    b = cpa.run_attack(ts, "aes-last-round")
    assert [x.best_guess for x in a.bytes] == [x.best_guess for x in b.bytes]


def test_window_override():
    ts = simulate_traces("aes256", bytes(range(32)), 50, LeakageConfig(sigma=1.0))
    report = cpa.run_attack(ts, "aes-last-round", window=np.arange(0, 5))
    assert report.window.tolist() == [0, 1, 2, 3, 4]


def test_wrong_k10_degrades_to_uniform():
    ts = simulate_traces("kuznyechik", RFC_KEY, 5000, LeakageConfig(sigma=1.0, seed=21))
    rk = kz.key_schedule(RFC_KEY)
    good = cpa.run_attack(ts, "kuz-round9", true_key=RFC_KEY, k10=rk[10])
    wrong = rk[10].copy()
    wrong[0] ^= 1
    bad = cpa.run_attack(ts, "kuz-round9", true_key=RFC_KEY, k10=wrong)
    assert good.mean_rank == 0
    assert 96 <= bad.mean_rank <= 160


def test_k10_accepts_wire_bytes():
    ts = simulate_traces("kuznyechik", RFC_KEY, 500, LeakageConfig(sigma=0.5, seed=1))
    k10 = kz.Kuznyechik(RFC_KEY).subkeys_hex()[9]
    a = cpa.run_attack(ts, "kuz-round9", true_key=RFC_KEY, k10=bytes.fromhex(k10))
    b = cpa.run_attack(ts, "kuz-round9", true_key=RFC_KEY, k10=wire_to_internal(bytes.fromhex(k10)))
    assert a.ranks.tolist() == b.ranks.tolist()


@pytest.mark.slow
def test_aes_success_is_monotone_in_trace_count():
    from conftest import AES_KEY
    counts = (500, 1000, 2000, 5000)
    hits = {n: [] for n in counts}
    for seed in range(5):
        ts = simulate_traces("aes256", AES_KEY, max(counts), LeakageConfig(sigma=1.0, seed=seed))
        for n in counts:
            hits[n].append((cpa.run_attack(ts.subset(n), "aes-last-round", true_key=AES_KEY).ranks == 0).sum())
    means = [np.mean(hits[n]) for n in counts]
    assert all(a <= b for a, b in zip(means, means[1:])), means
