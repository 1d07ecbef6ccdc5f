import numpy as np
import pytest

from grasshopper_sca import kuznyechik as kz
from grasshopper_sca.blocks import internal_to_wire, wire_to_internal
from grasshopper_sca.hamming import hamming_distance
from grasshopper_sca.leakage import LeakageConfig, capture, leak_value, leakage_level, simulate_traces
from conftest import RFC_KEY

QUIET = LeakageConfig(sigma=0.0)


def test_leak_value_basic_cases():
    z = np.zeros(16, np.uint8)
    assert leak_value(z, z, LeakageConfig("hamming_weight", beta=2.5)) == 2.5
    v = np.full(16, 0x3C, np.uint8)
    assert leak_value(v, v, LeakageConfig("hamming_distance", beta=-1.0)) == -1.0
    a = np.full(16, 0x0F, np.uint8)
    b = np.full(16, 0xF0, np.uint8)
    assert leak_value(a, b, LeakageConfig("hamming_distance")) == 128


def test_single_bit_model():
    curr = np.zeros(16, np.uint8)
    curr[2] = 0b0000_1000
    cfg = LeakageConfig("single_bit", alpha=3.0, bit_index=19)
    assert leak_value(None, curr, cfg) == 3.0
    assert leak_value(None, curr, LeakageConfig("single_bit", alpha=3.0, bit_index=18)) == 0.0


def test_noise_is_added():
    z = np.zeros(16, np.uint8)
    vals = [leak_value(z, z, LeakageConfig(sigma=2.0), np.random.default_rng(i)) for i in range(2000)]
    assert abs(np.std(vals) - 2.0) < 0.15


@pytest.mark.parametrize("kwargs", [dict(sigma=-1), dict(samples_per_event=0), dict(model="bogus")])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        LeakageConfig(**kwargs)


def test_single_trace_final_xor_sample():
    cfg = LeakageConfig(alpha=1.0, beta=0.0, sigma=0.0, seed=11)
    ts = simulate_traces("kuznyechik", RFC_KEY, 1, cfg)
    rk = kz.key_schedule(RFC_KEY)
    p = wire_to_internal(ts.plaintexts[0])
    c, trace = kz.encrypt_with_trace(p, rk)
    assert np.array_equal(internal_to_wire(c), ts.ciphertexts[0])
    expected = hamming_distance(trace.after_l[-1], c)
    assert ts.samples[0, ts.event_map["r10.X"]] == expected


def test_determinism_and_chunk_independence():
    cfg = LeakageConfig(sigma=1.5, seed=77)
    a = simulate_traces("kuznyechik-masked", RFC_KEY, 300, cfg, remask="per-block", mask_seed=5)
    b = simulate_traces("kuznyechik-masked", RFC_KEY, 300, cfg, remask="per-block", mask_seed=5, chunk=37)
    assert a.structurally_equal(b)
    c = simulate_traces("kuznyechik-masked", RFC_KEY, 300, LeakageConfig(sigma=1.5, seed=78), remask="per-block", mask_seed=5)
    assert not np.array_equal(a.samples, c.samples)


def test_prefix_of_larger_set_is_identical():
    cfg = LeakageConfig(sigma=1.0, seed=3)
    small = simulate_traces("aes256", RFC_KEY, 50, cfg)
    big = simulate_traces("aes256", RFC_KEY, 120, cfg)
    assert small.structurally_equal(big.subset(50))


def test_quiet_hd_samples_are_integer_multiples():
    cfg = LeakageConfig(alpha=0.5, beta=3.0, sigma=0.0)
    ts = simulate_traces("kuznyechik", RFC_KEY, 40, cfg)
    k = (ts.samples - 3.0) / 0.5
    assert np.array_equal(k, np.round(k))


def test_noise_variance_grows_by_sigma_squared():
    fixed = LeakageConfig(sigma=0.0, seed=5)
    noisy = LeakageConfig(sigma=4.0, seed=5)
    a = simulate_traces("kuznyechik", RFC_KEY, 1000, fixed)
    b = simulate_traces("kuznyechik", RFC_KEY, 1000, noisy)
    j = a.event_map["r5.S"]
    assert np.array_equal(a.plaintexts, b.plaintexts)
    growth = b.samples[:, j].astype(np.float64).var(ddof=1) - a.samples[:, j].astype(np.float64).var(ddof=1)
    assert abs(growth - 16.0) <= 2.0


def test_event_map_layout():
    ts = simulate_traces("kuznyechik", RFC_KEY, 3, LeakageConfig(samples_per_event=3))
    labels = list(ts.event_map)
    assert labels[0] == "keyexp.01" and labels[-1] == "r10.X"
    assert "r9.latch" in labels and "load" in labels
    assert ts.n_samples == 3 * len(labels)
    assert list(ts.event_map.values()) == list(range(0, ts.n_samples, 3))
    masked = simulate_traces("kuznyechik-masked", RFC_KEY, 3, LeakageConfig())
    assert list(masked.event_map)[-1] == "unmask"
    assert "mask" in masked.event_map


def test_masked_set_matches_unmasked_ciphertexts():
    cfg = LeakageConfig(seed=9)
    plain = simulate_traces("kuznyechik", RFC_KEY, 64, cfg)
    masked = simulate_traces("kuznyechik-masked", RFC_KEY, 64, cfg, remask="per-block")
    assert np.array_equal(plain.ciphertexts, masked.ciphertexts)
    assert not np.array_equal(plain.samples, masked.samples)


def test_masks_are_not_recorded():
    ts = simulate_traces("kuznyechik-masked", RFC_KEY, 4, LeakageConfig())
    assert set(vars(ts)) == {"cipher", "key_fingerprint", "config", "plaintexts", "ciphertexts", "samples", "event_map"}
    assert RFC_KEY not in ts.key_fingerprint


def test_rejects_bad_inputs():
    with pytest.raises(ValueError):
        simulate_traces("des", RFC_KEY, 10, QUIET)
    with pytest.raises(ValueError):
        simulate_traces("kuznyechik", RFC_KEY, 0, QUIET)


def test_capture_aes_order():
    pts = np.zeros((2, 16), np.uint8)
    c, trace = capture("aes256", bytes(range(32)), pts)
    assert np.array_equal(trace.ciphertext, c)


def test_leakage_level_vectorized():
    prev = np.zeros((5, 16), np.uint8)
    curr = np.full((5, 16), 1, np.uint8)
    assert np.array_equal(leakage_level(prev, curr, QUIET), np.full(5, 16.0))
