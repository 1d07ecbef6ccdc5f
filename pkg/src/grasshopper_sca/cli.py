"""``gsca`` command line: encrypt, decrypt, keyschedule, gen-traces, attack, bench.

Exit status: 0 success (an attack reported as structurally infeasible is
still a success), 2 usage error, 3 I/O error, 4 attack not applicable to
the trace file.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import aes, cpa, kuznyechik, trace_io
from .blocks import BLOCK_SIZE, KEY_SIZE, internal_to_bytes, parse_hex, wire_to_internal
from .leakage import CIPHERS, REMASK_MODES, LeakageConfig, key_fingerprint, simulate_traces
from .masking import MaskGenerator, build_mask_schedule, masked_encrypt

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_INCOMPATIBLE = 4

MODEL_NAMES = {"hw": "hamming_weight", "hd": "hamming_distance", "bit": "single_bit"}


class UsageError(Exception):
    pass


def u64(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("must fit in 64 unsigned bits")
    return value


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _hex(nbytes: int, what: str):
    def parse(text: str) -> bytes:
        try:
            return parse_hex(text, nbytes, what)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc))
    parse.__name__ = what
    return parse


def _load_key(args) -> bytes:
    if args.key is not None and args.key_file is not None:
        raise UsageError("give either --key or --key-file, not both")
    if args.key_file is not None:
        try:
            text = Path(args.key_file).read_text()
        except OSError as exc:
            raise OSError(f"cannot read key file: {exc}") from exc
        try:
            return parse_hex(text, KEY_SIZE, "key")
        except ValueError as exc:
            raise UsageError(str(exc))
    if args.key is None:
        raise UsageError("a key is required (--key or --key-file)")
    return args.key


def _add_key_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--key", type=_hex(KEY_SIZE, "key"), help="256-bit key, 64 hex chars")
    p.add_argument("--key-file", help="file holding the key as hex")


def cmd_encrypt(args) -> int:
    key = _load_key(args)
    block = args.block
    if args.cipher == "aes256":
        out = bytes(aes.aes256_encrypt(np.frombuffer(block, dtype=np.uint8), key))
    else:
        rk = kuznyechik.key_schedule(key)
        p = wire_to_internal(block)
        if args.cipher == "kuznyechik-masked" or args.mask_seed is not None:
            mask = MaskGenerator(args.mask_seed or 0).fresh_mask()
            c = masked_encrypt(p, rk, build_mask_schedule(mask))
        else:
            c = kuznyechik.encrypt(p, rk)
        out = internal_to_bytes(c)
    print(out.hex())
    return EXIT_OK


def cmd_decrypt(args) -> int:
    key = _load_key(args)
    if args.cipher == "aes256":
        raise UsageError("AES-256 decryption is not provided")
    rk = kuznyechik.key_schedule(key)
    print(internal_to_bytes(kuznyechik.decrypt(wire_to_internal(args.block), rk)).hex())
    return EXIT_OK


def cmd_keyschedule(args) -> int:
    if args.invert:
        if args.pair is None or args.index is None:
            raise UsageError("--invert needs --pair K_ODD K_EVEN and --index")
        if not 1 <= args.index <= 4:
            raise UsageError(f"pair index must be in 1..4, got {args.index}")
        k_odd, k_even = (wire_to_internal(k) for k in args.pair)
        print(kuznyechik.recover_master_from_pair(k_odd, k_even, args.index).hex())
        return EXIT_OK
    key = _load_key(args)
    for i, k in enumerate(kuznyechik.Kuznyechik(key).subkeys_hex(), start=1):
        print(f"k{i:<2} {k}")
    return EXIT_OK


def cmd_gen_traces(args) -> int:
    key = _load_key(args)
    try:
        cfg = LeakageConfig(MODEL_NAMES[args.model], args.alpha, args.beta, args.sigma,
                            args.samples_per_event, args.seed, args.bit_index)
    except ValueError as exc:
        raise UsageError(str(exc))
    ts = simulate_traces(args.cipher, key, args.n, cfg, mask_seed=args.mask_seed, remask=args.remask)
    size = trace_io.write_trace_set(ts, args.output)
    print(f"wrote {len(ts)} traces x {ts.n_samples} samples ({size} bytes) to {args.output}")
    return EXIT_OK


def _parse_window(text: str) -> np.ndarray:
    try:
        start, stop = (int(v) for v in text.split(":"))
    except ValueError:
        raise UsageError(f"window must be START:STOP, got {text!r}")
    if not 0 <= start < stop:
        raise UsageError("window must satisfy 0 <= START < STOP")
    return np.arange(start, stop)


def cmd_attack(args) -> int:
    if args.attack == "kuz-round9" and args.k10 is None:
        raise UsageError("kuz-round9 needs --k10")
    ts = trace_io.read_trace_set(args.trace_file)
    window = None
    if args.window:
        window = _parse_window(args.window)
        if window[-1] >= ts.n_samples:
            raise UsageError(f"window exceeds {ts.n_samples} samples")
    if args.true_key is not None and key_fingerprint(ts.cipher, args.true_key) != ts.key_fingerprint:
        print("warning: --true-key does not match the trace file's key fingerprint", file=sys.stderr)
    report, matrices = cpa.run_attack(ts, args.attack, true_key=args.true_key, k10=args.k10,
                                      window=window, polarity=args.polarity, keep_matrices=True)
    text = report.to_text()
    sys.stdout.write(text)
    if args.report:
        report_path = Path(args.report)
        report_path.write_text(text)
        report_path.with_suffix(".csv").write_text(report.to_csv())
    if args.corr_dir:
        out = Path(args.corr_dir)
        out.mkdir(parents=True, exist_ok=True)
        for b, cm in enumerate(matrices):
            trace_io.export_csv(cm, out / f"byte{b:02d}.csv")
    return EXIT_OK


def _throughput(fn, blocks: np.ndarray, duration: float) -> float:
    done = 0
    start = time.perf_counter()
    while True:
        fn(blocks)
        done += len(blocks)
        elapsed = time.perf_counter() - start
        if elapsed >= duration:
            return done / elapsed


def bench(cipher: str, variant: str, duration: float, batch: int = 256, seed: int = 0) -> dict[str, float]:
    """Blocks per second for each requested path."""
    rng = np.random.default_rng(seed)
    key = rng.integers(0, 256, KEY_SIZE, dtype=np.uint8).tobytes()
    blocks = rng.integers(0, 256, (batch, BLOCK_SIZE), dtype=np.uint8)
    if cipher == "aes256":
        paths = {"table": lambda b: aes.aes256_encrypt(b, key)}
    else:
        rk = kuznyechik.key_schedule(key)
        paths = {
            "reference": lambda b: kuznyechik.encrypt(b, rk, reference=True),
            "optimized": lambda b: kuznyechik.encrypt(b, rk),
        }
        if variant != "both":
            paths = {variant: paths[variant]}
    return {name: _throughput(fn, blocks, duration) for name, fn in paths.items()}


def cmd_bench(args) -> int:
    if args.duration <= 0:
        raise UsageError("--duration must be positive")
    for name, rate in bench(args.cipher, args.variant, args.duration).items():
        mbps = rate * 128 / 1e6
        print(f"{args.cipher} {name}: blocks/s={rate:.1f} Mbps={mbps:.3f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gsca", description="Kuznyechik side-channel workbench")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn, ciphers in (("encrypt", cmd_encrypt, CIPHERS), ("decrypt", cmd_decrypt, CIPHERS)):
        p = sub.add_parser(name)
        _add_key_args(p)
        p.add_argument("--block", required=True, type=_hex(BLOCK_SIZE, "block"), help="128-bit block, 32 hex chars")
        p.add_argument("--cipher", choices=ciphers, default="kuznyechik")
        p.add_argument("--mask-seed", type=u64, help="encrypt through the masked routine with this mask seed")
        p.set_defaults(func=fn)

    p = sub.add_parser("keyschedule")
    _add_key_args(p)
    p.add_argument("--invert", action="store_true", help="recover the master key from a subkey pair")
    p.add_argument("--pair", nargs=2, type=_hex(BLOCK_SIZE, "subkey"), metavar=("K_ODD", "K_EVEN"))
    p.add_argument("--index", type=int, help="pair index i in 1..4 for (k_{2i+1}, k_{2i+2})")
    p.set_defaults(func=cmd_keyschedule)

    p = sub.add_parser("gen-traces")
    _add_key_args(p)
    p.add_argument("--cipher", choices=CIPHERS, default="kuznyechik")
    p.add_argument("-n", "--traces", dest="n", type=positive_int, required=True)
    p.add_argument("--model", choices=tuple(MODEL_NAMES), default="hd")
    p.add_argument("--bit-index", type=int, default=0)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--samples-per-event", type=positive_int, default=1)
    p.add_argument("--seed", type=u64, default=0)
    p.add_argument("--mask-seed", type=u64, default=0)
    p.add_argument("--remask", choices=REMASK_MODES, default="per-key")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gen_traces)

    p = sub.add_parser("attack")
    p.add_argument("trace_file")
    p.add_argument("--attack", choices=tuple(cpa.ATTACKS), required=True)
    p.add_argument("--true-key", type=_hex(KEY_SIZE, "true key"), help="master key, for rank reporting")
    p.add_argument("--k10", type=_hex(BLOCK_SIZE, "k10"), help="known tenth subkey (kuz-round9)")
    p.add_argument("--window", help="sample range START:STOP overriding the round window")
    p.add_argument("--polarity", choices=cpa.POLARITIES, default="positive")
    p.add_argument("--report", help="write the text report here and a CSV beside it")
    p.add_argument("--corr-dir", help="dump per-byte correlation matrices as CSV into this directory")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("bench")
    p.add_argument("--cipher", choices=("kuznyechik", "aes256"), default="kuznyechik")
    p.add_argument("--variant", choices=("reference", "optimized", "both"), default="both")
    p.add_argument("--duration", type=float, default=1.0, help="seconds per path")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"gsca {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except cpa.AttackError as exc:
        print(f"gsca {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INCOMPATIBLE
    except (OSError, trace_io.TraceFormatError) as exc:
        print(f"gsca {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
