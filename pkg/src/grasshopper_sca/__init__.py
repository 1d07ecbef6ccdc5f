"""Kuznyechik side-channel workbench: cipher, masking, AES-256 control
target, leakage simulation and correlation power analysis."""

from .kuznyechik import Kuznyechik, decrypt, encrypt, key_schedule, recover_master_from_pair
from .leakage import LeakageConfig, TraceSet, simulate_traces
from .cpa import run_attack

__all__ = [
    "Kuznyechik", "encrypt", "decrypt", "key_schedule", "recover_master_from_pair",
    "LeakageConfig", "TraceSet", "simulate_traces", "run_attack",
]
__version__ = "0.1.0"
