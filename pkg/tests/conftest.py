import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

# GOST R 34.12-2015 / RFC 7801 reference example
RFC_KEY = bytes.fromhex("8899aabbccddeeff0011223344556677fedcba98765432100123456789abcdef")
RFC_PLAINTEXT = bytes.fromhex("1122334455667700ffeeddccbbaa9988")
RFC_CIPHERTEXT = bytes.fromhex("7f679d90bebc24305a468d42b9d4edcd")
RFC_SUBKEYS = [
    "8899aabbccddeeff0011223344556677",
    "fedcba98765432100123456789abcdef",
    "db31485315694343228d6aef8cc78c44",
    "3d4553d8e9cfec6815ebadc40a9ffd04",
    "57646468c44a5e28d3e59246f429f1ac",
    "bd079435165c6432b532e82834da581b",
    "51e640757e8745de705727265a0098b1",
    "5a7925017b9fdd3ed72a91a22286f984",
    "bb44e25378c73123a5f32f73cdb6e517",
    "72e9dd7416bcf45b755dbaa88e4a4043",
]

# FIPS-197 appendix C.3
AES_KEY = bytes(range(32))
AES_PLAINTEXT = bytes.fromhex("00112233445566778899aabbccddeeff")
AES_CIPHERTEXT = bytes.fromhex("8ea2b7ca516745bfeafc49904b496089")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
