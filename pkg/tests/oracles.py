"""Frozen reference values used by several test modules."""

import numpy as np

# Distinct width-3 configurations on five qubits, grouped by edge count.
N5_WIDTH3_CLASSES = {
    1: ["123"],
    2: ["123,124", "123,145"],
    3: ["123,124,134", "123,124,125", "123,124,135", "123,124,345"],
    4: ["123,124,125,134", "123,124,125,345", "123,124,134,234", "123,124,134,235", "123,124,135,145", "123,124,135,245"],
    5: [
        "123,124,125,134,135", "123,124,125,134,234", "123,124,125,134,235",
        "123,124,125,134,345", "123,124,134,235,245", "123,124,135,245,345",
    ],
    6: [
        "123,124,125,134,135,145", "123,124,125,134,135,234", "123,124,125,134,135,245",
        "123,124,125,134,234,345", "123,124,125,134,235,345", "123,124,134,235,245,345",
    ],
    7: [
        "123,124,125,134,135,145,234", "123,124,125,134,135,234,235",
        "123,124,125,134,135,234,245", "123,124,125,134,135,245,345",
    ],
    8: ["123,124,125,134,135,145,234,235", "123,124,125,134,135,234,245,345"],
    9: ["123,124,125,134,135,145,234,235,245"],
    10: ["123,124,125,134,135,145,234,235,245,345"],
}
# Classes marked disconnected in the reference listing.
N5_LISTED_DISCONNECTED = ["123", "123,124", "123,124,134"]
N5_MINIMAL_CONNECTED = "123,145"

M4 = np.array(
    [
        [1, 1, 0, 1, 0, 0],
        [1, 0, 1, 0, 1, 0],
        [0, 1, 1, 0, 0, 1],
        [0, 0, 0, 1, 1, 1],
    ]
)


def parse_edges(text: str) -> frozenset:
    return frozenset(frozenset(int(c) for c in e) for e in text.split(","))


def _ket(bits: str) -> np.ndarray:
    v = np.zeros(2 ** len(bits))
    v[int(bits, 2)] = 1.0
    return v


def pair_kernel_states() -> np.ndarray:
    """Columns: |00000>, |W5>, and the three extra dark states of the two-edge example."""
    w5 = sum(_ket(b) for b in ("10000", "01000", "00100", "00010", "00001")) / np.sqrt(5)
    phi1 = (_ket("01000") - _ket("10000")) / np.sqrt(2)
    phi2 = (_ket("00001") - _ket("00010")) / np.sqrt(2)
    phi3 = (_ket("01001") + _ket("10010") - _ket("01010") - _ket("10001")) / 2
    return np.column_stack([_ket("00000"), w5, phi1, phi2, phi3])
