"""Deterministic seed derivation.

All randomness in an experiment flows from the single config seed.  Module
seeds are derived with numpy's SeedSequence spawn keys (a counter-based
splitter), so streams are independent yet reproducible, and adding a stream
never perturbs existing ones.
"""

import numpy as np

_STREAMS = {
    "lyapunov": 1,
    "entropy": 2,
    "nu": 3,
    "log_sobolev": 4,
    "scalar": 5,
    "diagnose": 6,
}


def child_seed(master: int, stream: str, index: int = 0) -> int:
    """Derive the integer seed for a named stream of an experiment."""
    seq = np.random.SeedSequence(master, spawn_key=(_STREAMS[stream], index))
    return int(seq.generate_state(1, dtype=np.uint64)[0])
