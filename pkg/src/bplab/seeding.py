"""Reproducible random streams.

All randomness in the package flows through named Philox (counter-based,
64-bit) streams derived from a master seed, a stream label, and an index.
Derivation is a hash, so streams for different (label, index) pairs are
independent and can be consumed in any order or in parallel without
changing results.
"""

from __future__ import annotations

import hashlib

import numpy as np


def substream_seed(master_seed: int, label: str, index: int = 0) -> int:
    """Derive a 64-bit sub-seed from (master_seed, label, index)."""
    digest = hashlib.blake2b(
        f"{master_seed}:{label}:{index}".encode(), digest_size=8
    ).digest()
    return int.from_bytes(digest, "little")


def stream(master_seed: int, label: str, index: int = 0) -> np.random.Generator:
    """Return the named Philox generator for (master_seed, label, index)."""
    digest = hashlib.blake2b(
        f"{master_seed}:{label}:{index}".encode(), digest_size=16
    ).digest()
    key = int.from_bytes(digest, "little")
    return np.random.Generator(np.random.Philox(key=key))
