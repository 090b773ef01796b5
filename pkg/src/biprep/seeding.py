"""Deterministic per-item RNG derivation.

Every stochastic stage derives one `random.Random` per work item from the
master seed plus the item's identity. Outputs are then independent of worker
count and shard order, and stable across processes (no reliance on
PYTHONHASHSEED).
"""

from __future__ import annotations

import hashlib
import random


def derive_seed(*parts: int | str) -> int:
    payload = "\x1f".join(str(p) for p in parts).encode("utf-8")
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "big")


def derive_rng(*parts: int | str) -> random.Random:
    return random.Random(derive_seed(*parts))
