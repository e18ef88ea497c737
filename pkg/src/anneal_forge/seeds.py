"""Deterministic sub-seed derivation.

Every stochastic unit of work (a read, a trial, an instance) draws its own
seed from the master seed and its index path, so results never depend on
scheduling or worker count.
"""

from __future__ import annotations

import hashlib


def derive_seed(master: int, *parts: object) -> int:
    """Derive a 63-bit sub-seed from a master seed and a label path.

    Pure function of its arguments; parts may be ints or short strings.
    """
    payload = repr((int(master),) + parts).encode("utf-8")
    digest = hashlib.sha256(payload).digest()
    return int.from_bytes(digest[:8], "big") & (2**63 - 1)
