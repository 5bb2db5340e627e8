"""Deterministic seed derivation for independent sub-streams.

Every random draw in the package is keyed by a role string plus integer
context through :func:`derive_seed`, so any single realization can be
regenerated in isolation (also from outside Python: the scheme is plain
SHA-256 over the ``"/"``-joined parts, first 8 bytes big-endian).
"""

import hashlib


def derive_seed(*parts) -> int:
    """Map (role, seed, index, ...) to a stable 64-bit integer seed."""
    text = "/".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")
