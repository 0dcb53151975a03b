"""Deterministic seed derivation for nested randomized steps.

Python's builtin ``hash`` is salted per process, so every derived seed goes
through blake2 instead; replicate runs stay reproducible across processes.
"""

import hashlib


def stable_seed(*parts) -> int:
    """Collapse ``parts`` into a 63-bit seed, stable across runs and machines."""
    text = "\x1f".join(str(p) for p in parts)
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big") >> 1
