"""Deterministic named random substreams.

One run seed fans out into independent generators keyed by string/int scopes,
so consumers (bootstrap member 3, synthetic day 17, ...) draw from streams
that do not shift when an unrelated consumer changes its draw count. Scope
strings are hashed with blake2b, not Python's salted hash().
"""

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def _scope_key(item) -> int:
    if isinstance(item, (int, np.integer)):
        return int(item) & _MASK64
    digest = hashlib.blake2b(str(item).encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def substream(seed: int, *scope) -> np.random.Generator:
    """Generator for the substream named by `scope` under `seed`.

    Args:
        seed: run-level seed.
        scope: any mix of strings and ints naming the consumer.

    Returns:
        numpy Generator (PCG64) whose draws depend only on (seed, scope).
    """
    entropy = [int(seed) & _MASK64] + [_scope_key(s) for s in scope]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def substream_seed(seed: int, *scope) -> int:
    """Collapse a named substream to a single int seed for APIs taking one."""
    entropy = [int(seed) & _MASK64] + [_scope_key(s) for s in scope]
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])
