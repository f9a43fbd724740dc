"""Pre-sampled randomness tables, replayable and order-independent.

Entry (var, i) is derived by a keyed hash of (seed, var, i) and mapped through
the variable's inverse CDF, so every table read is a pure function of
(seed, var, i): reading order, laziness, and concurrency cannot change values.
All downstream artifacts (logs, trees, query answers) are therefore pure
functions of (instance, seed).
"""

from __future__ import annotations

import hashlib
import math
import struct

from .errors import ValidationError
from .instance import LLLInstance

_U64 = 2 ** 64


def _cumulative(distribution: tuple[float, ...]) -> list[float]:
    cum = []
    acc = 0.0
    for p in distribution:
        acc += p
        cum.append(acc)
    cum[-1] = 1.0  # guard against float drift at the top end
    return cum


class RandomnessTable:
    """Per-variable value sequences x_0, x_1, ... for one (instance, seed)."""

    def __init__(self, instance: LLLInstance, seed: int, depth_hint: int):
        if depth_hint < 1:
            raise ValidationError("depth_hint must be >= 1")
        self.seed = seed & (_U64 - 1)
        self.depth_hint = depth_hint
        self._key = self.seed.to_bytes(8, "little")
        self._cum = [_cumulative(v.distribution) for v in instance.variables]
        # idempotent per-variable caches; growth never affects values
        self._cache: list[list[int]] = [[] for _ in instance.variables]

    def value(self, var_id: int, index: int) -> int:
        if not (0 <= var_id < len(self._cum)):
            raise ValidationError(f"unknown variable {var_id}")
        if index < 0:
            raise ValidationError("index must be >= 0")
        cache = self._cache[var_id]
        if index >= len(cache):
            cum = self._cum[var_id]
            for i in range(len(cache), index + 1):
                cache.append(self._draw(var_id, i, cum))
        return cache[index]

    def _draw(self, var_id: int, index: int, cum: list[float]) -> int:
        digest = hashlib.blake2b(struct.pack("<QQ", var_id, index),
                                 key=self._key, digest_size=8).digest()
        u = int.from_bytes(digest, "little") / _U64
        for val, edge in enumerate(cum):
            if u < edge:
                return val
        return len(cum) - 1

    def column(self, var_id: int, length: int) -> list[int]:
        """First `length` values of one variable's sequence."""
        self.value(var_id, length - 1)
        return self._cache[var_id][:length]


def default_depth_hint(instance: LLLInstance) -> int:
    return math.ceil(10 * instance.log1p_n()) + 8


def sample_table(instance: LLLInstance, seed: int,
                 depth_hint: int | None = None) -> RandomnessTable:
    """Build the table; values beyond depth_hint grow lazily on demand."""
    if depth_hint is None:
        depth_hint = default_depth_hint(instance)
    return RandomnessTable(instance, seed, depth_hint)


def value(table: RandomnessTable, var_id: int, index: int) -> int:
    """x_index for the variable; pure in (seed, var_id, index)."""
    return table.value(var_id, index)
