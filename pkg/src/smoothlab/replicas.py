"""Seed derivation and order-fixed parallel evaluation of replica blocks."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

_MASK = (1 << 64) - 1

# Replicas are always grouped in blocks of this size (by index), so the
# floating-point work per replica does not depend on the worker count.
BLOCK = 16

T = TypeVar("T")


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_seed(seed: int, index: int) -> int:
    """Seed of replica ``index``: ``seed XOR splitmix64(index)`` (64-bit)."""
    return (int(seed) & _MASK) ^ splitmix64(index)


def blocks(n: int, size: int = BLOCK) -> list[range]:
    return [range(i, min(i + size, n)) for i in range(0, n, size)]


def map_ordered(func: Callable[[T], object], items: Sequence[T], workers: int = 1) -> list:
    """``[func(x) for x in items]``, optionally on a thread pool; output order is input order."""
    if workers is None or workers <= 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))
