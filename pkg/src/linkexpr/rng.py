"""Deterministic random streams for reproducible generation.

The generator is splitmix64 (Steele, Lea & Flood's SplitMix finalizer with a
golden-ratio Weyl increment): 64 bits of state, trivial to reimplement in any
language, so a dataset is reproducible from its seed across platforms and
implementations.

Sub-stream derivation rule (documented contract): the child seed for a stage
labelled ``s`` is ``mix64(seed XOR fnv1a64(s))``, where ``fnv1a64`` is the
64-bit FNV-1a hash of the UTF-8 label and ``mix64`` is the splitmix64 output
scrambler. Labels are plain strings such as ``"graph:17"`` or ``"split"``.

Bounded integers are drawn by modulo reduction of the 64-bit output; the bias
is negligible for the ranges used here (< 2^-57) and, more importantly, the
rule is simple enough to restate exactly.
"""

from __future__ import annotations

from typing import List, MutableSequence, Tuple

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def fnv1a64(text: str) -> int:
    """64-bit FNV-1a hash of a UTF-8 string."""
    h = _FNV_OFFSET
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


def mix64(z: int) -> int:
    """splitmix64 output scrambler (finalizer only, no state advance)."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, label: str) -> int:
    """Child seed for a named sub-stream; see module docstring for the rule."""
    return mix64((seed & _MASK64) ^ fnv1a64(label))


class SplitMix64:
    """splitmix64 stream with convenience draws.

    Instances are cheap; derive independent sub-streams with :meth:`spawn`
    rather than sharing one stream across stages.
    """

    __slots__ = ("_seed", "_state")

    def __init__(self, seed: int):
        self._seed = seed & _MASK64
        self._state = self._seed

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return mix64(self._state)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi], both ends inclusive."""
        if hi < lo:
            raise ValueError(f"empty range [{lo}, {hi}]")
        return lo + self.next_u64() % (hi - lo + 1)

    def shuffle(self, items: MutableSequence) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randint(0, i)
            items[i], items[j] = items[j], items[i]

    def permutation(self, n: int) -> Tuple[int, ...]:
        order: List[int] = list(range(n))
        self.shuffle(order)
        return tuple(order)

    def spawn(self, label: str) -> "SplitMix64":
        """Sub-stream derived from this stream's *initial* seed and a label.

        Derivation ignores how much of the parent stream has been consumed,
        so spawn order cannot silently change child streams.
        """
        return SplitMix64(derive_seed(self._seed, label))
