"""Seeded random source and the generation helper draws.

All randomness flows through :class:`SeededRng`, a buffered wrapper over
numpy's Philox4x64 counter-based bit generator. Only the raw 64-bit output of
the bit generator is used; the mapping to floats, gaussians and bounded
integers is done here so that streams stay identical across numpy versions
and platforms.

Sub-streams are derived from ``(seed, label)`` so that each dimension, fact
table and workload gets its own independent stream and the generated data
does not depend on the order in which components are built.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

_TWO_POW_53 = float(1 << 53)
_ALPHABET = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789"

# bounded retries before a skewed key draw falls back to clamping
KEY_RETRIES = 32

STRING_LENGTH = 20
DEFAULT_REFERENTIAL_SIZE = 1000
DEFAULT_MEASURE_RANGE = (0.0, 1000.0)


class RandomConfigError(ValueError):
    pass


def parse_seed(text: str | int) -> int:
    """Accept a decimal or ``0x``-prefixed hex seed."""
    value = int(text, 0) if isinstance(text, str) else int(text)
    if not 0 <= value < 1 << 64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {text!r}")
    return value


def _label_key(label: str) -> int:
    digest = hashlib.blake2b(label.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


class SeededRng:
    """Deterministic random stream keyed by ``(seed, label)``.

    Philox key = (seed, blake2b-64(label)); counter starts at zero. Raw words
    are fetched in blocks and consumed strictly in order, so block size never
    affects the produced sequence.
    """

    _BLOCK = 4096

    def __init__(self, seed: int, label: str = ""):
        self.seed = parse_seed(seed)
        self.label = label
        key = np.array([self.seed, _label_key(label)], dtype=np.uint64)
        self._bitgen = np.random.Philox(key=key)
        self._buf = np.empty(0, dtype=np.uint64)
        self._pos = 0

    def substream(self, label: str) -> "SeededRng":
        """Independent stream for a named purpose (pure function of seed and label)."""
        full = f"{self.label}/{label}" if self.label else label
        return SeededRng(self.seed, full)

    def raw(self, n: int) -> np.ndarray:
        """Next ``n`` raw 64-bit words."""
        out = np.empty(n, dtype=np.uint64)
        filled = 0
        while filled < n:
            if self._pos >= len(self._buf):
                self._buf = self._bitgen.random_raw(max(self._BLOCK, n - filled)).astype(np.uint64)
                self._pos = 0
            take = min(n - filled, len(self._buf) - self._pos)
            out[filled:filled + take] = self._buf[self._pos:self._pos + take]
            self._pos += take
            filled += take
        return out

    def next_u64(self) -> int:
        if self._pos >= len(self._buf):
            self._buf = self._bitgen.random_raw(self._BLOCK).astype(np.uint64)
            self._pos = 0
        value = int(self._buf[self._pos])
        self._pos += 1
        return value

    def random(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits of one word."""
        return (self.next_u64() >> 11) / _TWO_POW_53

    def random_array(self, n: int) -> np.ndarray:
        return (self.raw(n) >> np.uint64(11)).astype(np.float64) / _TWO_POW_53

    def below(self, n: int) -> int:
        """Integer in [0, n) by 64-bit multiply-shift (bias < n / 2**64)."""
        if n <= 0:
            raise ValueError("upper bound must be positive")
        if n >= 1 << 64:
            # wide ranges: concatenate words until the product has enough headroom
            words = (n.bit_length() + 63) // 64 + 1
            acc = 0
            for _ in range(words):
                acc = (acc << 64) | self.next_u64()
            return (acc * n) >> (64 * words)
        return (self.next_u64() * n) >> 64

    def below_array(self, n: int, size: int) -> np.ndarray:
        """Vectorised :meth:`below` for ``n < 2**32``."""
        if not 0 < n < 1 << 32:
            raise ValueError("vectorised bound must be in (0, 2**32)")
        hi = self.raw(size) >> np.uint64(32)
        return ((hi * np.uint64(n)) >> np.uint64(32)).astype(np.int64)

    def normal(self, mean: float = 0.0, std: float = 1.0) -> float:
        """Box-Muller with two uniforms per draw; the sine branch is discarded."""
        u1 = self.random()
        u2 = self.random()
        z = math.sqrt(-2.0 * math.log(1.0 - u1)) * math.cos(2.0 * math.pi * u2)
        return mean + std * z

    def bernoulli(self, p: float) -> bool:
        return self.random() < p


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def gaussian_int(rng: SeededRng, mean: float, spread: float, minimum: int) -> int:
    """round(N(mean, spread * mean)), clamped to ``>= minimum``.

    One gaussian is always consumed, even with ``spread == 0``, so the stream
    position does not depend on the spread.
    """
    value = rng.normal(mean, spread * abs(mean))
    return max(minimum, round_half_up(value))


def gaussian_real(rng: SeededRng, mean: float, spread: float, lo: float, hi: float = math.inf) -> float:
    value = rng.normal(mean, spread * abs(mean))
    return min(hi, max(lo, value))


def skewed_key(rng: SeededRng, cardinality: int) -> int:
    """Key in [1, C] from N(C/2, C/6), redrawn up to KEY_RETRIES times then clamped."""
    if cardinality < 1:
        raise RandomConfigError("cannot draw a key from an empty level")
    if cardinality == 1:
        return 1
    centre = cardinality / 2.0
    std = cardinality / 6.0
    value = 0
    for _ in range(KEY_RETRIES):
        value = round_half_up(rng.normal(centre, std))
        if 1 <= value <= cardinality:
            return value
    return min(cardinality, max(1, value))


def skewed_index(rng: SeededRng, n: int) -> int:
    """0-based index into a list of ``n`` items with the same gaussian skew as keys."""
    return skewed_key(rng, n) - 1


def skewed_choice(rng: SeededRng, items):
    if not items:
        raise RandomConfigError("cannot choose from an empty sequence")
    return items[skewed_index(rng, len(items))]


def random_key(rng: SeededRng, level) -> int:
    """Skewed foreign-key value into a hierarchy level (PKs are 1..C)."""
    if level.cardinality == 0:
        raise RandomConfigError(f"level {level.table_name} has no tuples; generate it before referencing it")
    return skewed_key(rng, level.cardinality)


def uniform_real(rng: SeededRng, lo: float, hi: float) -> float:
    if not lo < hi:
        raise ValueError(f"empty range [{lo}, {hi})")
    return lo + (hi - lo) * rng.random()


def quantize_measure(u: np.ndarray | float, lo: float, hi: float):
    """Map uniforms in [0,1) to cent-quantised values in [lo, hi) as float32.

    Values carry two decimals so that their text form is exact and short.
    """
    cents = np.floor(np.asarray(u) * (hi - lo) * 100.0) / 100.0 + lo
    return np.minimum(cents, np.nextafter(hi, lo)).astype(np.float32)


def random_measure(rng: SeededRng, measure_range: tuple[float, float] = DEFAULT_MEASURE_RANGE) -> float:
    lo, hi = measure_range
    if not lo < hi:
        raise ValueError(f"empty range [{lo}, {hi})")
    return float(quantize_measure(rng.random(), lo, hi))


def random_measures(rng: SeededRng, n: int, measure_range: tuple[float, float] = DEFAULT_MEASURE_RANGE) -> np.ndarray:
    lo, hi = measure_range
    if not lo < hi:
        raise ValueError(f"empty range [{lo}, {hi})")
    return quantize_measure(rng.random_array(n), lo, hi)


@dataclass(frozen=True)
class StringReferential:
    """Precomputed pool of distinct 20-character strings over [A-Z0-9]."""

    entries: tuple[str, ...]

    @property
    def size(self) -> int:
        return len(self.entries)

    @classmethod
    def build(cls, seed: int, size: int = DEFAULT_REFERENTIAL_SIZE) -> "StringReferential":
        if size < 1:
            raise RandomConfigError("referential size must be at least 1")
        rng = SeededRng(seed, "referential")
        seen: set[str] = set()
        entries = []
        while len(entries) < size:
            idx = rng.below_array(len(_ALPHABET), STRING_LENGTH)
            s = "".join(_ALPHABET[i] for i in idx)
            if s not in seen:
                seen.add(s)
                entries.append(s)
        return cls(tuple(entries))


def random_string(rng: SeededRng, referential: StringReferential, attribute_name: str) -> str:
    if referential.size == 0:
        raise RandomConfigError("string referential is empty")
    return f"{attribute_name}_{referential.entries[rng.below(referential.size)]}"


def random_strings(rng: SeededRng, referential: StringReferential, attribute_name: str, n: int) -> list[str]:
    if referential.size == 0:
        raise RandomConfigError("string referential is empty")
    idx = rng.below_array(referential.size, n)
    prefix = attribute_name + "_"
    return [prefix + referential.entries[i] for i in idx]
