"""Running-key generation and the key-index to ciphering-angle map.

The short shared seed is expanded by a Fibonacci LFSR. This is a
deterministic stand-in for a stream cipher and is not cryptographically
strong.

Register convention: bit 0 is the output bit. Tap position ``t`` (1-based,
``1 <= t <= L``) reads register bit ``L - t``, so tap ``L`` is the output bit
and the feedback polynomial for taps ``{16, 14, 13, 11}`` is
``x^16 + x^14 + x^13 + x^11 + 1``. The feedback bit is shifted in at bit
``L - 1``.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .errors import InvalidStateError, UnsupportedConfigurationError

DEFAULT_LENGTH = 16
DEFAULT_TAPS = (16, 14, 13, 11)
DEFAULT_SEED = 0xACE1


@dataclass(frozen=True)
class LfsrState:
    register: int
    length: int = DEFAULT_LENGTH
    taps: tuple = DEFAULT_TAPS

    def __post_init__(self):
        if not 1 <= self.length <= 64:
            raise ValueError(f"register length must be in [1, 64], got {self.length}")
        taps = tuple(sorted({int(t) for t in self.taps}, reverse=True))
        if not taps:
            raise ValueError("tap set must be non-empty")
        if taps[0] != self.length or taps[-1] < 1:
            raise ValueError(
                f"taps must lie in [1, {self.length}] and include {self.length}, got {self.taps}"
            )
        object.__setattr__(self, "taps", taps)
        if not 0 <= self.register < (1 << self.length):
            raise ValueError(f"register {self.register:#x} does not fit in {self.length} bits")
        if self.register == 0:
            raise InvalidStateError("LFSR register must not be all-zero")

    @property
    def tap_mask(self):
        mask = 0
        for t in self.taps:
            mask |= 1 << (self.length - t)
        return mask

    @classmethod
    def from_hex(cls, seed_hex, taps=DEFAULT_TAPS, length=None):
        """Build from a hex seed string; ``length`` defaults to the largest tap."""
        taps = tuple(int(t) for t in taps)
        if not taps:
            raise ValueError("tap set must be non-empty")
        length = max(taps) if length is None else length
        try:
            register = int(seed_hex, 16)
        except (TypeError, ValueError):
            raise ValueError(f"seed {seed_hex!r} is not a hex string") from None
        return cls(register, length, taps)


def lfsr_next(state):
    """Advance one step; returns ``(output_bit, next_state)``."""
    if state.register == 0:
        raise InvalidStateError("LFSR register must not be all-zero")
    bit = state.register & 1
    fb = bin(state.register & state.tap_mask).count("1") & 1
    register = (state.register >> 1) | (fb << (state.length - 1))
    return bit, LfsrState(register, state.length, state.taps)


def lfsr_bits(state, count):
    """``count`` output bits as a uint8 array, plus the advanced state."""
    if count < 0:
        raise ValueError("count must be >= 0")
    bits, register = _backend.kernels().lfsr_bits(
        state.register, state.length, state.tap_mask, count
    )
    return bits, LfsrState(int(register), state.length, state.taps)


def bits_per_index(m):
    if m < 1 or m & (m - 1):
        raise UnsupportedConfigurationError(
            f"M must be a power of two for key expansion, got {m}"
        )
    return m.bit_length() - 1


def expand_key(seed, count, m):
    """``count`` running-key indices in [0, m), log2(m) LFSR bits each, big-endian."""
    if count < 1:
        raise ValueError(f"count must be a positive integer, got {count}")
    return KeyStream(seed, m).take(count)


@dataclass
class KeyStream:
    """Stateful wrapper around the LFSR that hands out key indices."""

    lfsr: LfsrState
    m: int
    emitted: int = field(default=0)

    def __post_init__(self):
        self._width = bits_per_index(self.m)

    def take(self, count):
        if self._width == 0:
            self.emitted += count
            return np.zeros(count, dtype=np.int64)
        bits, self.lfsr = lfsr_bits(self.lfsr, count * self._width)
        weights = 1 << np.arange(self._width - 1, -1, -1, dtype=np.int64)
        self.emitted += count
        return bits.reshape(count, self._width).astype(np.int64) @ weights


def _check_index(k, m):
    if m < 1:
        raise ValueError(f"M must be >= 1, got {m}")
    if not 0 <= k < m:
        raise ValueError(f"key index {k} outside [0, {m})")


def angle_for(k, m):
    """Ciphering angle of key index k: k*pi/M, shifted by pi for odd k."""
    _check_index(k, m)
    # exact integer form of pi * (k/M + (1 - (-1)^k) / 2), reduced mod 2*pi
    j = (k + (k % 2) * m) % (2 * m)
    return j * math.pi / m


def total_angle(k, b, m):
    """Angle of the state carrying bit ``b`` under key index ``k``, in [0, 2*pi)."""
    _check_index(k, m)
    if b not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {b!r}")
    return constellation_index(k, b, m) * math.pi / m


def constellation_index(k, b, m):
    """Integer j with total_angle(k, b, m) == j * pi / m."""
    return (k + (k % 2) * m + b * m) % (2 * m)


def constellation_indices(k, b, m):
    """Vectorized :func:`constellation_index` for arrays of keys and bits."""
    k = np.asarray(k, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    return (k + (k % 2) * m + b * m) % (2 * m)
