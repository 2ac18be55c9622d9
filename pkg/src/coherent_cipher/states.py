"""Two-mode coherent states for the phase and polarization encodings.

Amplitudes are plain Python ``complex`` values. The carrier amplitude is
taken real and nonnegative, ``alpha = sqrt(nbar)``, so every overlap between
cipher states is real.
"""
import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


class EncodingKind(enum.Enum):
    PHASE = "phase"
    POLARIZATION = "polarization"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(
                f"unknown encoding {value!r}; expected one of "
                + ", ".join(e.value for e in cls)
            ) from None


@dataclass(frozen=True)
class TwoModeState:
    """Product coherent state |beta1> (x) |beta2>."""

    beta1: complex
    beta2: complex

    @property
    def nbar(self):
        return abs(self.beta1) ** 2 + abs(self.beta2) ** 2

    def __iter__(self):
        yield self.beta1
        yield self.beta2


def _check_args(theta, nbar):
    if not math.isfinite(theta):
        raise ValueError(f"theta must be finite, got {theta!r}")
    if not math.isfinite(nbar) or nbar < 0:
        raise ValueError(f"nbar must be a finite value >= 0, got {nbar!r}")


def canonical_angle(theta):
    """Reduce an angle into [0, 2*pi)."""
    r = math.fmod(theta, TWO_PI)
    if r < 0:
        r += TWO_PI
    # fmod of a value just below a multiple of 2*pi can round up to 2*pi
    return 0.0 if r >= TWO_PI else r


def phase_state(theta, nbar):
    """Phase-encoded state: the two halves of the carrier get opposite half-angle phases."""
    _check_args(theta, nbar)
    a = math.sqrt(nbar / 2.0)
    return TwoModeState(cmath.exp(-0.5j * theta) * a, cmath.exp(0.5j * theta) * a)


def polarization_state(theta, nbar):
    """Carrier in mode 2 rotated by ``theta / 2`` on the polarization great circle."""
    _check_args(theta, nbar)
    a = math.sqrt(nbar)
    return TwoModeState(complex(a * math.sin(theta / 2.0)), complex(a * math.cos(theta / 2.0)))


def make_state(theta, nbar, encoding):
    if EncodingKind.parse(encoding) is EncodingKind.PHASE:
        return phase_state(theta, nbar)
    return polarization_state(theta, nbar)


def amplitudes(thetas, nbar, encoding):
    """Vectorized :func:`make_state`; returns the (beta1, beta2) arrays."""
    thetas = np.asarray(thetas, dtype=np.float64)
    if EncodingKind.parse(encoding) is EncodingKind.PHASE:
        a = math.sqrt(nbar / 2.0)
        return a * np.exp(-0.5j * thetas), a * np.exp(0.5j * thetas)
    a = math.sqrt(nbar)
    return (a * np.sin(thetas / 2.0)).astype(np.complex128), (a * np.cos(thetas / 2.0)).astype(
        np.complex128
    )


def _mode_overlap(b, g):
    return -0.5 * abs(b) ** 2 - 0.5 * abs(g) ** 2 + b.conjugate() * g


def inner_product(s, t):
    """<s|t> for two product coherent states."""
    for z in (s.beta1, s.beta2, t.beta1, t.beta2):
        if not cmath.isfinite(z):
            raise ValueError("state amplitudes must be finite")
    if s == t:
        return 1.0 + 0.0j
    return cmath.exp(_mode_overlap(s.beta1, t.beta1) + _mode_overlap(s.beta2, t.beta2))


def overlap_angle(dtheta, nbar):
    """|<psi(theta)|psi(theta + dtheta)>| for either encoding.

    ``dtheta`` is the raw difference of two canonical angles; no modular
    reduction is applied (the state family is 4*pi periodic).
    """
    _check_args(dtheta, nbar)
    return math.exp(nbar * (math.cos(dtheta / 2.0) - 1.0))
