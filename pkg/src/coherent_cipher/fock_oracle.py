"""Brute-force check of the Gram-subspace engine in a truncated photon-number basis.

Every cipher state is expanded per mode in the number basis up to a cutoff,
the bit-conditional density matrices are assembled densely, and the Helstrom
error comes from a full Hermitian eigendecomposition. The method shares
nothing with :mod:`coherent_cipher.helstrom` except the constellation layout.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, pdtrc

from .errors import OracleDimensionError
from .helstrom import DiscriminationResult, Priors, constellation
from .states import EncodingKind

MAX_DIMENSION = 4096
DEFAULT_TAIL_TOL = 1e-12


@dataclass(frozen=True)
class FockVector:
    coeffs: np.ndarray
    cutoff: int

    @property
    def norm2(self):
        return float(np.vdot(self.coeffs, self.coeffs).real)


@dataclass(frozen=True)
class TruncatedDensity:
    matrix: np.ndarray
    cutoff: int


@dataclass(frozen=True)
class OracleResult(DiscriminationResult):
    cutoff: int = 0
    dimension: int = 0
    tail_tol: float = 0.0
    # worst per-state squared-norm deficit from truncation
    norm_deficit: float = 0.0
    # first-order bound on |pe(truncated) - pe(exact)|
    truncation_bound: float = 0.0


def fock_coeffs(beta, cutoff):
    """Number-basis amplitudes exp(-|b|^2/2) b^n / sqrt(n!) for n = 0..cutoff."""
    if cutoff < 0:
        raise ValueError(f"cutoff must be >= 0, got {cutoff}")
    beta = complex(beta)
    n = np.arange(cutoff + 1)
    if beta == 0:
        c = np.zeros(cutoff + 1, dtype=np.complex128)
        c[0] = 1.0
        return FockVector(c, cutoff)
    r = abs(beta)
    phase = np.exp(1j * math.atan2(beta.imag, beta.real) * n)
    logmag = -0.5 * r * r + n * math.log(r) - 0.5 * gammaln(n + 1)
    return FockVector(np.exp(logmag) * phase, cutoff)


def poisson_tail(mean, cutoff):
    """P(N > cutoff) for N ~ Poisson(mean)."""
    if mean == 0:
        return 0.0
    return float(pdtrc(cutoff, mean))


def choose_cutoff(nbar_per_mode, tail_tol=DEFAULT_TAIL_TOL):
    """Smallest cutoff whose Poisson tail beyond it is below ``tail_tol``."""
    if not 0.0 < tail_tol < 1.0:
        raise ValueError(f"tail_tol must lie in (0, 1), got {tail_tol}")
    if nbar_per_mode < 0:
        raise ValueError("mean photon number must be >= 0")
    if nbar_per_mode == 0:
        return 0
    cutoff = 0
    while poisson_tail(nbar_per_mode, cutoff) >= tail_tol:
        cutoff += 1
    return cutoff


def mode_mean_bound(nbar, encoding):
    """Largest per-mode mean photon number any cipher state can have."""
    if EncodingKind.parse(encoding) is EncodingKind.PHASE:
        return nbar / 2.0
    return nbar


def required_dimension(nbar, encoding, tail_tol=DEFAULT_TAIL_TOL):
    """Per-mode cutoff and two-mode dimension; the budget is split between the modes."""
    cutoff = choose_cutoff(mode_mean_bound(nbar, encoding), tail_tol / 2.0)
    return cutoff, (cutoff + 1) ** 2


def two_mode_vector(state, cutoff):
    return np.kron(fock_coeffs(state.beta1, cutoff).coeffs, fock_coeffs(state.beta2, cutoff).coeffs)


def density_pair(m, nbar, encoding, cutoff):
    c = constellation(m, nbar, encoding)
    dim = (cutoff + 1) ** 2
    rho = [np.zeros((dim, dim), dtype=np.complex128) for _ in range(2)]
    deficits = []
    for state, bit, w in zip(c.states(), c.bits, c.weights):
        v = two_mode_vector(state, cutoff)
        deficits.append(1.0 - float(np.vdot(v, v).real))
        rho[bit] += w * np.outer(v, v.conj())
    return TruncatedDensity(rho[0], cutoff), TruncatedDensity(rho[1], cutoff), max(deficits)


def oracle_min_error(m, nbar, encoding=EncodingKind.PHASE, priors=Priors(), tail_tol=DEFAULT_TAIL_TOL):
    """Helstrom error of the eavesdropper computed in the truncated Fock space."""
    if m < 1:
        raise ValueError(f"M must be >= 1, got {m}")
    if nbar < 0:
        raise ValueError("nbar must be >= 0")
    cutoff, dim = required_dimension(nbar, encoding, tail_tol)
    if dim > MAX_DIMENSION:
        raise OracleDimensionError(dim, MAX_DIMENSION)
    r0, r1, deficit = density_pair(m, nbar, encoding, cutoff)
    diff = priors.p1 * r1.matrix - priors.p0 * r0.matrix
    spectrum = np.linalg.eigvalsh(0.5 * (diff + diff.conj().T))[::-1]
    trace_norm = float(np.abs(spectrum).sum())
    pe = min(max(0.5 * (1.0 - trace_norm), 0.0), min(priors.p0, priors.p1))
    # each truncated projector is within 2*sqrt(deficit) of the exact one in trace norm
    bound = 2.0 * math.sqrt(max(deficit, 0.0))
    return OracleResult(
        pe,
        trace_norm,
        dim,
        spectrum,
        cutoff=cutoff,
        dimension=dim,
        tail_tol=tail_tol,
        norm_deficit=deficit,
        truncation_bound=bound,
    )
