"""Eavesdropper's minimum bit-error probability for the keyed M-ary cipher.

The 2M cipher states span a subspace of dimension at most 2M, and every
inner product between them is known in closed form. The bit-conditional
density operators are therefore assembled in an orthonormal basis of that
span (built from the Gram matrix), and the Helstrom error follows from the
eigenvalues of ``p1*rho1 - p0*rho0``. With real carrier amplitude all
matrices involved are real symmetric.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _backend
from .keystream import constellation_index
from .states import EncodingKind, amplitudes, inner_product, make_state

DEFAULT_RANK_TOL = 1e-12
DEFAULT_JACOBI_TOL = 1e-12
SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class Priors:
    p0: float = 0.5
    p1: float = 0.5

    def __post_init__(self):
        if not (0.0 <= self.p0 <= 1.0 and 0.0 <= self.p1 <= 1.0):
            raise ValueError(f"priors must lie in [0, 1], got ({self.p0}, {self.p1})")
        if abs(self.p0 + self.p1 - 1.0) > 1e-12:
            raise ValueError(f"priors must sum to 1, got {self.p0 + self.p1}")

    @classmethod
    def from_p0(cls, p0):
        return cls(p0, 1.0 - p0)


@dataclass(frozen=True)
class Constellation:
    """The 2M labelled cipher states, indexed by j with angle j*pi/M."""

    thetas: np.ndarray
    bits: np.ndarray
    weights: np.ndarray
    nbar: float
    encoding: EncodingKind
    m: int

    @property
    def points(self):
        return list(zip(self.thetas.tolist(), self.bits.tolist(), self.weights.tolist()))

    def states(self):
        return [make_state(t, self.nbar, self.encoding) for t in self.thetas]

    def amplitudes(self):
        return amplitudes(self.thetas, self.nbar, self.encoding)

    def __len__(self):
        return len(self.thetas)


@dataclass(frozen=True)
class SubspaceBasis:
    """Columns of ``coeffs`` (r x 2M) are the cipher states in an orthonormal basis."""

    coeffs: np.ndarray
    rank: int
    tol: float
    eigenvalues: np.ndarray


@dataclass(frozen=True)
class DiscriminationResult:
    pe: float
    trace_norm: float
    rank: int
    spectrum: np.ndarray


class CurveRow(NamedTuple):
    m: int
    nbar: float
    pe_eve: float
    pe_bob: float
    rank: int


def constellation(m, nbar, encoding=EncodingKind.PHASE, key_weights=None):
    """All (angle, bit, weight) points for M key values.

    ``key_weights`` is the distribution of the running key over [0, M); uniform
    by default. Point j sits at angle j*pi/M.
    """
    if m < 1:
        raise ValueError(f"M must be >= 1, got {m}")
    if not math.isfinite(nbar) or nbar < 0:
        raise ValueError(f"nbar must be >= 0, got {nbar}")
    encoding = EncodingKind.parse(encoding)
    if key_weights is None:
        kw = np.full(m, 1.0 / m)
    else:
        kw = np.asarray(key_weights, dtype=np.float64)
        if kw.shape != (m,) or np.any(kw < 0) or abs(kw.sum() - 1.0) > 1e-12:
            raise ValueError("key_weights must be M nonnegative values summing to 1")
    bits = np.empty(2 * m, dtype=np.int64)
    weights = np.empty(2 * m)
    for k in range(m):
        for b in (0, 1):
            j = constellation_index(k, b, m)
            bits[j] = b
            weights[j] = kw[k]
    thetas = np.arange(2 * m) * (math.pi / m)
    return Constellation(thetas, bits, weights, float(nbar), encoding, m)


def gram(c, method="closed_form"):
    """Real Gram matrix of the cipher states.

    ``closed_form`` uses the angle-difference overlap; ``amplitudes`` evaluates
    the coherent-state inner product from the actual mode amplitudes.
    """
    if method == "closed_form":
        d = c.thetas[:, None] - c.thetas[None, :]
        g = np.exp(c.nbar * (np.cos(d / 2.0) - 1.0))
    elif method == "amplitudes":
        b1, b2 = c.amplitudes()
        expo = (
            -0.5 * np.abs(b1)[:, None] ** 2
            - 0.5 * np.abs(b1)[None, :] ** 2
            + np.conj(b1)[:, None] * b1[None, :]
            - 0.5 * np.abs(b2)[:, None] ** 2
            - 0.5 * np.abs(b2)[None, :] ** 2
            + np.conj(b2)[:, None] * b2[None, :]
        )
        gc = np.exp(expo)
        if np.abs(gc.imag).max(initial=0.0) > 1e-12:
            raise ValueError("cipher-state overlaps are not real")
        g = gc.real
    elif method == "pairwise":
        states = c.states()
        n = len(states)
        g = np.empty((n, n))
        for i in range(n):
            for j in range(n):
                g[i, j] = inner_product(states[i], states[j]).real
    else:
        raise ValueError(f"unknown Gram method {method!r}")
    np.fill_diagonal(g, 1.0)
    return 0.5 * (g + g.T)


def _check_symmetric(a, what):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{what} must be square, got shape {a.shape}")
    scale = max(1.0, float(np.abs(a).max(initial=0.0)))
    if np.abs(a - a.T).max(initial=0.0) > SYMMETRY_TOL * scale:
        raise ValueError(f"{what} is not symmetric")
    return a


def symmetric_eigen(a, tol=DEFAULT_JACOBI_TOL, vectors=True, max_sweeps=60):
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Returns ``(w, q)`` with ``a = q @ diag(w) @ q.T``; eigenvalues descending.
    ``q`` is None when ``vectors`` is false.
    """
    a = _check_symmetric(a, "matrix")
    w, q, _ = _backend.kernels().jacobi_eigh(a, tol, max_sweeps, vectors)
    order = np.argsort(-w, kind="stable")
    w = w[order]
    if q is not None:
        q = np.ascontiguousarray(q[:, order])
    return w, q


def embed(g, rank_tol=DEFAULT_RANK_TOL):
    """Real factor B (r x n) with ``B.T @ B == g`` on the numerically nonzero spectrum.

    ``g`` is first compressed by a pivoted Cholesky factorisation whose residual
    trace stays two orders of magnitude below the eigenvalue cutoff, then the
    small core is diagonalised by :func:`symmetric_eigen`. Eigenvalues below
    ``rank_tol * max`` are dropped.
    """
    g = _check_symmetric(g, "Gram matrix")
    n = g.shape[0]
    if n == 0:
        return SubspaceBasis(np.zeros((0, 0)), 0, rank_tol, np.zeros(0))
    # lower bound on the largest eigenvalue (Rayleigh quotient of the ones vector)
    lam_lb = max(float(np.diagonal(g).max()), float(g.sum()) / n)
    floor = 4.0 * n * np.finfo(float).eps * float(np.diagonal(g).max())
    factor = _backend.kernels().pivoted_cholesky(g, 1e-2 * rank_tol * lam_lb, floor)
    core = factor @ factor.T
    w, v = symmetric_eigen(0.5 * (core + core.T))
    if w.size == 0 or w[0] <= 0:
        return SubspaceBasis(np.zeros((0, n)), 0, rank_tol, w)
    keep = w >= rank_tol * w[0]
    coeffs = v[:, keep].T @ factor
    return SubspaceBasis(np.ascontiguousarray(coeffs), int(keep.sum()), rank_tol, w)


def density_pair(basis, c):
    """Bit-conditional mixtures rho0, rho1 expressed in the subspace basis."""
    b = basis.coeffs
    if b.shape[1] != len(c):
        raise ValueError(
            f"basis has {b.shape[1]} columns but the constellation has {len(c)} points"
        )
    out = []
    for bit in (0, 1):
        sel = c.bits == bit
        cols = b[:, sel]
        r = (cols * c.weights[sel]) @ cols.T
        out.append(0.5 * (r + r.T))
    return out[0], out[1]


def min_error(r0, r1, priors=Priors(), tol=DEFAULT_JACOBI_TOL):
    """Helstrom minimum error for discriminating r0 (prior p0) from r1 (prior p1)."""
    if not isinstance(priors, Priors):
        raise ValueError(f"priors must be a Priors instance, got {priors!r}")
    r0 = _check_symmetric(r0, "rho0")
    r1 = _check_symmetric(r1, "rho1")
    if r0.shape != r1.shape:
        raise ValueError(f"shape mismatch {r0.shape} vs {r1.shape}")
    diff = priors.p1 * r1 - priors.p0 * r0
    spectrum, _ = symmetric_eigen(diff, tol=tol, vectors=False)
    trace_norm = float(np.abs(spectrum).sum())
    # roundoff can push the norm a few ulps outside [|p1 - p0|, 1]
    pe = min(max(0.5 * (1.0 - trace_norm), 0.0), min(priors.p0, priors.p1))
    return DiscriminationResult(pe, trace_norm, r0.shape[0], spectrum)


def eve_error(
    m,
    nbar,
    encoding=EncodingKind.PHASE,
    priors=Priors(),
    rank_tol=DEFAULT_RANK_TOL,
    gram_method="closed_form",
):
    """Optimal per-symbol bit error of an eavesdropper who does not know the key."""
    c = constellation(m, nbar, encoding)
    basis = embed(gram(c, gram_method), rank_tol)
    r0, r1 = density_pair(basis, c)
    return min_error(r0, r1, priors)


def bob_error(nbar):
    """Helstrom error of the key holder: two antipodal states with overlap exp(-nbar).

    Evaluated literally, so it is exactly 0 once exp(-2*nbar) is below the
    double-precision resolution of 1.
    """
    if not math.isfinite(nbar) or nbar < 0:
        raise ValueError(f"nbar must be a finite value >= 0, got {nbar}")
    return 0.5 * (1.0 - math.sqrt(1.0 - math.exp(-2.0 * nbar)))


def pe_curve(
    m_values,
    nbar_values,
    encoding=EncodingKind.PHASE,
    priors=Priors(),
    rank_tol=DEFAULT_RANK_TOL,
    workers=1,
):
    """Eve's and Bob's error probabilities on an (M, nbar) grid, sorted by (nbar, M)."""
    m_values = sorted({int(m) for m in m_values})
    nbar_values = sorted({float(n) for n in nbar_values})
    if not m_values or not nbar_values:
        return []
    if m_values[0] < 1:
        raise ValueError("all M must be >= 1")
    grid = [(nb, m) for nb in nbar_values for m in m_values]

    def row(point):
        nb, m = point
        res = eve_error(m, nb, encoding, priors, rank_tol)
        return CurveRow(m, nb, res.pe, bob_error(nb), res.rank)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(row, grid))
    return [row(p) for p in grid]
