# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops.

Each function has a numpy twin in :mod:`coherent_cipher._fallback` with the
same signature, the same algorithm and the same return layout.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log, sqrt

from coherent_cipher.errors import ConvergenceError

cnp.import_array()


cdef inline void _rotate_rows(double[:, ::1] X, Py_ssize_t[::1] P, Py_ssize_t[::1] Q,
                              double[::1] C, double[::1] S, char[::1] act,
                              Py_ssize_t half, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, k
    cdef double c, s, x, y
    cdef double* xp
    cdef double* xq
    for i in range(half):
        if not act[i]:
            continue
        c = C[i]
        s = S[i]
        xp = &X[P[i], 0]
        xq = &X[Q[i], 0]
        for k in range(n):
            x = xp[k]
            y = xq[k]
            xp[k] = c * x - s * y
            xq[k] = s * x + c * y


cdef inline void _transpose(double[:, ::1] X, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t bi = 0, bj, i, j, iend, jend, j0
    cdef Py_ssize_t blk = 16
    cdef double* base = &X[0, 0]
    cdef double tmp
    while bi < n:
        iend = bi + blk if bi + blk < n else n
        bj = bi
        while bj < n:
            jend = bj + blk if bj + blk < n else n
            for i in range(bi, iend):
                j0 = bj if bj > i + 1 else i + 1
                for j in range(j0, jend):
                    tmp = base[i * n + j]
                    base[i * n + j] = base[j * n + i]
                    base[j * n + i] = tmp
            bj += blk
        bi += blk


def jacobi_eigh(a_in, double tol=1e-12, int max_sweeps=60, bint vectors=True):
    """Cyclic Jacobi with round-robin (parallel) pair ordering.

    Returns ``(w, v, sweeps)`` with ``a = v @ diag(w) @ v.T``; ``v`` is None
    when ``vectors`` is false. Converged once the off-diagonal Frobenius norm
    drops below ``tol * ||a||_F``.
    """
    a_arr = np.asarray(a_in, dtype=np.float64)
    cdef Py_ssize_t n0 = a_arr.shape[0]
    if n0 == 0:
        return np.zeros(0), (np.zeros((0, 0)) if vectors else None), 0
    # odd sizes get a zero ghost row/column so every round pairs all indices
    cdef Py_ssize_t n = n0 + (n0 % 2)
    a = np.zeros((n, n), dtype=np.float64)
    a[:n0, :n0] = a_arr
    cdef double[:, ::1] A = a
    # eigenvectors are accumulated as rows of V^T so updates stay contiguous
    vt = np.eye(n, dtype=np.float64)
    cdef double[:, ::1] VT = vt

    cdef Py_ssize_t half = n // 2
    cdef Py_ssize_t[::1] ring = np.arange(n, dtype=np.intp)
    cdef Py_ssize_t[::1] P = np.empty(half, dtype=np.intp)
    cdef Py_ssize_t[::1] Q = np.empty(half, dtype=np.intp)
    cdef double[::1] C = np.empty(half, dtype=np.float64)
    cdef double[::1] S = np.empty(half, dtype=np.float64)
    cdef char[::1] act = np.zeros(half, dtype=np.int8)
    cdef Py_ssize_t i, j, p, q, rnd, last, nact
    cdef double apq, app, aqq, theta, t, c, s, off, norm2, thresh, skip
    cdef int sweep = 0

    with nogil:
        norm2 = 0.0
        for i in range(n):
            for j in range(n):
                norm2 = norm2 + A[i, j] * A[i, j]
        thresh = tol * tol * norm2
        # entries this small cannot keep the total off-norm above thresh
        skip = thresh / (<double>n * <double>n)
        while True:
            off = 0.0
            for i in range(n):
                for j in range(i + 1, n):
                    off = off + 2.0 * A[i, j] * A[i, j]
            if off <= thresh or sweep >= max_sweeps:
                break
            sweep += 1
            for rnd in range(n - 1):
                nact = 0
                for i in range(half):
                    p = ring[i]
                    q = ring[n - 1 - i]
                    if p > q:
                        p, q = q, p
                    P[i] = p
                    Q[i] = q
                    apq = A[p, q]
                    if apq * apq <= skip:
                        act[i] = 0
                        continue
                    act[i] = 1
                    nact += 1
                    theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                    if theta >= 0:
                        t = 1.0 / (theta + sqrt(theta * theta + 1.0))
                    else:
                        t = -1.0 / (-theta + sqrt(theta * theta + 1.0))
                    c = 1.0 / sqrt(t * t + 1.0)
                    C[i] = c
                    S[i] = t * c
                if nact > 0:
                    # J^T A J via rows, transpose, rows (the result is symmetric)
                    _rotate_rows(A, P, Q, C, S, act, half, n)
                    _transpose(A, n)
                    _rotate_rows(A, P, Q, C, S, act, half, n)
                    if vectors:
                        _rotate_rows(VT, P, Q, C, S, act, half, n)
                    for i in range(half):
                        if act[i]:
                            A[P[i], Q[i]] = 0.0
                            A[Q[i], P[i]] = 0.0
                # round-robin step: position 0 stays, the rest rotate
                last = ring[n - 1]
                for i in range(n - 1, 1, -1):
                    ring[i] = ring[i - 1]
                ring[1] = last

    if off > thresh:
        raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")
    w = np.diagonal(a)[:n0].copy()
    if vectors:
        return w, np.ascontiguousarray(vt[:n0, :n0].T), sweep
    return w, None, sweep


def pivoted_cholesky(g_in, double stop_trace, double floor):
    """Diagonally pivoted partial Cholesky, ``g ~= L.T @ L`` with L of shape (r, n).

    Stops when the residual trace is at most ``stop_trace`` or the largest
    residual diagonal is at most ``floor``.
    """
    cdef double[:, ::1] G = np.ascontiguousarray(g_in, dtype=np.float64)
    cdef Py_ssize_t n = G.shape[0]
    lmat = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] L = lmat
    d_arr = np.array(np.diagonal(np.asarray(g_in, dtype=np.float64)), dtype=np.float64)
    cdef double[::1] d = d_arr
    cdef Py_ssize_t r = 0, i, k, t, best
    cdef double dmax, total, piv, lik

    with nogil:
        while r < n:
            total = 0.0
            best = 0
            dmax = -1.0
            for k in range(n):
                if d[k] > 0:
                    total = total + d[k]
                if d[k] > dmax:
                    dmax = d[k]
                    best = k
            if total <= stop_trace or dmax <= floor:
                break
            i = best
            piv = sqrt(dmax)
            for k in range(n):
                L[r, k] = G[i, k]
            for t in range(r):
                lik = L[t, i]
                if lik != 0.0:
                    for k in range(n):
                        L[r, k] = L[r, k] - lik * L[t, k]
            for k in range(n):
                L[r, k] = L[r, k] / piv
                d[k] = d[k] - L[r, k] * L[r, k]
            d[i] = 0.0
            r += 1
    return np.ascontiguousarray(lmat[:r])


def lfsr_bits(unsigned long long register, int length, unsigned long long tap_mask,
              Py_ssize_t count):
    """Fibonacci LFSR: emit the low bit, feed back parity(register & tap_mask) at the top.

    Returns ``(bits, register)``.
    """
    out = np.empty(count, dtype=np.uint8)
    cdef unsigned char[::1] o = out
    cdef Py_ssize_t i
    cdef unsigned long long fb, x
    cdef int top = length - 1
    with nogil:
        for i in range(count):
            o[i] = <unsigned char>(register & 1ULL)
            x = register & tap_mask
            fb = 0
            while x:
                fb ^= 1ULL
                x &= x - 1ULL
            register = (register >> 1) | (fb << top)
    return out, register


def map_decide(z1_in, z2_in, b1_in, b2_in, logw_in, labels_in, double logp0, double logp1):
    """Heterodyne MAP bit decision against a labelled constellation.

    Score of bit b is ``log p_b + logsumexp_j(log w_j - |z1-b1_j|^2 - |z2-b2_j|^2)``
    over the points labelled b; ties go to bit 0.
    """
    cdef double complex[::1] z1 = np.ascontiguousarray(z1_in, dtype=np.complex128)
    cdef double complex[::1] z2 = np.ascontiguousarray(z2_in, dtype=np.complex128)
    cdef double complex[::1] b1 = np.ascontiguousarray(b1_in, dtype=np.complex128)
    cdef double complex[::1] b2 = np.ascontiguousarray(b2_in, dtype=np.complex128)
    cdef double[::1] logw = np.ascontiguousarray(logw_in, dtype=np.float64)
    cdef unsigned char[::1] labels = np.ascontiguousarray(labels_in, dtype=np.uint8)
    cdef Py_ssize_t n = z1.shape[0], npts = b1.shape[0], i, j
    out = np.zeros(n, dtype=np.uint8)
    cdef unsigned char[::1] o = out
    buf = np.empty(npts, dtype=np.float64)
    cdef double[::1] e = buf
    cdef double m0, m1, s0, s1, dr, di, v, sc0, sc1
    cdef double ninf = -np.inf
    with nogil:
        for i in range(n):
            m0 = ninf
            m1 = ninf
            for j in range(npts):
                dr = z1[i].real - b1[j].real
                di = z1[i].imag - b1[j].imag
                v = logw[j] - dr * dr - di * di
                dr = z2[i].real - b2[j].real
                di = z2[i].imag - b2[j].imag
                v = v - dr * dr - di * di
                e[j] = v
                if labels[j]:
                    if v > m1:
                        m1 = v
                elif v > m0:
                    m0 = v
            s0 = 0.0
            s1 = 0.0
            for j in range(npts):
                if labels[j]:
                    s1 = s1 + exp(e[j] - m1)
                else:
                    s0 = s0 + exp(e[j] - m0)
            sc0 = logp0 + m0 + log(s0) if s0 > 0 else ninf
            sc1 = logp1 + m1 + log(s1) if s1 > 0 else ninf
            if sc1 > sc0:
                o[i] = 1
    return out
