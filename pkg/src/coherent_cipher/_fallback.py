"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``.

Same signatures, same algorithms, same pair ordering; used when the
extension has not been built.
"""
import numpy as np

from .errors import ConvergenceError


def _round_robin(n):
    ring = np.arange(n)
    half = n // 2
    for _ in range(n - 1):
        p = ring[:half]
        q = ring[::-1][:half]
        yield np.minimum(p, q), np.maximum(p, q)
        ring = np.concatenate(([ring[0]], [ring[-1]], ring[1:-1]))


def jacobi_eigh(a_in, tol=1e-12, max_sweeps=60, vectors=True):
    """Cyclic Jacobi with round-robin pair ordering; see the compiled twin."""
    a_arr = np.asarray(a_in, dtype=np.float64)
    n0 = a_arr.shape[0]
    if n0 == 0:
        return np.zeros(0), (np.zeros((0, 0)) if vectors else None), 0
    n = n0 + (n0 % 2)
    a = np.zeros((n, n))
    a[:n0, :n0] = a_arr
    v = np.eye(n) if vectors else None

    norm2 = float(np.sum(a * a))
    thresh = tol * tol * norm2
    skip = thresh / (n * n)
    iu = np.triu_indices(n, 1)
    sweep = 0
    while True:
        off = 2.0 * float(np.sum(a[iu] ** 2))
        if off <= thresh or sweep >= max_sweeps:
            break
        sweep += 1
        for p, q in _round_robin(n):
            apq = a[p, q]
            act = apq * apq > skip
            if not act.any():
                continue
            p, q, apq = p[act], q[act], apq[act]
            theta = (a[q, q] - a[p, p]) / (2.0 * apq)
            t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            x, y = a[p, :], a[q, :]
            a[p, :], a[q, :] = c[:, None] * x - s[:, None] * y, s[:, None] * x + c[:, None] * y
            x, y = a[:, p], a[:, q]
            a[:, p], a[:, q] = x * c - y * s, x * s + y * c
            if vectors:
                x, y = v[:, p], v[:, q]
                v[:, p], v[:, q] = x * c - y * s, x * s + y * c
            a[p, q] = 0.0
            a[q, p] = 0.0

    if off > thresh:
        raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")
    w = np.diagonal(a)[:n0].copy()
    if vectors:
        return w, np.ascontiguousarray(v[:n0, :n0]), sweep
    return w, None, sweep


def pivoted_cholesky(g_in, stop_trace, floor):
    g = np.asarray(g_in, dtype=np.float64)
    n = g.shape[0]
    L = np.zeros((n, n))
    d = np.array(np.diagonal(g), dtype=np.float64)
    r = 0
    while r < n:
        total = d[d > 0].sum()
        i = int(np.argmax(d))
        dmax = d[i]
        if total <= stop_trace or dmax <= floor:
            break
        row = g[i, :] - L[:r, i] @ L[:r, :]
        L[r] = row / np.sqrt(dmax)
        d -= L[r] ** 2
        d[i] = 0.0
        r += 1
    return np.ascontiguousarray(L[:r])


def lfsr_bits(register, length, tap_mask, count):
    out = np.empty(count, dtype=np.uint8)
    top = length - 1
    for i in range(count):
        out[i] = register & 1
        fb = bin(register & tap_mask).count("1") & 1
        register = (register >> 1) | (fb << top)
    return out, register


def map_decide(z1_in, z2_in, b1_in, b2_in, logw_in, labels_in, logp0, logp1, chunk=4096):
    z1 = np.asarray(z1_in, dtype=np.complex128)
    z2 = np.asarray(z2_in, dtype=np.complex128)
    b1 = np.asarray(b1_in, dtype=np.complex128)
    b2 = np.asarray(b2_in, dtype=np.complex128)
    logw = np.asarray(logw_in, dtype=np.float64)
    ones = np.asarray(labels_in, dtype=bool)
    out = np.zeros(z1.shape[0], dtype=np.uint8)
    for start in range(0, z1.shape[0], chunk):
        sl = slice(start, start + chunk)
        e = (
            logw[None, :]
            - np.abs(z1[sl, None] - b1[None, :]) ** 2
            - np.abs(z2[sl, None] - b2[None, :]) ** 2
        )
        sc0 = logp0 + _logsumexp(e[:, ~ones])
        sc1 = logp1 + _logsumexp(e[:, ones])
        out[sl] = sc1 > sc0
    return out


def _logsumexp(e):
    m = e.max(axis=1)
    with np.errstate(invalid="ignore"):
        s = np.exp(e - m[:, None]).sum(axis=1)
    return m + np.log(s)
