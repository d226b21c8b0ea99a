# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Semantics match ``ammd._pykernels`` exactly."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, INFINITY

cnp.import_array()

cdef double COINCIDENT_EPS = 1e-9


cdef inline double _ratio(double g, double e) noexcept nogil:
    # rounding can put g a few ulp below e; the true ratio is >= 1
    cdef double r
    if e < COINCIDENT_EPS:
        return 1.0
    r = g / e
    return r if r > 1.0 else 1.0


cdef double _append(const double[:, ::1] X, Py_ssize_t base, Py_ssize_t n,
                    double[:, ::1] E, double[:, ::1] G, Py_ssize_t k,
                    double[::1] g) noexcept nogil:
    """Add vertex base+n to the patch X[base:base+n]; return the new ratio sum."""
    cdef Py_ssize_t D = X.shape[1]
    cdef Py_ssize_t a, b, j, d, lo
    cdef double s, t, best, cand, e, total
    if n == 0:
        E[0, 0] = 0.0
        G[0, 0] = 0.0
        return 1.0
    for a in range(n):
        s = 0.0
        for d in range(D):
            t = X[base + a, d] - X[base + n, d]
            s += t * t
        e = sqrt(s)
        E[n, a] = e
        E[a, n] = e
    lo = n - k
    if lo < 0:
        lo = 0
    for a in range(n):
        best = INFINITY
        for j in range(lo, n):
            cand = G[a, j] + E[j, n]
            if cand < best:
                best = cand
        g[a] = best
        G[n, a] = best
        G[a, n] = best
    G[n, n] = 0.0
    E[n, n] = 0.0
    total = 0.0
    for a in range(n):
        for b in range(a + 1, n):
            cand = g[a] + g[b]
            if cand < G[a, b]:
                G[a, b] = cand
                G[b, a] = cand
            total += 2.0 * _ratio(G[a, b], E[a, b])
        total += 2.0 * _ratio(G[a, n], E[a, n])
    return total + (n + 1)


def sequential_apsp(X, Py_ssize_t k):
    cdef double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef Py_ssize_t n = Xv.shape[0]
    E = np.zeros((n, n))
    G = np.zeros((n, n))
    cdef double[:, ::1] Ev = E
    cdef double[:, ::1] Gv = G
    cdef double[::1] g = np.zeros(max(n, 1))
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            _append(Xv, 0, i, Ev, Gv, k, g)
    return E, G


def nonlinearity(X, Py_ssize_t k):
    cdef double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef Py_ssize_t n = Xv.shape[0]
    cdef double[:, ::1] Ev = np.zeros((n, n))
    cdef double[:, ::1] Gv = np.zeros((n, n))
    cdef double[::1] g = np.zeros(max(n, 1))
    cdef Py_ssize_t i
    cdef double total = 0.0
    with nogil:
        for i in range(n):
            total = _append(Xv, 0, i, Ev, Gv, k, g)
    return total / (<double>n * n)


def decompose_bounds(X, double delta, Py_ssize_t k):
    cdef double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef Py_ssize_t F = Xv.shape[0]
    cdef Py_ssize_t cap = 16
    E = np.zeros((cap, cap))
    G = np.zeros((cap, cap))
    cdef double[:, ::1] Ev = E
    cdef double[:, ::1] Gv = G
    cdef double[::1] g = np.zeros(cap)
    cdef Py_ssize_t start = 0, n = 0, f
    cdef double score = 0.0
    out = []
    for f in range(F):
        if n == cap:
            cap *= 2
            E2 = np.zeros((cap, cap))
            G2 = np.zeros((cap, cap))
            E2[:n, :n] = E[:n, :n]
            G2[:n, :n] = G[:n, :n]
            E, G = E2, G2
            Ev = E
            Gv = G
            g = np.zeros(cap)
        score = _append(Xv, start, n, Ev, Gv, k, g) / (<double>(n + 1) * (n + 1))
        n += 1
        if score > delta:
            out.append((start, f, score))
            start = f + 1
            n = 0
    if n > 0:
        out.append((start, F - 1, score))
    return out


cdef void _sines(const double[:, ::1] A, const double[:, ::1] B,
                 double[:, ::1] out) noexcept nogil:
    cdef Py_ssize_t m = A.shape[0], n = B.shape[0], D = A.shape[1]
    cdef Py_ssize_t i, j, d
    cdef double dm, dp, t, s
    for i in range(m):
        for j in range(n):
            dm = 0.0
            dp = 0.0
            for d in range(D):
                t = A[i, d] - B[j, d]
                dm += t * t
                t = A[i, d] + B[j, d]
                dp += t * t
            s = sqrt(dm * dp) * 0.5
            out[i, j] = s if s < 1.0 else 1.0


def sine_matrices(U_ref, V_ref, flat_ref, U_test, V_test, flat_test):
    cdef double[:, ::1] ur = np.ascontiguousarray(U_ref, dtype=np.float64)
    cdef double[:, ::1] vr = np.ascontiguousarray(V_ref, dtype=np.float64)
    cdef double[:, ::1] ut = np.ascontiguousarray(U_test, dtype=np.float64)
    cdef double[:, ::1] vt = np.ascontiguousarray(V_test, dtype=np.float64)
    cdef Py_ssize_t m = ur.shape[0], n = ut.shape[0], i, j
    P = np.empty((m, n))
    Dd = np.empty((m, n))
    cdef double[:, ::1] Pv = P
    cdef double[:, ::1] Dv = Dd
    cdef cnp.uint8_t[::1] fr = np.ascontiguousarray(flat_ref, dtype=np.uint8)
    cdef cnp.uint8_t[::1] ft = np.ascontiguousarray(flat_test, dtype=np.uint8)
    with nogil:
        _sines(ur, ut, Pv)
        _sines(vr, vt, Dv)
        for i in range(m):
            for j in range(n):
                if fr[i] or ft[j]:
                    Dv[i, j] = 0.0
    return P, Dd


def ammd_from_matrix(C):
    cdef double[:, ::1] Cv = np.ascontiguousarray(C, dtype=np.float64)
    cdef Py_ssize_t m = Cv.shape[0], n = Cv.shape[1], i, j
    cdef double total = 0.0, best, cand
    with nogil:
        if n == 1:
            best = INFINITY
            for i in range(m):
                if Cv[i, 0] < best:
                    best = Cv[i, 0]
            total = best
        elif m == 1:
            for j in range(n - 1):
                total += Cv[0, j]
            for j in range(1, n):
                total += Cv[0, j]
        else:
            for j in range(n - 1):
                best = INFINITY
                for i in range(m - 1):
                    cand = Cv[i, j] + Cv[i + 1, j + 1]
                    if cand < best:
                        best = cand
                total += best
    return total


def dtw_from_matrix(C):
    cdef double[:, ::1] Cv = np.ascontiguousarray(C, dtype=np.float64)
    cdef Py_ssize_t m = Cv.shape[0], n = Cv.shape[1], i, j
    acc = np.full((m + 1, n + 1), np.inf)
    cdef double[:, ::1] A = acc
    cdef double best
    with nogil:
        A[0, 0] = 0.0
        for i in range(1, m + 1):
            for j in range(1, n + 1):
                best = A[i - 1, j - 1]
                if A[i - 1, j] < best:
                    best = A[i - 1, j]
                if A[i, j - 1] < best:
                    best = A[i, j - 1]
                A[i, j] = Cv[i - 1, j - 1] + best
    return float(A[m, n])
