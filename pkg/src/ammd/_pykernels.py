"""Pure numpy implementations of the hot kernels.

Same signatures and semantics as the compiled ``_kernels`` extension; used
when the extension is not built and as the reference in the benchmark.
"""
import numpy as np

COINCIDENT_EPS = 1e-9


def _append_vertex(X, n, E, G, k):
    """Grow the patch X[:n] by X[n], updating E and G in place (rows/cols 0..n)."""
    x = X[n]
    if n == 0:
        E[0, 0] = 0.0
        G[0, 0] = 0.0
        return
    e = np.sqrt(((X[:n] - x) ** 2).sum(axis=1))
    E[n, :n] = e
    E[:n, n] = e
    lo = max(0, n - k)
    # every path into the new vertex ends with one of its k predecessors
    g = (G[:n, lo:n] + e[lo:n]).min(axis=1)
    G[n, :n] = g
    G[:n, n] = g
    G[n, n] = 0.0
    E[n, n] = 0.0
    np.minimum(G[:n, :n], g[:, None] + g[None, :], out=G[:n, :n])


def _ratio_mean(E, G, n):
    e = E[:n, :n]
    g = G[:n, :n]
    r = np.ones((n, n))
    mask = e >= COINCIDENT_EPS
    # rounding can put g a few ulp below e; the true ratio is >= 1
    r[mask] = np.maximum(g[mask] / e[mask], 1.0)
    return float(r.sum()) / (n * n)


def sequential_apsp(X, k):
    """Euclidean and k-sequential-neighbour geodesic matrices of a patch."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    n = X.shape[0]
    E = np.zeros((n, n))
    G = np.zeros((n, n))
    for i in range(n):
        _append_vertex(X, i, E, G, k)
    return E, G


def nonlinearity(X, k):
    X = np.ascontiguousarray(X, dtype=np.float64)
    E, G = sequential_apsp(X, k)
    return _ratio_mean(E, G, X.shape[0])


def decompose_bounds(X, delta, k):
    """Run the patch-growing loop; return a list of (start, end, score)."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    F = X.shape[0]
    cap = 16
    E = np.zeros((cap, cap))
    G = np.zeros((cap, cap))
    out = []
    start = 0
    n = 0
    score = 0.0
    for f in range(F):
        if n == cap:
            cap *= 2
            E2 = np.zeros((cap, cap))
            G2 = np.zeros((cap, cap))
            E2[:n, :n] = E[:n, :n]
            G2[:n, :n] = G[:n, :n]
            E, G = E2, G2
        _append_vertex(X[start:], n, E, G, k)
        n += 1
        score = _ratio_mean(E, G, n)
        if score > delta:
            out.append((start, f, score))
            start = f + 1
            n = 0
    if n > 0:
        out.append((start, F - 1, score))
    return out


def sine_matrices(U_ref, V_ref, flat_ref, U_test, V_test, flat_test):
    """Pairwise sines between unit means and between unit directions.

    Rows index the reference patches, columns the test patches. ``flat_*``
    marks patches without a direction; their direction sine is 0.
    The sine is computed as |a-b| |a+b| / 2, which equals sqrt(1 - cos^2)
    for unit vectors but keeps full precision near 0 and 90 degrees.
    """
    def sines(A, B):
        dm = ((A[:, None, :] - B[None, :, :]) ** 2).sum(axis=2)
        dp = ((A[:, None, :] + B[None, :, :]) ** 2).sum(axis=2)
        return np.minimum(np.sqrt(dm * dp) * 0.5, 1.0)

    P = sines(np.asarray(U_ref, dtype=np.float64), np.asarray(U_test, dtype=np.float64))
    Dd = sines(np.asarray(V_ref, dtype=np.float64), np.asarray(V_test, dtype=np.float64))
    flat = np.asarray(flat_ref, dtype=bool)[:, None] | np.asarray(flat_test, dtype=bool)[None, :]
    Dd[flat] = 0.0
    return P, Dd


def ammd_from_matrix(C):
    """Order-preserving sum over adjacent test pairs of the best adjacent reference pair."""
    C = np.asarray(C, dtype=np.float64)
    m, n = C.shape
    if n == 1:
        return float(C[:, 0].min())
    if m == 1:
        return float(C[0, :-1].sum() + C[0, 1:].sum())
    pair = C[:-1, :-1] + C[1:, 1:]
    return float(pair.min(axis=0).sum())


def dtw_from_matrix(C):
    C = np.asarray(C, dtype=np.float64)
    m, n = C.shape
    acc = np.full((m + 1, n + 1), np.inf)
    acc[0, 0] = 0.0
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            acc[i, j] = C[i - 1, j - 1] + min(acc[i - 1, j - 1], acc[i - 1, j], acc[i, j - 1])
    return float(acc[m, n])
