"""Hot numeric kernels: exact transportation solver and pairwise distance loops.

Every kernel exists in two functionally identical variants: a numba
``@njit``-compiled one and a plain NumPy/Python fallback.  The JIT path is
used whenever numba imports cleanly, unless the environment variable
``PROGSIM_NO_NUMBA`` is set to ``1`` (or ``true``/``yes``), which forces the
fallback.  ``scripts/bench_kernels.py`` times both paths side by side.

The selection happens once at import time; ``USE_NUMBA`` records the outcome.
"""

from __future__ import annotations

import os

import numpy as np

_FLAG = os.environ.get("PROGSIM_NO_NUMBA", "0").strip().lower()
_DISABLED = _FLAG in ("1", "true", "yes", "on")

try:
    from numba import njit as _njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

USE_NUMBA = _HAVE_NUMBA and not _DISABLED

# status codes returned by the transport kernel
TRANSPORT_OK = 0
TRANSPORT_ITER_LIMIT = 1


def _transport_simplex_core(p, q, C, max_iter, block_size):
    """Exact min-cost transportation plan via the primal transportation simplex.

    Minimizes sum(T * C) subject to row sums = p, column sums = q, T >= 0,
    with sum(p) == sum(q).  All entries of p and q must be positive.

    The basis is the classic spanning tree over the bipartite node set
    (a supply rows, b demand columns).  Entering arcs are priced over
    consecutive blocks of the flattened cost matrix (Dantzig-in-a-block);
    after a long run of degenerate pivots the rule degrades to Bland's to
    guarantee termination.

    Returns (T, n_iter, status).
    """
    a = p.shape[0]
    b = q.shape[0]
    n_nodes = a + b
    nb = a + b - 1

    basis_i = np.empty(nb, np.int64)
    basis_j = np.empty(nb, np.int64)
    basis_t = np.zeros(nb, np.float64)

    # northwest-corner initial basic feasible solution; advances exactly one
    # pointer per step so the basis always has a+b-1 arcs (possibly degenerate)
    pr = p.copy()
    qr = q.copy()
    i = 0
    j = 0
    for k in range(nb):
        t = pr[i] if pr[i] < qr[j] else qr[j]
        if t < 0.0:
            t = 0.0
        basis_i[k] = i
        basis_j[k] = j
        basis_t[k] = t
        pr[i] -= t
        qr[j] -= t
        if k == nb - 1:
            break
        if i == a - 1:
            j += 1
        elif j == b - 1:
            i += 1
        elif pr[i] <= qr[j]:
            i += 1
        else:
            j += 1

    # scratch arrays reused across pivots
    u = np.zeros(a, np.float64)
    v = np.zeros(b, np.float64)
    head = np.empty(n_nodes, np.int64)      # adjacency: linked arc lists
    nxt = np.empty(2 * nb, np.int64)
    arc_of = np.empty(2 * nb, np.int64)
    parent = np.empty(n_nodes, np.int64)
    parent_arc = np.empty(n_nodes, np.int64)
    order = np.empty(n_nodes, np.int64)
    on_path = np.empty(n_nodes, np.uint8)
    cyc_arcs = np.empty(n_nodes + 1, np.int64)
    cyc_sign = np.empty(n_nodes + 1, np.int64)
    row_path = np.empty(n_nodes, np.int64)
    col_path = np.empty(n_nodes, np.int64)

    cmax = 0.0
    for ii in range(a):
        for jj in range(b):
            cc = C[ii, jj]
            if cc > cmax:
                cmax = cc
            if -cc > cmax:
                cmax = -cc
    tol = 1e-12 * (1.0 + cmax)
    theta_tiny = 1e-15

    cursor = 0          # pricing cursor over the flattened cost matrix
    ncells = a * b
    degen_run = 0
    bland = False
    n_iter = 0
    status = TRANSPORT_OK

    while True:
        if n_iter >= max_iter:
            status = TRANSPORT_ITER_LIMIT
            break

        # ---- rebuild adjacency over basis arcs and BFS the spanning tree
        for node in range(n_nodes):
            head[node] = -1
        slot = 0
        for k in range(nb):
            ni = basis_i[k]
            nj = a + basis_j[k]
            arc_of[slot] = k
            nxt[slot] = head[ni]
            head[ni] = slot
            slot += 1
            arc_of[slot] = k
            nxt[slot] = head[nj]
            head[nj] = slot
            slot += 1

        for node in range(n_nodes):
            parent[node] = -2       # -2 marks "not visited"
        parent[0] = -1
        parent_arc[0] = -1
        order[0] = 0
        qhead = 0
        qtail = 1
        while qhead < qtail:
            node = order[qhead]
            qhead += 1
            s = head[node]
            while s != -1:
                k = arc_of[s]
                other = a + basis_j[k] if node < a else basis_i[k]
                if parent[other] == -2:
                    parent[other] = node
                    parent_arc[other] = k
                    order[qtail] = other
                    qtail += 1
                s = nxt[s]

        # ---- duals from the tree: u[i] + v[j] = C[i, j] on basic arcs
        u[0] = 0.0
        for idx in range(1, qtail):
            node = order[idx]
            k = parent_arc[node]
            bi = basis_i[k]
            bj = basis_j[k]
            if node < a:
                u[node] = C[bi, bj] - v[bj]
            else:
                v[node - a] = C[bi, bj] - u[bi]

        # ---- pricing: find an entering arc with negative reduced cost
        enter_i = -1
        enter_j = -1
        if bland:
            for flat in range(ncells):
                fi = flat // b
                fj = flat - fi * b
                if C[fi, fj] - u[fi] - v[fj] < -tol:
                    enter_i = fi
                    enter_j = fj
                    break
        else:
            scanned = 0
            best = -tol
            while scanned < ncells:
                stop = cursor + block_size
                if stop > cursor + (ncells - scanned):
                    stop = cursor + (ncells - scanned)
                while cursor < stop:
                    flat = cursor if cursor < ncells else cursor - ncells
                    fi = flat // b
                    fj = flat - fi * b
                    rc = C[fi, fj] - u[fi] - v[fj]
                    if rc < best:
                        best = rc
                        enter_i = fi
                        enter_j = fj
                    cursor += 1
                    scanned += 1
                if cursor >= ncells:
                    cursor -= ncells
                if enter_i >= 0:
                    break

        if enter_i < 0:
            break       # optimal

        # ---- cycle: tree paths from both endpoints of the entering arc
        for node in range(n_nodes):
            on_path[node] = 0
        node = enter_i
        nrow = 0
        while node != -1:
            row_path[nrow] = node
            on_path[node] = 1
            nrow += 1
            node = parent[node]
        node = a + enter_j
        ncol = 0
        while on_path[node] == 0:
            col_path[ncol] = node
            ncol += 1
            node = parent[node]
        lca = node

        # walk order: entering arc, then row side up to the LCA, then the
        # column side back down; bipartite alternation gives the +/- pattern
        cyc_arcs[0] = -1                    # placeholder for the entering arc
        cyc_sign[0] = 1
        ncyc = 1
        for r in range(nrow):
            node = row_path[r]
            if node == lca:
                break
            cyc_arcs[ncyc] = parent_arc[node]
            cyc_sign[ncyc] = 1 if (ncyc % 2 == 0) else -1
            ncyc += 1
        for c in range(ncol - 1, -1, -1):
            node = col_path[c]
            cyc_arcs[ncyc] = parent_arc[node]
            cyc_sign[ncyc] = 1 if (ncyc % 2 == 0) else -1
            ncyc += 1

        # ---- ratio test over the minus arcs
        theta = np.inf
        leave_pos = -1
        leave_key = np.int64(0)
        for cpos in range(1, ncyc):
            if cyc_sign[cpos] < 0:
                k = cyc_arcs[cpos]
                val = basis_t[k]
                key = basis_i[k] * b + basis_j[k]
                if val < theta - theta_tiny or (val < theta + theta_tiny and (leave_pos == -1 or key < leave_key)):
                    theta = val
                    leave_pos = cpos
                    leave_key = key

        if leave_pos == -1:
            # cannot happen for a balanced problem; bail out defensively
            status = TRANSPORT_ITER_LIMIT
            break

        if theta < theta_tiny:
            degen_run += 1
            if degen_run > n_nodes:
                bland = True
        else:
            degen_run = 0
            bland = False

        for cpos in range(1, ncyc):
            k = cyc_arcs[cpos]
            if cyc_sign[cpos] > 0:
                basis_t[k] += theta
            else:
                basis_t[k] -= theta
                if basis_t[k] < 0.0:
                    basis_t[k] = 0.0

        k = cyc_arcs[leave_pos]
        basis_i[k] = enter_i
        basis_j[k] = enter_j
        basis_t[k] = theta
        n_iter += 1

    T = np.zeros((a, b), np.float64)
    for k in range(nb):
        T[basis_i[k], basis_j[k]] += basis_t[k]
    return T, n_iter, status


def _pairwise_l1_core(M):
    n, m = M.shape
    D = np.zeros((n, n), np.float64)
    for i in range(n):
        for j in range(i + 1, n):
            s = 0.0
            for k in range(m):
                d = M[i, k] - M[j, k]
                s += d if d >= 0.0 else -d
            D[i, j] = s
            D[j, i] = s
    return D


def _pairwise_l2_core(M):
    n, m = M.shape
    D = np.zeros((n, n), np.float64)
    for i in range(n):
        for j in range(i + 1, n):
            s = 0.0
            for k in range(m):
                d = M[i, k] - M[j, k]
                s += d * d
            r = np.sqrt(s)
            D[i, j] = r
            D[j, i] = r
    return D


def _pairwise_cosine_core(M):
    # zero-norm rows yield 0 against everything; the caller decides whether
    # that deserves a warning or an error
    n, m = M.shape
    S = np.zeros((n, n), np.float64)
    norms = np.empty(n, np.float64)
    for i in range(n):
        s = 0.0
        for k in range(m):
            s += M[i, k] * M[i, k]
        norms[i] = np.sqrt(s)
    for i in range(n):
        S[i, i] = 1.0 if norms[i] > 0.0 else 0.0
        for j in range(i + 1, n):
            if norms[i] == 0.0 or norms[j] == 0.0:
                continue
            dot = 0.0
            for k in range(m):
                dot += M[i, k] * M[j, k]
            c = dot / (norms[i] * norms[j])
            S[i, j] = c
            S[j, i] = c
    return S


def _pairwise_weighted_l1_mean_core(Z, w):
    # mean over features of w_k * |z_ik - z_jk|; used by the delta family
    n, m = Z.shape
    D = np.zeros((n, n), np.float64)
    if m == 0:
        return D
    for i in range(n):
        for j in range(i + 1, n):
            s = 0.0
            for k in range(m):
                d = Z[i, k] - Z[j, k]
                if d < 0.0:
                    d = -d
                s += w[k] * d
            s /= m
            D[i, j] = s
            D[j, i] = s
    return D


if USE_NUMBA:
    _transport_simplex = _njit(cache=True)(_transport_simplex_core)
    _pairwise_l1 = _njit(cache=True)(_pairwise_l1_core)
    _pairwise_l2 = _njit(cache=True)(_pairwise_l2_core)
    _pairwise_cosine = _njit(cache=True)(_pairwise_cosine_core)
    _pairwise_weighted_l1_mean = _njit(cache=True)(_pairwise_weighted_l1_mean_core)
else:
    _transport_simplex = _transport_simplex_core

    def _pairwise_l1(M):
        n = M.shape[0]
        D = np.zeros((n, n))
        for i in range(n - 1):
            d = np.abs(M[i + 1:] - M[i]).sum(axis=1)
            D[i, i + 1:] = d
            D[i + 1:, i] = d
        return D

    def _pairwise_l2(M):
        n = M.shape[0]
        D = np.zeros((n, n))
        for i in range(n - 1):
            d = np.sqrt(((M[i + 1:] - M[i]) ** 2).sum(axis=1))
            D[i, i + 1:] = d
            D[i + 1:, i] = d
        return D

    def _pairwise_cosine(M):
        norms = np.linalg.norm(M, axis=1)
        safe = np.where(norms > 0.0, norms, 1.0)
        G = (M / safe[:, None]) @ (M / safe[:, None]).T
        S = np.where((norms[:, None] > 0.0) & (norms[None, :] > 0.0), G, 0.0)
        np.fill_diagonal(S, np.where(norms > 0.0, 1.0, 0.0))
        return S

    def _pairwise_weighted_l1_mean(Z, w):
        n, m = Z.shape
        D = np.zeros((n, n))
        if m == 0:
            return D
        for i in range(n - 1):
            d = (np.abs(Z[i + 1:] - Z[i]) * w).sum(axis=1) / m
            D[i, i + 1:] = d
            D[i + 1:, i] = d
        return D


def transport_simplex(p: np.ndarray, q: np.ndarray, C: np.ndarray,
                      max_iter: int = 100_000, block_size: int = 0):
    """Solve the balanced transportation problem exactly.

    Returns (plan, n_iter, status); status is TRANSPORT_OK or
    TRANSPORT_ITER_LIMIT.  Inputs must satisfy p > 0, q > 0,
    sum(p) == sum(q) (up to float rounding).
    """
    p = np.ascontiguousarray(p, dtype=np.float64)
    q = np.ascontiguousarray(q, dtype=np.float64)
    C = np.ascontiguousarray(C, dtype=np.float64)
    if block_size <= 0:
        block_size = max(64, int(np.sqrt(p.shape[0] * q.shape[0])))
    return _transport_simplex(p, q, C, max_iter, block_size)


def pairwise_l1(M: np.ndarray) -> np.ndarray:
    """Full symmetric matrix of L1 distances between rows of M."""
    return _pairwise_l1(np.ascontiguousarray(M, dtype=np.float64))


def pairwise_l2(M: np.ndarray) -> np.ndarray:
    """Full symmetric matrix of L2 distances between rows of M."""
    return _pairwise_l2(np.ascontiguousarray(M, dtype=np.float64))


def pairwise_cosine(M: np.ndarray) -> np.ndarray:
    """Full symmetric matrix of cosine similarities between rows of M.

    Rows with zero norm get similarity 0 against every row (and themselves).
    """
    return _pairwise_cosine(np.ascontiguousarray(M, dtype=np.float64))


def pairwise_weighted_l1_mean(Z: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Mean over features of w_k * |z_ik - z_jk|, all row pairs."""
    Z = np.ascontiguousarray(Z, dtype=np.float64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    return _pairwise_weighted_l1_mean(Z, w)
