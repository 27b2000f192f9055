"""Hot inner-loop kernels with two interchangeable backends.

Every kernel has a pure-numpy reference implementation and, when numba is
importable and not disabled, a compiled @njit twin. Set the environment
variable MBLSIM_DISABLE_NUMBA=1 to force the numpy path. Both backends are
exposed in NUMPY_IMPLS / NUMBA_IMPLS so tests and the benchmark script can
compare them directly regardless of which one is active.

BLAS-bound work (gemm, eigh, svd) stays in numpy/scipy; only non-BLAS loops
live here.
"""

from __future__ import annotations

import os

import numpy as np

_INV_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def _disabled_by_env() -> bool:
    return os.environ.get("MBLSIM_DISABLE_NUMBA", "0") not in ("", "0", "false", "False")


# ---------------------------------------------------------------------------
# numpy reference implementations
# ---------------------------------------------------------------------------


def _fwht_inplace_np(a):
    """Unnormalized in-place Walsh-Hadamard transform of a length-2^k vector."""
    n = a.shape[0]
    h = 1
    while h < n:
        # butterfly over blocks of width 2h
        b = a.reshape(-1, 2 * h)
        lo = b[:, :h].copy()
        hi = b[:, h:].copy()
        b[:, :h] = lo + hi
        b[:, h:] = lo - hi
        h *= 2
    return a


def _pauli_word_perm_phase_np(dim, xmask, zmask, ny):
    """Signed-permutation form of a Pauli word: W[perm[j], j] = phase[j].

    perm[j] = j ^ xmask, phase[j] = i^ny * (-1)^popcount(j & zmask).
    """
    idx = np.arange(dim, dtype=np.int64)
    perm = idx ^ xmask
    par = np.bitwise_count(idx & zmask).astype(np.int64)
    phase = np.where(par & 1, -1.0, 1.0).astype(np.complex128)
    phase *= 1j ** (ny % 4)
    return perm, phase


def _monomial_commutator_np(T, perm, phase):
    """C = A T - T A for monomial A with A[perm[j], j] = phase[j].

    perm must be an involution (true for Pauli words).
    """
    left = phase[perm, None] * T[perm, :]
    right = T[:, perm] * phase[None, :]
    return left - right


def _right_multiply_monomial_np(V, perm, phase):
    """V @ A for monomial A with A[perm[j], j] = phase[j]."""
    return V[:, perm] * phase[None, :]


def _involution_offdiag_block_np(T, perm, phase):
    """Off-diagonal block of T between the +1/-1 eigenspaces of a Hermitian
    signed-permutation involution W (W[perm[j], j] = phase[j], W^2 = I).

    For Hermitian T the commutator [T, W] is block-antidiagonal in W's
    eigenbasis with this block M in one corner and -M^dag in the other, so
    ||[T, W]|| = 2 ||M|| at half the dimension. Eigenvectors: a 2-cycle
    j < k = perm[j] with phi = phase[j] contributes (e_j +- phi e_k)/sqrt(2);
    a fixed point contributes e_j to the block matching sign(phase[j]).
    """
    dim = T.shape[0]
    idx = np.arange(dim, dtype=np.int64)
    fixed = perm == idx
    row_sel = (~fixed & (idx < perm)) | (fixed & (phase.real > 0.0))
    col_sel = (~fixed & (idx < perm)) | (fixed & (phase.real <= 0.0))
    sq = 1.0 / np.sqrt(2.0)
    rj = idx[row_sel]
    rk = perm[rj]
    pair_r = rk != rj
    fa = np.where(pair_r, np.conj(phase[rj]), 0.0)
    wa = np.where(pair_r, sq, 1.0)
    cj = idx[col_sel]
    ck = perm[cj]
    pair_c = ck != cj
    fb = np.where(pair_c, phase[cj], 0.0)
    wb = np.where(pair_c, sq, 1.0)
    rows = wa[:, None] * (T[rj, :] + fa[:, None] * T[rk, :])
    return wb[None, :] * (rows[:, cj] - rows[:, ck] * fb[None, :])


def _apply_phases_np(At, E, t):
    """out[j,k] = exp(i t (E_j - E_k)) At[j,k]."""
    p = np.exp(1j * t * E)
    return (p[:, None] * At) * p.conj()[None, :]


def _apply_gap_mask_np(At, E, tol):
    """Zero the entries of At (in place) where |E_j - E_k| > tol."""
    mask = np.abs(E[:, None] - E[None, :]) > tol
    At[mask] = 0.0
    return At


def _apply_average_kernel_np(At, E, T):
    """Multiply At entrywise (in place) by (e^{iT d}-1)/(iT d), d = E_j - E_k."""
    d = E[:, None] - E[None, :]
    td = T * d
    small = np.abs(td) < 1e-12
    td_safe = np.where(small, 1.0, td)
    k = (np.exp(1j * td_safe) - 1.0) / (1j * td_safe)
    k[small] = 1.0
    At *= k
    return At


def _kernel_abs_update_np(K, U, m):
    """K[j,k] = max(K[j,k], |U[j,k]| + |U[j,m+k]|) over the particle block."""
    np.maximum(K, np.abs(U[:m, :m]) + np.abs(U[:m, m : 2 * m]), out=K)
    return K


def _longest_zero_run_np(delta):
    """Length and start of the longest run of zeros (first one on ties)."""
    best = 0
    best_start = -1
    run = 0
    start = 0
    for i, v in enumerate(delta):
        if v == 0:
            if run == 0:
                start = i
            run += 1
            if run > best:
                best = run
                best_start = start
        else:
            run = 0
    return best, best_start


def _power_norm_np(C, V0, rtol, atol, maxit):
    """Largest singular value of C by block power iteration on C^H C.

    V0 is the starting block (dim x width); a block survives clustered top
    singular values, where a single power vector stalls for thousands of
    steps. sigma is the top Ritz value on the iterated subspace, hence
    nondecreasing and a certified lower bound on ||C||. Returns
    (sigma, iters, V, converged); V holds the orthonormalized block so
    callers can warm-restart nearby problems.
    """
    V, _ = np.linalg.qr(V0.astype(np.complex128))
    s_prev = 0.0
    s = 0.0
    for it in range(maxit):
        W = C @ V
        G = W.conj().T @ W
        lam = np.linalg.eigvalsh(G)[-1]
        s = float(np.sqrt(lam)) if lam > 0.0 else 0.0
        if s <= atol:
            return s, it + 1, V, True
        if abs(s - s_prev) <= rtol * s + atol:
            return s, it + 1, V, True
        U = C.conj().T @ W
        V, _ = np.linalg.qr(U)
        s_prev = s
    return s, maxit, V, False


def _golden_refine_np(Wj, Wk1, Wk2, E, t_lo, t_hi, tol_t):
    """Max of |amp1(t)| + |amp2(t)| on [t_lo, t_hi] by golden-section search.

    amp1(t) = sum_l Wj[l] Wk1[l] e^{-i t E_l}, same for amp2. Assumes the
    bracket holds a single local maximum; the caller keeps the grid value
    as a floor so refinement never lowers the result.
    """

    def f(t):
        ph = np.exp(-1j * t * E)
        a1 = np.dot(Wj * ph, Wk1)
        a2 = np.dot(Wj * ph, Wk2)
        return abs(a1) + abs(a2)

    a, b = t_lo, t_hi
    c = b - _INV_GOLDEN * (b - a)
    d = a + _INV_GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    best = max(fc, fd)
    while (b - a) > tol_t:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_GOLDEN * (b - a)
            fd = f(d)
        if fc > best:
            best = fc
        if fd > best:
            best = fd
    return best


def _walsh_two_point_np(phi, n_sites):
    """T[x,y] = sum over masks with bits x and y set of |phi[mask]|.

    Site x maps to bit position n_sites-1-x (leftmost factor = high bit).
    """
    dim = phi.shape[0]
    masks = np.arange(dim, dtype=np.int64)
    absphi = np.abs(phi)
    T = np.zeros((n_sites, n_sites))
    for x in range(n_sites):
        bx = (masks >> (n_sites - 1 - x)) & 1
        for y in range(x, n_sites):
            by = (masks >> (n_sites - 1 - y)) & 1
            val = float(absphi[(bx & by) == 1].sum())
            T[x, y] = val
            T[y, x] = val
    return T


NUMPY_IMPLS = {
    "fwht_inplace": _fwht_inplace_np,
    "pauli_word_perm_phase": _pauli_word_perm_phase_np,
    "monomial_commutator": _monomial_commutator_np,
    "right_multiply_monomial": _right_multiply_monomial_np,
    "involution_offdiag_block": _involution_offdiag_block_np,
    "apply_phases": _apply_phases_np,
    "apply_gap_mask": _apply_gap_mask_np,
    "apply_average_kernel": _apply_average_kernel_np,
    "kernel_abs_update": _kernel_abs_update_np,
    "longest_zero_run": _longest_zero_run_np,
    "power_norm": _power_norm_np,
    "golden_refine": _golden_refine_np,
    "walsh_two_point": _walsh_two_point_np,
}


# ---------------------------------------------------------------------------
# numba twins
# ---------------------------------------------------------------------------

NUMBA_IMPLS = {}
_numba_error = None

if not _disabled_by_env():
    try:
        from numba import njit
    except ImportError as exc:  # pragma: no cover - numba is a hard dep
        _numba_error = exc
        njit = None
else:
    njit = None

if njit is not None:

    @njit(cache=True)
    def _fwht_inplace_nb(a):
        n = a.shape[0]
        h = 1
        while h < n:
            for i in range(0, n, 2 * h):
                for j in range(i, i + h):
                    x = a[j]
                    y = a[j + h]
                    a[j] = x + y
                    a[j + h] = x - y
            h *= 2
        return a

    @njit(cache=True)
    def _pauli_word_perm_phase_nb(dim, xmask, zmask, ny):
        perm = np.empty(dim, dtype=np.int64)
        phase = np.empty(dim, dtype=np.complex128)
        iy = 1.0 + 0.0j
        for _ in range(ny % 4):
            iy = iy * 1j
        for j in range(dim):
            perm[j] = j ^ xmask
            m = j & zmask
            c = 0
            while m:
                m &= m - 1
                c += 1
            if c & 1:
                phase[j] = -iy
            else:
                phase[j] = iy
        return perm, phase

    @njit(cache=True)
    def _monomial_commutator_nb(T, perm, phase):
        n = T.shape[0]
        C = np.empty((n, n), dtype=np.complex128)
        for i in range(n):
            pi = perm[i]
            fi = phase[pi]
            for k in range(n):
                C[i, k] = fi * T[pi, k] - T[i, perm[k]] * phase[k]
        return C

    @njit(cache=True)
    def _right_multiply_monomial_nb(V, perm, phase):
        n = V.shape[0]
        m = V.shape[1]
        out = np.empty((n, m), dtype=np.complex128)
        for k in range(m):
            pk = perm[k]
            fk = phase[k]
            for i in range(n):
                out[i, k] = V[i, pk] * fk
        return out

    @njit(cache=True)
    def _involution_offdiag_block_nb(T, perm, phase):
        dim = T.shape[0]
        nrow = 0
        ncol = 0
        for j in range(dim):
            k = perm[j]
            if k == j:
                if phase[j].real > 0.0:
                    nrow += 1
                else:
                    ncol += 1
            elif k > j:
                nrow += 1
                ncol += 1
        rj = np.empty(nrow, dtype=np.int64)
        rk = np.empty(nrow, dtype=np.int64)
        fa = np.empty(nrow, dtype=np.complex128)
        wa = np.empty(nrow, dtype=np.float64)
        cj = np.empty(ncol, dtype=np.int64)
        ck = np.empty(ncol, dtype=np.int64)
        fb = np.empty(ncol, dtype=np.complex128)
        wb = np.empty(ncol, dtype=np.float64)
        sq = 1.0 / np.sqrt(2.0)
        p = 0
        m = 0
        for j in range(dim):
            k = perm[j]
            if k == j:
                if phase[j].real > 0.0:
                    rj[p] = j
                    rk[p] = j
                    fa[p] = 0.0
                    wa[p] = 1.0
                    p += 1
                else:
                    cj[m] = j
                    ck[m] = j
                    fb[m] = 0.0
                    wb[m] = 1.0
                    m += 1
            elif k > j:
                rj[p] = j
                rk[p] = k
                fa[p] = np.conj(phase[j])
                wa[p] = sq
                p += 1
                cj[m] = j
                ck[m] = k
                fb[m] = phase[j]
                wb[m] = sq
                m += 1
        M = np.empty((nrow, ncol), dtype=np.complex128)
        for a in range(nrow):
            ja = rj[a]
            ka = rk[a]
            ga = fa[a]
            va = wa[a]
            for b in range(ncol):
                jb = cj[b]
                kb = ck[b]
                gb = fb[b]
                M[a, b] = va * wb[b] * (
                    T[ja, jb] + ga * T[ka, jb] - gb * T[ja, kb] - ga * gb * T[ka, kb]
                )
        return M

    @njit(cache=True)
    def _apply_phases_nb(At, E, t):
        n = At.shape[0]
        p = np.empty(n, dtype=np.complex128)
        for j in range(n):
            p[j] = np.exp(1j * t * E[j])
        out = np.empty((n, n), dtype=np.complex128)
        for j in range(n):
            pj = p[j]
            for k in range(n):
                out[j, k] = pj * At[j, k] * np.conj(p[k])
        return out

    @njit(cache=True)
    def _apply_gap_mask_nb(At, E, tol):
        n = At.shape[0]
        for j in range(n):
            for k in range(n):
                if abs(E[j] - E[k]) > tol:
                    At[j, k] = 0.0
        return At

    @njit(cache=True)
    def _apply_average_kernel_nb(At, E, T):
        n = At.shape[0]
        for j in range(n):
            for k in range(n):
                td = T * (E[j] - E[k])
                if abs(td) < 1e-12:
                    continue
                At[j, k] = At[j, k] * (np.exp(1j * td) - 1.0) / (1j * td)
        return At

    @njit(cache=True)
    def _kernel_abs_update_nb(K, U, m):
        for j in range(m):
            for k in range(m):
                v = abs(U[j, k]) + abs(U[j, m + k])
                if v > K[j, k]:
                    K[j, k] = v
        return K

    @njit(cache=True)
    def _longest_zero_run_nb(delta):
        best = 0
        best_start = -1
        run = 0
        start = 0
        for i in range(delta.shape[0]):
            if delta[i] == 0:
                if run == 0:
                    start = i
                run += 1
                if run > best:
                    best = run
                    best_start = start
            else:
                run = 0
        return best, best_start

    @njit(cache=True)
    def _power_norm_nb(C, V0, rtol, atol, maxit):
        Q, _ = np.linalg.qr(np.ascontiguousarray(V0.astype(np.complex128)))
        V = np.ascontiguousarray(Q)
        s_prev = 0.0
        s = 0.0
        for it in range(maxit):
            W = np.dot(C, V)
            Wh = np.ascontiguousarray(np.conj(W.T))
            G = np.dot(Wh, W)
            lam = np.linalg.eigvalsh(G)[-1]
            s = np.sqrt(lam) if lam > 0.0 else 0.0
            if s <= atol:
                return s, it + 1, V, True
            if abs(s - s_prev) <= rtol * s + atol:
                return s, it + 1, V, True
            U = np.ascontiguousarray(np.conj(np.dot(Wh, C)).T)
            Q, _ = np.linalg.qr(U)
            V = np.ascontiguousarray(Q)
            s_prev = s
        return s, maxit, V, False

    @njit(cache=True)
    def _amp_pair_nb(Wj, Wk1, Wk2, E, t):
        a1 = 0.0 + 0.0j
        a2 = 0.0 + 0.0j
        for l in range(E.shape[0]):
            ph = np.exp(-1j * t * E[l]) * Wj[l]
            a1 += ph * Wk1[l]
            a2 += ph * Wk2[l]
        return abs(a1) + abs(a2)

    @njit(cache=True)
    def _golden_refine_nb(Wj, Wk1, Wk2, E, t_lo, t_hi, tol_t):
        inv_g = (np.sqrt(5.0) - 1.0) / 2.0
        a = t_lo
        b = t_hi
        c = b - inv_g * (b - a)
        d = a + inv_g * (b - a)
        fc = _amp_pair_nb(Wj, Wk1, Wk2, E, c)
        fd = _amp_pair_nb(Wj, Wk1, Wk2, E, d)
        best = fc if fc > fd else fd
        while (b - a) > tol_t:
            if fc >= fd:
                b = d
                d = c
                fd = fc
                c = b - inv_g * (b - a)
                fc = _amp_pair_nb(Wj, Wk1, Wk2, E, c)
            else:
                a = c
                c = d
                fc = fd
                d = a + inv_g * (b - a)
                fd = _amp_pair_nb(Wj, Wk1, Wk2, E, d)
            if fc > best:
                best = fc
            if fd > best:
                best = fd
        return best

    @njit(cache=True)
    def _walsh_two_point_nb(phi, n_sites):
        dim = phi.shape[0]
        T = np.zeros((n_sites, n_sites))
        for mask in range(dim):
            v = abs(phi[mask])
            if v == 0.0:
                continue
            for x in range(n_sites):
                if not (mask >> (n_sites - 1 - x)) & 1:
                    continue
                for y in range(x, n_sites):
                    if (mask >> (n_sites - 1 - y)) & 1:
                        T[x, y] += v
                        if y != x:
                            T[y, x] += v
        return T

    NUMBA_IMPLS = {
        "fwht_inplace": _fwht_inplace_nb,
        "pauli_word_perm_phase": _pauli_word_perm_phase_nb,
        "monomial_commutator": _monomial_commutator_nb,
        "right_multiply_monomial": _right_multiply_monomial_nb,
        "involution_offdiag_block": _involution_offdiag_block_nb,
        "apply_phases": _apply_phases_nb,
        "apply_gap_mask": _apply_gap_mask_nb,
        "apply_average_kernel": _apply_average_kernel_nb,
        "kernel_abs_update": _kernel_abs_update_nb,
        "longest_zero_run": _longest_zero_run_nb,
        "power_norm": _power_norm_nb,
        "golden_refine": _golden_refine_nb,
        "walsh_two_point": _walsh_two_point_nb,
    }

ACTIVE_IMPLS = NUMBA_IMPLS if NUMBA_IMPLS else NUMPY_IMPLS


def backend() -> str:
    """Name of the active kernel backend ('numba' or 'numpy')."""
    return "numba" if ACTIVE_IMPLS is NUMBA_IMPLS else "numpy"


fwht_inplace = ACTIVE_IMPLS["fwht_inplace"]
pauli_word_perm_phase = ACTIVE_IMPLS["pauli_word_perm_phase"]
monomial_commutator = ACTIVE_IMPLS["monomial_commutator"]
right_multiply_monomial = ACTIVE_IMPLS["right_multiply_monomial"]
involution_offdiag_block = ACTIVE_IMPLS["involution_offdiag_block"]
apply_phases = ACTIVE_IMPLS["apply_phases"]
apply_gap_mask = ACTIVE_IMPLS["apply_gap_mask"]
apply_average_kernel = ACTIVE_IMPLS["apply_average_kernel"]
kernel_abs_update = ACTIVE_IMPLS["kernel_abs_update"]
longest_zero_run = ACTIVE_IMPLS["longest_zero_run"]
power_norm = ACTIVE_IMPLS["power_norm"]
golden_refine = ACTIVE_IMPLS["golden_refine"]
walsh_two_point = ACTIVE_IMPLS["walsh_two_point"]
