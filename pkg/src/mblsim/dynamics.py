"""Exact Heisenberg dynamics and commutator-based localization estimators.

Everything runs through one eigendecomposition per Hamiltonian. Pauli words
are signed permutation matrices, so left/right multiplication by them costs
O(dim^2) with no extra gemm; the only cubic work per time point is forming
the evolution unitary and one gemm per evolved word. Commutator norms
against a Pauli word come from the off-diagonal block of the evolved
operator in the word's eigenbasis (||[T, B]|| = 2 ||block|| for Hermitian
T), which quarters the norm work. Norms use exact SVD at small dimension
and warm-started block power iteration above DENSE_NORM_DIM.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .chains import Chain, DENSE_NORM_DIM, LocalOperator, embed, conditional_expectation
from .errors import (
    DomainError,
    NumericalError,
    ResourceLimitError,
    UnsupportedDimensionError,
)

DIM_CAP = 2**13

_NORM_RTOL = 1e-10
_NORM_MAXIT = 200


@dataclass(frozen=True)
class EigenSystem:
    """Spectral data of a Hamiltonian: ascending energies and eigenbasis.

    The basis stays real when the Hamiltonian is real symmetric, which makes
    the evolution unitary two real gemms instead of one complex one.
    """

    energies: np.ndarray
    basis: np.ndarray
    chain: Chain | None = None

    @property
    def dim(self) -> int:
        return self.basis.shape[0]


@dataclass(frozen=True)
class CommutatorTrace:
    """Raw commutator norms over a time grid for one (X, Y) pair."""

    X: tuple[int, ...]
    Y: tuple[int, ...]
    time_grid: np.ndarray
    values: np.ndarray
    chi: float
    beta: float

    def weighted_values(self) -> np.ndarray:
        return self.values / (self.chi * (1.0 + np.abs(self.time_grid) ** self.beta))


@dataclass(frozen=True)
class TransmissionTimeResult:
    """First threshold crossing of the end-to-end commutator signal."""

    epsilon: float
    t_est: float | None
    censored: bool
    bracket: tuple[float, float] | None
    horizon: float


def eigendecompose(
    H: LocalOperator | np.ndarray,
    chain: Chain | None = None,
    dim_cap: int = DIM_CAP,
) -> EigenSystem:
    """Eigendecompose a Hermitian operator; refuses dimensions above dim_cap."""
    M = H.matrix if isinstance(H, LocalOperator) else np.asarray(H)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DomainError(f"expected a square matrix, got {M.shape}")
    d = M.shape[0]
    if d > dim_cap:
        raise ResourceLimitError(f"dimension {d} exceeds cap {dim_cap}")
    scale = max(1.0, float(np.linalg.norm(M)))
    if np.linalg.norm(M - M.conj().T) > 1e-12 * scale:
        raise DomainError("matrix is not Hermitian within tolerance")
    if np.iscomplexobj(M) and np.abs(M.imag).max() <= 1e-14 * scale:
        M = M.real
    if np.iscomplexobj(M):
        energies, basis = np.linalg.eigh(M)
    else:
        energies, basis = np.linalg.eigh(np.asarray(M, dtype=float))
    if chain is None and isinstance(H, LocalOperator):
        k = d.bit_length() - 1
        if 2**k == d:
            chain = Chain.spins(k)
    return EigenSystem(energies=energies, basis=basis, chain=chain)


def evolution_unitary(es: EigenSystem, t: float) -> np.ndarray:
    """e^{i t H}; the Heisenberg conjugator tau_t(A) = V A V^dag."""
    U = es.basis
    E = es.energies
    if np.iscomplexobj(U):
        return (U * np.exp(1j * t * E)[None, :]) @ U.conj().T
    c = (U * np.cos(t * E)[None, :]) @ U.T
    s = (U * np.sin(t * E)[None, :]) @ U.T
    return c + 1j * s


def heisenberg_evolve(es: EigenSystem, A: LocalOperator, t: float) -> LocalOperator:
    """tau_t(A) for an operator already embedded at the eigensystem's dimension."""
    if A.dim != es.dim:
        raise DomainError(
            f"operator dim {A.dim} does not match eigensystem dim {es.dim}; embed first"
        )
    U = es.basis
    Uh = U.conj().T if np.iscomplexobj(U) else U.T
    At = Uh @ (A.matrix @ U)
    At = _kernels.apply_phases(np.ascontiguousarray(At, dtype=np.complex128), es.energies, t)
    out = U @ (At @ Uh)
    return LocalOperator(support=A.support, matrix=out, hermitian_hint=A.hermitian_hint)


# ---------------------------------------------------------------------------
# Pauli words as signed permutations
# ---------------------------------------------------------------------------


def _require_qubits(chain: Chain, sites) -> None:
    for x in sites:
        if chain.dims[x] != 2:
            raise UnsupportedDimensionError(
                f"site {x} has dimension {chain.dims[x]}; Pauli estimators need qubits"
            )


def _word_monomials(chain: Chain, support: tuple[int, ...]):
    """(perm, phase, label) for each non-identity Pauli word on support."""
    _require_qubits(chain, support)
    N = chain.n_sites
    D = chain.total_dim
    out = []
    labels = "IXYZ"
    k = len(support)
    for w in range(1, 4**k):
        digs = []
        v = w
        for _ in range(k):
            digs.append(v % 4)
            v //= 4
        digs.reverse()
        xmask = 0
        zmask = 0
        ny = 0
        lab = []
        for site, dg in zip(support, digs):
            bit = 1 << (N - 1 - site)
            if dg in (1, 2):
                xmask |= bit
            if dg in (2, 3):
                zmask |= bit
            if dg == 2:
                ny += 1
            lab.append(labels[dg])
        perm, phase = _kernels.pauli_word_perm_phase(D, xmask, zmask, ny)
        out.append((perm, phase, "".join(lab)))
    return out


class _NormEngine:
    """Spectral norms with per-key warm-started blocks for the iterative path."""

    BLOCK = 8

    def __init__(self, dim: int):
        self.dim = dim
        self._blocks: dict = {}
        b = min(self.BLOCK, dim)
        rng = np.random.default_rng(0x51ED5EED)
        self._V0 = rng.standard_normal((dim, b)) + 1j * rng.standard_normal((dim, b))

    def norm(self, C: np.ndarray, key=None) -> float:
        if self.dim <= DENSE_NORM_DIM:
            return float(np.linalg.svd(C, compute_uv=False)[0])
        fro = float(np.linalg.norm(C))
        if fro == 0.0:
            return 0.0
        V0 = self._blocks.get(key, self._V0)
        sigma, _, V, ok = _kernels.power_norm(
            np.ascontiguousarray(C, dtype=np.complex128),
            V0,
            _NORM_RTOL,
            1e-14 * fro,
            _NORM_MAXIT,
        )
        if key is not None:
            self._blocks[key] = V
        if not ok:
            return float(np.linalg.svd(C, compute_uv=False)[0])
        return float(sigma)


def _evolved_words(es: EigenSystem, words, t: float) -> list[np.ndarray]:
    """tau_t of each monomial word: V (word) V^dag via one gemm per word."""
    V = evolution_unitary(es, t)
    Vh = V.conj().T
    out = []
    for perm, phase, _ in words:
        VA = _kernels.right_multiply_monomial(V, perm, phase)
        out.append(VA @ Vh)
    return out


def _check_pair_geometry(X: tuple[int, ...], Y: tuple[int, ...]) -> None:
    if set(X) & set(Y):
        raise DomainError("X and Y must be disjoint")
    lo, hi = min(X), max(X)
    if any(lo <= y <= hi for y in Y):
        raise DomainError("Y must lie outside the convex hull of X")


def pauli_commutator_estimator(es: EigenSystem, X, Y, t: float) -> float:
    """max over non-identity Pauli words A on X, B on Y of ||[tau_t(A), B]||.

    A grid maximum over unit balls: lower-bounds the dynamical-localization
    supremum and never exceeds 2.
    """
    if es.chain is None:
        raise DomainError("eigensystem carries no chain; pass one to eigendecompose")
    X = tuple(sorted(int(x) for x in X))
    Y = tuple(sorted(int(y) for y in Y))
    _check_pair_geometry(X, Y)
    words_x = _word_monomials(es.chain, X)
    words_y = _word_monomials(es.chain, Y)
    engine = _NormEngine(es.dim // 2)
    best = 0.0
    for ai, TA in enumerate(_evolved_words(es, words_x, t)):
        for bi, (perm, phase, _) in enumerate(words_y):
            M = _kernels.involution_offdiag_block(TA, perm, phase)
            best = max(best, 2.0 * engine.norm(M, key=(ai, bi)))
    return best


def commutator_norm_sweep(
    es: EigenSystem,
    X,
    y_supports,
    times,
) -> np.ndarray:
    """Raw estimator values over a (time, Y-support) grid, sharing the
    evolution work of the X words across all Y."""
    if es.chain is None:
        raise DomainError("eigensystem carries no chain; pass one to eigendecompose")
    X = tuple(sorted(int(x) for x in X))
    y_list = [tuple(sorted(int(y) for y in Y)) for Y in y_supports]
    for Y in y_list:
        _check_pair_geometry(X, Y)
    words_x = _word_monomials(es.chain, X)
    words_y = [_word_monomials(es.chain, Y) for Y in y_list]
    engine = _NormEngine(es.dim // 2)
    times = np.asarray(times, dtype=float)
    out = np.zeros((times.shape[0], len(y_list)))
    for ti, t in enumerate(times):
        if t == 0.0:
            continue  # disjoint supports commute at t = 0
        evolved = _evolved_words(es, words_x, float(t))
        for yi, wy in enumerate(words_y):
            best = 0.0
            for ai, TA in enumerate(evolved):
                for bi, (perm, phase, _) in enumerate(wy):
                    M = _kernels.involution_offdiag_block(TA, perm, phase)
                    best = max(best, 2.0 * engine.norm(M, key=(ai, yi, bi)))
            out[ti, yi] = best
    return out


def commutator_trace(
    es: EigenSystem,
    X,
    Y,
    time_grid,
    chi: float | None = None,
    beta: float = 0.0,
) -> CommutatorTrace:
    """Estimator trace on a time grid; chi defaults to 4^|X|."""
    X = tuple(sorted(int(x) for x in X))
    Y = tuple(sorted(int(y) for y in Y))
    grid = np.asarray(time_grid, dtype=float)
    values = commutator_norm_sweep(es, X, [Y], grid)[:, 0]
    if chi is None:
        chi = float(4.0 ** len(X))
    if chi <= 0:
        raise DomainError("chi must be positive")
    return CommutatorTrace(X=X, Y=Y, time_grid=grid, values=values, chi=chi, beta=beta)


def sup_over_time(trace: CommutatorTrace) -> float:
    """Grid supremum of the weighted estimator values."""
    return float(trace.weighted_values().max())


def quasi_locality_estimator(es: EigenSystem, A: LocalOperator, r: int, t: float) -> float:
    """|| tau_t(A) - Pi_{B_r}(tau_t(A)) || with B_r the radius-r neighborhood
    of supp(A); decays as evolved observables stay nearly local."""
    if es.chain is None:
        raise DomainError("eigensystem carries no chain; pass one to eigendecompose")
    if r < 0:
        raise DomainError("radius must be nonnegative")
    chain = es.chain
    full = embed(A, chain)
    evolved = heisenberg_evolve(es, full, t)
    keep = tuple(
        x
        for x in chain.sites
        if min(abs(x - s) for s in A.support) <= r
    )
    if len(keep) == chain.n_sites:
        return 0.0
    projected = conditional_expectation(evolved, chain, keep)
    diff = evolved.matrix - embed(projected, chain).matrix
    engine = _NormEngine(es.dim)
    return engine.norm(diff)


def transmission_time(
    es: EigenSystem,
    epsilon: float,
    time_grid,
    bisection_tol: float = 1e-3,
) -> TransmissionTimeResult:
    """First time the end-to-end signal (X = {0}, Y = {last site}) exceeds
    epsilon, refined by bisection; censored at the grid horizon otherwise."""
    if es.chain is None:
        raise DomainError("eigensystem carries no chain; pass one to eigendecompose")
    if epsilon <= 0:
        raise DomainError("epsilon must be positive")
    grid = np.asarray(time_grid, dtype=float)
    if grid.ndim != 1 or grid.shape[0] < 2 or grid[0] != 0.0 or np.any(np.diff(grid) <= 0):
        raise DomainError("time grid must be increasing and start at 0")
    n_last = es.chain.n_sites - 1
    X, Y = (0,), (n_last,)
    words_x = _word_monomials(es.chain, X)
    words_y = _word_monomials(es.chain, Y)
    engine = _NormEngine(es.dim // 2)

    def exceeds(t: float) -> bool:
        if t == 0.0:
            return False
        # only the predicate matters here, so evolve words lazily and stop
        # at the first crossing pair
        V = evolution_unitary(es, t)
        Vh = V.conj().T
        for ai, (perm_a, phase_a, _) in enumerate(words_x):
            VA = _kernels.right_multiply_monomial(V, perm_a, phase_a)
            TA = VA @ Vh
            for bi, (perm, phase, _) in enumerate(words_y):
                M = _kernels.involution_offdiag_block(TA, perm, phase)
                # Frobenius bounds the spectral norm from above, so this
                # pair provably cannot cross (common deep in the localized
                # regime, where every signal stays far under epsilon)
                if 2.0 * float(np.linalg.norm(M)) <= epsilon:
                    continue
                if 2.0 * engine.norm(M, key=(ai, bi)) > epsilon:
                    return True
        return False

    horizon = float(grid[-1])
    lo = 0.0
    hit = None
    for t in grid[1:]:
        if exceeds(float(t)):
            hit = float(t)
            break
        lo = float(t)
    if hit is None:
        return TransmissionTimeResult(
            epsilon=epsilon, t_est=None, censored=True, bracket=None, horizon=horizon
        )
    hi = hit
    while (hi - lo) > bisection_tol:
        mid = 0.5 * (lo + hi)
        if exceeds(mid):
            hi = mid
        else:
            lo = mid
    return TransmissionTimeResult(
        epsilon=epsilon,
        t_est=0.5 * (lo + hi),
        censored=False,
        bracket=(lo, hi),
        horizon=horizon,
    )


# ---------------------------------------------------------------------------
# interaction picture
# ---------------------------------------------------------------------------


def interaction_picture_conjugator(
    es_base: EigenSystem, es_full: EigenSystem, t: float
) -> np.ndarray:
    """W(t) = e^{i t H0} e^{-i t H}: the unitary implementing the dynamics
    generated by the time-dependent rotated perturbation, so that the full
    evolution factors as tau_t^H = tau_t^{interaction} after tau_t^{H0}."""
    if es_base.dim != es_full.dim:
        raise DomainError("eigensystem dimensions differ")
    V0 = evolution_unitary(es_base, t)
    V = evolution_unitary(es_full, t)
    return V0 @ V.conj().T


def interaction_picture_estimator(
    es_base: EigenSystem, es_full: EigenSystem, X, Y, t: float
) -> float:
    """max over non-identity Pauli word pairs of ||[W(t)^dag A W(t), B]||."""
    chain = es_full.chain or es_base.chain
    if chain is None:
        raise DomainError("eigensystem carries no chain; pass one to eigendecompose")
    X = tuple(sorted(int(x) for x in X))
    Y = tuple(sorted(int(y) for y in Y))
    _check_pair_geometry(X, Y)
    W = interaction_picture_conjugator(es_base, es_full, t)
    Wh = W.conj().T
    engine = _NormEngine(es_full.dim // 2)
    best = 0.0
    for ai, (perm, phase, _) in enumerate(_word_monomials(chain, X)):
        AW = _kernels.right_multiply_monomial(W, perm, phase)
        TA = Wh @ AW
        for bi, (permb, phaseb, _) in enumerate(_word_monomials(chain, Y)):
            M = _kernels.involution_offdiag_block(TA, permb, phaseb)
            best = max(best, 2.0 * engine.norm(M, key=(ai, bi)))
    return best
