"""Local integrals of motion for disordered qubit chains.

Second kind: infinite-time averages of local Hamiltonian terms, realized
exactly by dephasing in the eigenbasis (off-diagonal entries outside
near-degenerate blocks are zeroed). First kind: the eigenbasis is matched
greedily to the computational basis, the permuted diagonal Hamiltonian is
expanded over products of sigma_z via a Walsh-Hadamard transform, and the
resulting couplings phi(X) feed a two-point decay kernel and a commutator
bound check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .chains import Chain, LocalOperator, conditional_expectation, embed
from .dynamics import EigenSystem, _NormEngine, _word_monomials, pauli_commutator_estimator
from .errors import DomainError, UnsupportedDimensionError

DEFAULT_GAP_TOL_SCALE = 1e-9


@dataclass(frozen=True)
class DephasedOperator:
    """An operator commuting with H to within gap_tol times its norm."""

    operator: LocalOperator
    gap_tol: float
    source_support: tuple[int, ...]


@dataclass(frozen=True)
class LiomFirstKind:
    """Diagonal expansion of H in a basis-matched frame.

    assignment[b] is the eigenvector column matched to computational basis
    state b; phi[mask] is the coupling of prod_{x in mask} Z_x (site x on
    bit n_sites-1-x); two_point[x, y] = sum of |phi| over masks containing
    both x and y.
    """

    assignment: np.ndarray
    unitary: np.ndarray
    diagonal: np.ndarray
    phi: np.ndarray
    two_point: np.ndarray
    n_sites: int


def finite_time_average(es: EigenSystem, A: LocalOperator, T: float) -> LocalOperator:
    """(1/T) integral_0^T tau_t(A) dt: eigenbasis entries pick up the factor
    (e^{iT d} - 1)/(iT d) with d the energy gap."""
    if T <= 0:
        raise DomainError("averaging window T must be positive")
    if A.dim != es.dim:
        raise DomainError("operator dim does not match eigensystem; embed first")
    U = es.basis
    Uh = U.conj().T if np.iscomplexobj(U) else U.T
    At = np.ascontiguousarray(Uh @ (A.matrix @ U), dtype=np.complex128)
    At = _kernels.apply_average_kernel(At, es.energies, float(T))
    out = U @ (At @ Uh)
    return LocalOperator(support=A.support, matrix=out, hermitian_hint=A.hermitian_hint)


def default_gap_tol(es: EigenSystem) -> float:
    """1e-9 times the spectral norm of H."""
    scale = float(np.max(np.abs(es.energies))) if es.energies.size else 0.0
    return DEFAULT_GAP_TOL_SCALE * max(scale, 1.0)


def dephase(es: EigenSystem, A: LocalOperator, gap_tol: float | None = None) -> DephasedOperator:
    """Zero eigenbasis entries across gaps larger than gap_tol.

    This is the exact T -> infinity limit of finite_time_average away from
    degeneracies, and the result commutes with H up to gap_tol * ||A||.
    """
    if A.dim != es.dim:
        raise DomainError("operator dim does not match eigensystem; embed first")
    tol = default_gap_tol(es) if gap_tol is None else float(gap_tol)
    if tol < 0:
        raise DomainError("gap_tol must be nonnegative")
    U = es.basis
    Uh = U.conj().T if np.iscomplexobj(U) else U.T
    At = np.ascontiguousarray(Uh @ (A.matrix @ U), dtype=np.complex128)
    At = _kernels.apply_gap_mask(At, es.energies, tol)
    out = U @ (At @ Uh)
    op = LocalOperator(support=A.support, matrix=out, hermitian_hint=A.hermitian_hint)
    return DephasedOperator(operator=op, gap_tol=tol, source_support=A.support)


def _ball(chain: Chain, support: tuple[int, ...], r: int) -> tuple[int, ...]:
    return tuple(x for x in chain.sites if min(abs(x - s) for s in support) <= r)


def quasi_locality_profile(
    es: EigenSystem, op: LocalOperator, source_support: tuple[int, ...], radii
) -> np.ndarray:
    """||op - Pi_{B_r(source)}(op)|| over the given radii."""
    if es.chain is None:
        raise DomainError("eigensystem carries no chain")
    chain = es.chain
    engine = _NormEngine(es.dim)
    out = np.zeros(len(radii))
    for i, r in enumerate(radii):
        keep = _ball(chain, source_support, int(r))
        if len(keep) == chain.n_sites:
            out[i] = 0.0
            continue
        projected = conditional_expectation(op, chain, keep)
        out[i] = engine.norm(op.matrix - embed(projected, chain).matrix)
    return out


def build_lioms_second_kind(
    es: EigenSystem,
    terms: list[LocalOperator],
    gap_tol: float | None = None,
    radii=None,
) -> tuple[list[DephasedOperator], np.ndarray]:
    """Dephase each local term of H; also return quasi-locality profiles.

    Validates that the terms sum to H (eigen-reconstructed) to 1e-12
    relative; the dephased terms then still sum to H exactly up to the same
    transforms, since dephasing fixes H itself.
    """
    if es.chain is None:
        raise DomainError("eigensystem carries no chain")
    chain = es.chain
    U = es.basis
    Uh = U.conj().T if np.iscomplexobj(U) else U.T
    H = (U * es.energies[None, :]) @ Uh
    total = np.zeros_like(H, dtype=complex)
    for term in terms:
        total = total + embed(term, chain).matrix
    scale = max(1.0, float(np.linalg.norm(H)))
    if np.linalg.norm(total - H) > 1e-12 * scale:
        raise DomainError("terms do not sum to the eigensystem's Hamiltonian")
    if radii is None:
        radii = list(range(chain.n_sites))
    dephased = []
    profiles = np.zeros((len(terms), len(radii)))
    for i, term in enumerate(terms):
        full = embed(term, chain)
        dt = dephase(es, full, gap_tol=gap_tol)
        dt = DephasedOperator(
            operator=dt.operator, gap_tol=dt.gap_tol, source_support=term.support
        )
        dephased.append(dt)
        profiles[i] = quasi_locality_profile(es, dt.operator, term.support, radii)
    return dephased, profiles


def _require_qubit_chain(chain: Chain) -> int:
    if any(d != 2 for d in chain.dims):
        raise UnsupportedDimensionError("first-kind decomposition needs a qubit chain")
    return chain.n_sites


def liom_first_kind_decompose(es: EigenSystem) -> LiomFirstKind:
    """Greedy max-|overlap| matching of eigenvectors to basis states, then a
    Walsh-Hadamard expansion of the matched diagonal over Z-products."""
    if es.chain is None:
        raise DomainError("eigensystem carries no chain")
    N = _require_qubit_chain(es.chain)
    D = es.dim
    U = np.asarray(es.basis)
    weight = np.abs(U) ** 2
    order = np.argsort(weight.ravel(), kind="stable")[::-1]
    assignment = np.full(D, -1, dtype=np.int64)
    col_taken = np.zeros(D, dtype=bool)
    assigned = 0
    for flat in order:
        b, col = divmod(int(flat), D)
        if assignment[b] >= 0 or col_taken[col]:
            continue
        assignment[b] = col
        col_taken[col] = True
        assigned += 1
        if assigned == D:
            break
    U_loc = U[:, assignment].astype(complex, copy=True)
    dom = U_loc[np.arange(D), np.arange(D)]
    fix = np.where(np.abs(dom) > 0, dom / np.where(np.abs(dom) > 0, np.abs(dom), 1.0), 1.0)
    U_loc = U_loc / fix[None, :]
    diagonal = es.energies[assignment].copy()
    phi = diagonal.astype(np.float64).copy()
    _kernels.fwht_inplace(phi)
    phi /= D
    two_point = _kernels.walsh_two_point(phi, N)
    return LiomFirstKind(
        assignment=assignment,
        unitary=U_loc,
        diagonal=diagonal,
        phi=phi,
        two_point=two_point,
        n_sites=N,
    )


def phi_of(lf: LiomFirstKind, sites) -> float:
    """Coupling of the Z-product over the given site subset."""
    mask = 0
    for x in sites:
        if not 0 <= int(x) < lf.n_sites:
            raise DomainError(f"site {x} outside chain")
        mask |= 1 << (lf.n_sites - 1 - int(x))
    return float(lf.phi[mask])


def reconstruct_diagonal(lf: LiomFirstKind) -> np.ndarray:
    """Inverse Walsh transform: diag entries of the matched Hamiltonian."""
    v = lf.phi.copy()
    _kernels.fwht_inplace(v)
    return v


def unitary_quasilocality_profile(U: np.ndarray, chain: Chain, radii=None) -> np.ndarray:
    """G[x, r] = max over single-site Paulis sigma at x of
    ||U^dag sigma_x U - Pi_{B_r(x)}(U^dag sigma_x U)||."""
    N = _require_qubit_chain(chain)
    if U.shape != (chain.total_dim, chain.total_dim):
        raise DomainError("unitary dimension does not match chain")
    if radii is None:
        radii = list(range(N))
    Uh = U.conj().T
    engine = _NormEngine(U.shape[0])
    out = np.zeros((N, len(radii)))
    for x in range(N):
        transformed = []
        for perm, phase, _ in _word_monomials(chain, (x,)):
            # U^dag sigma = (U^dag)[:, perm] * phase, then right-multiply by U
            At = _kernels.right_multiply_monomial(np.ascontiguousarray(Uh), perm, phase) @ U
            transformed.append(At)
        for ri, r in enumerate(radii):
            keep = _ball(chain, (x,), int(r))
            if len(keep) == N:
                out[x, ri] = 0.0
                continue
            best = 0.0
            for At in transformed:
                op = LocalOperator(support=chain.sites, matrix=At)
                proj = conditional_expectation(op, chain, keep)
                best = max(best, engine.norm(At - embed(proj, chain).matrix))
            out[x, ri] = best
    return out


def decay_envelope(lf: LiomFirstKind) -> np.ndarray:
    """Nonincreasing distance envelope of the two-point kernel:
    F[r] = max over pairs at distance >= r of two_point[x, y]."""
    N = lf.n_sites
    env = np.zeros(N)
    for x in range(N):
        for y in range(N):
            r = abs(x - y)
            env[r] = max(env[r], lf.two_point[x, y])
    for r in range(N - 2, -1, -1):
        env[r] = max(env[r], env[r + 1])
    return env


def verify_liom_bound(
    lf: LiomFirstKind,
    es: EigenSystem,
    X,
    Y,
    t: float,
    lam_frac: float = 0.25,
    envelope: np.ndarray | None = None,
) -> dict:
    """Check the diagonal-expansion commutator bound

        estimator(X, Y, t) <= 2 [ D_X + D_Y + |t| C_n sum_{x in X_l, y in Y_l} F(|x-y|) ]

    with D terms the conditional-expectation errors of the matched frame on
    the fattened regions X_l, Y_l (radius lam_frac * d(X, Y)) and C_n the
    envelope-normalized coupling constant (<= 1 for the built-in envelope).
    """
    if es.chain is None:
        raise DomainError("eigensystem carries no chain")
    chain = es.chain
    N = lf.n_sites
    X = tuple(sorted(int(x) for x in X))
    Y = tuple(sorted(int(y) for y in Y))
    if set(X) & set(Y):
        raise DomainError("X and Y must be disjoint")
    d_xy = min(abs(x - y) for x in X for y in Y)
    radius = lam_frac * d_xy
    X_l = tuple(w for w in range(N) if min(abs(w - x) for x in X) <= radius)
    Y_l = tuple(w for w in range(N) if min(abs(w - y) for y in Y) <= radius)
    if set(X_l) & set(Y_l):
        raise DomainError("fattened regions overlap; reduce lam_frac")
    F = decay_envelope(lf) if envelope is None else np.asarray(envelope, dtype=float)
    if np.any(F <= 0):
        raise DomainError("envelope must be positive")
    ratios = [
        lf.two_point[x, y] / F[abs(x - y)] for x in range(N) for y in range(N)
    ]
    c_n = float(max(ratios))
    f_sum = float(sum(F[abs(x - y)] for x in X_l for y in Y_l))
    Uh = lf.unitary.conj().T
    engine = _NormEngine(es.dim)

    Uh_c = np.ascontiguousarray(Uh)

    def region_error(sites: tuple[int, ...], region: tuple[int, ...]) -> float:
        best = 0.0
        for perm, phase, _ in _word_monomials(chain, sites):
            At = _kernels.right_multiply_monomial(Uh_c, perm, phase) @ lf.unitary
            op = LocalOperator(support=chain.sites, matrix=At)
            proj = conditional_expectation(op, chain, region)
            best = max(best, engine.norm(At - embed(proj, chain).matrix))
        return best

    d_x = region_error(X, X_l)
    d_y = region_error(Y, Y_l)
    rhs = 2.0 * (d_x + d_y + abs(t) * c_n * f_sum)
    lhs = pauli_commutator_estimator(es, X, Y, t)
    return {
        "lhs": lhs,
        "rhs": rhs,
        "satisfied": bool(lhs <= rhs + 1e-10),
        "d_x": d_x,
        "d_y": d_y,
        "c_n": c_n,
        "f_sum": f_sum,
        "region_x": X_l,
        "region_y": Y_l,
    }
