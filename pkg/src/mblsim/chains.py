"""Finite chains, local operators, and the tensor conventions tying them together.

Sites are labeled 0..n left to right. Tensor factors are ordered by ascending
site label (smallest site = leftmost kron factor), and a full-chain basis
index is the big-endian digit string of the per-site states. Every module in
the package builds on these conventions; they are frozen in CONVENTION.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import prod
from typing import Iterator

import numpy as np

from ._kernels import power_norm
from .errors import DomainError

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)

PAULI_BY_LABEL = {"I": IDENTITY_2, "X": SIGMA_X, "Y": SIGMA_Y, "Z": SIGMA_Z}

# Exact operator norm switches to iterative above this dimension.
DENSE_NORM_DIM = 512


@dataclass(frozen=True)
class TensorConvention:
    """Ordering rules for embedding local operators on a chain."""

    site_order: str = "ascending"  # smallest site label is the leftmost factor
    index_encoding: str = "big-endian"  # site 0 is the most significant digit

    def axis_of(self, site: int, support: tuple[int, ...]) -> int:
        """Tensor axis of `site` inside an operator supported on `support`."""
        return support.index(site)


CONVENTION = TensorConvention()


@dataclass(frozen=True)
class Chain:
    """A finite chain of sites with per-site Hilbert space dimensions."""

    dims: tuple[int, ...]

    def __post_init__(self):
        if len(self.dims) == 0:
            raise DomainError("chain needs at least one site")
        if any(int(d) < 2 for d in self.dims):
            raise DomainError("site dimensions must be >= 2")
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))

    @classmethod
    def spins(cls, n_sites: int) -> "Chain":
        """Qubit chain with n_sites sites (labels 0..n_sites-1)."""
        if n_sites < 1:
            raise DomainError("n_sites must be >= 1")
        return cls(dims=(2,) * n_sites)

    @property
    def n_sites(self) -> int:
        return len(self.dims)

    @property
    def sites(self) -> tuple[int, ...]:
        return tuple(range(len(self.dims)))

    @property
    def total_dim(self) -> int:
        return prod(self.dims)

    def dims_of(self, support: tuple[int, ...]) -> tuple[int, ...]:
        return tuple(self.dims[x] for x in support)

    def validate_support(self, support: tuple[int, ...]) -> None:
        _as_sorted_support(support)
        if any(x < 0 or x >= self.n_sites for x in support):
            raise DomainError(f"support {support} outside chain of {self.n_sites} sites")


def _as_sorted_support(support) -> tuple[int, ...]:
    sup = tuple(int(x) for x in support)
    if len(set(sup)) != len(sup):
        raise DomainError(f"support has repeated sites: {sup}")
    if any(sup[i] >= sup[i + 1] for i in range(len(sup) - 1)):
        raise DomainError(f"support must be strictly ascending: {sup}")
    return sup


@dataclass(frozen=True)
class LocalOperator:
    """An operator together with the ascending site labels it acts on.

    The matrix is stored in the tensor basis of the support sites under
    CONVENTION. Empty support means a scalar multiple of the identity,
    held as a 1x1 matrix.
    """

    support: tuple[int, ...]
    matrix: np.ndarray
    hermitian_hint: bool | None = None

    def __post_init__(self):
        object.__setattr__(self, "support", _as_sorted_support(self.support))
        m = np.asarray(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DomainError(f"operator matrix must be square, got {m.shape}")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def basis_index(digits, dims) -> int:
    """Big-endian basis index of a per-site digit string."""
    idx = 0
    for d, dim in zip(digits, dims):
        if not 0 <= d < dim:
            raise DomainError(f"digit {d} out of range for dimension {dim}")
        idx = idx * dim + d
    return idx


def digits_of(index: int, dims) -> tuple[int, ...]:
    """Per-site digit string of a big-endian basis index."""
    out = []
    for dim in reversed(dims):
        out.append(index % dim)
        index //= dim
    if index:
        raise DomainError("index out of range for the given dimensions")
    return tuple(reversed(out))


def embed(op: LocalOperator, chain: Chain) -> LocalOperator:
    """Embed a local operator onto the full chain (identity elsewhere).

    Multiplicative: embed(A @ B) == embed(A) @ embed(B) for operators on the
    same support, and embedding commutes with sums and adjoints.
    """
    chain.validate_support(op.support)
    sup_dims = chain.dims_of(op.support)
    if op.dim != prod(sup_dims):
        raise DomainError(
            f"matrix dim {op.dim} does not match support dims {sup_dims}"
        )
    rest = tuple(x for x in chain.sites if x not in set(op.support))
    rest_dims = chain.dims_of(rest)
    d_rest = prod(rest_dims)
    full = np.kron(op.matrix.astype(complex), np.eye(d_rest, dtype=complex))
    k = len(op.support) + len(rest)
    tensor = full.reshape(sup_dims + rest_dims + sup_dims + rest_dims)
    order = np.argsort(np.array(op.support + rest, dtype=int), kind="stable")
    perm = list(order) + [k + int(i) for i in order]
    tensor = tensor.transpose(perm)
    D = chain.total_dim
    return LocalOperator(
        support=chain.sites,
        matrix=np.ascontiguousarray(tensor.reshape(D, D)),
        hermitian_hint=op.hermitian_hint,
    )


def _embed_on_support(op: LocalOperator, chain: Chain, target: tuple[int, ...]) -> np.ndarray:
    """Matrix of op embedded on the (ascending) superset support `target`."""
    sub = Chain(dims=chain.dims_of(target))
    relabeled = LocalOperator(
        support=tuple(target.index(x) for x in op.support),
        matrix=op.matrix,
        hermitian_hint=op.hermitian_hint,
    )
    return embed(relabeled, sub).matrix


def commutator(A: LocalOperator, B: LocalOperator, chain: Chain) -> LocalOperator:
    """[A, B] on the union of the supports (zero operator when disjoint only
    if the factors commute; disjoint supports always give zero)."""
    target = tuple(sorted(set(A.support) | set(B.support)))
    a = _embed_on_support(A, chain, target)
    b = _embed_on_support(B, chain, target)
    return LocalOperator(support=target, matrix=a @ b - b @ a, hermitian_hint=None)


def operator_norm(A: LocalOperator | np.ndarray, rtol: float = 1e-10, maxit: int = 300) -> float:
    """Largest singular value. Exact SVD up to DENSE_NORM_DIM, block power
    iteration with a dense fallback above it."""
    M = A.matrix if isinstance(A, LocalOperator) else np.asarray(A)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DomainError(f"operator_norm needs a square matrix, got {M.shape}")
    if M.shape[0] <= DENSE_NORM_DIM:
        return float(np.linalg.svd(M, compute_uv=False)[0])
    fro = float(np.linalg.norm(M))
    if fro == 0.0:
        return 0.0
    C = np.ascontiguousarray(M, dtype=np.complex128)
    n = M.shape[0]
    b = min(8, n)
    rng = np.random.default_rng(0x9E3779B9)
    V0 = rng.standard_normal((n, b)) + 1j * rng.standard_normal((n, b))
    sigma, _, _, ok = power_norm(C, V0, rtol, 1e-14 * fro, maxit)
    if not ok:
        # stagnated short of the accuracy contract; fall back to exact SVD
        return float(np.linalg.svd(M, compute_uv=False)[0])
    return float(sigma)


def conditional_expectation(op: LocalOperator, chain: Chain, keep) -> LocalOperator:
    """Normalized-partial-trace conditional expectation onto the sites `keep`.

    Equals the average of (U x 1) op (U x 1)^dag over a unitary operator
    basis of the traced factor; identity factors on keep \\ support are
    dropped, so the result's support is support & keep.
    """
    keep_set = set(int(x) for x in keep)
    chain.validate_support(tuple(sorted(keep_set)))
    sup = op.support
    sup_dims = chain.dims_of(sup)
    if op.dim != prod(sup_dims):
        raise DomainError("matrix dim does not match support dims")
    kept_pos = [i for i, x in enumerate(sup) if x in keep_set]
    traced_pos = [i for i, x in enumerate(sup) if x not in keep_set]
    k = len(sup)
    d_keep = prod(sup_dims[i] for i in kept_pos) if kept_pos else 1
    d_tr = prod(sup_dims[i] for i in traced_pos) if traced_pos else 1
    tensor = op.matrix.reshape(sup_dims + sup_dims)
    perm = kept_pos + traced_pos + [k + i for i in kept_pos] + [k + i for i in traced_pos]
    arr = tensor.transpose(perm).reshape(d_keep, d_tr, d_keep, d_tr)
    reduced = np.einsum("ajbj->ab", arr) / d_tr
    new_support = tuple(sup[i] for i in kept_pos)
    return LocalOperator(
        support=new_support, matrix=reduced, hermitian_hint=op.hermitian_hint
    )


def build_S(m: int, d: int) -> np.ndarray:
    """Diagonal d x d matrix with +1 in the first slot and -1 in slot m.

    For d = 2, m = 2 this is sigma_z; products of these over sites span the
    diagonal couplings used by the first-kind integrals of motion.
    """
    if not (2 <= m <= d):
        raise DomainError(f"need 2 <= m <= d, got m={m}, d={d}")
    S = np.zeros((d, d), dtype=complex)
    S[0, 0] = 1.0
    S[m - 1, m - 1] = -1.0
    return S


def pauli_words(support) -> Iterator[LocalOperator]:
    """All 4^k Pauli words on a qubit support, identity word first.

    Ordering: base-4 digit strings over (I, X, Y, Z) with the smallest site
    as the most significant digit.
    """
    sup = _as_sorted_support(support)
    k = len(sup)
    labels = "IXYZ"
    for w in range(4**k):
        digs = []
        v = w
        for _ in range(k):
            digs.append(v % 4)
            v //= 4
        digs.reverse()
        mat = np.array([[1.0 + 0.0j]])
        for dg in digs:
            mat = np.kron(mat, PAULI_BY_LABEL[labels[dg]])
        yield LocalOperator(support=sup, matrix=mat, hermitian_hint=True)


def pauli_word_labels(k: int) -> list[str]:
    """Label strings ('I','X','Y','Z' per site) in pauli_words order."""
    labels = "IXYZ"
    out = []
    for w in range(4**k):
        digs = []
        v = w
        for _ in range(k):
            digs.append(v % 4)
            v //= 4
        digs.reverse()
        out.append("".join(labels[d] for d in digs))
    return out
