"""Disordered spin-chain models: parameter records, disorder sampling, builders.

Randomness is counter-based and splittable: a Philox stream is keyed by
(seed, stream_id), and experiment code derives stream_id as
realization_index * NUM_STREAM_ROLES + role. Sampling is therefore
independent of evaluation order and thread count.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .chains import (
    Chain,
    LocalOperator,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    embed,
)
from .errors import ConfigurationError, DomainError

# substream roles: fields, couplings, anisotropies, bond mask, perturbation blocks
ROLE_FIELDS = 0
ROLE_COUPLINGS = 1
ROLE_ANISOTROPIES = 2
ROLE_MASK = 3
ROLE_PERTURBATION = 4
NUM_STREAM_ROLES = 8

_DISTRIBUTIONS = ("constant", "uniform", "bernoulli")


@dataclass(frozen=True)
class DisorderSpec:
    """One scalar disorder source: distribution plus its Philox stream."""

    distribution: str
    seed: int = 0
    stream_id: int = 0
    value: float = 0.0  # constant
    low: float = -1.0  # uniform
    high: float = 1.0  # uniform
    p_zero: float = 0.5  # bernoulli: probability of drawing 0

    def __post_init__(self):
        if self.distribution not in _DISTRIBUTIONS:
            raise ConfigurationError(
                f"unknown distribution {self.distribution!r}, expected one of {_DISTRIBUTIONS}"
            )
        if not 0 <= self.seed < 2**64:
            raise ConfigurationError("seed must fit in 64 bits")
        if not 0 <= self.stream_id < 2**64:
            raise ConfigurationError("stream_id must fit in 64 bits")
        if self.distribution == "uniform" and not self.low < self.high:
            raise ConfigurationError("uniform needs low < high")
        if self.distribution == "bernoulli" and not 0.0 <= self.p_zero <= 1.0:
            raise ConfigurationError("p_zero must lie in [0, 1]")

    def with_stream(self, stream_id: int) -> "DisorderSpec":
        return DisorderSpec(
            distribution=self.distribution,
            seed=self.seed,
            stream_id=stream_id,
            value=self.value,
            low=self.low,
            high=self.high,
            p_zero=self.p_zero,
        )


def substream_id(realization: int, role: int) -> int:
    """stream_id for (realization, role) under the documented scheme."""
    if realization < 0 or not 0 <= role < NUM_STREAM_ROLES:
        raise ConfigurationError("bad realization index or stream role")
    return realization * NUM_STREAM_ROLES + role


def _generator(spec: DisorderSpec) -> np.random.Generator:
    key = (int(spec.seed) << 64) + int(spec.stream_id)
    return np.random.Generator(np.random.Philox(key=key))


def sample_sequence(spec: DisorderSpec, length: int) -> np.ndarray:
    """Draw a length-`length` disorder sequence for the given stream."""
    if length < 0:
        raise DomainError("length must be nonnegative")
    if spec.distribution == "constant":
        return np.full(length, float(spec.value))
    rng = _generator(spec)
    if spec.distribution == "uniform":
        return rng.uniform(spec.low, spec.high, size=length)
    # bernoulli: 0 with probability p_zero, else 1
    return (rng.random(length) >= spec.p_zero).astype(np.float64)


@dataclass(frozen=True)
class XYParams:
    """Anisotropic XY chain on sites 0..n:

    H = sum_j mu_j [(1+gamma_j) XX + (1-gamma_j) YY] + lam * sum_j omega_j Z_j

    with n bond couplings mu, n anisotropies gamma, n+1 fields omega.
    """

    n: int
    mu: np.ndarray
    gamma: np.ndarray
    omega: np.ndarray
    lam: float = 0.0

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("need n >= 1 (at least two sites)")
        for name, arr, want in (
            ("mu", self.mu, self.n),
            ("gamma", self.gamma, self.n),
            ("omega", self.omega, self.n + 1),
        ):
            a = np.asarray(arr, dtype=float)
            if a.shape != (want,):
                raise DomainError(f"{name} must have shape ({want},), got {a.shape}")
            object.__setattr__(self, name, a)


@dataclass(frozen=True)
class IsingParams:
    """Quantum Ising chain on sites 0..n:

    H = sum_x J_x Z_x Z_{x+1} + sum_x (gamma_scale * big_gamma_x X_x + h_x Z_x)
    """

    n: int
    j: np.ndarray
    big_gamma: np.ndarray
    h: np.ndarray
    gamma_scale: float = 1.0

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("need n >= 1 (at least two sites)")
        for name, arr, want in (
            ("j", self.j, self.n),
            ("big_gamma", self.big_gamma, self.n + 1),
            ("h", self.h, self.n + 1),
        ):
            a = np.asarray(arr, dtype=float)
            if a.shape != (want,):
                raise DomainError(f"{name} must have shape ({want},), got {a.shape}")
            object.__setattr__(self, name, a)


@dataclass(frozen=True)
class SparsePerturbation:
    """Sparse bond perturbation: delta_x in {0,1} gates the bond term psi_x."""

    delta: np.ndarray
    p_zero: float
    psi: tuple[LocalOperator, ...]
    max_norm: float

    def __post_init__(self):
        d = np.asarray(self.delta, dtype=np.int64)
        if d.ndim != 1 or np.any((d != 0) & (d != 1)):
            raise DomainError("delta must be a 1-d 0/1 mask")
        if len(self.psi) != d.shape[0]:
            raise DomainError("need one psi term per bond")
        object.__setattr__(self, "delta", d)


class Interaction:
    """Map from supports to Hermitian terms, with merging on repeated supports."""

    def __init__(self, chain: Chain):
        self.chain = chain
        self.terms: dict[tuple[int, ...], LocalOperator] = {}

    def add(self, op: LocalOperator) -> None:
        self.chain.validate_support(op.support)
        m = np.asarray(op.matrix, dtype=complex)
        scale = max(1.0, float(np.linalg.norm(m)))
        if np.linalg.norm(m - m.conj().T) > 1e-12 * scale:
            raise DomainError(f"interaction term on {op.support} is not Hermitian")
        key = op.support
        if key in self.terms:
            merged = self.terms[key].matrix + m
            self.terms[key] = LocalOperator(support=key, matrix=merged, hermitian_hint=True)
        else:
            self.terms[key] = LocalOperator(support=key, matrix=m, hermitian_hint=True)

    def items(self):
        return sorted(self.terms.items())

    def local_terms(self) -> list[LocalOperator]:
        return [op for _, op in self.items()]

    def total(self) -> LocalOperator:
        """The full Hamiltonian: sum of all terms embedded on the chain."""
        D = self.chain.total_dim
        H = np.zeros((D, D), dtype=complex)
        for _, op in self.items():
            H += embed(op, self.chain).matrix
        return LocalOperator(support=self.chain.sites, matrix=H, hermitian_hint=True)

    def max_term_norm(self) -> float:
        out = 0.0
        for _, op in self.items():
            out = max(out, float(np.linalg.norm(op.matrix, 2)))
        return out


def build_xy_hamiltonian(params: XYParams) -> tuple[Interaction, LocalOperator]:
    """XY interaction and its assembled Hamiltonian on Chain.spins(n+1)."""
    chain = Chain.spins(params.n + 1)
    phi = Interaction(chain)
    xx = np.kron(SIGMA_X, SIGMA_X)
    yy = np.kron(SIGMA_Y, SIGMA_Y)
    for j in range(params.n):
        m = params.mu[j] * ((1.0 + params.gamma[j]) * xx + (1.0 - params.gamma[j]) * yy)
        phi.add(LocalOperator(support=(j, j + 1), matrix=m, hermitian_hint=True))
    if params.lam != 0.0:
        for j in range(params.n + 1):
            m = params.lam * params.omega[j] * SIGMA_Z
            phi.add(LocalOperator(support=(j,), matrix=m, hermitian_hint=True))
    return phi, phi.total()


def build_ising_hamiltonian(params: IsingParams) -> tuple[Interaction, LocalOperator]:
    """Ising interaction (ZZ bonds, transverse + longitudinal fields) and H."""
    chain = Chain.spins(params.n + 1)
    phi = Interaction(chain)
    zz = np.kron(SIGMA_Z, SIGMA_Z)
    for x in range(params.n):
        phi.add(LocalOperator(support=(x, x + 1), matrix=params.j[x] * zz, hermitian_hint=True))
    for x in range(params.n + 1):
        m = params.gamma_scale * params.big_gamma[x] * SIGMA_X + params.h[x] * SIGMA_Z
        phi.add(LocalOperator(support=(x,), matrix=m, hermitian_hint=True))
    return phi, phi.total()


def make_sparse_perturbation(
    n: int,
    p_zero: float,
    seed: int,
    stream_id: int = 0,
    strength: float = 1.0,
    blocks: Sequence[np.ndarray] | None = None,
) -> SparsePerturbation:
    """Bernoulli bond mask plus per-bond Hermitian two-site terms.

    Default block is strength * ZZ on each gated bond; custom 4x4 Hermitian
    blocks may be supplied per bond.
    """
    mask_spec = DisorderSpec(
        distribution="bernoulli", seed=seed, stream_id=stream_id, p_zero=p_zero
    )
    delta = sample_sequence(mask_spec, n).astype(np.int64)
    zz = strength * np.kron(SIGMA_Z, SIGMA_Z)
    psi = []
    max_norm = 0.0
    for x in range(n):
        m = zz if blocks is None else np.asarray(blocks[x], dtype=complex)
        if m.shape != (4, 4):
            raise DomainError("perturbation blocks must be 4x4 (two qubit sites)")
        op = LocalOperator(support=(x, x + 1), matrix=m, hermitian_hint=True)
        psi.append(op)
        max_norm = max(max_norm, float(np.linalg.norm(m, 2)))
    return SparsePerturbation(delta=delta, p_zero=p_zero, psi=tuple(psi), max_norm=max_norm)


def apply_sparse_perturbation(
    phi: Interaction, pert: SparsePerturbation
) -> tuple[Interaction, LocalOperator]:
    """New interaction with delta_x * psi_x added on each gated bond."""
    n_bonds = pert.delta.shape[0]
    if n_bonds != phi.chain.n_sites - 1:
        raise DomainError(
            f"perturbation has {n_bonds} bonds, chain has {phi.chain.n_sites - 1}"
        )
    out = Interaction(phi.chain)
    for _, op in phi.items():
        out.add(op)
    for x in range(n_bonds):
        if pert.delta[x]:
            out.add(pert.psi[x])
    return out, out.total()


def longest_zero_run(delta) -> tuple[int, int]:
    """(length, start index) of the longest zero run; (0, -1) when none."""
    arr = np.ascontiguousarray(np.asarray(delta, dtype=np.int64))
    length, start = _kernels.longest_zero_run(arr)
    return int(length), int(start)
