"""Lattice containers, embeddings, and the conditional expectation."""

import numpy as np
import pytest

from mblsim.chains import (
    Chain,
    LocalOperator,
    build_S,
    commutator,
    conditional_expectation,
    embed,
    operator_norm,
    pauli_word_labels,
    pauli_words,
)
from mblsim.errors import DomainError

from conftest import random_local_operator


def test_chain_basics():
    c = Chain.spins(4)
    assert c.n_sites == 4
    assert c.total_dim == 16
    assert c.sites == (0, 1, 2, 3)
    assert c.dims_of((1, 3)) == (2, 2)
    with pytest.raises(DomainError):
        c.validate_support((2, 1))
    with pytest.raises(DomainError):
        c.validate_support((3, 4))


def test_local_operator_validation():
    with pytest.raises(DomainError):
        LocalOperator((1, 1), np.eye(4))
    with pytest.raises(DomainError):
        LocalOperator((0,), np.ones((2, 3)))
    # dim mismatch with the support is caught at embed time
    with pytest.raises(DomainError):
        embed(LocalOperator((0, 1), np.eye(2)), Chain.spins(3))


def test_embedding_homomorphism(rng):
    # embed(A)embed(B) == embed(AB) for same-support A, B; 100 instances
    chain = Chain.spins(5)
    for _ in range(100):
        k = int(rng.integers(1, 4))
        support = tuple(sorted(rng.choice(5, size=k, replace=False)))
        A = random_local_operator(rng, support)
        B = random_local_operator(rng, support)
        AB = LocalOperator(support, A.matrix @ B.matrix)
        lhs = embed(A, chain).matrix @ embed(B, chain).matrix
        rhs = embed(AB, chain).matrix
        assert np.abs(lhs - rhs).max() < 1e-10


def test_embedding_disjoint_factors(rng):
    # operators on disjoint supports embed to commuting factors
    chain = Chain.spins(4)
    A = random_local_operator(rng, (0, 2))
    B = random_local_operator(rng, (1, 3))
    ea, eb = embed(A, chain).matrix, embed(B, chain).matrix
    assert np.abs(ea @ eb - eb @ ea).max() < 1e-10


def test_embedding_norm_preserved(rng):
    chain = Chain.spins(4)
    A = random_local_operator(rng, (1, 2))
    assert abs(operator_norm(embed(A, chain)) - operator_norm(A)) < 1e-10


def test_commutator_support_and_value(rng):
    chain = Chain.spins(4)
    A = random_local_operator(rng, (0, 1))
    B = random_local_operator(rng, (1, 2))
    C = commutator(A, B, chain)
    assert C.support == (0, 1, 2)
    ea, eb = embed(A, chain).matrix, embed(B, chain).matrix
    np.testing.assert_allclose(
        embed(C, chain).matrix, ea @ eb - eb @ ea, atol=1e-10
    )


def test_conditional_expectation_pauli_twirl(rng):
    # E_keep(A) equals the average of (u sigma) A (u sigma)^dag over the full
    # Pauli group on the traced-out sites: independent oracle
    chain = Chain.spins(3)
    A = random_local_operator(rng, (0, 1, 2))
    keep = (0, 2)
    got = conditional_expectation(A, chain, keep)
    assert got.support == keep

    acc = np.zeros_like(A.matrix)
    for w in pauli_words((1,)):
        W = embed(w, chain).matrix
        acc += W @ A.matrix @ W.conj().T
    acc /= 4.0
    np.testing.assert_allclose(embed(got, chain).matrix, acc, atol=1e-10)


def test_conditional_expectation_idempotent_contractive(rng):
    chain = Chain.spins(4)
    for _ in range(100):
        support = (0, 1, 2, 3)
        A = random_local_operator(rng, support)
        keep = tuple(sorted(rng.choice(4, size=int(rng.integers(1, 4)), replace=False)))
        once = conditional_expectation(A, chain, keep)
        twice = conditional_expectation(once, chain, keep)
        assert np.abs(once.matrix - twice.matrix).max() < 1e-10
        assert operator_norm(once) <= operator_norm(A) + 1e-10


def test_conditional_expectation_identity_when_covering(rng):
    chain = Chain.spins(3)
    A = random_local_operator(rng, (0, 2))
    out = conditional_expectation(A, chain, (0, 1, 2))
    np.testing.assert_allclose(out.matrix, A.matrix, atol=1e-12)


def test_operator_norm_vs_svd(rng):
    for _ in range(30):
        A = random_local_operator(rng, (0, 1, 2))
        top = np.linalg.svd(A.matrix, compute_uv=False)[0]
        assert abs(operator_norm(A) - top) < 1e-8 * max(top, 1.0)


def test_operator_norm_large_uses_iteration(rng):
    # above the dense cutoff the norm comes from the power iteration path
    m = rng.standard_normal((512, 512))
    A = LocalOperator(tuple(range(9)), m)
    top = np.linalg.svd(m, compute_uv=False)[0]
    assert abs(operator_norm(A) - top) < 1e-7 * top


def test_build_S():
    S = build_S(3, 4)
    assert S.shape == (4, 4)
    assert S[0, 0] == 1.0 and S[2, 2] == -1.0
    assert np.count_nonzero(S) == 2
    with pytest.raises(DomainError):
        build_S(1, 4)
    with pytest.raises(DomainError):
        build_S(5, 4)


def test_pauli_words_enumeration():
    words = list(pauli_words((0, 1)))
    labels = pauli_word_labels(2)
    assert len(words) == 16 and len(labels) == 16
    assert labels[0] == "II"
    np.testing.assert_allclose(words[0].matrix, np.eye(4), atol=0)
    # all words unitary and pairwise trace-orthogonal
    G = np.array([[np.trace(a.matrix.conj().T @ b.matrix) for b in words] for a in words])
    np.testing.assert_allclose(G, 4.0 * np.eye(16), atol=1e-12)
