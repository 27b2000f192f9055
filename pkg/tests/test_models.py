"""Disorder sampling, Hamiltonian builders, and the sparse perturbation."""

import numpy as np
import pytest

from mblsim.chains import Chain, embed
from mblsim.errors import DomainError
from mblsim.models import (
    DisorderSpec,
    IsingParams,
    NUM_STREAM_ROLES,
    XYParams,
    apply_sparse_perturbation,
    build_ising_hamiltonian,
    build_xy_hamiltonian,
    longest_zero_run,
    make_sparse_perturbation,
    sample_sequence,
    substream_id,
)

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)

# frozen reference draws for Philox key (seed << 64) + stream
UNIFORM_123_5 = [
    0.35879941859428577,
    -0.25699411851455345,
    -0.7323906733990249,
    0.17663917279166763,
]
BERNOULLI_7_11_P06 = [1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0]


def test_uniform_stream_frozen():
    spec = DisorderSpec(distribution="uniform", seed=123, stream_id=5, low=-1.0, high=1.0)
    np.testing.assert_allclose(sample_sequence(spec, 4), UNIFORM_123_5, rtol=0, atol=0)


def test_bernoulli_stream_frozen():
    spec = DisorderSpec(distribution="bernoulli", seed=7, stream_id=11, p_zero=0.6)
    np.testing.assert_allclose(sample_sequence(spec, 8), BERNOULLI_7_11_P06, rtol=0, atol=0)


def test_constant_consumes_no_rng():
    spec = DisorderSpec(distribution="constant", seed=1, stream_id=0, value=2.5)
    out = sample_sequence(spec, 6)
    np.testing.assert_allclose(out, 2.5)


def test_streams_independent_and_reproducible():
    spec = DisorderSpec(distribution="uniform", seed=9, stream_id=3)
    a = sample_sequence(spec, 16)
    b = sample_sequence(spec, 16)
    c = sample_sequence(spec.with_stream(4), 16)
    np.testing.assert_array_equal(a, b)
    assert np.abs(a - c).max() > 1e-6


def test_substream_id_injective():
    seen = set()
    for r in range(50):
        for role in range(NUM_STREAM_ROLES):
            sid = substream_id(r, role)
            assert sid not in seen
            seen.add(sid)


def test_disorder_spec_validation():
    from mblsim.errors import ConfigurationError

    with pytest.raises(ConfigurationError):
        DisorderSpec(distribution="gaussian", seed=0, stream_id=0)
    with pytest.raises(ConfigurationError):
        DisorderSpec(distribution="uniform", seed=0, stream_id=0, low=1.0, high=-1.0)
    with pytest.raises(ConfigurationError):
        DisorderSpec(distribution="bernoulli", seed=0, stream_id=0, p_zero=1.5)


def test_xy_params_shape_validation():
    with pytest.raises(DomainError):
        XYParams(n=3, mu=np.ones(2), gamma=np.zeros(3), omega=np.zeros(4))
    with pytest.raises(DomainError):
        XYParams(n=3, mu=np.ones(3), gamma=np.zeros(3), omega=np.zeros(3))


def test_xy_hamiltonian_two_site_dense():
    # single bond: mu[(1+g) XX + (1-g) YY] + lam(w0 Z0 + w1 Z1)
    params = XYParams(
        n=1, mu=np.array([0.8]), gamma=np.array([0.3]),
        omega=np.array([0.5, -0.2]), lam=1.7,
    )
    _, H = build_xy_hamiltonian(params)
    expect = 0.8 * (1.3 * np.kron(SX, SX) + 0.7 * np.kron(SY, SY))
    expect += 1.7 * (0.5 * np.kron(SZ, np.eye(2)) - 0.2 * np.kron(np.eye(2), SZ))
    np.testing.assert_allclose(H.matrix, expect, atol=1e-12)


def test_xy_hamiltonian_no_field_terms_when_lam_zero():
    params = XYParams(n=2, mu=np.ones(2), gamma=np.zeros(2), omega=np.ones(3), lam=0.0)
    phi, _ = build_xy_hamiltonian(params)
    assert all(len(s) == 2 for s, _ in phi.items())


def test_ising_hamiltonian_two_site_dense():
    params = IsingParams(
        n=1, j=np.array([1.1]), big_gamma=np.array([0.4, 0.6]),
        h=np.array([0.2, -0.5]), gamma_scale=0.25,
    )
    _, H = build_ising_hamiltonian(params)
    expect = 1.1 * np.kron(SZ, SZ)
    expect += 0.25 * (0.4 * np.kron(SX, np.eye(2)) + 0.6 * np.kron(np.eye(2), SX))
    expect += 0.2 * np.kron(SZ, np.eye(2)) - 0.5 * np.kron(np.eye(2), SZ)
    np.testing.assert_allclose(H.matrix, expect, atol=1e-12)


def test_hamiltonians_hermitian(rng):
    for seed in range(10):
        spec = DisorderSpec(distribution="uniform", seed=seed, stream_id=0)
        params = XYParams(
            n=4,
            mu=sample_sequence(spec, 4),
            gamma=sample_sequence(spec.with_stream(1), 4),
            omega=sample_sequence(spec.with_stream(2), 5),
            lam=3.0,
        )
        _, H = build_xy_hamiltonian(params)
        assert np.abs(H.matrix - H.matrix.conj().T).max() < 1e-12


def test_sparse_perturbation_mask_probability():
    pert = make_sparse_perturbation(n=4000, p_zero=0.9, seed=2, stream_id=0)
    frac = pert.delta.mean()
    assert 0.08 < frac < 0.12  # P(delta=1) = 1 - p_zero
    assert set(np.unique(pert.delta)) <= {0, 1}


def test_apply_sparse_perturbation_adds_terms():
    params = XYParams(n=3, mu=np.ones(3), gamma=np.zeros(3), omega=np.zeros(4), lam=0.0)
    phi, H0 = build_xy_hamiltonian(params)
    pert = make_sparse_perturbation(n=3, p_zero=0.0, seed=0, stream_id=0, strength=0.6)
    assert pert.delta.sum() == 3  # p_zero=0 perturbs every bond
    phi2, H1 = apply_sparse_perturbation(phi, pert)
    chain = Chain.spins(4)
    expect = H0.matrix.copy()
    for x in range(3):
        zz = 0.6 * np.kron(SZ, SZ)
        from mblsim.chains import LocalOperator

        expect = expect + embed(LocalOperator((x, x + 1), zz), chain).matrix
    np.testing.assert_allclose(H1.matrix, expect, atol=1e-12)


def test_perturbation_norm_bound():
    pert = make_sparse_perturbation(n=5, p_zero=0.5, seed=3, stream_id=1, strength=0.37)
    assert abs(pert.max_norm - 0.37) < 1e-12


def test_longest_zero_run_examples():
    assert longest_zero_run(np.array([1, 0, 0, 0, 1, 0])) == (3, 1)
    assert longest_zero_run(np.array([0, 0])) == (2, 0)
    assert longest_zero_run(np.array([1, 1])) == (0, -1)


def test_interaction_merge_and_total(rng):
    from mblsim.chains import LocalOperator
    from mblsim.models import Interaction

    chain = Chain.spins(3)
    inter = Interaction(chain)
    h = rng.standard_normal((4, 4))
    h = h + h.T
    inter.add(LocalOperator((0, 1), h))
    inter.add(LocalOperator((0, 1), h))  # same support merges
    assert len(inter.items()) == 1
    np.testing.assert_allclose(dict(inter.items())[(0, 1)].matrix, 2 * h, atol=1e-12)
    total = inter.total()
    np.testing.assert_allclose(
        total.matrix, embed(LocalOperator((0, 1), 2 * h), chain).matrix, atol=1e-12
    )
    with pytest.raises(DomainError):
        inter.add(LocalOperator((1, 2), rng.standard_normal((4, 4))))  # not hermitian
