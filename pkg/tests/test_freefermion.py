"""One-body reduction of the anisotropic XY chain."""

import numpy as np
import pytest
from scipy.linalg import expm

from mblsim.errors import DomainError
from mblsim.freefermion import (
    LocalizationKernel,
    OneBodyMatrix,
    build_M,
    kernel_rows,
    kernel_to_csv,
    localization_kernel,
    propagator,
    xy_manybody_surrogate_bound,
)
from mblsim.models import DisorderSpec, XYParams, sample_sequence


def _random_params(seed, n=6, lam=2.0, aniso=True):
    spec = DisorderSpec(distribution="uniform", seed=seed, stream_id=0)
    return XYParams(
        n=n,
        mu=sample_sequence(spec, n) + 1.5,
        gamma=sample_sequence(spec.with_stream(1), n) * (0.5 if aniso else 0.0),
        omega=sample_sequence(spec.with_stream(2), n + 1),
        lam=lam,
    )


def test_build_M_structure_hand_case():
    params = XYParams(
        n=2,
        mu=np.array([0.7, 1.3]),
        gamma=np.array([0.2, -0.4]),
        omega=np.array([0.5, -1.0, 0.25]),
        lam=2.0,
    )
    M = build_M(params).matrix
    A = np.array(
        [
            [1.0, -0.7, 0.0],
            [-0.7, -2.0, -1.3],
            [0.0, -1.3, 0.5],
        ]
    )
    B = np.array(
        [
            [0.0, -0.14, 0.0],
            [0.14, 0.0, 0.52],
            [0.0, -0.52, 0.0],
        ]
    )
    expect = np.block([[A, B], [-B, -A]])
    np.testing.assert_allclose(M, expect, atol=1e-12)
    # M is real symmetric by construction
    np.testing.assert_allclose(M, M.T, atol=1e-12)


def test_propagator_matches_expm(rng):
    ob = build_M(_random_params(4))
    for t in (0.0, 0.31, 2.7):
        got = propagator(ob, t)
        np.testing.assert_allclose(got, expm(-1j * t * ob.matrix), atol=1e-10)


def test_propagator_unitarity_and_group_law():
    # 100 random instances
    for seed in range(50):
        ob = build_M(_random_params(seed, n=4))
        for t1, t2 in ((0.4, 1.1), (2.0, -0.7)):
            U1 = propagator(ob, t1)
            U2 = propagator(ob, t2)
            U12 = propagator(ob, t1 + t2)
            eye = np.eye(ob.m * 2)
            assert np.abs(U1 @ U1.conj().T - eye).max() < 1e-10
            assert np.abs(U1 @ U2 - U12).max() < 1e-10


def test_kernel_entries_bounded():
    kern = localization_kernel(build_M(_random_params(11)))
    assert kern.matrix.shape == (7, 7)
    assert np.all(kern.matrix <= 2.0 + 1e-12)
    assert np.all(kern.matrix >= 0.0)


def test_kernel_at_time_zero_only():
    ob = build_M(_random_params(5))
    K = kernel_rows(ob, list(range(ob.m)), time_grid=np.array([0.0]), refine=False)
    np.testing.assert_allclose(K, np.eye(ob.m), atol=1e-12)


def test_kernel_rows_match_full():
    ob = build_M(_random_params(8, n=5))
    grid = np.linspace(0.0, 10.0, 120)
    full = kernel_rows(ob, list(range(ob.m)), time_grid=grid, refine=False)
    rows = kernel_rows(ob, [0, 3], time_grid=grid, refine=False)
    np.testing.assert_allclose(rows, full[[0, 3]], atol=1e-14)


def test_refinement_never_decreases():
    ob = build_M(_random_params(9, n=5))
    grid = np.linspace(0.0, 10.0, 80)
    coarse = kernel_rows(ob, [0, 2], time_grid=grid, refine=False)
    refined = kernel_rows(ob, [0, 2], time_grid=grid, refine=True)
    assert np.all(refined >= coarse - 1e-12)


def test_kernel_sup_dominates_pointwise_amplitudes():
    # the kernel is a running sup over the grid of the two block amplitudes
    ob = build_M(_random_params(3, n=4))
    grid = np.linspace(0.0, 8.0, 300)
    K = kernel_rows(ob, [1], time_grid=grid, refine=False)[0]
    m = ob.m
    for t in grid[::37]:
        U = propagator(ob, t)
        val = np.abs(U[1, :m]) + np.abs(U[1, m : 2 * m])
        assert np.all(val <= K + 1e-10)


def test_surrogate_bound_arithmetic():
    K = LocalizationKernel(
        matrix=np.array([[1.0, 0.5, 0.2], [0.5, 1.0, 0.5], [0.2, 0.5, 1.0]]),
        grid=np.array([0.0]),
        refined=False,
    )
    got = xy_manybody_surrogate_bound(K, (0, 1), (2,))
    assert abs(got - 16.0 * (0.2 + 0.5)) < 1e-12


def test_kernel_csv_roundtrip(tmp_path):
    kern = localization_kernel(build_M(_random_params(2, n=3)))
    path = tmp_path / "kern.csv"
    kernel_to_csv(kern, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "site," + ",".join(str(i) for i in range(4))
    back = np.array(
        [[float(v) for v in line.split(",")[1:]] for line in lines[1:]]
    )
    np.testing.assert_allclose(back, kern.matrix, rtol=0, atol=0)


def test_localized_kernel_decays_in_distance():
    # strong fields: off-diagonal decay over distance must be steep
    kern = localization_kernel(build_M(_random_params(21, n=12, lam=8.0)))
    K = kern.matrix
    near = K[0, 1]
    far = K[0, 10]
    assert far < near / 50.0
