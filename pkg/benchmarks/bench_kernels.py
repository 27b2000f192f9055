"""Timing comparison of the numpy kernels against their numba twins.

Runs each hot kernel on a representative workload with both backends and
prints per-call medians plus the speedup. The numba column is skipped when
the compiled backend is unavailable (set MBLSIM_DISABLE_NUMBA=1 to force the
pure-numpy path).

Usage: python benchmarks/bench_kernels.py [--repeat N] [--dim D]
"""

import argparse
import time

import numpy as np

from mblsim._kernels import NUMBA_IMPLS, NUMPY_IMPLS, backend


def build_cases(rng, dim):
    """name -> argument factory; factories return fresh args per call so the
    in-place kernels do not feed on their own output."""
    E = np.sort(rng.standard_normal(dim))
    At = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    perm = np.arange(dim, dtype=np.int64) ^ (dim // 2 + 1)
    phase = np.where(np.arange(dim) % 2 == 0, 1.0, -1.0).astype(np.complex128)
    m = 201
    Wj = rng.standard_normal(2 * m)
    Wk1 = rng.standard_normal(2 * m)
    Wk2 = rng.standard_normal(2 * m)
    Eb = np.sort(rng.standard_normal(2 * m))
    U = rng.standard_normal((2 * m, 2 * m)) + 1j * rng.standard_normal((2 * m, 2 * m))
    K = np.abs(rng.standard_normal((m, m)))
    delta = (rng.random(1_000_000) < 0.9).astype(np.int64)
    phi = rng.standard_normal(2**12)
    b = min(8, dim)
    V0 = rng.standard_normal((dim, b)) + 1j * rng.standard_normal((dim, b))
    return {
        "fwht_inplace": lambda: (rng.standard_normal(2**14),),
        "pauli_word_perm_phase": lambda: (dim, dim // 2 + 1, dim // 3, 1),
        "monomial_commutator": lambda: (At, perm, phase),
        "involution_offdiag_block": lambda: (At, perm, phase),
        "right_multiply_monomial": lambda: (At, perm, phase),
        "apply_phases": lambda: (At, E, 1.3),
        "apply_gap_mask": lambda: (At.copy(), E, 1e-9),
        "apply_average_kernel": lambda: (At.copy(), E, 50.0),
        "kernel_abs_update": lambda: (K.copy(), U, m),
        "longest_zero_run": lambda: (delta,),
        "power_norm": lambda: (At, V0, 1e-10, 0.0, 200),
        "golden_refine": lambda: (Wj, Wk1, Wk2, Eb, 0.4, 1.7, 1e-4),
        "walsh_two_point": lambda: (phi, 12),
    }


def time_impl(fn, make_args, repeat):
    fn(*make_args())  # warm up (compilation, caches)
    samples = []
    for _ in range(repeat):
        args = make_args()
        t0 = time.perf_counter()
        fn(*args)
        samples.append(time.perf_counter() - t0)
    return float(np.median(samples))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=9, help="timed calls per kernel")
    parser.add_argument("--dim", type=int, default=512, help="matrix dimension")
    args = parser.parse_args(argv)

    rng = np.random.default_rng(17)
    cases = build_cases(rng, args.dim)
    have_numba = bool(NUMBA_IMPLS)
    print(f"active backend: {backend()}; dim={args.dim}, repeat={args.repeat}")
    header = f"{'kernel':26} {'numpy (ms)':>12} {'numba (ms)':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, make_args in cases.items():
        t_np = time_impl(NUMPY_IMPLS[name], make_args, args.repeat)
        if have_numba:
            t_nb = time_impl(NUMBA_IMPLS[name], make_args, args.repeat)
            ratio = t_np / t_nb if t_nb > 0 else float("inf")
            print(f"{name:26} {1e3 * t_np:12.3f} {1e3 * t_nb:12.3f} {ratio:8.1f}x")
        else:
            print(f"{name:26} {1e3 * t_np:12.3f} {'-':>12} {'-':>9}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
