"""Time the numba kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--sizes 1000,10000,100000] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from ndcstar import _accel
from ndcstar.algebra import AlgebraDescriptor


def _batch(desc, n, rng):
    return rng.standard_normal((n, desc.packed_size)) + 1j * rng.standard_normal((n, desc.packed_size))


def _unitaries(desc, n, rng):
    blocks = []
    for d in desc.block_dims:
        z = rng.standard_normal((n, d, d)) + 1j * rng.standard_normal((n, d, d))
        q, _ = np.linalg.qr(z)
        blocks.append(q)
    return desc.pack_blocks(blocks)


def run(sizes, repeat, algebras):
    rng = np.random.default_rng(0)
    rows = []
    for dims in algebras:
        desc = AlgebraDescriptor(dims)
        d_arr, o_arr = desc.dims_array, desc.offsets_array
        m = desc.num_blocks
        for n in sizes:
            xs, ys = _batch(desc, n, rng), _batch(desc, n, rng)
            us = _unitaries(desc, n, rng)
            perms = np.tile(np.arange(m), (n, 1))
            cases = {
                "block_matmul": (
                    lambda: _accel.block_matmul_numpy(xs, ys, d_arr, o_arr),
                    lambda: _accel.block_matmul_numba(xs, ys, d_arr, o_arr),
                ),
                "conjugate_permute": (
                    lambda: _accel.conjugate_permute_numpy(xs, perms, us, d_arr, o_arr),
                    lambda: _accel.conjugate_permute_numba(xs, perms, us, d_arr, o_arr),
                ),
            }
            for name, (f_np, f_nb) in cases.items():
                f_nb()  # compile outside the timing
                err = float(np.abs(f_np() - f_nb()).max())
                t_np = min(timeit.repeat(f_np, number=1, repeat=repeat))
                t_nb = min(timeit.repeat(f_nb, number=1, repeat=repeat))
                rows.append((name, str(list(dims)), n, t_np, t_nb, err))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="1000,10000,100000")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _accel.block_matmul_numba is None:
        raise SystemExit("numba is not installed")
    sizes = [int(s) for s in args.sizes.split(",")]
    rows = run(sizes, args.repeat, [(2, 1), (4, 3, 1), (8,)])
    print(f"{'kernel':<18} {'blocks':<10} {'N':>8} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8} {'max diff':>10}")
    for name, dims, n, t_np, t_nb, err in rows:
        print(f"{name:<18} {dims:<10} {n:>8} {1e3 * t_np:>10.3f} {1e3 * t_nb:>10.3f} {t_np / t_nb:>8.2f} {err:>10.2e}")


if __name__ == "__main__":
    main()
