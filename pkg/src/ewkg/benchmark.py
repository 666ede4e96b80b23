"""Benchmark the compiled hot kernels against the pure-Python fallback.

Run with `python -m ewkg.benchmark [n_cells]`.  Exercises the two sequential
cores on identical inputs and reports wall times and the speedup.
"""

from __future__ import annotations

import sys
import time

import numpy as np

from ._kernels import _fallback
from .core import InitialDataFamily, SimConfig, build_grid
from .initial_data import constraint_coefficients, sample_free_data
from .nullev import _SLICE_KEYS, axis_limits, init_null_from_free_data

try:
    from ._kernels import _core
except ImportError:
    _core = None


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_constraint(n_cells, repeats=5):
    grid = build_grid(SimConfig(n_cells=n_cells, r_max=24.0))
    fam = InitialDataFamily(amp_phi=0.1, amp_phi_t=0.05, center=4.0, width=1.0)
    data = sample_free_data(fam, grid)
    A, B, C, q = constraint_coefficients(grid, data.gamma0, data.gamma1,
                                         data.phi0, data.phi1, 1.0)
    args = (grid.spacing, np.ascontiguousarray(A), np.ascontiguousarray(B),
            np.ascontiguousarray(C), q[0], q[1], q[2], 50.0)
    out = {"python": _time(lambda: _fallback.constraint_march(*args), repeats)}
    if _core is not None:
        out["compiled"] = _time(lambda: _core.constraint_march(*args), repeats)
    return out


def bench_null_march(n_cells, repeats=3):
    grid = build_grid(SimConfig(n_cells=n_cells, r_max=16.0))
    fam = InitialDataFamily(amp_phi=0.05, center=2.0, width=0.5)
    data = sample_free_data(fam, grid)
    h = grid.spacing
    n_slices = n_cells // 4
    slice0, boundary = init_null_from_free_data(data, grid, 1.0, n_slices, h)

    def march(backend):
        from .core import NullSlice

        slices = [slice0]
        for k in range(1, n_slices):
            prev = slices[-1]
            prevprev = slices[-2] if len(slices) >= 2 else None
            seed = axis_limits(prev, prevprev, boundary, 1.0)
            prev_arrays = tuple(np.ascontiguousarray(getattr(prev, key))
                                for key in _SLICE_KEYS)
            new, flag = backend.march_null_slice(
                prev_arrays, seed, boundary.point(k), boundary.sub_point(k), h, 1.0)
            assert flag == 0
            slices.append(NullSlice(v=k * h, h=h, **dict(zip(_SLICE_KEYS, new))))

    out = {"python": _time(lambda: march(_fallback), repeats)}
    if _core is not None:
        out["compiled"] = _time(lambda: march(_core), repeats)
    return out


def main(argv=None):
    n_cells = int((argv or sys.argv[1:] or [1024])[0])
    print(f"kernel benchmark, n_cells = {n_cells}")
    for name, res in (("constraint march (one slice solve)", bench_constraint(n_cells)),
                      (f"null march ({n_cells // 4} slices)", bench_null_march(n_cells))):
        line = f"  {name}: python {res['python'] * 1e3:.2f} ms"
        if "compiled" in res:
            line += (f", compiled {res['compiled'] * 1e3:.2f} ms"
                     f" ({res['python'] / res['compiled']:.0f}x)")
        else:
            line += ", compiled extension not built"
        print(line)
    return 0


if __name__ == "__main__":
    sys.exit(main())
