"""Compare the compiled and pure-Python kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--number 2000]

Prints one row per (kernel, d) with the per-call time of each backend and
the speedup. The last block times a full basis search through
``max_violation`` with each backend swapped in.
"""

import argparse
import timeit

import numpy as np

from slhs import _kernels
from slhs._kernels import _pykernels
from slhs.basis_opt import OptimizerConfig
from slhs.families import IsotropicSpec, isotropic
from slhs.qcore import haar_unitary, random_density

NAMES = ("unitary_from_params", "inequality_lhs", "measure_sum", "search_lhs", "search_measure")


def _cases(d, rng):
    rho = np.ascontiguousarray(random_density(d * d, rng).mat)
    ua, ub = haar_unitary(d, rng), haar_unitary(d, rng)
    x = rng.standard_normal(2 * (d * d - 1))
    p = rng.standard_normal(d * d)
    off = 1.0 / d**2
    return {
        "unitary_from_params": (p, d),
        "inequality_lhs": (rho, ua, ub, d, _kernels.COMBINED),
        "measure_sum": (rho, ua, ub, d, off),
        "search_lhs": (x, ua, ub, rho, d, _kernels.COMBINED),
        "search_measure": (x, ua, ub, rho, d, off),
    }


def _time(fn, args, repeat, number):
    return min(timeit.repeat(lambda: fn(*args), repeat=repeat, number=number)) / number


def bench_kernels(repeat, number, dims=(2, 3, 4)):
    from slhs._kernels import _ckernels

    rng = np.random.default_rng(0)
    print(f"{'kernel':<22}{'d':>3}{'python us':>12}{'cython us':>12}{'speedup':>9}")
    for d in dims:
        cases = _cases(d, rng)
        for name in NAMES:
            args = cases[name]
            py = _time(getattr(_pykernels, name), args, repeat, number)
            cy = _time(getattr(_ckernels, name), args, repeat, number)
            print(f"{name:<22}{d:>3}{py * 1e6:>12.2f}{cy * 1e6:>12.2f}{py / cy:>9.1f}")


def bench_search(repeat):
    from slhs import inequalities
    from slhs._kernels import _ckernels

    s = isotropic(IsotropicSpec(3, 0.5))
    cfg = OptimizerConfig(restarts=4)
    print()
    print(f"{'max_violation d=3 (4 restarts)':<34}{'seconds':>10}")
    for label, impl in (("python", _pykernels), ("cython", _ckernels)):
        saved = {n: getattr(_kernels, n) for n in NAMES}
        try:
            for n in NAMES:
                setattr(_kernels, n, getattr(impl, n))
            t = min(timeit.repeat(lambda: inequalities.max_violation(s, "combined", cfg), repeat=repeat, number=1))
        finally:
            for n, f in saved.items():
                setattr(_kernels, n, f)
        print(f"{label:<34}{t:>10.3f}")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--number", type=int, default=2000)
    args = ap.parse_args(argv)
    if not _kernels.compiled_available():
        raise SystemExit("the compiled kernels are not built; run `pip install -e . --no-build-isolation`")
    bench_kernels(args.repeat, args.number)
    bench_search(max(1, args.repeat // 2))


if __name__ == "__main__":
    main()
