"""Compiled vs numpy quadrature kernels.

    python benchmarks/bench_kernels.py [--repeat N]

Times the calibration integrals, one full set of side integrals and a small
solve with each backend, and reports the agreement between them.
"""

import argparse
import time

from staircase.sc import _kernels_py, kernels


def _best(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def _with_backend(mod, fn):
    saved = kernels.backend
    kernels.backend = mod
    try:
        return fn()
    finally:
        kernels.backend = saved


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()

    from staircase.sc.engine import AccessoryConfig, SideLengths, side_integrals, solve_accessory

    cfg = AccessoryConfig(-0.5, 0.0, 0.5, 1e-3, 1e-3)
    target = SideLengths(0.7, 0.01, 0.02, 0.3, 0.4)
    cases = {
        "x^-1/2 on [0,1]": lambda: kernels.integrate(-0.5, 0.0, [], [], [], 1e-11, 1e-13, 2000, 60)[0],
        "x^1/2 on [0,1]": lambda: kernels.integrate(0.5, 0.0, [], [], [], 1e-11, 1e-13, 2000, 60)[0],
        "side integrals": lambda: float(side_integrals(cfg, phase_check=False).A),
        "solve (b, c > 0)": lambda: float(solve_accessory(target).config.xi1),
    }
    backends = [("python", _kernels_py)]
    if kernels.BACKEND_NAME == "cython":
        backends.insert(0, ("cython", kernels.backend))
    else:
        print("compiled kernels not built; timing the numpy fallback only")

    print(f"{'case':<20}" + "".join(f"{name:>14}" for name, _ in backends) + f"{'speedup':>10}{'|diff|':>12}")
    for label, fn in cases.items():
        repeat = args.repeat if "solve" not in label else max(1, args.repeat // 10)
        times, vals = [], []
        for _, mod in backends:
            t, v = _with_backend(mod, lambda: _best(fn, repeat))
            times.append(t)
            vals.append(v)
        row = f"{label:<20}" + "".join(f"{t * 1e3:>12.3f}ms" for t in times)
        if len(times) == 2:
            row += f"{times[1] / times[0]:>9.1f}x{abs(vals[0] - vals[1]):>12.2e}"
        print(row)


if __name__ == "__main__":
    main()
