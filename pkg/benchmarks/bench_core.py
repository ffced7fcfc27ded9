"""Compare the compiled and pure-Python numerical cores.

Usage::

    python3 benchmarks/bench_core.py [--repeat 5]

Times ``phs_cross``, ``lu_factor`` + ``lu_solve`` and ``smo_solve`` on inputs
of the size used by the experiments, and checks that both backends agree.
"""
import argparse
import timeit

import numpy as np

from vskextrap import _core


def cases():
    rng = np.random.default_rng(0)
    pts = np.column_stack([np.linspace(0.1, 2, 30), rng.random(30)])
    grid = np.column_stack([np.linspace(0.1, 3, 40), rng.random(40)])
    x = np.linspace(0.1, 2, 30)
    kmat = (1.0 + np.outer(x, x)) ** 3
    f = np.arctan(20 / x)
    saddle = rng.standard_normal((120, 120)) + 120 * np.eye(120)
    rhs = rng.standard_normal(120)

    def lu(impl):
        lu_, piv, _ = impl.lu_factor(saddle, 1e-12)
        return impl.lu_solve(lu_, piv, rhs)

    return {
        "phs_cross 30x40 d=2": lambda impl: impl.phs_cross(pts, grid, 2, True),
        "lu 120x120": lu,
        "smo n=30 eps=1e-3 zeta=1": lambda impl: impl.smo_solve(kmat, f, 1e-3, 1.0, 1e-6, 10_000_000)[0],
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    backends = _core.BACKENDS
    if "compiled" not in backends:
        print("compiled core not built; timing the Python backend only")
    names = list(backends)
    print(f"{'case':28s}" + "".join(f"{n:>14s}" for n in names) + ("     speedup  max|diff|" if len(names) > 1 else ""))
    for label, run in cases().items():
        times = {}
        outputs = {}
        for name, impl in backends.items():
            outputs[name] = np.asarray(run(impl))
            number = 1 if name == "python" and label.startswith("smo") else 20
            times[name] = min(timeit.repeat(lambda: run(impl), number=number, repeat=args.repeat)) / number
        row = f"{label:28s}" + "".join(f"{times[n] * 1e3:12.3f}ms" for n in names)
        if len(names) > 1:
            diff = float(np.max(np.abs(outputs["compiled"] - outputs["python"])))
            row += f"{times['python'] / times['compiled']:11.1f}x  {diff:9.1e}"
        print(row)


if __name__ == "__main__":
    main()
