"""Time the compiled kernels against the pure-Python fallback.

Run from the repository root after building the extension::

    python3 benchmarks/bench_kernels.py --n 2000 --repeat 5

Each row reports the best wall time of ``--repeat`` runs for both backends
and the largest absolute difference between their outputs.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from nmcopula import _pykernels as py
from nmcopula.core import CopulaModel, Family, sample
from nmcopula.empirical import pseudo_observations
from nmcopula.inference import DEFAULT_BOUNDS, _coordinates, FamilySpec

try:
    from nmcopula import _ckernels as cy
except ImportError:
    cy = None


def best_time(fn, repeat: int):
    out, best = None, float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases(n: int, seed: int):
    truth = {
        Family.NORMAL_MODE: CopulaModel.normal_mode(0.8, (2, 1)),
        Family.AMH: CopulaModel(Family.AMH, 0.5),
        Family.CLAYTON: CopulaModel(Family.CLAYTON, 2.0),
        Family.FRANK: CopulaModel(Family.FRANK, 4.0),
        Family.GAUSSIAN: CopulaModel(Family.GAUSSIAN, 0.5),
    }
    for fam, model in truth.items():
        ps = pseudo_observations(sample(model, n, seed))
        spec = FamilySpec(fam, (2, 1) if fam is Family.NORMAL_MODE else None)
        code, x, y = _coordinates(spec, ps.u)
        yield fam.value, code, x, y, float(model.theta), DEFAULT_BOUNDS[fam], ps


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if cy is None:
        print("compiled extension not available; nothing to compare")
        return 1

    print(f"{'kernel':<26}{'python [s]':>12}{'cython [s]':>12}{'speedup':>9}{'max diff':>11}")
    for name, code, x, y, theta, (lo, hi), ps in cases(args.n, args.seed):
        rows = [
            ("loglik", lambda m: m.loglik(code, theta, x, y)),
            ("score_sum", lambda m: m.score_sum(code, theta, x, y)),
            ("fold_thetas", lambda m: m.fold_thetas(code, x, y, theta, lo, hi)[0]),
        ]
        if code == py.LINEAR:
            rows.append(("ecop_counts", lambda m: m.ecop_counts(ps.u[:, 0], ps.u[:, 1],
                                                                ps.u[:, 0], ps.u[:, 1])))
        for label, fn in rows:
            tp, op = best_time(lambda: fn(py), args.repeat)
            tc, oc = best_time(lambda: fn(cy), args.repeat)
            diff = float(np.max(np.abs(np.asarray(op, float) - np.asarray(oc, float))))
            print(f"{name + '.' + label:<26}{tp:>12.4f}{tc:>12.4f}{tp / tc:>9.1f}{diff:>11.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
