"""Smoke test for the Python extension.

Build first:
    cargo build -p planar-switching-py --features extension-module --release
then run `python3 python/smoke_test.py`. The script copies the built library
under its import name into a temporary directory, or imports an installed
`planar_switching` when PLANAR_SWITCHING_INSTALLED is set.
"""

import importlib
import json
import os
import shutil
import sys
import tempfile
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent


def load():
    if os.environ.get("PLANAR_SWITCHING_INSTALLED"):
        return importlib.import_module("planar_switching")
    for profile in ("release", "debug"):
        lib = ROOT / "target" / profile / "libplanar_switching_py.so"
        if lib.exists():
            tmp = tempfile.mkdtemp()
            shutil.copy(lib, Path(tmp) / "planar_switching.so")
            sys.path.insert(0, tmp)
            return importlib.import_module("planar_switching")
    sys.exit("extension not built; see the module docstring")


def as_lists(m):
    return [[complex(m[0, 0]), complex(m[0, 1])], [complex(m[1, 0]), complex(m[1, 1])]]


def main():
    ps = load()
    rng = np.random.default_rng(7)

    for _ in range(200):
        m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        norm = ps.operator_norm(as_lists(m))
        assert abs(norm - np.linalg.svd(m, compute_uv=False)[0]) <= 1e-12 * norm
        rho = ps.spectral_radius(as_lists(m))
        assert abs(rho - max(abs(np.linalg.eigvals(m)))) <= 1e-10 * max(rho, 1.0)

    single = [[[0.9, 3.0], [0.0, -0.2j]]]
    lower, upper = ps.jsr_bounds(single, 6)
    assert abs(lower - 0.9) <= 1e-12 and upper >= lower

    jordan = [[[1, 1], [0, 1]]]
    rates = ps.rate_sequence(jordan, 10)
    for n, b in enumerate(rates, start=1):
        expected = np.linalg.svd(np.array([[1, n], [0, 1]]), compute_uv=False)[0]
        assert abs(b - expected) <= 1e-12 * expected

    v = ps.classify(jordan, depth=10)
    assert v.regime == "MarginallyUnstable", v
    assert v.case_tag == "Jordan"
    assert json.loads(v.to_json())["regime"] == "MarginallyUnstable"

    stable = ps.classify([[[0.5, 0], [0, 0.3]]])
    assert stable.regime == "ExponentiallyStable"

    both_roots = [[[1, 1], [0, 1j]], [[1, 0], [0, -1]]]
    tag, norms = ps.escape_trajectory(both_roots, 2000)
    assert tag == "BothRoots" and len(norms) == 2001
    tail = min(norms[n] / n for n in range(1500, 2001))
    assert tail > 0.0, tail

    norms = ps.simulate_periodic(both_roots, [0, 1], [1, 0], 8)
    assert all(abs(x - 1.0) < 1e-12 for x in norms)

    try:
        ps.escape_trajectory([[[0.5, 0], [0, 0.3]]], 100)
    except ps.NotMarginallyUnstable:
        pass
    else:
        raise AssertionError("stable set produced an escape")

    three = [[[1, 1], [0, 1]], [[1, 0], [0, 1]], [[0, 1], [1, 0]]]
    try:
        ps.rate_sequence(three, 30)
    except ps.WorkBudgetExceeded:
        pass
    else:
        raise AssertionError("budget not enforced")

    try:
        ps.classify([])
    except ValueError:
        pass
    else:
        raise AssertionError("empty set accepted")

    print("python smoke test passed")


if __name__ == "__main__":
    main()
