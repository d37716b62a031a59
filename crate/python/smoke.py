"""Smoke test for the kpzlab Python bindings.

Build the extension first:

    cargo build -p kpzlab-python --features extension-module
    python3 python/smoke.py

The script looks for the shared library under target/{debug,release} unless
KPZLAB_PY points at it.
"""

import importlib.machinery
import importlib.util
import json
import math
import os
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load():
    candidates = [os.environ.get("KPZLAB_PY")] if os.environ.get("KPZLAB_PY") else [
        ROOT / "target" / profile / "libkpzlab_py.so" for profile in ("release", "debug")
    ]
    for path in map(Path, candidates):
        if path.exists():
            loader = importlib.machinery.ExtensionFileLoader("kpzlab_py", str(path))
            spec = importlib.util.spec_from_loader("kpzlab_py", loader)
            module = importlib.util.module_from_spec(spec)
            loader.exec_module(module)
            return module
    sys.exit("kpzlab_py extension not found; build it with cargo first")


def close(a, b, tol):
    assert abs(a - b) < tol, f"{a} vs {b}"


def main():
    k = load()
    print("kpzlab", k.__version__, k.BUILD)

    tw = k.TracyWidom()
    close(tw.mean, -1.7710868074, 1e-6)
    close(tw.std, 0.9017731382, 1e-6)
    close(tw.cdf(0.0), 0.9693728283, 1e-6)

    p = k.transition_probability([0, 1], [1, 3], 1.0, 0.3)
    q = k.master_equation_probability([0, 1], [1, 3], 1.0, 0.3, -18, 22)
    close(p, q, 1e-8)

    x0, h = k.simulate_height(0.0, 20.0, seed=3)
    assert len(h) > 0 and isinstance(x0, int)

    ev = k.gue_eigenvalues(50, seed=1)
    assert ev == sorted(ev) and len(ev) == 50

    assert [k.wick_moment(4, j) for j in range(5)] == [4, 0, 16, 0, 132]
    mean, err = k.trace_moment(4, 2, 5000, 7)
    assert abs(mean - 16) < 4 * err

    spec = k.generator_spectrum(2, 5, 0.3)
    for re, im in k.bethe_energies(2, 5, 0.3):
        assert min(math.hypot(re - a, im - b) for a, b in spec) < 1e-9

    tr = k.TopRec()
    assert k.TopRec().moments(0, 10)[::2] == ["1", "1", "2", "5", "14", "42"]
    assert json.loads(tr.correlator(1, 1))

    report = json.loads(k.run_experiment("catalan-bridge", '{"order": 6}'))
    assert all(c["pass"] for c in report["checks"]), report["checks"]

    try:
        k.run_experiment("no-such-experiment")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown experiment accepted")
    print("python smoke test passed")


if __name__ == "__main__":
    main()
