"""Benchmark the compiled membership kernels against the numpy fallback.

Run as ``iel bench`` or ``python -m inverse_entropy.bench``.  The workload is
the hot path of the estimators: batch inverse/forward depth computation on a
2x2 toral system and the skew-product family.  Results from both backends are
compared for equality before timing.
"""

from __future__ import annotations

import time

import numpy as np

from . import backend
from .estimators import EstimatorConfig, forward_orbit
from .numerics import RngStream
from .prehistory import sample_prehistory
from .systems import System, ToralLinear, Tsujii


def _time(fn, repeats: int = 3) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _workloads(samples: int):
    cfg = EstimatorConfig()
    toral = ToralLinear([[3, 1], [1, 1]])
    tsujii = Tsujii(2, 0.7, [0.0, 0.3, 0.1], [0.0, 0.2])
    out = []
    for system in (toral, tsujii):
        tag = system.default_measure()
        rng = RngStream(11, 1)
        x0 = system.sample_reference(tag, rng)
        anchor = sample_prehistory(system, tag, x0, max(cfg.depths), rng).points
        orbit = forward_orbit(system, x0, max(cfg.depths))
        pts = system.sample_batch(tag, RngStream(11, 2), samples)
        out.append((system, anchor, orbit, pts))
    return out


def run_bench(samples: int = 200_000) -> None:
    try:
        compiled = backend.get_impl("compiled")
    except ImportError:
        compiled = None
    fallback = backend.get_impl("python")
    print(f"active backend: {backend.backend_name()}   samples per call: {samples}")
    header = f"{'kernel':34s} {'python':>10s} {'compiled':>10s} {'speedup':>8s}"
    print(header)
    print("-" * len(header))
    for system, anchor, orbit, pts in _workloads(samples):
        for direction, ref in (("inverse", anchor), ("forward", orbit)):
            calls = {}
            for name, impl in (("python", fallback), ("compiled", compiled)):
                if impl is None:
                    continue
                calls[name] = _make_call(impl, system, direction, ref, pts)
            if "compiled" in calls:
                a = calls["python"]()
                b = calls["compiled"]()
                agree = np.array_equal(a, b)
                mism = int(np.count_nonzero(a != b))
                if not agree and mism > max(8, len(a) // 100_000):
                    raise AssertionError(
                        f"backends disagree on {mism} samples for {system.kind} {direction}")
            t_py = _time(calls["python"])
            t_c = _time(calls["compiled"]) if "compiled" in calls else float("nan")
            speed = t_py / t_c if "compiled" in calls else float("nan")
            print(f"{system.kind + ' ' + direction:34s} {t_py:9.3f}s {t_c:9.3f}s {speed:7.1f}x")
    if compiled is None:
        print("compiled extension not available; only the fallback was timed")


def _make_call(impl, system: System, direction: str, ref, pts):
    if isinstance(system, ToralLinear):
        if direction == "inverse":
            return lambda: impl.toral_inverse_depths(
                system.inverse_matrix, system.coset_offsets, ref, pts, 0.2, False)
        amat = np.ascontiguousarray(system.matrix.entries)
        return lambda: impl.toral_forward_depths(amat, ref, pts, 0.2, False)
    if isinstance(system, Tsujii):
        if direction == "inverse":
            return lambda: impl.tsujii_inverse_depths(
                system.ell, system.lam, system.cos_coefficients, system.sin_coefficients,
                ref, pts, 0.2)
        return lambda: impl.tsujii_forward_depths(
            system.ell, system.lam, system.cos_coefficients, system.sin_coefficients,
            ref, pts, 0.2)
    raise TypeError(system.kind)


if __name__ == "__main__":
    run_bench()
