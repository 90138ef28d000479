"""Compiled core vs numpy fallback: same inputs, same depth arrays.

Also checks both against the readable per-point DFS in the prehistory module.
"""

import numpy as np
import pytest

from inverse_entropy import backend
from inverse_entropy.estimators import forward_orbit
from inverse_entropy.numerics import RngStream
from inverse_entropy.prehistory import (
    BowenQuery,
    Prehistory,
    is_in_forward_bowen_ball,
    is_in_inverse_bowen_ball,
    sample_prehistory,
)
from inverse_entropy.systems import (
    METRIC_TORUS_EUCLIDEAN,
    ExpandingCircle,
    FatBaker,
    FullShift,
    ToralLinear,
    Tsujii,
)

from conftest import SADDLE_2X2

try:
    compiled = backend.get_impl("compiled")
    HAS_COMPILED = True
except ImportError:
    HAS_COMPILED = False

fallback = backend.get_impl("python")


def _families():
    return [
        ToralLinear(SADDLE_2X2),
        ToralLinear([[2, -1], [1, 2]]),
        ToralLinear(SADDLE_2X2, metric=METRIC_TORUS_EUCLIDEAN),
        ExpandingCircle(3),
        FatBaker(0.75),
        Tsujii(2, 0.7, [0.0, 0.4, 0.1], [0.0, -0.2]),
    ]


def _calls(impl, system, anchor, orbit, pts, eps):
    if isinstance(system, ToralLinear):
        euc = system.metric == METRIC_TORUS_EUCLIDEAN
        amat = np.ascontiguousarray(system.matrix.entries)
        return (impl.toral_inverse_depths(system.inverse_matrix, system.coset_offsets,
                                          anchor, pts, eps, euc),
                impl.toral_forward_depths(amat, orbit, pts, eps, euc))
    if isinstance(system, ExpandingCircle):
        return (impl.circle_inverse_depths(system.degree, anchor.reshape(-1),
                                           pts.reshape(-1), eps),
                impl.circle_forward_depths(system.degree, orbit.reshape(-1),
                                           pts.reshape(-1), eps))
    if isinstance(system, FatBaker):
        return (impl.fatbaker_inverse_depths(system.beta, anchor, pts, eps),
                impl.fatbaker_forward_depths(system.beta, orbit, pts, eps))
    if isinstance(system, Tsujii):
        args = (system.ell, system.lam, system.cos_coefficients, system.sin_coefficients)
        return (impl.tsujii_inverse_depths(*args, anchor, pts, eps),
                impl.tsujii_forward_depths(*args, orbit, pts, eps))
    raise TypeError


@pytest.mark.skipif(not HAS_COMPILED, reason="compiled extension not built")
class TestBackendEquivalence:
    @pytest.mark.parametrize("eps", [0.22, 0.1, 0.03])
    def test_depth_arrays_identical(self, eps):
        for system in _families():
            tag = system.default_measure()
            stream = RngStream(17, 3)
            x0 = system.sample_reference(tag, stream)
            anchor = sample_prehistory(system, tag, x0, 9, stream).points
            orbit = forward_orbit(system, x0, 9)
            pts = system.sample_batch(tag, RngStream(17, 4), 20_000)
            inv_p, fwd_p = _calls(fallback, system, anchor, orbit, pts, eps)
            inv_c, fwd_c = _calls(compiled, system, anchor, orbit, pts, eps)
            assert np.array_equal(inv_p, inv_c), system.kind
            assert np.array_equal(fwd_p, fwd_c), system.kind


class TestKernelAgainstReferenceDfs:
    def test_inverse_depths_match_predicate(self, rng):
        for system in _families():
            tag = system.default_measure()
            stream = RngStream(18, 0)
            x0 = system.sample_reference(tag, stream)
            ph = sample_prehistory(system, tag, x0, 5, stream)
            eps = 0.15
            pts = system.sample_batch(tag, RngStream(18, 1), 400)
            depths = backend.inverse_depths(system, ph.points, pts, eps)
            for i in rng.choice(len(pts), size=60, replace=False):
                z = pts[i]
                for n in range(6):
                    q = BowenQuery(anchor=ph, n=n, epsilon=eps)
                    assert is_in_inverse_bowen_ball(system, q, z) == (depths[i] >= n), system.kind

    def test_forward_depths_match_predicate(self, rng):
        for system in _families():
            tag = system.default_measure()
            stream = RngStream(18, 2)
            x0 = system.sample_reference(tag, stream)
            orbit = forward_orbit(system, x0, 5)
            eps = 0.15
            pts = system.sample_batch(tag, RngStream(18, 3), 400)
            depths = backend.forward_depths(system, orbit, pts, eps)
            for i in rng.choice(len(pts), size=60, replace=False):
                z = pts[i]
                for n in range(6):
                    got = is_in_forward_bowen_ball(system, x0, n, eps, z)
                    assert got == (depths[i] >= n), system.kind

    def test_shift_kernels_match_predicate(self, rng):
        system = FullShift(2, [0.4, 0.6], word_length=32)
        stream = RngStream(18, 4)
        x0 = system.sample_reference("bernoulli", stream)
        ph = sample_prehistory(system, "bernoulli", x0, 5, stream)
        orbit = forward_orbit(system, x0, 5)
        eps = 0.1
        pts = system.sample_batch("bernoulli", RngStream(18, 5), 3000)
        inv = backend.inverse_depths(system, ph.points, pts, eps)
        fwd = backend.forward_depths(system, orbit, pts, eps)
        for i in rng.choice(len(pts), size=80, replace=False):
            z = pts[i]
            for n in range(6):
                q = BowenQuery(anchor=ph, n=n, epsilon=eps)
                assert is_in_inverse_bowen_ball(system, q, z) == (inv[i] >= n)
                assert is_in_forward_bowen_ball(system, x0, n, eps, z) == (fwd[i] >= n)
