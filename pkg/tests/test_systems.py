import math

import numpy as np
import pytest
from scipy import stats

from inverse_entropy.numerics import RngStream
from inverse_entropy.systems import (
    BERNOULLI,
    HAAR,
    METRIC_TORUS_EUCLIDEAN,
    SRB,
    ExpandingCircle,
    FatBaker,
    FullShift,
    NotSmoothError,
    SystemError_,
    ToralLinear,
    Tsujii,
    bernoulli_convolution_batch,
    make_system,
)

from conftest import ISO_PAIR_A, SADDLE_2X2


def random_hyperbolic_2x2(rng):
    while True:
        m = rng.integers(-4, 5, size=(2, 2))
        det = int(round(np.linalg.det(m)))
        if abs(det) < 2:
            continue
        try:
            return ToralLinear(m)
        except SystemError_:
            continue


class TestApply:
    def test_doubling(self):
        sys_ = ExpandingCircle(2)
        assert sys_.apply(np.array([0.3]))[0] == pytest.approx(0.6, abs=1e-15)

    def test_fat_baker_upper_branch(self):
        sys_ = FatBaker(0.75)
        out = sys_.apply(np.array([0.0, 0.5]))
        assert out == pytest.approx([0.25, 0.0], abs=1e-15)

    def test_toral_wraps(self):
        sys_ = ToralLinear(SADDLE_2X2)
        out = sys_.apply(np.array([0.5, 0.5]))
        assert out == pytest.approx([0.0, 0.0], abs=1e-15)

    def test_tsujii_skew(self):
        sys_ = Tsujii(2, 0.7, [0.5])
        out = sys_.apply(np.array([0.6, 1.0]))
        assert out[0] == pytest.approx(0.2, abs=1e-12)
        assert out[1] == pytest.approx(0.7 * 1.0 + 0.5, abs=1e-12)


class TestPreimages:
    def test_circle_halving(self):
        pts = ExpandingCircle(2).preimages(np.array([0.5]))
        assert [p[0] for p in pts] == [0.25, 0.75]

    def test_toral_count_and_round_trip(self, rng):
        sys_ = ToralLinear(SADDLE_2X2)
        for _ in range(20):
            x = rng.random(2)
            pre = sys_.preimages(x)
            assert len(pre) == 2
            for w in pre:
                assert sys_.distance(sys_.apply(w), x) < 1e-10

    def test_fat_baker_overlap_point(self):
        pts = FatBaker(0.75).preimages(np.array([0.0, 0.0]))
        assert len(pts) == 2
        assert pts[0] == pytest.approx([-1.0 / 3.0, 0.5], abs=1e-12)
        assert pts[1] == pytest.approx([1.0 / 3.0, -0.5], abs=1e-12)

    def test_fat_baker_single_branch_region(self):
        # far right: only the upper-branch inverse stays inside [-1, 1]
        pts = FatBaker(0.75).preimages(np.array([0.9, 0.0]))
        assert len(pts) == 1

    def test_round_trip_all_families(self, rng):
        systems = [
            (ToralLinear(ISO_PAIR_A), HAAR),
            (ExpandingCircle(3), HAAR),
            (FatBaker(0.8), SRB),
            (Tsujii(3, 0.5, [0.0, 0.4], [0.0, -0.2]), SRB),
        ]
        for sys_, tag in systems:
            stream = RngStream(99, 1)
            for _ in range(25):
                x = sys_.sample_reference(tag, stream)
                pre = sys_.preimages(x)
                assert pre, sys_.kind
                for w in pre:
                    assert sys_.distance(sys_.apply(w), x) < 1e-10

    def test_preimage_counts(self, rng):
        stream = RngStream(4, 0)
        toral = ToralLinear(ISO_PAIR_A)
        for _ in range(10):
            assert len(toral.preimages(toral.sample_reference(HAAR, stream))) == 8
        tsu = Tsujii(3, 0.5, [0.0, 0.3])
        for _ in range(10):
            assert len(tsu.preimages(tsu.sample_reference(SRB, stream))) == 3
        fb = FatBaker(0.6)
        for _ in range(40):
            assert len(fb.preimages(fb.sample_reference(SRB, stream))) in (1, 2)

    def test_shift_prepends(self):
        sys_ = FullShift(2, [0.5, 0.5], word_length=8)
        w = np.array([1, 0, 1, 1, 0, 0, 1, 0], dtype=np.int8)
        pre = sys_.preimages(w)
        assert len(pre) == 2
        assert pre[0][0] == 0 and pre[1][0] == 1
        assert np.array_equal(pre[0][1:], w[:-1])
        for p in pre:
            assert sys_.distance(sys_.apply(p), w) < 1e-10


class TestDifferential:
    def test_toral_constant(self):
        sys_ = ToralLinear(SADDLE_2X2)
        assert np.array_equal(sys_.differential(np.array([0.3, 0.9])), np.array(SADDLE_2X2, dtype=float))

    def test_fat_baker_diag(self):
        d = FatBaker(0.8).differential(np.array([0.1, -0.4]))
        assert np.array_equal(d, np.diag([0.8, 2.0]))

    def test_tsujii_triangular(self):
        sys_ = Tsujii(2, 0.7, [0.0, 1.0])  # f(x) = cos(2 pi x)
        x = 0.3
        d = sys_.differential(np.array([x, 0.0]))
        fprime = -2.0 * math.pi * math.sin(2.0 * math.pi * x)
        assert d[0, 0] == 2.0 and d[0, 1] == 0.0 and d[1, 1] == 0.7
        assert d[1, 0] == pytest.approx(fprime, rel=1e-12)

    def test_shift_not_smooth(self):
        with pytest.raises(NotSmoothError):
            FullShift(2, [0.5, 0.5]).differential(np.zeros(64, dtype=np.int8))


class TestMeasureJacobian:
    def test_circle(self):
        assert ExpandingCircle(2).measure_jacobian(HAAR, np.array([0.1])) == 2.0

    def test_shift_symbol_weight(self):
        sys_ = FullShift(2, [0.5, 0.5])
        w = np.zeros(64, dtype=np.int8)
        assert sys_.measure_jacobian(BERNOULLI, w) == 2.0

    def test_toral_det(self):
        sys_ = ToralLinear(ISO_PAIR_A)
        assert sys_.measure_jacobian(HAAR, np.array([0.2, 0.3, 0.4])) == 8.0

    def test_srb_unavailable(self):
        assert FatBaker(0.75).measure_jacobian(SRB, np.array([0.0, 0.0])) is None
        assert Tsujii(2, 0.8, [0.1]).measure_jacobian(SRB, np.array([0.0, 0.0])) is None


class TestSampling:
    def test_haar_uniform_ks(self):
        sys_ = ToralLinear(SADDLE_2X2)
        pts = sys_.sample_batch(HAAR, RngStream(8, 0), 100_000)
        for k in range(2):
            assert stats.kstest(pts[:, k], "uniform").pvalue > 0.01

    def test_fat_baker_vertical_uniform(self):
        pts = FatBaker(0.75).sample_batch(SRB, RngStream(8, 1), 100_000)
        assert stats.kstest((pts[:, 1] + 1.0) / 2.0, "uniform").pvalue > 0.01

    def test_fat_baker_half_is_uniform(self):
        # at beta = 1/2 the signed series is uniform on [-1, 1]
        xs = bernoulli_convolution_batch(0.5, RngStream(8, 2), 100_000)
        assert stats.kstest((xs + 1.0) / 2.0, "uniform").pvalue > 0.01

    def test_haar_invariance_under_map(self):
        sys_ = ExpandingCircle(3)
        pts = sys_.sample_batch(HAAR, RngStream(8, 3), 100_000)
        image = sys_.apply(pts.reshape(-1))
        assert stats.kstest(image, "uniform").pvalue > 0.01

    def test_bernoulli_invariance_under_shift(self):
        p = np.array([0.3, 0.7])
        sys_ = FullShift(2, p)
        words = sys_.sample_batch(BERNOULLI, RngStream(8, 4), 100_000)
        shifted_first = words[:, 1]  # first symbol after one shift
        counts = np.bincount(shifted_first, minlength=2)
        stat = np.sum((counts - len(words) * p) ** 2 / (len(words) * p))
        assert stats.chi2.sf(stat, 1) > 0.01

    def test_tsujii_strip_boundedness(self):
        sys_ = Tsujii(2, 0.7, [0.0, 0.5, 0.2], [0.0, -0.3])
        pts = sys_.orbit_batch(RngStream(8, 5), 50_000)
        bound = sys_.strip_halfwidth + 1.0
        assert np.all(np.abs(pts[:, 1]) <= bound)
        # forward orbit of an arbitrary seed enters the strip after burn-in
        x = np.array([0.123, 9.0])
        for _ in range(200):
            x = sys_.apply(x)
        assert abs(x[1]) <= bound

    def test_tsujii_base_orbit_consistency(self):
        sys_ = Tsujii(2, 0.7, [0.0, 0.5])
        xs = sys_.base_orbit(RngStream(8, 6), 1000)
        err = np.abs(sys_.apply(np.array([xs[10], 0.0]))[0] - xs[11])
        assert min(err, 1.0 - err) < 1e-12

    def test_tsujii_orbit_is_invariant(self):
        # pushing thinned (near-independent) SRB samples forward reproduces the
        # y-marginal of an independent orbit (two-sample KS)
        sys_ = Tsujii(2, 0.7, [0.0, 0.5, 0.2])
        a = sys_.orbit_batch(RngStream(8, 7), 100_000)[::50]
        b = sys_.orbit_batch(RngStream(8, 8), 100_000)[::50]
        image = np.array([sys_.apply(p)[1] for p in a])
        assert stats.ks_2samp(image, b[:, 1]).pvalue > 0.01


class TestDistance:
    def test_torus_wraparound(self):
        sys_ = ToralLinear(SADDLE_2X2)
        assert sys_.distance(np.array([0.1, 0.9]), np.array([0.9, 0.1])) == pytest.approx(0.2)

    def test_identity_of_indiscernibles(self, rng):
        systems = [ToralLinear(SADDLE_2X2), ExpandingCircle(2), FatBaker(0.7),
                   Tsujii(2, 0.6, [0.1]), FullShift(2, [0.5, 0.5])]
        for sys_ in systems:
            x = sys_.sample_reference(sys_.default_measure(), RngStream(1, 1))
            assert sys_.distance(x, x) == 0.0

    def test_product_sup(self):
        assert FatBaker(0.75).distance(np.array([0.0, 0.0]), np.array([0.3, -0.2])) == pytest.approx(0.3)

    def test_shift_metric(self):
        sys_ = FullShift(2, [0.5, 0.5], word_length=8)
        a = np.array([1, 0, 1, 0, 0, 0, 0, 0], dtype=np.int8)
        b = np.array([1, 0, 0, 0, 0, 0, 0, 0], dtype=np.int8)
        assert sys_.distance(a, b) == 0.25

    def test_euclidean_metric(self):
        sys_ = ToralLinear(SADDLE_2X2, metric=METRIC_TORUS_EUCLIDEAN)
        d = sys_.distance(np.array([0.0, 0.0]), np.array([0.1, 0.9]))
        assert d == pytest.approx(math.hypot(0.1, 0.1))


class TestConstruction:
    def test_rejects_unit_determinant(self):
        with pytest.raises(SystemError_):
            ToralLinear([[2, 1], [1, 1]])  # |det| = 1

    def test_rejects_unit_modulus_eigenvalue(self):
        with pytest.raises(SystemError_):
            ToralLinear([[2, 0], [0, 1]])

    def test_accepts_complex_eigenvalues(self):
        # scaled rotation: eigenvalues +-2i, moduli 2, hyperbolic
        sys_ = ToralLinear([[0, -2], [2, 0]])
        assert sys_.degree == 4

    def test_fat_baker_range(self):
        with pytest.raises(SystemError_):
            FatBaker(0.4)
        with pytest.raises(SystemError_):
            FatBaker(1.0)
        FatBaker(0.5)  # boundary accepted as a sanity case

    def test_tsujii_regime(self):
        with pytest.raises(SystemError_):
            Tsujii(2, 0.4, [0.1])  # lam * l < 1
        with pytest.raises(SystemError_):
            Tsujii(1, 0.9, [0.1])

    def test_shift_probability_sum(self):
        with pytest.raises(SystemError_):
            FullShift(2, [0.5, 0.6])

    def test_make_system_roundtrip(self):
        sys_ = make_system("toral", matrix=SADDLE_2X2)
        assert sys_.kind == "toral"
        with pytest.raises(SystemError_):
            make_system("banana")

    def test_coset_count_matches_degree(self, rng):
        for _ in range(25):
            sys_ = random_hyperbolic_2x2(rng)
            assert sys_.coset_offsets.shape[0] == sys_.degree

    def test_negative_entry_matrix_preimages(self, rng):
        # offsets must cover matrices with negative entries
        sys_ = ToralLinear([[2, -1], [1, 2]])  # det = 5
        for _ in range(10):
            x = rng.random(2)
            pre = sys_.preimages(x)
            assert len(pre) == 5
            for w in pre:
                assert sys_.distance(sys_.apply(w), x) < 1e-10
