import itertools
import math

import numpy as np
import pytest

from inverse_entropy.numerics import RngStream
from inverse_entropy.prehistory import (
    BowenQuery,
    Prehistory,
    PrehistoryError,
    admissible_branch,
    count_admissible_branches,
    is_in_forward_bowen_ball,
    is_in_inverse_bowen_ball,
    sample_prehistory,
    search_expansions,
)
from inverse_entropy.systems import (
    BERNOULLI,
    HAAR,
    SRB,
    ExpandingCircle,
    FatBaker,
    FullShift,
    ToralLinear,
)

from conftest import SADDLE_2X2


def exhaustive_member(system, anchor, n, eps, z):
    """Oracle: enumerate every backward branch of z without pruning."""
    if not system.distance(z, anchor[0]) < eps:
        return False
    frontier = [z]
    for lev in range(1, n + 1):
        nxt = []
        for p in frontier:
            for w in system.preimages(p):
                if system.distance(w, anchor[lev]) < eps:
                    nxt.append(w)
        if not nxt:
            return False
        frontier = nxt
    return True


def exhaustive_count(system, anchor, n, eps, z, decimals=9):
    """Oracle: count admissible branches, merging coincident nodes per level."""
    if not system.distance(z, anchor[0]) < eps:
        return 0
    frontier = {tuple(np.round(np.asarray(z, dtype=float), decimals)): 1}
    for lev in range(1, n + 1):
        nxt = {}
        for key, ways in frontier.items():
            for w in system.preimages(np.array(key)):
                if system.distance(w, anchor[lev]) < eps:
                    kw = tuple(np.round(np.asarray(w, dtype=float), decimals))
                    nxt[kw] = nxt.get(kw, 0) + ways
        frontier = nxt
    return sum(frontier.values())


class TestSamplePrehistory:
    def test_depth_zero(self):
        sys_ = ExpandingCircle(2)
        ph = sample_prehistory(sys_, HAAR, np.array([0.25]), 0, RngStream(1, 1))
        assert ph.depth == 0
        assert ph.points.shape == (1, 1)

    def test_round_trip_invariant(self):
        sys_ = ToralLinear(SADDLE_2X2)
        stream = RngStream(2, 0)
        for _ in range(20):
            x0 = sys_.sample_reference(HAAR, stream)
            ph = sample_prehistory(sys_, HAAR, x0, 10, stream)
            ph.validate(sys_)

    def test_uniform_branch_law_on_circle(self):
        # depth-3 chains over x0 = 0 land on the 8 dyadic preimages of 0 with
        # empirical frequency 1/8 within 3 sigma
        sys_ = ExpandingCircle(2)
        trials = 100_000
        stream = RngStream(3, 0)
        counts = np.zeros(8)
        for _ in range(trials):
            ph = sample_prehistory(sys_, HAAR, np.array([0.0]), 3, stream)
            idx = int(round(ph.point(3)[0] * 8)) % 8
            counts[idx] += 1
        p = 1.0 / 8.0
        sigma = math.sqrt(trials * p * (1 - p))
        assert np.all(np.abs(counts - trials * p) <= 3 * sigma + 1)

    def test_shift_backward_weights(self):
        sys_ = FullShift(2, [0.3, 0.7])
        stream = RngStream(3, 1)
        w0 = sys_.sample_reference(BERNOULLI, stream)
        first = [sample_prehistory(sys_, BERNOULLI, w0, 1, stream).point(1)[0]
                 for _ in range(20_000)]
        frac1 = np.mean(np.array(first) == 1)
        assert abs(frac1 - 0.7) < 3 * math.sqrt(0.21 / 20_000)

    def test_negative_depth_rejected(self):
        with pytest.raises(PrehistoryError):
            sample_prehistory(ExpandingCircle(2), HAAR, np.array([0.0]), -1, RngStream(1, 1))


class TestForwardBall:
    def test_center_always_member(self):
        sys_ = ToralLinear(SADDLE_2X2)
        x = np.array([0.3, 0.4])
        for n in (0, 3, 9):
            assert is_in_forward_bowen_ball(sys_, x, n, 1e-6, x)

    def test_immediate_distance_failure(self):
        sys_ = ExpandingCircle(2)
        assert not is_in_forward_bowen_ball(sys_, np.array([0.0]), 0, 0.25, np.array([0.3]))

    def test_doubling_escape_depth(self):
        sys_ = ExpandingCircle(2)
        x, z = np.array([0.0]), np.array([0.01])
        for n in range(4):
            assert is_in_forward_bowen_ball(sys_, x, n, 0.1, z)
        assert not is_in_forward_bowen_ball(sys_, x, 4, 0.1, z)  # 0.16 >= 0.1


class TestInverseBall:
    def _anchor(self, system, tag, depth, seed=5):
        stream = RngStream(seed, 0)
        x0 = system.sample_reference(tag, stream)
        return sample_prehistory(system, tag, x0, depth, stream)

    def test_anchor_point_is_member(self):
        sys_ = ToralLinear(SADDLE_2X2)
        anchor = self._anchor(sys_, HAAR, 6)
        q = BowenQuery(anchor=anchor, n=6, epsilon=0.1)
        assert is_in_inverse_bowen_ball(sys_, q, anchor.point(0))

    def test_level_zero_prune(self):
        sys_ = ExpandingCircle(2)
        anchor = Prehistory(np.array([[0.0], [0.5], [0.25]]), sys_)
        q = BowenQuery(anchor=anchor, n=2, epsilon=0.1)
        assert not is_in_inverse_bowen_ball(sys_, q, np.array([0.3]))

    @pytest.mark.parametrize("make", [lambda: ExpandingCircle(2), lambda: ToralLinear(SADDLE_2X2)])
    def test_pruned_dfs_equals_exhaustive(self, make, rng):
        sys_ = make()
        tag = HAAR
        stream = RngStream(6, 0)
        cases = 0
        agree_member = 0
        for rep in range(60):
            n = int(rng.integers(1, 7))
            eps = float(rng.uniform(0.05, 0.24))
            x0 = sys_.sample_reference(tag, stream)
            anchor = sample_prehistory(sys_, tag, x0, n, stream)
            q = BowenQuery(anchor=anchor, n=n, epsilon=eps)
            for _ in range(10):
                if rng.random() < 0.5:
                    z = sys_.sample_reference(tag, stream)
                else:  # near the anchor so both outcomes occur
                    z = (anchor.point(0) + rng.normal(scale=eps, size=sys_.dim)) % 1.0
                got = is_in_inverse_bowen_ball(sys_, q, z)
                want = exhaustive_member(sys_, anchor.points, n, eps, z)
                assert got == want
                cnt = count_admissible_branches(sys_, q, z)
                assert cnt == exhaustive_count(sys_, anchor.points, n, eps, z)
                assert (cnt > 0) == got
                cases += 1
                agree_member += got
        assert cases >= 500
        assert 0 < agree_member < cases  # both outcomes exercised

    def test_count_unique_below_separation(self, rng):
        sys_ = ToralLinear(SADDLE_2X2)
        eps = sys_.min_preimage_separation() / 2.0 * 0.9
        stream = RngStream(7, 0)
        for _ in range(10):
            x0 = sys_.sample_reference(HAAR, stream)
            anchor = sample_prehistory(sys_, HAAR, x0, 5, stream)
            q = BowenQuery(anchor=anchor, n=5, epsilon=eps)
            assert count_admissible_branches(sys_, q, anchor.point(0)) == 1

    def test_count_zero_outside_ball(self):
        sys_ = ExpandingCircle(2)
        anchor = Prehistory(np.array([[0.0], [0.5]]), sys_)
        q = BowenQuery(anchor=anchor, n=1, epsilon=0.05)
        assert count_admissible_branches(sys_, q, np.array([0.4])) == 0

    def test_fat_baker_overlap_counts(self, rng):
        # spec case: anchors in the overlap region at eps = 0.4 give counts in
        # {1, 2}, matching the exhaustive oracle (the two backward branches
        # differ by 1 in the fibre coordinate, so only one survives here)
        sys_ = FatBaker(0.75)
        stream = RngStream(7, 1)
        for _ in range(40):
            x0 = sys_.sample_reference(SRB, stream)
            anchor = sample_prehistory(sys_, SRB, x0, 1, stream)
            z = anchor.point(0)
            q = BowenQuery(anchor=anchor, n=1, epsilon=0.4)
            cnt = count_admissible_branches(sys_, q, z)
            assert cnt == exhaustive_count(sys_, anchor.points, 1, 0.4, z)
            assert cnt in (1, 2)

    def test_fat_baker_two_branch_instance(self):
        # a displaced sample sees both branches once eps exceeds the fibre gap
        sys_ = FatBaker(0.75)
        anchor = Prehistory(np.array([[0.0, 0.0], [-1.0 / 3.0, 0.5]]), sys_)
        anchor.validate(sys_)
        z = np.array([0.0, 0.5])
        q = BowenQuery(anchor=anchor, n=1, epsilon=0.9)
        cnt = count_admissible_branches(sys_, q, z)
        assert cnt == exhaustive_count(sys_, anchor.points, 1, 0.9, z)
        assert cnt == 2

    def test_monotone_in_depth(self, rng):
        sys_ = ToralLinear(SADDLE_2X2)
        stream = RngStream(7, 2)
        for _ in range(15):
            x0 = sys_.sample_reference(HAAR, stream)
            anchor = sample_prehistory(sys_, HAAR, x0, 8, stream)
            z = (anchor.point(0) + rng.normal(scale=0.05, size=2)) % 1.0
            members = [
                is_in_inverse_bowen_ball(sys_, BowenQuery(anchor=anchor, n=n, epsilon=0.15), z)
                for n in range(9)
            ]
            # once membership fails it must stay failed
            assert all(a or not b for a, b in zip(members, members[1:]))

    def test_monotone_in_radius(self, rng):
        sys_ = ExpandingCircle(3)
        stream = RngStream(7, 3)
        for _ in range(15):
            x0 = sys_.sample_reference(HAAR, stream)
            anchor = sample_prehistory(sys_, HAAR, x0, 6, stream)
            z = np.array([(anchor.point(0)[0] + rng.normal(scale=0.05)) % 1.0])
            prev = False
            for eps in (0.02, 0.05, 0.1, 0.2, 0.4):
                cur = is_in_inverse_bowen_ball(
                    sys_, BowenQuery(anchor=anchor, n=6, epsilon=eps), z)
                assert cur or not prev
                prev = cur

    def test_forward_inverse_duality_below_separation(self, rng):
        sys_ = ToralLinear(SADDLE_2X2)
        eps = sys_.min_preimage_separation() / 2.0 * 0.9
        stream = RngStream(7, 4)
        checked_member = 0
        for _ in range(200):
            x0 = sys_.sample_reference(HAAR, stream)
            n = int(rng.integers(1, 7))
            anchor = sample_prehistory(sys_, HAAR, x0, n, stream)
            z = (anchor.point(0) + rng.normal(scale=eps / 2, size=2)) % 1.0
            q = BowenQuery(anchor=anchor, n=n, epsilon=eps)
            branch = admissible_branch(sys_, q, z)
            member = branch is not None
            if member:
                checked_member += 1
                endpoint = branch[-1]
                assert is_in_forward_bowen_ball(sys_, anchor.point(n), n, eps, endpoint)
        assert checked_member > 10

    def test_expansion_count_linear_in_depth(self):
        sys_ = ToralLinear(SADDLE_2X2)
        eps = sys_.min_preimage_separation() / 2.0 * 0.9
        stream = RngStream(7, 5)
        x0 = sys_.sample_reference(HAAR, stream)
        anchor = sample_prehistory(sys_, HAAR, x0, 30, stream)
        z = anchor.point(0)
        for n in (5, 10, 20, 30):
            q = BowenQuery(anchor=anchor, n=n, epsilon=eps)
            expansions = search_expansions(sys_, q, z)
            assert expansions <= 20 * (n + 1)  # generous linear bound

    def test_query_validation(self):
        sys_ = ExpandingCircle(2)
        anchor = Prehistory(np.array([[0.0], [0.5]]), sys_)
        with pytest.raises(PrehistoryError):
            BowenQuery(anchor=anchor, n=2, epsilon=0.1)
        with pytest.raises(PrehistoryError):
            BowenQuery(anchor=anchor, n=1, epsilon=-0.1)
