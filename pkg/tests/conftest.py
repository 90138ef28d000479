import numpy as np
import pytest

from inverse_entropy.estimators import EstimatorConfig

# 3x3 integer pair with equal forward entropy but different inverse entropy
# (eigenvalues 8, 2 +- sqrt(3) and 4, 4 +- 2 sqrt(3)).
ISO_PAIR_A = [[8, 1, 4], [0, 3, 1], [0, 2, 1]]
ISO_PAIR_B = [[4, 0, 0], [3, 6, 2], [5, 4, 2]]

# 2x2 saddle used throughout: eigenvalues 2 +- sqrt(2); |det| = 2.
SADDLE_2X2 = [[3, 1], [1, 1]]


def small_cfg(**kw) -> EstimatorConfig:
    """Reduced-budget config for unit tests (acceptance pins the defaults)."""
    base = dict(radii=(0.2, 0.1), depths=tuple(range(2, 9)), anchors=8,
                samples_per_ball=40_000, burn_in=500, seed=13, min_hits=10)
    base.update(kw)
    return EstimatorConfig(**base)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
