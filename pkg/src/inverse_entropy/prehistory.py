"""Backward trajectories and Bowen-ball membership.

A prehistory is a finite backward trajectory (x_0, x_-1, ..., x_-n) with
f(x_-i) = x_-i+1; sampling one means walking the preimage tree with the
backward conditional weights of the reference measure.  Membership in an
inverse Bowen ball is decided by depth-first search over a sample point's own
preimage tree, pruning every candidate farther than eps from the matching
anchor coordinate.  The predicates here are the readable reference
implementations; the Monte-Carlo estimators use the batch kernels in
:mod:`inverse_entropy.backend`, which are tested against these.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .numerics import RngStream, weighted_choice
from .systems import Point, System

ROUND_TRIP_TOL = 1e-10
BRANCH_DEDUP_DECIMALS = 9


class PrehistoryError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Prehistory:
    """Points row i = x_-i, so row 0 is the present point."""

    points: np.ndarray
    system: System = field(repr=False, default=None)

    @property
    def depth(self) -> int:
        return self.points.shape[0] - 1

    def point(self, i: int) -> Point:
        return self.points[i]

    def validate(self, system: System | None = None, tol: float = ROUND_TRIP_TOL) -> None:
        sys_ = system or self.system
        for i in range(1, self.points.shape[0]):
            err = sys_.distance(sys_.apply(self.points[i]), self.points[i - 1])
            if err > tol:
                raise PrehistoryError(f"backward step {i} violates f(x_-i) = x_-(i-1): {err}")


@dataclass(frozen=True)
class BowenQuery:
    """One inverse or forward Bowen ball: (anchor, depth n, radius eps).

    eps is recommended to stay below half the phase-space diameter (estimator
    configs enforce this); the predicates themselves accept any eps > 0.
    """

    anchor: Prehistory
    n: int
    epsilon: float
    direction: Literal["forward", "inverse"] = "inverse"

    def __post_init__(self) -> None:
        if self.epsilon <= 0:
            raise PrehistoryError("epsilon must be positive")
        if not 0 <= self.n <= self.anchor.depth:
            raise PrehistoryError(f"depth n = {self.n} outside 0..{self.anchor.depth}")
        if self.direction not in ("forward", "inverse"):
            raise PrehistoryError(f"unknown direction {self.direction!r}")


def sample_prehistory(system: System, tag: str, x0: Point, depth: int,
                      rng: RngStream) -> Prehistory:
    """Walk backward from x0 choosing preimages by the measure's conditional law."""
    if depth < 0:
        raise PrehistoryError("depth must be >= 0")
    pts = [np.asarray(x0)]
    for _ in range(depth):
        cands, weights = system.backward_candidates(tag, pts[-1])
        pick = weighted_choice(weights, rng.next_uniform())
        pts.append(cands[pick])
    return Prehistory(points=np.stack(pts), system=system)


def is_in_forward_bowen_ball(system: System, x: Point, n: int, eps: float, z: Point) -> bool:
    """True iff the first n forward iterates of z stay strictly eps-close to those of x."""
    a = np.asarray(x)
    b = np.asarray(z)
    for _ in range(n + 1):
        if not system.distance(a, b) < eps:
            return False
        a = system.apply(a)
        b = system.apply(b)
    return True


def _search_branch(system: System, anchor: np.ndarray, n: int, eps: float,
                   z: Point) -> tuple[list[Point] | None, int]:
    """Pruned DFS for one admissible backward branch; returns (branch, expansions)."""
    if not system.distance(z, anchor[0]) < eps:
        return None, 0
    expansions = 0
    stack: list[list[Point]] = [[np.asarray(z)]]
    while stack:
        branch = stack.pop()
        lev = len(branch) - 1
        if lev == n:
            return branch, expansions
        for w in reversed(system.preimages(branch[-1])):
            expansions += 1
            if system.distance(w, anchor[lev + 1]) < eps:
                stack.append(branch + [w])
    return None, expansions


def admissible_branch(system: System, query: BowenQuery, z: Point) -> list[Point] | None:
    """One backward branch of z eps-shadowing the anchor, or None."""
    branch, _ = _search_branch(system, query.anchor.points, query.n, query.epsilon, z)
    return branch


def is_in_inverse_bowen_ball(system: System, query: BowenQuery, z: Point) -> bool:
    """True iff z admits a backward branch staying eps-close to the anchor for n steps."""
    if query.direction != "inverse":
        raise PrehistoryError("query direction must be 'inverse'")
    return admissible_branch(system, query, z) is not None


def search_expansions(system: System, query: BowenQuery, z: Point) -> int:
    """Preimage expansions performed by the pruned search (performance diagnostic)."""
    _, expansions = _search_branch(system, query.anchor.points, query.n, query.epsilon, z)
    return expansions


def count_admissible_branches(system: System, query: BowenQuery, z: Point) -> int:
    """Number of distinct eps-admissible backward branches of z.

    Exhaustive (no short-circuit); coincident nodes at the same level are
    merged at 1e-9 resolution, so branches through numerically identical
    states are counted once.
    """
    if query.direction != "inverse":
        raise PrehistoryError("query direction must be 'inverse'")
    anchor = query.anchor.points
    eps = query.epsilon
    if not system.distance(z, anchor[0]) < eps:
        return 0
    memo: dict[tuple, int] = {}

    def key(lev: int, p: Point) -> tuple:
        return (lev, tuple(np.round(np.asarray(p, dtype=float), BRANCH_DEDUP_DECIMALS)))

    def count_from(lev: int, p: Point) -> int:
        if lev == query.n:
            return 1
        k = key(lev, p)
        if k in memo:
            return memo[k]
        seen: set[tuple] = set()
        total = 0
        for w in system.preimages(p):
            kw = key(lev + 1, w)
            if kw in seen:
                continue
            seen.add(kw)
            if system.distance(w, anchor[lev + 1]) < eps:
                total += count_from(lev + 1, w)
        memo[k] = total
        return total

    return count_from(0, np.asarray(z))
