"""The five endomorphism families and their reference invariant measures.

Each system knows its forward map, the complete preimage set of a point, its
(constant or triangular) differential, the metric that makes Bowen balls
boxes, and how to sample its reference measure:

* ``ToralLinear``       -- x -> A x mod 1 on T^d, Haar measure
* ``ExpandingCircle``   -- x -> d x mod 1 on the circle, Haar measure
* ``FullShift``         -- left shift on m-symbol words, Bernoulli(p)
* ``FatBaker``          -- overlapping skew contraction on [-1,1]^2, SRB
* ``Tsujii``            -- (x, y) -> (l x mod 1, lam y + f(x)), SRB

Points are numpy vectors: float64 coordinates for the smooth families,
int8 symbol words (truncated at ``word_length``) for the shift.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .numerics import RngStream, SquareMatrix, eigenvalue_moduli

Point = np.ndarray

HAAR = "haar"
BERNOULLI = "bernoulli"
SRB = "srb"

METRIC_TORUS_SUP = "torus-sup"
METRIC_TORUS_EUCLIDEAN = "torus-euclidean"
METRIC_PRODUCT_SUP = "product-sup"
METRIC_SHIFT = "shift-2^-k"

UNIT_EIGENVALUE_TOL = 1e-9
_TAIL_TOL = 1e-12  # truncation for the signed geometric series behind nu_beta
_FIBER_TOL = 1e-17  # truncation for the Tsujii fiber sum


class SystemError_(ValueError):
    """Invalid system parameters or an operation outside a system's contract."""


class NotSmoothError(SystemError_):
    """Raised when a differential is requested from a non-smooth system."""


def circle_dist(a, b):
    """Distance on R/Z for coordinates already reduced to [0, 1)."""
    d = np.abs(a - b)
    return np.minimum(d, 1.0 - d)


def mod1(x):
    return x - np.floor(x)


class System:
    """Common surface shared by all five families."""

    kind: str
    dim: int
    metric: str
    valid_measures: tuple[str, ...]

    # -- dynamics ---------------------------------------------------------

    def apply(self, x: Point) -> Point:
        raise NotImplementedError

    def preimages(self, x: Point) -> list[Point]:
        """The complete preimage set, ordered lexicographically."""
        raise NotImplementedError

    def differential(self, x: Point) -> np.ndarray:
        raise NotSmoothError(f"{self.kind} is not a smooth system")

    def distance(self, p: Point, q: Point) -> float:
        raise NotImplementedError

    def diameter(self) -> float:
        raise NotImplementedError

    # -- reference measure ------------------------------------------------

    def default_measure(self) -> str:
        return self.valid_measures[0]

    def check_measure(self, tag: str) -> None:
        if tag not in self.valid_measures:
            raise SystemError_(f"measure {tag!r} not valid for {self.kind}")

    def measure_jacobian(self, tag: str, x: Point) -> float | None:
        """Jacobian of the reference measure at x, or None when no closed form exists."""
        raise NotImplementedError

    def sample_batch(self, tag: str, rng: RngStream, n: int) -> np.ndarray:
        """n reference-measure samples, one per row."""
        raise NotImplementedError

    def sample_reference(self, tag: str, rng: RngStream) -> Point:
        return self.sample_batch(tag, rng, 1)[0]

    def backward_candidates(self, tag: str, y: Point) -> tuple[list[Point], np.ndarray]:
        """Preimages of y together with the backward conditional weights of ``tag``."""
        raise NotImplementedError

    def log_jacobian_stream(self, tag: str, rng: RngStream, steps: int) -> np.ndarray:
        """log J along a reference orbit of the given length (Birkhoff integrand)."""
        raise NotImplementedError


class ToralLinear(System):
    """x -> A x mod 1 on T^d for an integer hyperbolic matrix with |det A| >= 2."""

    kind = "toral"
    valid_measures = (HAAR,)

    def __init__(self, matrix, metric: str = METRIC_TORUS_SUP):
        mat = SquareMatrix(np.asarray(matrix, dtype=float))
        if not mat.is_integer:
            raise SystemError_("toral matrix must have integer entries")
        self.matrix = mat
        self.dim = mat.dim
        det = round(float(np.linalg.det(mat.entries)))
        if abs(det) < 2:
            raise SystemError_(f"|det A| = {abs(det)} < 2: not a non-invertible toral endomorphism")
        moduli = eigenvalue_moduli(mat)
        if np.any(np.abs(moduli - 1.0) < UNIT_EIGENVALUE_TOL):
            raise SystemError_("matrix has an eigenvalue of modulus 1 (not hyperbolic)")
        if metric not in (METRIC_TORUS_SUP, METRIC_TORUS_EUCLIDEAN):
            raise SystemError_(f"metric {metric!r} invalid for toral systems")
        self.metric = metric
        self.degree = abs(det)
        self._amat = mat.entries.copy()
        self._ainv = np.linalg.inv(mat.entries)
        self._cosets = self._enumerate_cosets()

    def _enumerate_cosets(self) -> np.ndarray:
        # Preimages of x are {A^{-1} x + r mod 1 : r in A^{-1}Z^d / Z^d}.  The
        # integer offsets k with A w = x + k, w in [0,1)^d, lie row-wise in
        # [sum_j min(a_ij,0) - 1, sum_j max(a_ij,0) + 1]; enumerate that box.
        # A^{-1} k = (adj(A) k) / det with an integer adjugate, so the coset
        # representatives are exact multiples of 1/|det| (no float dedup).
        a = self._amat
        det_i = round(float(np.linalg.det(a)))
        adj = np.rint(self._ainv * det_i).astype(np.int64)
        sign = 1 if det_i > 0 else -1
        m = abs(det_i)
        los = [math.floor(np.minimum(a[i], 0).sum()) - 1 for i in range(self.dim)]
        his = [math.ceil(np.maximum(a[i], 0).sum()) + 1 for i in range(self.dim)]
        axes = [np.arange(lo, hi + 1, dtype=np.int64) for lo, hi in zip(los, his)]
        axes = [ax[np.argsort(np.abs(ax), kind="stable")] for ax in axes]  # small k first
        found: set[tuple[int, ...]] = set()
        rest = np.stack(
            np.meshgrid(*axes[1:], indexing="ij"), axis=-1
        ).reshape(-1, self.dim - 1) if self.dim > 1 else np.zeros((1, 0), dtype=np.int64)
        for k0 in axes[0]:
            grid = np.concatenate([np.full((rest.shape[0], 1), k0, dtype=np.int64), rest], axis=1)
            res = (sign * (grid @ adj.T)) % m
            found.update(map(tuple, res))
            if len(found) >= m:
                break
        if len(found) != m:
            raise SystemError_(
                f"coset enumeration found {len(found)} offsets, expected {m}"
            )
        offs = np.array(sorted(found), dtype=float) / m
        return np.ascontiguousarray(offs)

    @property
    def coset_offsets(self) -> np.ndarray:
        return self._cosets

    @property
    def inverse_matrix(self) -> np.ndarray:
        return self._ainv

    def min_preimage_separation(self) -> float:
        """Smallest distance between distinct preimages of one point."""
        best = math.inf
        for i in range(self.degree):
            for j in range(i + 1, self.degree):
                best = min(best, self.distance(self._cosets[i], self._cosets[j]))
        return best

    def apply(self, x: Point) -> Point:
        return mod1(self._amat @ np.asarray(x, dtype=float))

    def preimages(self, x: Point) -> list[Point]:
        base = self._ainv @ np.asarray(x, dtype=float)
        pts = mod1(base[None, :] + self._cosets)
        pts = pts[np.lexsort(pts.T[::-1])]
        return [pts[i] for i in range(pts.shape[0])]

    def differential(self, x: Point) -> np.ndarray:
        return self._amat.copy()

    def distance(self, p: Point, q: Point) -> float:
        d = circle_dist(np.asarray(p, dtype=float), np.asarray(q, dtype=float))
        if self.metric == METRIC_TORUS_EUCLIDEAN:
            return float(np.sqrt(np.sum(d * d)))
        return float(np.max(d))

    def diameter(self) -> float:
        if self.metric == METRIC_TORUS_EUCLIDEAN:
            return 0.5 * math.sqrt(self.dim)
        return 0.5

    def measure_jacobian(self, tag: str, x: Point) -> float:
        self.check_measure(tag)
        return float(self.degree)

    def sample_batch(self, tag: str, rng: RngStream, n: int) -> np.ndarray:
        self.check_measure(tag)
        return rng.generator().random((n, self.dim))

    def backward_candidates(self, tag: str, y: Point) -> tuple[list[Point], np.ndarray]:
        self.check_measure(tag)
        pts = self.preimages(y)
        return pts, np.full(len(pts), 1.0 / len(pts))

    def log_jacobian_stream(self, tag: str, rng: RngStream, steps: int) -> np.ndarray:
        self.check_measure(tag)
        return np.full(steps, math.log(self.degree))


class ExpandingCircle(System):
    """The degree-d covering x -> d x mod 1 of the circle, d >= 2."""

    kind = "circle"
    valid_measures = (HAAR,)
    dim = 1

    def __init__(self, degree: int, metric: str = METRIC_TORUS_SUP):
        if int(degree) != degree or degree < 2:
            raise SystemError_("circle degree must be an integer >= 2")
        if metric not in (METRIC_TORUS_SUP, METRIC_TORUS_EUCLIDEAN):
            raise SystemError_(f"metric {metric!r} invalid for circle systems")
        self.degree = int(degree)
        self.metric = metric

    def apply(self, x: Point) -> Point:
        return mod1(np.asarray(x, dtype=float) * self.degree)

    def preimages(self, x: Point) -> list[Point]:
        v = float(np.asarray(x, dtype=float).reshape(()))
        return [np.array([(v + j) / self.degree]) for j in range(self.degree)]

    def differential(self, x: Point) -> np.ndarray:
        return np.array([[float(self.degree)]])

    def distance(self, p: Point, q: Point) -> float:
        return float(np.max(circle_dist(np.asarray(p, dtype=float), np.asarray(q, dtype=float))))

    def diameter(self) -> float:
        return 0.5

    def measure_jacobian(self, tag: str, x: Point) -> float:
        self.check_measure(tag)
        return float(self.degree)

    def sample_batch(self, tag: str, rng: RngStream, n: int) -> np.ndarray:
        self.check_measure(tag)
        return rng.generator().random((n, 1))

    def backward_candidates(self, tag: str, y: Point) -> tuple[list[Point], np.ndarray]:
        self.check_measure(tag)
        pts = self.preimages(y)
        return pts, np.full(len(pts), 1.0 / len(pts))

    def log_jacobian_stream(self, tag: str, rng: RngStream, steps: int) -> np.ndarray:
        self.check_measure(tag)
        return np.full(steps, math.log(self.degree))


class FullShift(System):
    """Left shift on one-sided words over m symbols, with a Bernoulli measure.

    Words are truncated at ``word_length`` symbols; shifting appends fresh
    Bernoulli symbols at the tail, so long orbits stay genuinely random.
    """

    kind = "shift"
    valid_measures = (BERNOULLI,)
    metric = METRIC_SHIFT

    def __init__(self, symbols: int, probabilities: Sequence[float], word_length: int = 64):
        if int(symbols) != symbols or symbols < 2:
            raise SystemError_("shift needs an integer alphabet size >= 2")
        p = np.asarray(probabilities, dtype=float)
        if p.shape != (symbols,):
            raise SystemError_("probability vector length must equal the alphabet size")
        if np.any(p <= 0):
            raise SystemError_("Bernoulli probabilities must be positive")
        if abs(float(p.sum()) - 1.0) > 1e-12:
            raise SystemError_("Bernoulli probabilities must sum to 1 within 1e-12")
        if word_length < 8:
            raise SystemError_("word_length must be at least 8")
        self.symbols = int(symbols)
        self.probabilities = p
        self.word_length = int(word_length)
        self.dim = self.word_length
        self._cum = np.cumsum(p)

    def apply(self, x: Point) -> Point:
        w = np.asarray(x)
        out = np.empty_like(w)
        out[:-1] = w[1:]
        out[-1] = 0  # deterministic pad; use orbits/streams for statistics
        return out

    def preimages(self, x: Point) -> list[Point]:
        w = np.asarray(x)
        outs = []
        for s in range(self.symbols):
            nw = np.empty_like(w)
            nw[0] = s
            nw[1:] = w[:-1]
            outs.append(nw)
        return outs

    def distance(self, p: Point, q: Point) -> float:
        a = np.asarray(p)
        b = np.asarray(q)
        neq = a != b
        if not neq.any():
            return 0.0
        return float(2.0 ** -int(np.argmax(neq)))

    def diameter(self) -> float:
        return 1.0

    def required_prefix(self, eps: float) -> int:
        """Smallest k with 2^-k < eps: the number of symbols pinned by an eps-ball."""
        if eps <= 2.0**-60:
            raise SystemError_("eps below the metric resolution of the truncated words")
        k = 0
        while 2.0**-k >= eps:
            k += 1
        return k

    def _draw_words(self, gen: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
        u = gen.random(shape)
        if self.symbols <= 8:
            # count of thresholds <= u; same values as a right-sided bisect
            syms = np.zeros(shape, dtype=np.int8)
            for j in range(self.symbols - 1):
                syms += u >= self._cum[j]
        else:
            syms = np.searchsorted(self._cum, u, side="right")
        return np.minimum(syms, self.symbols - 1).astype(np.int8)

    def measure_jacobian(self, tag: str, x: Point) -> float:
        self.check_measure(tag)
        return float(1.0 / self.probabilities[int(np.asarray(x)[0])])

    def sample_batch(self, tag: str, rng: RngStream, n: int) -> np.ndarray:
        self.check_measure(tag)
        return self._draw_words(rng.generator(), (n, self.word_length))

    def backward_candidates(self, tag: str, y: Point) -> tuple[list[Point], np.ndarray]:
        self.check_measure(tag)
        return self.preimages(y), self.probabilities.copy()

    def log_jacobian_stream(self, tag: str, rng: RngStream, steps: int) -> np.ndarray:
        self.check_measure(tag)
        syms = self._draw_words(rng.generator(), (steps,))
        return -np.log(self.probabilities[syms.astype(int)])


def bernoulli_convolution_batch(beta: float, rng: RngStream, n: int) -> np.ndarray:
    """n i.i.d. samples of the fair-coin signed series sum_i +-(1-beta) beta^i.

    This is the stationary horizontal marginal of the fat baker map; the tail
    is truncated once beta^i < 1e-12.
    """
    if not 0.0 < beta < 1.0:
        raise SystemError_("beta must lie in (0, 1)")
    depth = _geometric_tail_depth(beta, _TAIL_TOL)
    weights = (1.0 - beta) * beta ** np.arange(depth)
    gen = rng.generator()
    out = np.empty(n)
    step = 8192
    for lo in range(0, n, step):
        hi = min(lo + step, n)
        signs = np.where(gen.random((hi - lo, depth)) < 0.5, 1.0, -1.0)
        out[lo:hi] = signs @ weights
    return out


def _geometric_tail_depth(ratio: float, tol: float) -> int:
    if ratio <= 0.0:
        return 1
    depth = int(math.ceil(math.log(tol) / math.log(ratio))) + 1
    return min(max(depth, 4), 20000)


class FatBaker(System):
    """The overlapping baker map on [-1,1]^2: contracts x by beta, doubles y.

    The branch is selected by the sign of y (boundary y = 0 goes with the
    upper branch).  For 1/2 < beta < 1 the two x-branches overlap; beta = 1/2
    is accepted as the exactly-self-affine boundary case used for sanity
    checks.  The reference measure is the SRB measure nu_beta x Lebesgue.
    """

    kind = "fat-baker"
    valid_measures = (SRB,)
    metric = METRIC_PRODUCT_SUP
    dim = 2

    def __init__(self, beta: float):
        if not 0.5 <= beta < 1.0:
            raise SystemError_("fat baker parameter must satisfy 1/2 <= beta < 1")
        self.beta = float(beta)

    def apply(self, x: Point) -> Point:
        u, v = float(x[0]), float(x[1])
        omb = 1.0 - self.beta
        if v >= 0.0:
            return np.array([self.beta * u + omb, 2.0 * v - 1.0])
        return np.array([self.beta * u - omb, 2.0 * v + 1.0])

    def preimages(self, x: Point) -> list[Point]:
        u, v = float(x[0]), float(x[1])
        omb = 1.0 - self.beta
        outs = []
        xp = (u - omb) / self.beta  # upper-branch inverse, lands in y >= 0
        if -1.0 <= xp <= 1.0:
            outs.append(np.array([xp, (v + 1.0) / 2.0]))
        xm = (u + omb) / self.beta  # lower-branch inverse, needs y < 0
        if -1.0 <= xm <= 1.0 and (v - 1.0) / 2.0 < 0.0:
            outs.append(np.array([xm, (v - 1.0) / 2.0]))
        outs.sort(key=lambda p: (p[0], p[1]))
        return outs

    def differential(self, x: Point) -> np.ndarray:
        return np.array([[self.beta, 0.0], [0.0, 2.0]])

    def distance(self, p: Point, q: Point) -> float:
        d = np.abs(np.asarray(p, dtype=float) - np.asarray(q, dtype=float))
        return float(np.max(d))

    def diameter(self) -> float:
        return 2.0

    def measure_jacobian(self, tag: str, x: Point) -> None:
        self.check_measure(tag)
        return None  # the SRB density of nu_beta has no closed form

    def sample_batch(self, tag: str, rng: RngStream, n: int) -> np.ndarray:
        self.check_measure(tag)
        xs = bernoulli_convolution_batch(self.beta, rng, n)
        ys = 2.0 * rng.generator().random(n) - 1.0
        return np.column_stack([xs, ys])

    def backward_candidates(self, tag: str, y: Point) -> tuple[list[Point], np.ndarray]:
        # Backward branch symbols of the SRB lift are fair coins restricted to
        # the branches whose x-inverse stays inside [-1, 1].
        self.check_measure(tag)
        pts = self.preimages(y)
        if not pts:
            raise SystemError_("point has no preimages inside the square")
        return pts, np.full(len(pts), 1.0 / len(pts))

    def log_jacobian_stream(self, tag: str, rng: RngStream, steps: int) -> np.ndarray:
        raise SystemError_("fat baker SRB measure has no closed-form Jacobian")


class Tsujii(System):
    """The skew product (x, y) -> (l x mod 1, lam y + f(x)) on S^1 x R.

    f is a trigonometric polynomial sum_k (a_k cos 2 pi k x + b_k sin 2 pi k x)
    with k <= 8.  The interesting regime is lam * l > 1.  The reference
    measure is the SRB measure: uniform base marginal, fiber coordinate given
    by the geometric sum of f along the backward base itinerary.
    """

    kind = "tsujii"
    valid_measures = (SRB,)
    metric = METRIC_PRODUCT_SUP
    dim = 2
    MAX_HARMONIC = 8

    def __init__(self, branches: int, contraction: float,
                 cos_coefficients: Sequence[float], sin_coefficients: Sequence[float] = ()):
        if int(branches) != branches or branches < 2:
            raise SystemError_("branch count l must be an integer >= 2")
        self.ell = int(branches)
        lam = float(contraction)
        if not (1.0 / self.ell < lam < 1.0):
            raise SystemError_("need 1/l < lam < 1 (the lam*l > 1 regime)")
        self.lam = lam
        ca = np.asarray(cos_coefficients, dtype=float)
        cb = np.asarray(sin_coefficients, dtype=float) if len(sin_coefficients) else np.zeros(1)
        if ca.ndim != 1 or cb.ndim != 1:
            raise SystemError_("coefficient arrays must be one-dimensional")
        if ca.size > self.MAX_HARMONIC + 1 or cb.size > self.MAX_HARMONIC + 1:
            raise SystemError_(f"harmonics above k = {self.MAX_HARMONIC} are not supported")
        k = max(ca.size, cb.size, 1)
        self.cos_coefficients = np.zeros(k)
        self.cos_coefficients[: ca.size] = ca
        self.sin_coefficients = np.zeros(k)
        self.sin_coefficients[: cb.size] = cb
        grid = np.linspace(0.0, 1.0, 8192, endpoint=False)
        self._sup_f = float(np.max(np.abs(self.base_function(grid))))
        self.strip_halfwidth = self._sup_f / (1.0 - self.lam)

    def base_function(self, x):
        xs = np.asarray(x, dtype=float)
        acc = np.full_like(xs, self.cos_coefficients[0])
        for k in range(1, self.cos_coefficients.size):
            t = (2.0 * math.pi * k) * xs
            acc = acc + self.cos_coefficients[k] * np.cos(t) + self.sin_coefficients[k] * np.sin(t)
        return acc

    def base_derivative(self, x):
        xs = np.asarray(x, dtype=float)
        acc = np.zeros_like(xs)
        for k in range(1, self.cos_coefficients.size):
            w = 2.0 * math.pi * k
            t = w * xs
            acc = acc + w * (-self.cos_coefficients[k] * np.sin(t) + self.sin_coefficients[k] * np.cos(t))
        return acc

    def apply(self, x: Point) -> Point:
        u, v = float(x[0]), float(x[1])
        return np.array([mod1(u * self.ell), self.lam * v + float(self.base_function(u))])

    def preimages(self, x: Point) -> list[Point]:
        u, v = float(x[0]), float(x[1])
        outs = []
        for j in range(self.ell):
            xb = (u + j) / self.ell
            yb = (v - float(self.base_function(xb))) / self.lam
            outs.append(np.array([xb, yb]))
        return outs

    def differential(self, x: Point) -> np.ndarray:
        return np.array([[float(self.ell), 0.0],
                         [float(self.base_derivative(float(x[0]))), self.lam]])

    def distance(self, p: Point, q: Point) -> float:
        dx = circle_dist(float(p[0]), float(q[0]))
        dy = abs(float(p[1]) - float(q[1]))
        return float(max(dx, dy))

    def diameter(self) -> float:
        return max(0.5, 2.0 * self.strip_halfwidth)

    def measure_jacobian(self, tag: str, x: Point) -> None:
        self.check_measure(tag)
        return None  # no closed-form SRB density

    def _fiber_depth(self) -> int:
        return _geometric_tail_depth(self.lam, _FIBER_TOL)

    def _base_window(self) -> int:
        return int(math.ceil(53.0 / math.log2(self.ell))) + 2

    def base_orbit(self, rng: RngStream, n: int) -> np.ndarray:
        """n consecutive points of a stationary orbit of x -> l x mod 1.

        The orbit is driven by an explicit stream of base-l digits, so it does
        not suffer the mantissa exhaustion of naive float iteration.
        """
        w = self._base_window()
        digits = rng.generator().integers(0, self.ell, size=n + w).astype(float)
        weights = (1.0 / self.ell) ** np.arange(1, w + 1)
        return sliding_window_view(digits, w)[:n] @ weights

    def orbit_batch(self, rng: RngStream, n: int) -> np.ndarray:
        """n consecutive SRB-distributed points (x_t, y_t) of one forward orbit."""
        k = self._fiber_depth()
        xs = self.base_orbit(rng, n + k)
        f = self.base_function(xs)
        lam_pow = self.lam ** np.arange(k - 1, -1, -1)  # oldest term first
        ys = sliding_window_view(f, k)[: n] @ lam_pow
        return np.column_stack([xs[k: n + k], ys])

    def sample_batch(self, tag: str, rng: RngStream, n: int) -> np.ndarray:
        self.check_measure(tag)
        return self.orbit_batch(rng, n)

    def backward_candidates(self, tag: str, y: Point) -> tuple[list[Point], np.ndarray]:
        # Uniform over base preimages, restricted to branches whose fiber
        # coordinate stays inside the invariant strip: unrestricted choices
        # leave the attractor at rate 1/lam and are not SRB-generic.
        self.check_measure(tag)
        pts = self.preimages(y)
        bound = self.strip_halfwidth + 1e-9
        viable = [p for p in pts if abs(float(p[1])) <= bound]
        if not viable:
            viable = [min(pts, key=lambda p: abs(float(p[1])))]
        return viable, np.full(len(viable), 1.0 / len(viable))

    def log_jacobian_stream(self, tag: str, rng: RngStream, steps: int) -> np.ndarray:
        raise SystemError_("Tsujii SRB measure has no closed-form Jacobian")


def make_system(kind: str, metric: str | None = None, **params) -> System:
    """Construct a system from config-file style fields."""
    kind = kind.lower()
    if kind == "toral":
        return ToralLinear(params["matrix"], metric=metric or METRIC_TORUS_SUP)
    if kind == "circle":
        return ExpandingCircle(params["degree"], metric=metric or METRIC_TORUS_SUP)
    if kind == "shift":
        return FullShift(params["symbols"], params["probabilities"],
                         word_length=params.get("word_length", 64))
    if kind == "fat-baker":
        sys_ = FatBaker(params["beta"])
    elif kind == "tsujii":
        sys_ = Tsujii(params["branches"], params["contraction"],
                      params.get("cos_coefficients", (0.0,)),
                      params.get("sin_coefficients", ()))
    else:
        raise SystemError_(f"unknown system kind {kind!r}")
    if metric is not None and metric != sys_.metric:
        raise SystemError_(f"metric {metric!r} invalid for {kind}")
    return sys_
