"""Small fixed-dimension linear algebra, slope regression and RNG streams.

Everything downstream (system definitions, Monte-Carlo estimators, the
closed-form evaluators) builds on the three primitives here:

* integer/real square matrices up to dimension 8 with exact-ish determinants
  and eigenvalues,
* ordinary least squares for the finite-depth decay slopes that stand in for
  the asymptotic entropy limits,
* deterministic, splittable random-number streams so that every estimate is
  bit-reproducible for a given (seed, stream_id).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

MAX_DIM = 8


class NumericsError(ValueError):
    """Invalid input to a numerics operation."""


@dataclass(frozen=True)
class SquareMatrix:
    """A dense square matrix of dimension 1..8, row-major.

    Toral systems use integer entries; the entries are stored as float64
    either way (all integers of interest are exactly representable).
    """

    entries: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.entries, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise NumericsError(f"matrix must be square, got shape {arr.shape}")
        if not 1 <= arr.shape[0] <= MAX_DIM:
            raise NumericsError(f"dimension {arr.shape[0]} outside 1..{MAX_DIM}")
        if not np.all(np.isfinite(arr)):
            raise NumericsError("matrix entries must be finite")
        object.__setattr__(self, "entries", arr)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def is_integer(self) -> bool:
        return bool(np.all(self.entries == np.round(self.entries)))


def _as_matrix(m) -> SquareMatrix:
    return m if isinstance(m, SquareMatrix) else SquareMatrix(np.asarray(m, dtype=float))


def determinant(m) -> float:
    """Determinant; for integer matrices the result is rounded to the exact integer."""
    mat = _as_matrix(m)
    det = float(np.linalg.det(mat.entries))
    if mat.is_integer:
        rounded = round(det)
        scale = max(1.0, abs(det))
        if abs(det - rounded) > 1e-6 * scale:
            raise NumericsError(f"integer matrix determinant {det} did not round cleanly")
        return float(rounded)
    return det


def eigenvalues(m) -> np.ndarray:
    """All eigenvalues with multiplicity, sorted by descending modulus.

    Ties in modulus (conjugate pairs) are broken by ascending argument.
    """
    mat = _as_matrix(m)
    eig = np.linalg.eigvals(mat.entries)
    order = sorted(range(len(eig)), key=lambda i: (-abs(eig[i]), np.angle(eig[i])))
    return eig[order]


def eigenvalue_moduli(m) -> np.ndarray:
    """Descending list of |lambda_i|; what every entropy formula consumes."""
    return np.abs(eigenvalues(m))


@dataclass(frozen=True)
class SlopeEstimate:
    """An OLS line fit y ~ slope*n + intercept over a window of depths.

    ``stderr`` is the standard error of the slope coefficient;
    ``residual_rms`` is sqrt(SSR / num_points).
    """

    slope: float
    intercept: float
    stderr: float
    num_points: int
    residual_rms: float


def fit_slope(points: Iterable[tuple[float, float]]) -> SlopeEstimate:
    """Unweighted OLS over (n, y) pairs.  Requires >= 2 distinct abscissae."""
    pts = [(float(n), float(y)) for n, y in points]
    if len(pts) < 2:
        raise NumericsError("fit_slope needs at least 2 points")
    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    if np.unique(x).size < 2:
        raise NumericsError("fit_slope needs at least 2 distinct abscissae")
    xbar = x.mean()
    ybar = y.mean()
    sxx = float(np.sum((x - xbar) ** 2))
    sxy = float(np.sum((x - xbar) * (y - ybar)))
    slope = sxy / sxx
    intercept = ybar - slope * xbar
    resid = y - (intercept + slope * x)
    ssr = max(float(np.sum(resid**2)), 0.0)
    n = len(pts)
    if n > 2:
        stderr = math.sqrt(ssr / (n - 2) / sxx)
    else:
        stderr = 0.0
    return SlopeEstimate(
        slope=slope,
        intercept=intercept,
        stderr=stderr,
        num_points=n,
        residual_rms=math.sqrt(ssr / n),
    )


@dataclass
class RngStream:
    """A deterministic random stream keyed by (seed, stream_id).

    Backed by the Philox 4x64 counter-based generator; the key is derived via
    ``numpy.random.SeedSequence(entropy=seed, spawn_key=(stream_id,))``, so an
    identical (seed, stream_id) pair yields an identical value sequence on
    every platform.  Streams with distinct ids are statistically independent.
    A stream is owned by exactly one worker; never share one across threads.
    """

    seed: int
    stream_id: int = 0
    _gen: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        self._gen = np.random.Generator(np.random.Philox(seq))

    def generator(self) -> np.random.Generator:
        return self._gen

    def next_uniform(self) -> float:
        """One draw, uniform on [0, 1); advances the stream."""
        return float(self._gen.random())


def rng_next_uniform(stream: RngStream) -> float:
    return stream.next_uniform()


def pack_stream_id(*fields: int) -> int:
    """Pack small nonnegative indices into one 64-bit stream id.

    Used by the estimators to give each (task, anchor, radius, chunk) cell its
    own independent stream regardless of worker scheduling.  Field widths:
    task(10) anchor(14) radius(8) chunk(24), all validated.
    """
    widths = (10, 14, 8, 24)
    if len(fields) > len(widths):
        raise NumericsError("too many stream id fields")
    out = 0
    for value, width in zip(fields, widths):
        if not 0 <= value < (1 << width):
            raise NumericsError(f"stream id field {value} exceeds {width} bits")
        out = (out << width) | value
    for width in widths[len(fields):]:
        out <<= width
    return out


def weighted_choice(weights: Sequence[float], u: float) -> int:
    """Index sampled from normalized ``weights`` using one uniform draw."""
    total = float(sum(weights))
    acc = 0.0
    for i, w in enumerate(weights):
        acc += w / total
        if u < acc:
            return i
    return len(weights) - 1
