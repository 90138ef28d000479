"""Closed-form entropy invariants.

For a hyperbolic integer matrix acting on the torus, Haar measure has

* forward entropy   sum of log |lambda_i| over |lambda_i| > 1,
* inverse entropy   -sum of log |lambda_i| over |lambda_i| < 1,
* folding entropy   log |det A|,

so forward - inverse = folding holds identically.  The fat-baker and skew
product families get the corresponding closed forms / bounds.  These values
serve as oracles for the Monte-Carlo estimators and as the fast path of the
CLI.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import SquareMatrix, eigenvalues
from .systems import System, ToralLinear, Tsujii, UNIT_EIGENVALUE_TOL


class ExactError(ValueError):
    pass


@dataclass(frozen=True)
class InvariantPair:
    """Forward/inverse/folding entropies with the Lyapunov spectrum behind them."""

    forward_entropy: float
    inverse_entropy: float
    folding_entropy: float
    lyapunov: tuple[float, ...]
    provenance: str = "exact"


def toral_invariants(matrix) -> InvariantPair:
    """Entropy invariants of Haar measure for an integer hyperbolic matrix.

    Requires a nonzero integer determinant and no eigenvalue of modulus 1;
    |det| = 1 (an automorphism) is allowed, its inverse and forward entropy
    then coincide.
    """
    mat = matrix if isinstance(matrix, SquareMatrix) else SquareMatrix(np.asarray(matrix, dtype=float))
    if not mat.is_integer:
        raise ExactError("toral invariants need an integer matrix")
    det = float(np.linalg.det(mat.entries))
    if abs(det) < 0.5:
        raise ExactError("matrix is singular")
    moduli = np.abs(eigenvalues(mat))
    if np.any(np.abs(moduli - 1.0) < UNIT_EIGENVALUE_TOL):
        raise ExactError("matrix has an eigenvalue of modulus 1 (not hyperbolic)")
    logs = np.log(moduli)
    forward = float(np.sum(logs[moduli > 1.0]))
    inverse = float(-np.sum(logs[moduli < 1.0]))
    folding = math.log(abs(round(det)))
    return InvariantPair(
        forward_entropy=forward,
        inverse_entropy=inverse,
        folding_entropy=folding,
        lyapunov=tuple(float(v) for v in logs),
    )


@dataclass(frozen=True)
class FatBakerExact:
    inverse_entropy: float
    overlap_number: float


def fat_baker_inverse_from_dimension(beta: float, delta: float) -> FatBakerExact:
    """Inverse entropy |log beta| * delta and the implied branch-overlap number.

    delta is the pointwise dimension of the stationary signed-series measure;
    the overlap number exp(log 2 - inverse entropy) = 2 beta^delta lies in
    [1, 2] for beta in [1/2, 1).
    """
    if not 0.5 < beta < 1.0:
        raise ExactError("beta must lie in (1/2, 1)")
    if not 0.0 <= delta <= 1.0:
        raise ExactError("dimension delta must lie in [0, 1]")
    inverse = abs(math.log(beta)) * delta
    return FatBakerExact(inverse_entropy=inverse, overlap_number=math.exp(math.log(2.0) - inverse))


@dataclass(frozen=True)
class TsujiiExact:
    forward_entropy: float
    folding_entropy: float
    inverse_exact_ac: float
    inverse_bounds: tuple[float, float]


def tsujii_invariants(branches: int, contraction: float) -> TsujiiExact:
    """Closed forms for the skew product family in the lam * l > 1 regime.

    Forward entropy log l and folding log(lam l) are exact; the inverse
    entropy equals |log lam| when the SRB measure is absolutely continuous
    (the generic case) and in general lies in [|log lam| / 2, |log lam|].
    """
    ell = int(branches)
    lam = float(contraction)
    if ell < 2 or not (1.0 / ell < lam < 1.0):
        raise ExactError("need integer l >= 2 and 1/l < lam < 1")
    inv = abs(math.log(lam))
    return TsujiiExact(
        forward_entropy=math.log(ell),
        folding_entropy=math.log(lam * ell),
        inverse_exact_ac=inv,
        inverse_bounds=(inv / 2.0, inv),
    )


@dataclass(frozen=True)
class RigidityPair:
    """(forward entropy of the SRB measure, inverse entropy of the inverse SRB).

    For linear toral systems both measures are Haar and the pair is exact;
    for the skew product family the inverse side is an interval.
    """

    forward_entropy: float
    inverse_entropy: float | None
    inverse_bounds: tuple[float, float] | None
    provenance: str


def rigidity_pair(system: System) -> RigidityPair:
    if isinstance(system, ToralLinear):
        if system.dim != 2:
            raise ExactError("rigidity pair needs a 2x2 toral system")
        pair = toral_invariants(system.matrix)
        moduli = sorted(abs(v) for v in eigenvalues(system.matrix))
        if not (moduli[0] < 1.0 < moduli[1]):
            raise ExactError("rigidity pair needs one contracting and one expanding eigenvalue")
        return RigidityPair(
            forward_entropy=pair.forward_entropy,
            inverse_entropy=pair.inverse_entropy,
            inverse_bounds=None,
            provenance="exact",
        )
    if isinstance(system, Tsujii):
        ex = tsujii_invariants(system.ell, system.lam)
        return RigidityPair(
            forward_entropy=ex.forward_entropy,
            inverse_entropy=None,
            inverse_bounds=ex.inverse_bounds,
            provenance="exact forward, interval inverse",
        )
    raise ExactError(f"rigidity pair not defined for {type(system).__name__}")
