"""Monte-Carlo estimation of forward, inverse and folding entropy.

The common scheme: sample anchor backward trajectories from the reference
measure, estimate the measure of forward / inverse Bowen balls around them by
counting reference samples that the membership kernels accept, regress
-log(measure) against the depth n, and average the per-anchor slopes (the
pointwise limits are almost-everywhere constant, so anchors are exchangeable).

Monte-Carlo trials are partitioned into fixed-size chunks, each owning a
dedicated RNG stream keyed by (task, anchor, radius, chunk); merged counts are
integer sums, so results are bit-identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import backend
from .numerics import RngStream, SlopeEstimate, fit_slope, pack_stream_id
from .prehistory import BowenQuery, Prehistory, sample_prehistory
from .systems import FatBaker, System, SystemError_, bernoulli_convolution_batch

CHUNK = 1 << 16
GOLDEN_RATIO_CONJUGATE = (math.sqrt(5.0) - 1.0) / 2.0

# Stream-id task codes (field 1 of pack_stream_id).
_TASK_INVERSE = 1
_TASK_FORWARD = 2
_TASK_FOLDING = 3
_TASK_LYAPUNOV = 4
_TASK_DIMENSION = 5
_TASK_FAT_DIRECT = 6
_ANCHOR_RADIUS_SLOT = 255  # radius field reserved for anchor-sampling streams


class EstimatorError(RuntimeError):
    pass


class InsufficientResolutionError(EstimatorError):
    """Every radius lost too many depths to hit-count gating."""


class FoldingUnavailableError(EstimatorError):
    """The reference measure has no closed-form Jacobian."""


@dataclass(frozen=True)
class EstimatorConfig:
    """Knobs of the Monte-Carlo pipelines.

    radii must be strictly descending, depths strictly increasing.  The
    defaults keep the full acceptance suite at desk scale while the deepest
    toral inverse balls still collect well over ``min_hits`` hits.
    """

    radii: tuple[float, ...] = (0.2, 0.1, 0.05)
    depths: tuple[int, ...] = tuple(range(2, 13))
    anchors: int = 32
    samples_per_ball: int = 200_000
    burn_in: int = 10_000
    seed: int = 7
    min_hits: int = 10

    def __post_init__(self) -> None:
        object.__setattr__(self, "radii", tuple(float(r) for r in self.radii))
        object.__setattr__(self, "depths", tuple(int(n) for n in self.depths))
        if not self.radii or any(r <= 0 for r in self.radii):
            raise EstimatorError("radii must be positive")
        if any(a <= b for a, b in zip(self.radii, self.radii[1:])):
            raise EstimatorError("radii must be strictly descending")
        if len(self.radii) > 200:
            raise EstimatorError("too many radii")
        if not self.depths or any(n < 0 for n in self.depths):
            raise EstimatorError("depths must be nonnegative")
        if any(a >= b for a, b in zip(self.depths, self.depths[1:])):
            raise EstimatorError("depths must be strictly increasing")
        if self.anchors < 1 or self.anchors > 10_000:
            raise EstimatorError("anchors must be in 1..10000")
        if self.samples_per_ball < 1:
            raise EstimatorError("samples_per_ball must be positive")
        if self.min_hits < 5:
            raise EstimatorError("min_hits must be at least 5")
        if self.burn_in < 0:
            raise EstimatorError("burn_in must be nonnegative")


@dataclass(frozen=True)
class BallMeasureEstimate:
    hits: int
    trials: int

    @property
    def phat(self) -> float:
        return self.hits / self.trials

    @property
    def stderr(self) -> float:
        p = self.phat
        return math.sqrt(p * (1.0 - p) / self.trials)


@dataclass(frozen=True)
class CurveCell:
    """Aggregated (over anchors) hit counts for one (radius, depth) ball family."""

    eps: float
    n: int
    hits: int
    trials: int


@dataclass(eq=False)
class EntropyReport:
    per_radius: dict[float, SlopeEstimate]
    extrapolated: float
    stderr: float
    anchors_used: int
    balls_skipped: int
    notes: str
    curve: list[CurveCell] = field(default_factory=list)
    provenance: str = "estimated"


@dataclass(eq=False)
class InvariantReport:
    """Cross-check of forward = inverse + folding on one system/measure."""

    forward: EntropyReport
    inverse: EntropyReport
    folding: EntropyReport
    lyapunov: tuple[float, ...] | None
    residual: float
    combined_stderr: float
    tolerance: float
    passed: bool
    notes: str


@dataclass(eq=False)
class DimensionReport:
    """Pointwise-dimension estimate of the signed-series stationary measure."""

    delta: float
    stderr: float
    centers_used: int
    ladder: tuple[float, ...]
    truncated: bool
    notes: str
    fit: SlopeEstimate | None = None


@dataclass(eq=False)
class FatBakerReport:
    """Two independent inverse-entropy routes for the overlapping baker map."""

    direct: EntropyReport
    entropy_from_dimension: float
    entropy_from_dimension_stderr: float
    dimension: DimensionReport
    overlap_number: float
    agreement_sigma: float
    notes: str


def _check_radii(system: System, cfg: EstimatorConfig) -> None:
    half = system.diameter() / 2.0
    for eps in cfg.radii:
        if eps >= half:
            raise EstimatorError(
                f"radii: eps = {eps} is not below half the phase-space diameter ({half})"
            )


def _chunk_ranges(total: int) -> list[tuple[int, int]]:
    out = []
    off = 0
    while off < total:
        size = min(CHUNK, total - off)
        out.append((off, size))
        off += size
    return out


def _counts_ge(depths: np.ndarray, nmax: int) -> np.ndarray:
    b = np.bincount(depths.astype(np.int64) + 1, minlength=nmax + 2)[: nmax + 2]
    return np.cumsum(b[::-1])[::-1][1:]


def _anchor_stream(cfg: EstimatorConfig, task: int, anchor_i: int) -> RngStream:
    return RngStream(cfg.seed, pack_stream_id(task, anchor_i, _ANCHOR_RADIUS_SLOT, 0))


def forward_orbit(system: System, x0, n: int) -> np.ndarray:
    pts = [np.asarray(x0)]
    for _ in range(n):
        pts.append(system.apply(pts[-1]))
    return np.stack(pts)


def estimate_ball_measure(system: System, tag: str, query: BowenQuery,
                          n_samples: int, rng: RngStream) -> BallMeasureEstimate:
    """Hit-count estimate of the reference measure of one Bowen ball."""
    if n_samples < 1:
        raise EstimatorError("n_samples must be positive")
    pts = system.sample_batch(tag, rng, n_samples)
    anchor = query.anchor.points[: query.n + 1]
    if query.direction == "inverse":
        depths = backend.inverse_depths(system, anchor, pts, query.epsilon)
    else:
        orbit = forward_orbit(system, query.anchor.point(0), query.n)
        depths = backend.forward_depths(system, orbit, pts, query.epsilon)
    hits = int(np.count_nonzero(depths >= query.n))
    return BallMeasureEstimate(hits=hits, trials=n_samples)


def _collect_counts(system: System, tag: str, cfg: EstimatorConfig,
                    anchors: list[np.ndarray], direction: str, task: int,
                    threads: int) -> np.ndarray:
    """counts[a, r, n] = hits of the depth-n eps_r ball at anchor a."""
    nmax = max(cfg.depths)
    n_anchors = len(anchors)
    counts = np.zeros((n_anchors, len(cfg.radii), nmax + 1), dtype=np.int64)
    chunks = _chunk_ranges(cfg.samples_per_ball)
    jobs = [
        (a, ri, ci, size)
        for a in range(n_anchors)
        for ri in range(len(cfg.radii))
        for ci, (_, size) in enumerate(chunks)
    ]

    def run(job: tuple[int, int, int, int]) -> tuple[int, int, np.ndarray]:
        a, ri, ci, size = job
        stream = RngStream(cfg.seed, pack_stream_id(task, a, ri, 1 + ci))
        pts = system.sample_batch(tag, stream, size)
        if direction == "inverse":
            depths = backend.inverse_depths(system, anchors[a], pts, cfg.radii[ri])
        else:
            depths = backend.forward_depths(system, anchors[a], pts, cfg.radii[ri])
        return a, ri, _counts_ge(depths, nmax)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(j) for j in jobs]
    for a, ri, ge in results:
        counts[a, ri] += ge
    return counts


@dataclass(eq=False)
class _RadiusSummary:
    eps: float
    estimate: SlopeEstimate | None
    anchors_used: int
    retained_fraction: float
    skipped_cells: int


def _summarize_radius(eps: float, counts_r: np.ndarray, trials: int,
                      cfg: EstimatorConfig) -> _RadiusSummary:
    slopes, intercepts, stderrs, rms = [], [], [], []
    total_points = 0
    retained = 0
    for a in range(counts_r.shape[0]):
        pts = [
            (n, -math.log(counts_r[a, n] / trials))
            for n in cfg.depths
            if counts_r[a, n] >= cfg.min_hits
        ]
        retained += len(pts)
        if len(pts) >= 2:
            est = fit_slope(pts)
            slopes.append(est.slope)
            intercepts.append(est.intercept)
            stderrs.append(est.stderr)
            rms.append(est.residual_rms)
            total_points += est.num_points
    cells = counts_r.shape[0] * len(cfg.depths)
    frac = retained / cells
    if not slopes:
        return _RadiusSummary(eps, None, 0, frac, cells - retained)
    if len(slopes) > 1:
        stderr = float(np.std(slopes, ddof=1) / math.sqrt(len(slopes)))
    else:
        stderr = stderrs[0]
    est = SlopeEstimate(
        slope=float(np.mean(slopes)),
        intercept=float(np.mean(intercepts)),
        stderr=stderr,
        num_points=total_points,
        residual_rms=float(np.sqrt(np.mean(np.square(rms)))),
    )
    return _RadiusSummary(eps, est, len(slopes), frac, cells - retained)


def _select_radius(summaries: list[_RadiusSummary]) -> tuple[_RadiusSummary, str]:
    """Extrapolation policy: prefer the smallest radius with >= 80% of depth
    cells retained; degrade to the best-retained usable radius otherwise."""
    usable = [s for s in summaries if s.estimate is not None]
    if not usable:
        raise InsufficientResolutionError(
            "insufficient resolution: no radius kept two depths above min_hits"
        )
    well = [s for s in usable if s.retained_fraction >= 0.8]
    if well:
        return min(well, key=lambda s: s.eps), ""
    half = [s for s in usable if s.retained_fraction >= 0.5]
    pool = half if half else usable
    pick = max(pool, key=lambda s: (s.retained_fraction, s.eps))
    note = (
        "no radius retained 80% of depths; using eps = "
        f"{pick.eps} with retention {pick.retained_fraction:.2f}"
    )
    if not half:
        note += " (all radii below half retention)"
    return pick, note


def _decay_report(system: System, tag: str, cfg: EstimatorConfig, direction: str,
                  threads: int, extra_notes: str = "") -> EntropyReport:
    system.check_measure(tag)
    _check_radii(system, cfg)
    nmax = max(cfg.depths)
    task = _TASK_INVERSE if direction == "inverse" else _TASK_FORWARD
    anchors = []
    for a in range(cfg.anchors):
        stream = _anchor_stream(cfg, task, a)
        x0 = system.sample_reference(tag, stream)
        if direction == "inverse":
            anchors.append(sample_prehistory(system, tag, x0, nmax, stream).points)
        else:
            anchors.append(forward_orbit(system, x0, nmax))
    counts = _collect_counts(system, tag, cfg, anchors, direction, task, threads)
    trials = cfg.samples_per_ball
    summaries = [
        _summarize_radius(eps, counts[:, ri], trials, cfg)
        for ri, eps in enumerate(cfg.radii)
    ]
    picked, note = _select_radius(summaries)
    notes = [n for n in (extra_notes, note) if n]
    notes.append("slopes are finite-depth regressions; lower/upper limit variants coincide here")
    curve = [
        CurveCell(eps=eps, n=n, hits=int(counts[:, ri, n].sum()), trials=trials * cfg.anchors)
        for ri, eps in enumerate(cfg.radii)
        for n in cfg.depths
    ]
    return EntropyReport(
        per_radius={s.eps: s.estimate for s in summaries if s.estimate is not None},
        extrapolated=picked.estimate.slope,
        stderr=picked.estimate.stderr,
        anchors_used=picked.anchors_used,
        balls_skipped=int(sum(s.skipped_cells for s in summaries)),
        notes="; ".join(notes),
        curve=curve,
    )


def estimate_inverse_entropy(system: System, tag: str, cfg: EstimatorConfig,
                             threads: int = 1) -> EntropyReport:
    """Decay rate of inverse-Bowen-ball measures along sampled prehistories."""
    extra = ""
    if system.kind == "tsujii":
        extra = ("anchor prehistories use uniform strip-restricted backward choices; "
                 "an approximation to the exact backward conditionals")
    return _decay_report(system, tag, cfg, "inverse", threads, extra)


def estimate_forward_entropy(system: System, tag: str, cfg: EstimatorConfig,
                             threads: int = 1) -> EntropyReport:
    """Brin-Katok style decay rate of forward Bowen-ball measures."""
    return _decay_report(system, tag, cfg, "forward", threads)


def estimate_folding_entropy(system: System, tag: str, cfg: EstimatorConfig) -> EntropyReport:
    """Birkhoff average of log J over reference orbits (one per anchor seed)."""
    system.check_measure(tag)
    steps = max(cfg.depths) * 1000
    means = []
    for a in range(cfg.anchors):
        stream = _anchor_stream(cfg, _TASK_FOLDING, a)
        try:
            logs = system.log_jacobian_stream(tag, stream, cfg.burn_in + steps)
        except SystemError_ as exc:
            raise FoldingUnavailableError(
                "folding estimator requires closed-form measure Jacobian"
            ) from exc
        means.append(float(np.mean(logs[cfg.burn_in:])))
    value = float(np.mean(means))
    stderr = float(np.std(means, ddof=1) / math.sqrt(len(means))) if len(means) > 1 else 0.0
    return EntropyReport(
        per_radius={},
        extrapolated=value,
        stderr=stderr,
        anchors_used=cfg.anchors,
        balls_skipped=0,
        notes=f"Birkhoff average over {cfg.anchors} orbits of length {steps}",
    )


def _orbit_points(system: System, rng: RngStream, total: int) -> np.ndarray:
    if system.kind == "tsujii":
        xs = system.base_orbit(rng, total)
        return np.column_stack([xs, np.zeros(total)])
    pts = np.empty((total, system.dim))
    x = system.sample_reference(system.default_measure(), rng)
    for t in range(total):
        pts[t] = x
        x = system.apply(x)
    return pts


def estimate_lyapunov_spectrum(system: System, cfg: EstimatorConfig,
                               steps: int = 100_000, stride: int = 25) -> list[float]:
    """Lyapunov exponents via QR-reorthogonalized products of differentials.

    Cumulative log-R diagonals are recorded every ``stride`` steps and the
    exponents read off as regression slopes, which cancels the bounded
    frame-alignment boundary term that a plain average divides by n.
    """
    stream = _anchor_stream(cfg, _TASK_LYAPUNOV, 0)
    warmup = 256
    pts = _orbit_points(system, stream, warmup + steps)
    dim = system.differential(pts[0]).shape[0]
    q = np.eye(dim)
    acc = np.zeros(dim)
    records: list[tuple[int, np.ndarray]] = []
    for t in range(warmup + steps):
        m = system.differential(pts[t]) @ q
        q, r = np.linalg.qr(m)
        diag = np.diagonal(r).copy()
        signs = np.where(diag < 0.0, -1.0, 1.0)
        q = q * signs
        if t >= warmup:
            acc += np.log(np.abs(diag))
            k = t - warmup + 1
            if k % stride == 0:
                records.append((k, acc.copy()))
    exps = [
        fit_slope([(k, vec[i]) for k, vec in records]).slope
        for i in range(dim)
    ]
    return sorted(exps, reverse=True)


def estimate_pointwise_dimension(beta: float, cfg: EstimatorConfig) -> DimensionReport:
    """Slope of log(ball mass) vs log(radius) for the signed-series measure.

    Builds one empirical measure from samples_per_ball draws and averages
    per-center fits over a dyadic radius ladder; rungs whose ball collects
    fewer than min_hits samples are dropped (noted as truncation).
    """
    if not 0.5 <= beta < 1.0:
        raise EstimatorError("beta must lie in [1/2, 1)")
    m = cfg.samples_per_ball
    samples = np.sort(bernoulli_convolution_batch(
        beta, RngStream(cfg.seed, pack_stream_id(_TASK_DIMENSION, 0, 0, 1)), m))
    centers = bernoulli_convolution_batch(
        beta, RngStream(cfg.seed, pack_stream_id(_TASK_DIMENSION, 0, _ANCHOR_RADIUS_SLOT, 0)),
        cfg.anchors)
    ladder = tuple(2.0 ** -j for j in range(2, 17))
    slopes = []
    fits = []
    truncated = False
    for x in centers:
        pts = []
        for r in ladder:
            cnt = int(np.searchsorted(samples, x + r, side="left")
                      - np.searchsorted(samples, x - r, side="right"))
            if cnt >= cfg.min_hits:
                pts.append((math.log(r), math.log(cnt / m)))
            else:
                truncated = True
        if len(pts) >= 2:
            est = fit_slope(pts)
            slopes.append(est.slope)
            fits.append(est)
    if not slopes:
        raise InsufficientResolutionError(
            "insufficient resolution: radius ladder finer than the empirical measure"
        )
    delta = float(np.mean(slopes))
    stderr = float(np.std(slopes, ddof=1) / math.sqrt(len(slopes))) if len(slopes) > 1 else fits[0].stderr
    notes = []
    if truncated:
        notes.append("radius ladder truncated where balls fell below min_hits")
    if abs(beta - GOLDEN_RATIO_CONJUGATE) < 1e-9:
        notes.append(
            "beta is the golden-ratio conjugate, a known singular parameter: "
            "the stationary measure is totally singular and its dimension is < 1"
        )
    agg = SlopeEstimate(
        slope=delta,
        intercept=float(np.mean([f.intercept for f in fits])),
        stderr=stderr,
        num_points=int(sum(f.num_points for f in fits)),
        residual_rms=float(np.sqrt(np.mean([f.residual_rms**2 for f in fits]))),
    )
    return DimensionReport(
        delta=delta,
        stderr=stderr,
        centers_used=len(slopes),
        ladder=ladder,
        truncated=truncated,
        notes="; ".join(notes),
        fit=agg,
    )


def estimate_fat_baker_inverse_entropy(beta: float, cfg: EstimatorConfig,
                                       threads: int = 1) -> FatBakerReport:
    """Two routes to the overlapping baker map's inverse entropy.

    (a) |log beta| times the estimated pointwise dimension of the horizontal
    stationary measure; (b) direct decay of the inverse-ball product measure:
    the horizontal factor of the depth-n ball is the interval of radius
    beta^n * eps, whose mass is read off the same empirical measure.  Both
    target the identical quantity; the report carries their agreement sigma
    and the implied branch-overlap number.
    """
    if not 0.5 <= beta < 1.0:
        raise EstimatorError("beta must lie in [1/2, 1)")
    dim_rep = estimate_pointwise_dimension(beta, cfg)
    log_beta = abs(math.log(beta))
    from_dim = log_beta * dim_rep.delta
    from_dim_stderr = log_beta * dim_rep.stderr

    m = cfg.samples_per_ball
    samples = np.sort(bernoulli_convolution_batch(
        beta, RngStream(cfg.seed, pack_stream_id(_TASK_FAT_DIRECT, 0, 0, 1)), m))
    centers = bernoulli_convolution_batch(
        beta, RngStream(cfg.seed, pack_stream_id(_TASK_FAT_DIRECT, 0, _ANCHOR_RADIUS_SLOT, 0)),
        cfg.anchors)
    nmax = max(cfg.depths)
    counts = np.zeros((cfg.anchors, len(cfg.radii), nmax + 1), dtype=np.int64)
    for a, x in enumerate(centers):
        for ri, eps in enumerate(cfg.radii):
            for n in range(nmax + 1):
                r = (beta**n) * eps
                counts[a, ri, n] = int(
                    np.searchsorted(samples, x + r, side="left")
                    - np.searchsorted(samples, x - r, side="right"))
    summaries = [
        _summarize_radius(eps, counts[:, ri], m, cfg) for ri, eps in enumerate(cfg.radii)
    ]
    picked, note = _select_radius(summaries)
    curve = [
        CurveCell(eps=eps, n=n, hits=int(counts[:, ri, n].sum()), trials=m * cfg.anchors)
        for ri, eps in enumerate(cfg.radii)
        for n in cfg.depths
    ]
    notes = [n for n in (note,) if n]
    notes.append("direct route uses the product structure of the inverse balls")
    direct = EntropyReport(
        per_radius={s.eps: s.estimate for s in summaries if s.estimate is not None},
        extrapolated=picked.estimate.slope,
        stderr=picked.estimate.stderr,
        anchors_used=picked.anchors_used,
        balls_skipped=int(sum(s.skipped_cells for s in summaries)),
        notes="; ".join(notes),
        curve=curve,
    )
    delta_clamped = min(max(dim_rep.delta, 0.0), 1.0)
    overlap = 2.0 * beta**delta_clamped
    report_notes = []
    if dim_rep.notes:
        report_notes.append(dim_rep.notes)
    if delta_clamped != dim_rep.delta:
        report_notes.append("dimension clamped to [0, 1] for the overlap number")
    return FatBakerReport(
        direct=direct,
        entropy_from_dimension=from_dim,
        entropy_from_dimension_stderr=from_dim_stderr,
        dimension=dim_rep,
        overlap_number=overlap,
        agreement_sigma=math.sqrt(direct.stderr**2 + from_dim_stderr**2),
        notes="; ".join(report_notes),
    )


def check_entropy_identity(system: System, tag: str, cfg: EstimatorConfig,
                           threads: int = 1) -> InvariantReport:
    """Estimate all three entropies and test forward = inverse + folding."""
    forward = estimate_forward_entropy(system, tag, cfg, threads)
    inverse = estimate_inverse_entropy(system, tag, cfg, threads)
    folding = estimate_folding_entropy(system, tag, cfg)
    try:
        lyap: tuple[float, ...] | None = tuple(estimate_lyapunov_spectrum(system, cfg))
    except SystemError_:
        lyap = None
    residual = forward.extrapolated - (inverse.extrapolated + folding.extrapolated)
    sigma = math.sqrt(forward.stderr**2 + inverse.stderr**2 + folding.stderr**2)
    tolerance = 2.0 * sigma + 0.05
    return InvariantReport(
        forward=forward,
        inverse=inverse,
        folding=folding,
        lyapunov=lyap,
        residual=residual,
        combined_stderr=sigma,
        tolerance=tolerance,
        passed=abs(residual) <= tolerance,
        notes="residual = forward - (inverse + folding)",
    )
