"""Numerical verification of the partition strategy's theoretical claims.

Checks, without symbols: (1) the candidate grids for every slice count up
to 20 are dense enough in log-aspect space that each slice's aspect ratio
stays within [1/2, 2]; (2) the normalized slice area stays within
[1/3, 3/2]; (3) the expectation and variance of the slice aspect ratio and
area under a documented distribution of image sizes, by seeded Monte Carlo
with a midpoint-quadrature cross-check.

Distribution assumption: image sizes are uniform over the (width, height)
plane, restricted to area ratio n in (lo, hi] relative to the encoder's
pretraining area and aspect ratio in [lo, hi] (long side over short side).
In (n, aspect) coordinates that measure is uniform in n and log-uniform in
aspect.  The aspect-ratio statistic is orientation-folded (always >= 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .partition import ordered_candidates

TWO_LOG2 = 2.0 * math.log(2.0)


@dataclass(frozen=True)
class DistributionSpec:
    """Sampling region for the statistics integrals.

    area_ratio range is open at the low end; values at or below the encoder
    area (n <= 1) are excluded because the theoretical bounds assume the
    image is at least one encoder tile.
    """

    area_ratio_lo: float = 1.0
    area_ratio_hi: float = 20.0
    aspect_lo: float = 1.0
    aspect_hi: float = 6.0

    def __post_init__(self):
        if not (0 < self.area_ratio_lo < self.area_ratio_hi):
            raise ValueError("area ratio range must be positive and non-empty")
        if not (1.0 <= self.aspect_lo < self.aspect_hi):
            raise ValueError("aspect range must be >= 1 and non-empty")


ALTERNATE_SPEC = DistributionSpec(area_ratio_lo=1.0, area_ratio_hi=3.0, aspect_lo=1.0, aspect_hi=2.0)


@dataclass(frozen=True)
class StatReport:
    expectation: float
    variance: float
    samples: int
    std_error: float
    seed: int

    def to_json_dict(self) -> dict:
        return {
            "expectation": self.expectation,
            "variance": self.variance,
            "samples": self.samples,
            "std_error": self.std_error,
            "seed": self.seed,
        }


def _candidate_arrays(n: int) -> tuple[np.ndarray, np.ndarray]:
    cands = ordered_candidates(n)
    ms = np.array([g.cols_m for g in cands], dtype=np.float64)
    ns = np.array([g.rows_n for g in cands], dtype=np.float64)
    return ms, ns


def select_grids_vectorized(area_ratio: np.ndarray, aspect: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Best (cols, rows) per sample; same scoring and tie-breaks as select_partition."""
    ideal = np.maximum(np.ceil(area_ratio).astype(np.int64), 1)
    cols = np.empty(area_ratio.shape, dtype=np.int64)
    rows = np.empty(area_ratio.shape, dtype=np.int64)
    log_aspect = np.log(aspect)
    for n in np.unique(ideal):
        idx = np.nonzero(ideal == n)[0]
        ms, ns = _candidate_arrays(int(n))
        # score = -|log(aspect * rows/cols)| for a square-pretrained encoder
        scores = -np.abs(log_aspect[idx][None, :] + np.log(ns / ms)[:, None])
        # first max in preference order wins ties
        best = np.argmax(scores == scores.max(axis=0, keepdims=True), axis=0)
        cols[idx] = ms[best].astype(np.int64)
        rows[idx] = ns[best].astype(np.int64)
    return cols, rows


def slice_statistics(area_ratio: np.ndarray, aspect: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Folded slice aspect ratio and normalized slice area per sample."""
    cols, rows = select_grids_vectorized(area_ratio, aspect)
    ratio = aspect * rows / cols
    ratio = np.maximum(ratio, 1.0 / ratio)
    area = area_ratio / (cols * rows)
    return ratio, area


def enumerate_ratio_bound(n_max: int = 20) -> tuple[bool, float]:
    """Candidate density check: every candidate grid's log-aspect has another
    candidate within 2*log(2), for every slice count up to n_max.

    Returns (holds, worst minimal gap).  A lone candidate has gap 0.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    worst = 0.0
    for n in range(1, n_max + 1):
        logs = sorted(math.log(g.rows_n / g.cols_m) for g in ordered_candidates(n))
        if len(logs) == 1:
            continue
        for i, li in enumerate(logs):
            gap = min(abs(li - lj) for j, lj in enumerate(logs) if j != i)
            worst = max(worst, gap)
    return worst <= TWO_LOG2, worst


def sweep_slice_bounds(
    grid_density: int = 1500,
    aspect_range: tuple[float, float] = (1.0, 6.0),
    n_range: tuple[float, float] = (1.0, 20.0),
) -> tuple[float, float, float, float]:
    """(min_ratio, max_ratio, min_area, max_area) over a dense (n, aspect) grid.

    Ratios are folded; the full symmetric aspect range [1/hi, hi] gives the
    same folded values by symmetry of the score.
    """
    if grid_density < 1000:
        raise ValueError("grid density must be >= 1000 per axis")
    n_lo, n_hi = n_range
    a_lo, a_hi = aspect_range
    # open at n_lo: start half a step in
    n_vals = n_lo + (np.arange(grid_density) + 0.5) * (n_hi - n_lo) / grid_density
    a_vals = np.exp(np.linspace(math.log(a_lo), math.log(a_hi), grid_density))
    min_r, max_r = math.inf, -math.inf
    min_s, max_s = math.inf, -math.inf
    for n_chunk in np.array_split(n_vals, max(1, grid_density // 64)):
        nn, aa = np.meshgrid(n_chunk, a_vals, indexing="ij")
        ratio, area = slice_statistics(nn.ravel(), aa.ravel())
        min_r = min(min_r, float(ratio.min()))
        max_r = max(max_r, float(ratio.max()))
        min_s = min(min_s, float(area.min()))
        max_s = max(max_s, float(area.max()))
    return min_r, max_r, min_s, max_s


def monte_carlo_expectations(
    dist: DistributionSpec,
    samples: int = 10_000_000,
    seed: int = 42,
    shard_size: int = 1_000_000,
) -> tuple[StatReport, StatReport]:
    """Seeded Monte Carlo estimates of E/Var for slice ratio and area.

    Shards have independently derived seeds and a fixed reduction order, so
    results are bit-reproducible for a given (seed, shard_size).
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    shard_seeds = np.random.SeedSequence(seed).spawn(-(-samples // shard_size))
    acc = np.zeros(5)  # sum_r, sum_r2, sum_s, sum_s2, count
    remaining = samples
    for ss in shard_seeds:
        k = min(shard_size, remaining)
        remaining -= k
        rng = np.random.default_rng(ss)
        n_area = rng.uniform(dist.area_ratio_lo, dist.area_ratio_hi, k)
        # uniform over the (W, H) plane <=> log-uniform aspect
        aspect = np.exp(rng.uniform(math.log(dist.aspect_lo), math.log(dist.aspect_hi), k))
        ratio, area = slice_statistics(n_area, aspect)
        acc += np.array([ratio.sum(), (ratio**2).sum(), area.sum(), (area**2).sum(), k])

    def report(total: float, total_sq: float) -> StatReport:
        count = acc[4]
        mean = total / count
        var = max(0.0, total_sq / count - mean * mean)
        return StatReport(
            expectation=float(mean),
            variance=float(var),
            samples=int(count),
            std_error=float(math.sqrt(var / count)),
            seed=seed,
        )

    return report(acc[0], acc[1]), report(acc[2], acc[3])


def quadrature_expectations(dist: DistributionSpec, cells_per_axis: int = 2000) -> tuple[StatReport, StatReport]:
    """Midpoint-rule estimate of the same integrals on a uniform (n, log-aspect) grid."""
    n_step = (dist.area_ratio_hi - dist.area_ratio_lo) / cells_per_axis
    n_vals = dist.area_ratio_lo + (np.arange(cells_per_axis) + 0.5) * n_step
    la_lo, la_hi = math.log(dist.aspect_lo), math.log(dist.aspect_hi)
    la_step = (la_hi - la_lo) / cells_per_axis
    a_vals = np.exp(la_lo + (np.arange(cells_per_axis) + 0.5) * la_step)
    acc = np.zeros(5)
    for n_chunk in np.array_split(n_vals, max(1, cells_per_axis // 64)):
        nn, aa = np.meshgrid(n_chunk, a_vals, indexing="ij")
        ratio, area = slice_statistics(nn.ravel(), aa.ravel())
        acc += np.array([ratio.sum(), (ratio**2).sum(), area.sum(), (area**2).sum(), ratio.size])

    def report(total: float, total_sq: float) -> StatReport:
        count = acc[4]
        mean = total / count
        var = max(0.0, total_sq / count - mean * mean)
        return StatReport(expectation=float(mean), variance=float(var), samples=int(count), std_error=0.0, seed=0)

    return report(acc[0], acc[1]), report(acc[2], acc[3])


# Reference values from the published analysis, with match tolerances.
REFERENCE_STATS = {
    "default": {"ratio": (1.258, 0.048), "area": (1.057, 0.016)},
    "alternate": {"ratio": (1.147, 0.011)},
}
EXPECTATION_TOL = 0.02
VARIANCE_TOL = 0.01


def run_proof_checks(samples: int = 10_000_000, seed: int = 42, grid_density: int = 1500) -> dict:
    """Full verification report for the CLI; JSON-serializable."""
    holds, worst_gap = enumerate_ratio_bound(20)
    min_r, max_r, min_s, max_s = sweep_slice_bounds(grid_density=grid_density)
    ratio_stats, area_stats = monte_carlo_expectations(DistributionSpec(), samples=samples, seed=seed)
    alt_ratio, _ = monte_carlo_expectations(ALTERNATE_SPEC, samples=samples, seed=seed)

    def stat_entry(stats: StatReport, ref: tuple[float, float]) -> dict:
        exp_ok = abs(stats.expectation - ref[0]) <= EXPECTATION_TOL
        var_ok = abs(stats.variance - ref[1]) <= VARIANCE_TOL
        return {
            "observed": stats.to_json_dict(),
            "reference": {"expectation": ref[0], "variance": ref[1]},
            "expectation_matches": exp_ok,
            "variance_matches": var_ok,
            "note": None
            if exp_ok and var_ok
            else "mismatch under the documented distribution assumption "
            "(uniform over the width/height plane, folded ratio, no single-slice "
            "partition above one encoder tile)",
        }

    report = {
        "candidate_density": {
            "holds": holds,
            "worst_gap": worst_gap,
            "bound": TWO_LOG2,
            "pass": holds,
        },
        "bounds_sweep": {
            "ratio_range": [min_r, max_r],
            "area_range": [min_s, max_s],
            "pass": (0.5 <= min_r and max_r <= 2.0 and abs(min_s - 1 / 3) <= 0.01 and abs(max_s - 1.5) <= 0.01),
        },
        "statistics": {
            "default": {
                "ratio": stat_entry(ratio_stats, REFERENCE_STATS["default"]["ratio"]),
                "area": stat_entry(area_stats, REFERENCE_STATS["default"]["area"]),
            },
            "alternate": {
                "ratio": stat_entry(alt_ratio, REFERENCE_STATS["alternate"]["ratio"]),
            },
        },
    }
    report["pass"] = bool(report["candidate_density"]["pass"] and report["bounds_sweep"]["pass"])
    return report
