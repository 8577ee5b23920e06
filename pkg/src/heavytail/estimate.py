"""Empirical counterparts of the limit functionals, computed on sample paths.

Conditional-on-exceedance spectral statistics, the empirical tail
dependence and extremal index, the Hill tail-index diagnostic, and the
single-big-jump checks for finite operator sums.  Overlapping exceedance
windows are kept (dropping them biases cluster functionals) and their
serial dependence is absorbed into block-bootstrap standard errors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spaces import DimensionError, DomainError
from .spectral import series_constants
from .windows import WindowBatch

__all__ = [
    "ExceedanceSet",
    "EstimateResult",
    "collect_exceedances",
    "empirical_spectral_stat",
    "empirical_tail_dependence",
    "blocks_extremal_index",
    "hill_alpha",
    "BigJumpResult",
    "big_jump_check",
    "big_jump_paired",
    "threshold_sweep",
]

_BOOT_SEED = 0xE57
_N_BOOT = 200


class EstimationError(RuntimeError):
    """Not enough usable data to produce an estimate."""


@dataclass(frozen=True)
class EstimateResult:
    value: float
    stderr: float
    n_effective: int
    threshold: float | None
    notes: dict

    def __post_init__(self):
        if self.n_effective <= 0:
            raise EstimationError("estimate reported with no effective samples")


@dataclass
class ExceedanceSet:
    """Anchors with ||X_t|| > u and their normalized surrounding windows."""

    windows: WindowBatch  # values X_{t+j} / ||X_t||, j in [-back, fwd]
    anchors: np.ndarray  # 0-based anchor times into the path
    u: float
    path_length: int

    def __len__(self):
        return len(self.anchors)


def collect_exceedances(path, u, back, fwd):
    """All full windows around times where the path norm exceeds u.

    ``u`` must sit above the path median; anchors too close to the path
    edges for a full window are dropped.  Overlapping windows are kept.
    """
    norms = path.norms()
    if u <= np.median(norms):
        raise DomainError("threshold must exceed the path median")
    anchors = np.flatnonzero(norms > u)
    anchors = anchors[(anchors >= back) & (anchors <= len(path) - 1 - fwd)]
    offsets = np.arange(-back, fwd + 1)
    rows = anchors[:, None] + offsets[None, :]
    values = path.values[rows] / norms[anchors, None, None]
    wb = WindowBatch(values, back, fwd, path.space)
    return ExceedanceSet(wb, anchors, float(u), len(path))


def _block_bootstrap_se(anchor_times, per_anchor, block_len, n_boot, rng, stat):
    """SE of ``stat`` (a function of stacked per-anchor rows) by resampling
    disjoint time blocks of anchors."""
    ids = anchor_times // block_len
    blocks = [per_anchor[ids == b] for b in np.unique(ids)]
    if len(blocks) < 2:
        return float("nan")
    reps = np.empty(n_boot)
    nb = len(blocks)
    for r in range(n_boot):
        pick = rng.integers(0, nb, size=nb)
        stacked = np.concatenate([blocks[i] for i in pick], axis=0)
        reps[r] = stat(stacked)
    return float(np.std(reps, ddof=1))


def empirical_spectral_stat(exc, f, rng=None, n_boot=_N_BOOT):
    """Mean of a bounded window functional over normalized exceedance windows.

    Standard error by block bootstrap with block length twice the window
    width, absorbing the overlap between nearby anchors.
    """
    if len(exc) == 0:
        raise EstimationError("no exceedances collected")
    rng = rng if rng is not None else np.random.default_rng(_BOOT_SEED)
    values = np.asarray(f(exc.windows), dtype=float)
    width = exc.windows.back + exc.windows.fwd + 1
    se = _block_bootstrap_se(
        exc.anchors, values, 2 * width, n_boot, rng, lambda v: v.mean()
    )
    if not np.isfinite(se):
        se = float(values.std(ddof=1) / np.sqrt(len(values))) if len(values) > 1 else 0.0
    return EstimateResult(
        float(values.mean()), se, len(values), exc.u,
        {"stat": "spectral", "window": (exc.windows.back, exc.windows.fwd)},
    )


def empirical_tail_dependence(path, u, h, mode="functional", b=None,
                              block_len=100, rng=None, n_boot=_N_BOOT):
    """Empirical Pr(score at lag h exceeds u | score at 0 exceeds u).

    ``mode`` "functional" scores by a linear pairing (default: first
    coordinate), "norm" by the path norm.  Ratio of joint to marginal
    exceedance counts, block-bootstrap standard error.
    """
    h = int(h)
    if mode == "norm":
        score = path.norms()
    else:
        coeffs = np.zeros(path.dim)
        coeffs[0] = 1.0
        if b is not None:
            coeffs = np.asarray(b, dtype=float)
            if coeffs.shape != (path.dim,):
                raise DimensionError("functional length must match path dimension")
        score = path.values @ coeffs
    lo, hi = max(0, -h), len(path) - max(0, h)
    base = score[lo:hi]
    lagged = score[lo + h : hi + h]
    marg = base > u
    if not np.any(marg):
        raise EstimationError("no exceedances at the requested threshold")
    joint = marg & (lagged > u)
    times = np.arange(lo, hi)
    per = np.column_stack([joint[marg], np.ones(int(marg.sum()))])
    rng = rng if rng is not None else np.random.default_rng(_BOOT_SEED)
    se = _block_bootstrap_se(
        times[marg], per, block_len, n_boot, rng,
        lambda v: v[:, 0].sum() / v[:, 1].sum(),
    )
    value = float(joint.sum() / marg.sum())
    if not np.isfinite(se):
        se = float(np.sqrt(value * (1 - value) / marg.sum()))
    return EstimateResult(
        value, se, int(marg.sum()), float(u), {"stat": "tail_dependence", "h": h, "mode": mode}
    )


def blocks_extremal_index(path, u, block_len, method="blocks", runs_gap=None,
                          rng=None, n_boot=_N_BOOT):
    """Blocks estimator (#blocks with an exceedance)/(#exceedances) with
    block-resampling standard error; the runs estimator is available behind
    ``method="runs"`` for cross-checking."""
    if block_len < 2:
        raise DomainError("block length must be >= 2")
    extent = path.meta.get("family_extent")
    if extent is not None and block_len < 2 * max(int(extent), 1):
        raise DomainError(
            f"block length {block_len} shorter than twice the family extent {extent}"
        )
    exceed = path.norms() > u
    total = int(exceed.sum())
    if total == 0:
        raise EstimationError("no exceedances at the requested threshold")
    rng = rng if rng is not None else np.random.default_rng(_BOOT_SEED)
    if method == "runs":
        gap = int(runs_gap) if runs_gap is not None else max(int(extent or 1), 1)
        ok = np.ones(len(path) - gap, dtype=bool)
        for j in range(1, gap + 1):
            ok &= ~exceed[j : len(path) - gap + j]
        starts = exceed[: len(path) - gap] & ok
        value = float(starts.sum() / total)
        se = float(np.sqrt(value * (1 - value) / total))
        return EstimateResult(value, se, total, float(u),
                              {"stat": "extremal_index", "method": "runs", "gap": gap})
    nb = len(path) // block_len
    trimmed = exceed[: nb * block_len].reshape(nb, block_len)
    counts = trimmed.sum(axis=1)
    hits = (counts > 0).astype(float)
    value = float(hits.sum() / counts.sum())
    reps = np.empty(n_boot)
    for r in range(n_boot):
        pick = rng.integers(0, nb, size=nb)
        c = counts[pick].sum()
        reps[r] = hits[pick].sum() / c if c > 0 else np.nan
    se = float(np.nanstd(reps, ddof=1))
    return EstimateResult(value, se, total, float(u),
                          {"stat": "extremal_index", "method": "blocks", "block_len": block_len})


def hill_alpha(path, k):
    """Hill tail-index estimate from the top k order statistics of the norms.

    Diagnostic only: the reported stderr alpha_hat / sqrt(k) is the iid
    asymptotic value.
    """
    norms = np.sort(path.norms())[::-1]
    if not 1 <= k < len(norms) // 10:
        raise DomainError("order-statistic count k must satisfy 1 <= k < n/10")
    ref = norms[k]
    if ref <= 0:
        raise EstimationError("nonpositive order statistic in the Hill window")
    logs = np.log(norms[:k]) - np.log(ref)
    h = logs.mean()
    if h <= 0:
        raise EstimationError("degenerate (tied) order statistics in the Hill window")
    value = 1.0 / h
    return EstimateResult(value, value / np.sqrt(k), int(k), float(ref), {"stat": "hill"})


@dataclass(frozen=True)
class BigJumpResult:
    """Normalized tail ratios and single-big-jump discrepancy at one threshold."""

    x: float
    ratio_sum_norm: float  # Pr(||sum_i T_i Z_i|| > x) / V(x)
    ratio_norm_sum: float  # Pr(sum_i ||T_i Z_i|| > x) / V(x)
    discrepancy: float  # E|1(||sum|| > x) - sum_i 1(||T_i Z_i|| > x)| / V(x)
    target: float  # sum_i c_i
    stderr_sum_norm: float
    stderr_norm_sum: float
    n_mc: int


def big_jump_paired(fam, innov, xs, n_mc, rng, chunk=1 << 20):
    """Single-big-jump checks at several thresholds from one shared stream.

    Plain Monte Carlo (no importance sampling): per draw, one innovation per
    family lag; the same draws feed every threshold so comparisons across
    thresholds are paired.
    """
    xs = [float(x) for x in xs]
    if any(x < innov.scale for x in xs):
        raise DomainError("thresholds must be at least the innovation scale")
    consts = series_constants(fam, innov, n_mc=min(n_mc, 100_000), rng=rng)
    lags = fam.indices
    nx = len(xs)
    cnt_sum_norm = np.zeros(nx)
    cnt_norm_sum = np.zeros(nx)
    disc = np.zeros(nx)
    done = 0
    while done < n_mc:
        m = min(chunk, n_mc - done)
        vec_sum = np.zeros((m, fam.codomain.dim))
        norm_sum = np.zeros(m)
        singles = np.zeros((m, len(lags)))
        for j, lag in enumerate(lags):
            z = innov.sample(m, rng)
            img = fam.ops[lag].apply(z)
            vec_sum += img
            nrm = fam.codomain.norm(img)
            norm_sum += nrm
            singles[:, j] = nrm
        total_norm = fam.codomain.norm(vec_sum)
        for i, x in enumerate(xs):
            hit = total_norm > x
            cnt_sum_norm[i] += hit.sum()
            cnt_norm_sum[i] += (norm_sum > x).sum()
            disc[i] += np.abs(hit.astype(float) - (singles > x).sum(axis=1)).sum()
        done += m
    results = []
    for i, x in enumerate(xs):
        v = innov.tail_prob(x)
        if v <= 0:
            raise DomainError("marginal tail probability vanishes at the threshold")
        p1 = cnt_sum_norm[i] / n_mc
        p2 = cnt_norm_sum[i] / n_mc
        results.append(
            BigJumpResult(
                x=x,
                ratio_sum_norm=float(p1 / v),
                ratio_norm_sum=float(p2 / v),
                discrepancy=float(disc[i] / n_mc / v),
                target=float(consts.c_total),
                stderr_sum_norm=float(np.sqrt(p1 * (1 - p1) / n_mc) / v),
                stderr_norm_sum=float(np.sqrt(p2 * (1 - p2) / n_mc) / v),
                n_mc=n_mc,
            )
        )
    return results


def big_jump_check(fam, innov, x, n_mc, rng, chunk=1 << 20):
    """Single-threshold convenience wrapper around ``big_jump_paired``."""
    return big_jump_paired(fam, innov, [x], n_mc, rng, chunk=chunk)[0]


def threshold_sweep(path, stat, quantiles=(0.99, 0.995, 0.999, 0.9995)):
    """Evaluate a threshold-based estimator over a grid of quantile levels.

    ``stat(path, u) -> EstimateResult``.  The limits hold as the threshold
    grows; the sweep displays the finite-threshold convergence instead of
    picking a level adaptively.  Returns (quantile, threshold, result) rows.
    """
    norms = path.norms()
    rows = []
    for q in quantiles:
        u = float(np.quantile(norms, q))
        rows.append((float(q), u, stat(path, u)))
    return rows
