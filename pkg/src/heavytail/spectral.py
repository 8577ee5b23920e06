"""Spectral-process machinery for heavy-tailed linear models.

This module carries the algorithmic core of the library:

* push-forward of a spectral measure under a bounded linear operator,
  via rejection against an operator-norm envelope;
* per-lag tail constants ``c_n = E ||T_n Theta||^alpha`` of an operator
  family and the mixture probabilities ``p_n = c_n / sum c`` they induce;
* exact window samplers for the spectral process of linear processes,
  first-order autoregressions, and operator images of either;
* tail windows (independent Pareto radius attached) and cluster windows
  (conditioned on no exceedance in the strict past);
* the time-change right-hand side and the finite-window limit-measure
  evaluator, both used by the verification suites.

All samplers draw from the exact mixture law: a lag ``N`` is picked once
with probability ``p_N`` and the innovation angle is then rejection-sampled
within that component, so acceptance bounds only affect efficiency, never
the distribution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .rv import SpectralSampler, pareto_sample
from .spaces import (
    DimensionError,
    DomainError,
    Operator,
    OperatorNormBound,
    ScalarOp,
    op_norm_bound,
    op_power,
    weighted_l1_norm,
    EmbeddingOp,
)
from .windows import TailBatch, WindowBatch

__all__ = [
    "SamplingError",
    "OperatorFamily",
    "family_from_coeffs",
    "sequence_space_family",
    "SeriesConstants",
    "pushforward_constant",
    "series_constants",
    "PushforwardAngle",
    "LinearProcessSpectral",
    "AR1Spectral",
    "TransformedSpectral",
    "tail_windows",
    "cluster_windows",
    "window_mean",
    "time_change_rhs",
    "time_change_rhs_samples",
    "limit_measure_mass",
    "limit_measure_samples",
]

DEFAULT_MAX_TRIALS = 10**6


class SamplingError(RuntimeError):
    """Rejection sampling did not reach its acceptance quota."""


def _rejection_collect(n, propose, rng, max_trials, label):
    """Collect n accepted draws from ``propose(m, rng) -> (mask, payload)``.

    The proposal budget is ``max_trials`` plus 20 proposals per requested
    draw; exhausting it raises SamplingError carrying the observed
    acceptance rate.
    """
    budget = max_trials + 20 * n
    parts = []
    accepted = 0
    proposed = 0
    while accepted < n:
        if proposed >= budget:
            rate = accepted / proposed if proposed else 0.0
            raise SamplingError(
                f"{label}: acceptance rate ~{rate:.3e} too low after "
                f"{proposed} proposals ({accepted}/{n} accepted)"
            )
        need = n - accepted
        rate = accepted / proposed if proposed else 1.0
        m = int(np.ceil(need / max(rate, 1e-3) * 1.1))
        m = max(need, min(m, budget - proposed, 4_000_000))
        mask, payload = propose(m, rng)
        hits = int(mask.sum())
        if hits:
            parts.append(tuple(p[mask] for p in payload))
            accepted += hits
        proposed += m
    return tuple(
        np.concatenate([part[i] for part in parts])[:n] for i in range(len(parts[0]))
    )


@dataclass
class OperatorFamily:
    """Indexed family {T_n} over a finite lag window, with norm bounds.

    ``delta`` is the summability exponent in (0, min(alpha, 1)); for a
    finite window the sum ``sum_n ||T_n||^delta`` is always finite and is
    reported as the truncation proxy for the infinite-family condition.
    """

    ops: dict
    domain: "NormSpec"
    codomain: "NormSpec"
    alpha: float
    delta: float | None = None
    _bounds: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.ops:
            raise DomainError("operator family must be nonempty")
        if self.alpha <= 0:
            raise DomainError("alpha must be positive")
        cap = min(self.alpha, 1.0)
        if self.delta is None:
            self.delta = cap / 2.0
        if not 0 < self.delta < cap:
            raise DomainError(f"delta must lie in (0, {cap}), got {self.delta}")
        for n, op in self.ops.items():
            if op.in_dim != self.domain.dim or op.out_dim != self.codomain.dim:
                raise DimensionError(f"operator at lag {n} has inconsistent dims")

    @property
    def indices(self):
        return sorted(self.ops)

    @property
    def n_min(self):
        return min(self.ops)

    @property
    def n_max(self):
        return max(self.ops)

    @property
    def extent(self):
        return self.n_max - self.n_min

    def op(self, n):
        """Operator at lag n; lags outside the window act as zero."""
        return self.ops.get(n)

    def norm_bound(self, n) -> OperatorNormBound:
        if n not in self._bounds:
            self._bounds[n] = op_norm_bound(self.ops[n], self.domain, self.codomain)
        return self._bounds[n]

    def summability(self):
        """sum_n ||T_n||^delta over the window (norm-bound values)."""
        return float(sum(self.norm_bound(n).value ** self.delta for n in self.ops))


def family_from_coeffs(coeffs, alpha, space, start=0, delta=None):
    """Family of scalar multiples a_n * Id at lags start, start+1, ..."""
    ops = {start + i: ScalarOp(a, space.dim) for i, a in enumerate(coeffs)}
    return OperatorFamily(ops, space, space, alpha, delta)


def sequence_space_family(weights, alpha, delta=None):
    """Coordinate embeddings z -> z * e_n into the weighted-l1 space of ``weights``."""
    space = weighted_l1_norm(weights)
    ops = {n: EmbeddingOp(n, space.dim) for n in range(space.dim)}
    domain = weighted_l1_norm((1.0,))
    return OperatorFamily(ops, domain, space, alpha, delta)


def pushforward_constant(A, base, codomain, n_mc=None, rng=None):
    """Tail constant of the operator image: c = E ||A Theta||^alpha, Theta ~ angle law.

    Closed form (stderr 0) when the angle law has finite support or the
    operator is a scaled isometry; otherwise a Monte Carlo average over
    ``n_mc`` angle draws with its standard error.
    """
    atoms = base.angle.atoms()
    if atoms is not None:
        points, weights = atoms
        values = codomain.norm(A.apply(points)) ** base.alpha
        return float(weights @ values), 0.0
    scale = A.isometry_scale(base.angle.space, codomain)
    if scale is not None:
        return float(scale**base.alpha), 0.0
    if n_mc is None or rng is None:
        raise DomainError(
            "no closed form for this operator/angle pair; pass n_mc and rng"
        )
    theta = base.angle.sample(n_mc, rng)
    values = codomain.norm(A.apply(theta)) ** base.alpha
    return float(values.mean()), float(values.std(ddof=1) / np.sqrt(n_mc))


@dataclass(frozen=True)
class SeriesConstants:
    """Per-lag tail constants c_n and the mixture probabilities p_n = c_n / sum c."""

    indices: tuple
    c: np.ndarray
    p: np.ndarray
    c_total: float
    stderr: np.ndarray

    def prob(self, n):
        return float(self.p[self.indices.index(n)])


def series_constants(fam, base, n_mc=None, rng=None):
    """Tail constants of every family member, sharing one angle sample set.

    Common random numbers across lags reduce the variance of the p_n
    ratios; lags with a closed form are exact regardless.
    """
    indices = tuple(fam.indices)
    c = np.zeros(len(indices))
    se = np.zeros(len(indices))
    mc_lags = []
    for i, n in enumerate(indices):
        op = fam.ops[n]
        atoms = base.angle.atoms()
        if atoms is not None:
            points, weights = atoms
            values = fam.codomain.norm(op.apply(points)) ** fam.alpha
            c[i] = float(weights @ values)
        else:
            scale = op.isometry_scale(base.angle.space, fam.codomain)
            if scale is not None:
                c[i] = scale**fam.alpha
            else:
                mc_lags.append(i)
    if mc_lags:
        if n_mc is None or rng is None:
            raise DomainError("family needs Monte Carlo constants; pass n_mc and rng")
        theta = base.angle.sample(n_mc, rng)
        for i in mc_lags:
            values = fam.codomain.norm(fam.ops[indices[i]].apply(theta)) ** fam.alpha
            c[i] = values.mean()
            se[i] = values.std(ddof=1) / np.sqrt(n_mc)
    total = float(c.sum())
    if total <= 0:
        raise DomainError("degenerate operator family: all tail constants vanish")
    return SeriesConstants(indices, c, c / total, total, se)


class PushforwardAngle(SpectralSampler):
    """Spectral measure of an operator image, sampled by rejection.

    Draw Theta from the base angle law and an independent uniform U;
    accept when U <= (||A Theta|| / bound)^alpha and return the unit
    vector A Theta / ||A Theta||.  ``bound`` may be any upper bound on the
    essential supremum of ||A Theta||; smaller bounds only raise the
    acceptance rate.
    """

    def __init__(self, base, operator, codomain, bound=None, max_trials=DEFAULT_MAX_TRIALS):
        if operator.in_dim != base.space.dim:
            raise DimensionError("operator does not accept the base angle dimension")
        if bound is None:
            bound = op_norm_bound(operator, base.space, codomain).value
        if bound <= 0:
            raise DomainError("operator image is degenerate at zero")
        self.base = base
        self.operator = operator
        self.bound = float(bound)
        self.alpha = base.alpha
        self.space = codomain
        self.max_trials = max_trials

    def sample(self, n, rng):
        if n == 0:
            return np.empty((0, self.space.dim))

        def propose(m, rng):
            theta = self.base.angle.sample(m, rng)
            image = self.operator.apply(theta)
            v = self.space.norm(image)
            u = rng.random(m)
            accept = (v > 0) & (u * self.bound**self.alpha <= v**self.alpha)
            return accept, (image, v)

        image, v = _rejection_collect(
            n, propose, rng, self.max_trials, "pushforward angle sampler"
        )
        return image / v[:, None]

    def atoms(self):
        base_atoms = self.base.angle.atoms()
        if base_atoms is None:
            return None
        points, weights = base_atoms
        image = self.operator.apply(points)
        v = self.space.norm(image)
        keep = v > 0
        if not np.any(keep):
            return None
        tilted = weights[keep] * v[keep] ** self.alpha
        units = image[keep] / v[keep, None]
        merged = {}
        for pt, w in zip(units, tilted):
            key = tuple(np.round(pt, 12))
            if key in merged:
                merged[key] += w
            else:
                merged[key] = w
        pts = np.array(list(merged))
        w = np.array(list(merged.values()))
        return pts, w / w.sum()


class _MixtureWindowSampler:
    """Shared machinery: pick a lag from p, rejection-sample the angle within it."""

    alpha: float
    space: "NormSpec"
    max_trials: int

    def _component_op(self, n) -> Operator:
        raise NotImplementedError

    def _component_bound(self, n) -> float:
        raise NotImplementedError

    def _window_op(self, component, offset):
        """Operator applied at window offset ``offset`` for mixture lag ``component``."""
        raise NotImplementedError

    def _angle_sampler(self) -> SpectralSampler:
        raise NotImplementedError

    def _component_draws(self, n_comp, m, rng):
        op = self._component_op(n_comp)
        bound = self._component_bound(n_comp)
        angle = self._angle_sampler()
        if bound <= 0:
            raise SamplingError(f"component {n_comp} has zero norm bound")
        iso = op.isometry_scale(angle.space, self.space)
        if iso is not None and iso >= bound:
            theta = angle.sample(m, rng)
            return theta, self.space.norm(op.apply(theta))

        def propose(k, rng):
            theta = angle.sample(k, rng)
            v = self.space.norm(op.apply(theta))
            u = rng.random(k)
            accept = (v > 0) & (u * bound**self.alpha <= v**self.alpha)
            return accept, (theta, v)

        return _rejection_collect(
            m, propose, rng, self.max_trials, f"window sampler component {n_comp}"
        )

    def _assemble(self, components, probs, n, back, fwd, rng):
        picks = rng.choice(np.asarray(components), size=n, p=probs)
        out = np.zeros((n, back + fwd + 1, self.space.dim))
        for n_comp in np.unique(picks):
            rows = np.flatnonzero(picks == n_comp)
            theta, denom = self._component_draws(int(n_comp), len(rows), rng)
            for t in range(-back, fwd + 1):
                op = self._window_op(int(n_comp), t)
                if op is not None:
                    out[rows, back + t, :] = op.apply(theta) / denom[:, None]
        return WindowBatch(out, back, fwd, self.space, origin=picks)

    def acceptance_rates(self):
        """Per-component acceptance probabilities c_n / B_n^alpha (diagnostic)."""
        out = {}
        for i, lag in enumerate(self.consts.indices):
            bound = self._component_bound(lag)
            out[lag] = float(self.consts.c[i] / bound**self.alpha) if bound > 0 else 0.0
        return out


class LinearProcessSpectral(_MixtureWindowSampler):
    """Window sampler for the spectral process of X_t = sum_i T_i Z_{t-i}.

    The law is the mixture sum_n p_n kappa_n: pick lag N from p, accept an
    innovation angle theta when U <= (||T_N theta|| / B_N)^alpha, and emit
    Theta_t = T_{N+t} theta / ||T_N theta||; lags outside the family window
    act as the zero operator.
    """

    def __init__(
        self,
        fam,
        base,
        consts=None,
        n_mc_constants=100_000,
        rng=None,
        max_trials=DEFAULT_MAX_TRIALS,
    ):
        if base.space.dim != fam.domain.dim:
            raise DimensionError("innovation angle dimension does not match family domain")
        self.fam = fam
        self.base = base
        self.alpha = fam.alpha
        self.space = fam.codomain
        self.max_trials = max_trials
        self.consts = (
            consts
            if consts is not None
            else series_constants(fam, base, n_mc_constants, rng)
        )
        for lag in fam.indices:  # materialize bounds (lazy cache is not thread-safe)
            fam.norm_bound(lag)
        self.backward_extent = fam.extent
        self.forward_extent = fam.extent

    def _angle_sampler(self):
        return self.base.angle

    def _component_op(self, n):
        return self.fam.ops[n]

    def _component_bound(self, n):
        return self.fam.norm_bound(n).value

    def _window_op(self, component, offset):
        return self.fam.op(component + offset)

    def sample(self, n, back, fwd, rng):
        return self._assemble(self.consts.indices, self.consts.p, n, back, fwd, rng)


class AR1Spectral(_MixtureWindowSampler):
    """Window sampler for the spectral process of X_t = T X_{t-1} + Z_t.

    Uses the lag representation T_n = T^n (n >= 0) truncated at ``horizon``;
    requires ||T^m|| < 1 for some m <= horizon so the discarded mixture mass
    is geometrically small (the bound is reported in ``tail_mass_bound``).
    Backward slots below the picked lag are exactly zero and the forward
    recursion Theta_{t+1} = T Theta_t holds on every sample.
    """

    def __init__(
        self,
        T,
        base,
        horizon,
        n_mc_constants=100_000,
        rng=None,
        max_trials=DEFAULT_MAX_TRIALS,
    ):
        if T.in_dim != T.out_dim:
            raise DimensionError("autoregression operator must be square")
        if T.in_dim != base.space.dim:
            raise DimensionError("operator dimension does not match innovation space")
        if horizon < 1:
            raise DomainError("horizon must be >= 1")
        self.T = T
        self.base = base
        self.alpha = base.alpha
        self.space = base.space
        self.horizon = int(horizon)
        self.max_trials = max_trials

        self._powers = [op_power(T, j) for j in range(self.horizon + 1)]
        self._bounds = [
            op_norm_bound(p, self.space, self.space).value for p in self._powers
        ]
        contracting = [m for m in range(1, self.horizon + 1) if self._bounds[m] < 1.0]
        if not contracting:
            raise DomainError(
                f"no power of the operator has norm bound < 1 within horizon "
                f"{self.horizon}; cannot certify a stationary solution"
            )
        self._contract_lag = contracting[0]

        fam = OperatorFamily(
            {j: self._powers[j] for j in range(self.horizon + 1)},
            self.space,
            self.space,
            self.alpha,
        )
        self.fam = fam
        self.consts = series_constants(fam, base, n_mc_constants, rng)
        self.tail_mass_bound = self._geometric_tail(self.horizon)
        self.backward_extent = self.horizon
        self.forward_extent = None  # geometric decay, never exactly zero in general

    def _geometric_tail(self, after):
        """Upper bound on sum_{n > after} ||T^n||^alpha from the contraction lag."""
        m = self._contract_lag
        q = self._bounds[m]
        lead = max(self._bounds[:m]) if m > 1 else 1.0
        k0 = (after + 1) // m
        return float(m * lead**self.alpha * q ** (self.alpha * k0) / (1.0 - q**self.alpha))

    def _power(self, j):
        # No caching past the horizon: sample() runs on worker threads and
        # the precomputed list must stay read-only.
        if j < len(self._powers):
            return self._powers[j]
        return op_power(self.T, j)

    def _angle_sampler(self):
        return self.base.angle

    def _component_op(self, n):
        return self._powers[n]

    def _component_bound(self, n):
        return self._bounds[n]

    def _window_op(self, component, offset):
        lag = component + offset
        return self._power(lag) if lag >= 0 else None

    def sample(self, n, back, fwd, rng):
        return self._assemble(self.consts.indices, self.consts.p, n, back, fwd, rng)


class TransformedSpectral:
    """Spectral process of the operator image (A X_t) of a base time series.

    Accepts a base window when U <= (||A Theta_0|| / bound)^alpha and emits
    the normalized image window (A Theta_t / ||A Theta_0||).
    """

    def __init__(self, base_sampler, A, codomain, bound=None, max_trials=DEFAULT_MAX_TRIALS):
        if A.in_dim != base_sampler.space.dim:
            raise DimensionError("operator does not accept base window dimension")
        if bound is None:
            bound = op_norm_bound(A, base_sampler.space, codomain).value
        if bound <= 0:
            raise DomainError("operator image of the spectral process is degenerate")
        self.base = base_sampler
        self.A = A
        self.bound = float(bound)
        self.alpha = base_sampler.alpha
        self.space = codomain
        self.max_trials = max_trials
        self.backward_extent = getattr(base_sampler, "backward_extent", None)
        self.forward_extent = getattr(base_sampler, "forward_extent", None)

    def sample(self, n, back, fwd, rng):
        if n == 0:
            return WindowBatch(
                np.empty((0, back + fwd + 1, self.space.dim)), back, fwd, self.space
            )

        def propose(m, rng):
            wb = self.base.sample(m, back, fwd, rng)
            image = self.A.apply(wb.values)
            a0 = self.space.norm(image[:, back, :])
            u = rng.random(m)
            accept = (a0 > 0) & (u * self.bound**self.alpha <= a0**self.alpha)
            origin = wb.origin if wb.origin is not None else np.zeros(m, dtype=int)
            return accept, (image, a0, origin)

        image, a0, origin = _rejection_collect(
            n, propose, rng, self.max_trials, "transformed window sampler"
        )
        return WindowBatch(
            image / a0[:, None, None], back, fwd, self.space, origin=origin
        )


def tail_windows(sampler, n, back, fwd, rng):
    """Attach an independent Pareto(alpha) radius Y to sampled spectral windows."""
    wb = sampler.sample(n, back, fwd, rng)
    y = pareto_sample(sampler.alpha, rng, n)
    return TailBatch(y, wb)


def cluster_windows(sampler, lookback, fwd, n, rng, max_trials=DEFAULT_MAX_TRIALS):
    """Tail windows conditioned on no exceedance in the strict past.

    Resamples until sup_{-lookback <= t <= -1} ||Y_t|| <= 1.  ``lookback``
    must cover every lag where the spectral process can be nonzero, which
    finite operator families guarantee.
    """
    extent = getattr(sampler, "backward_extent", None)
    if extent is not None and lookback < extent:
        raise DomainError(
            f"lookback {lookback} does not cover the backward extent {extent}"
        )

    def propose(m, rng):
        wb = sampler.sample(m, lookback, fwd, rng)
        y = pareto_sample(sampler.alpha, rng, m)
        if lookback == 0:
            accept = np.ones(m, dtype=bool)
        else:
            past = wb.norms()[:, :lookback]
            accept = np.max(past, axis=1) * y <= 1.0
        origin = wb.origin if wb.origin is not None else np.zeros(m, dtype=int)
        return accept, (wb.values, y, origin)

    values, y, origin = _rejection_collect(
        n, propose, rng, max_trials, "cluster window sampler"
    )
    return TailBatch(y, WindowBatch(values, lookback, fwd, sampler.space, origin=origin))


def window_mean(sampler, f, back, fwd, n, rng):
    """Monte Carlo estimate (mean, stderr) of E f(Theta_{-back}, ..., Theta_{fwd})."""
    wb = sampler.sample(n, back, fwd, rng)
    values = np.asarray(f(wb), dtype=float)
    return float(values.mean()), float(values.std(ddof=1) / np.sqrt(n))


def _check_vanishing_on_zero_lead(f, back, fwd, space):
    # Contract: f must vanish whenever the leading slot Theta_{-back} is zero.
    k = back + fwd + 1
    probes = np.zeros((2, k, space.dim))
    probes[1, 1:, 0] = 1.0
    batch = WindowBatch(probes, back, fwd, space)
    vals = np.asarray(f(batch), dtype=float)
    if np.any(vals != 0.0):
        raise DomainError(
            "time-change functional must vanish when the leading slot is zero"
        )


def time_change_rhs_samples(sampler, f, back, fwd, n, rng, alpha=None):
    """Per-sample integrand of the time-change right-hand side.

    Each entry is f(Theta_0/||Theta_s||, ..., Theta_{t+s}/||Theta_s||) *
    ||Theta_s||^alpha with s = back, t = fwd, computed from forward windows
    only; the integrand is zero where ||Theta_s|| = 0.  The functional must
    vanish when its leading slot is zero (checked on probe windows).
    """
    alpha = sampler.alpha if alpha is None else alpha
    _check_vanishing_on_zero_lead(f, back, fwd, sampler.space)
    wb = sampler.sample(n, 0, back + fwd, rng)
    ns = wb.norm_at(back)
    nz = ns > 0
    out = np.zeros(n)
    if np.any(nz):
        shifted = WindowBatch(
            wb.values[nz] / ns[nz, None, None], back, fwd, sampler.space
        )
        out[nz] = np.asarray(f(shifted), dtype=float) * ns[nz] ** alpha
    return out


def time_change_rhs(sampler, f, back, fwd, n, rng, alpha=None):
    """Monte Carlo estimate (mean, stderr) of the time-change right-hand side."""
    out = time_change_rhs_samples(sampler, f, back, fwd, n, rng, alpha)
    return float(out.mean()), float(out.std(ddof=1) / np.sqrt(n))


def limit_measure_samples(sampler, k, thresholds, n, rng, alpha=None):
    """Per-sample contributions to the k-lag limit-measure mass of a product
    of norm-threshold events.

    ``thresholds`` gives one lower norm threshold per coordinate (None for
    unconstrained); at least one must be strictly positive so the event
    stays away from the origin.  The radial integral is evaluated in closed
    form per sample: for each alignment of the exceedance block the event
    is an interval (r_min, infinity) in the radius, contributing
    r_min^(-alpha).
    """
    alpha = sampler.alpha if alpha is None else alpha
    if k < 1 or len(thresholds) != k:
        raise DomainError("need one threshold per coordinate")
    finite = [z for z in thresholds if z is not None]
    if any(z < 0 for z in finite):
        raise DomainError("thresholds must be nonnegative")
    if not any(z > 0 for z in finite):
        raise DomainError("event must be bounded away from the origin")

    wb = sampler.sample(n, k - 1, k - 1, rng)
    norms = wb.norms()
    center = k - 1
    total = np.zeros(n)
    for j in range(1, k + 1):
        # Coordinates 1..j-1 hold exact zeros; any constrained one kills the term.
        if any(thresholds[m - 1] is not None for m in range(1, j)):
            continue
        if j >= 2:
            live = np.all(norms[:, center - (j - 1) : center] == 0.0, axis=1)
        else:
            live = np.ones(n, dtype=bool)
        r_min = np.zeros(n)
        for m in range(j, k + 1):
            z = thresholds[m - 1]
            if z is None:
                continue
            nm = norms[:, center + (m - j)]
            live &= nm > 0
            with np.errstate(divide="ignore"):
                r_min = np.maximum(r_min, np.where(nm > 0, z / np.maximum(nm, 1e-300), np.inf))
        if not np.any(live):
            continue
        if np.any(r_min[live] <= 0):
            raise DomainError("event not bounded away from the origin on some sample")
        total[live] += r_min[live] ** (-alpha)
    return total


def limit_measure_mass(sampler, k, thresholds, n, rng, alpha=None):
    """Monte Carlo estimate (mean, stderr) of the k-lag limit-measure mass."""
    total = limit_measure_samples(sampler, k, thresholds, n, rng, alpha)
    return float(total.mean()), float(total.std(ddof=1) / np.sqrt(n))
