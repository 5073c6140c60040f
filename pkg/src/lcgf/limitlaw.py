"""Limit-law machinery: distribution distances, the thinned-max construction,
and the Gumbel-mixture law with its tail fits.

Distances operate on empirical CDFs.  ``levy_distance`` bisects on the
two-sided sandwich condition F(x-delta)-delta <= G(x) <= F(x+delta)+delta,
``one_sided_distance`` on the survival-domination condition; both scan the
step breakpoints exactly, so the bisection converges to the true value of
the infimum to 1e-9.

The thinned-max construction draws, per coarse cell, a Bernoulli exceedance
flag, an overshoot above the threshold gamma, and a coarse Gaussian level,
and takes the max over flagged cells (0 when none is flagged).  Its law
approaches the Gumbel mixture  E exp(-beta * Z * exp(-sqrt(2d) x))  built
from the cell-sum proxy Z = sum_i S_i exp(-sqrt(2d) S_i).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import lambertw

from . import rng
from .covariance import FieldSpec, build_dense, cholesky, oracle_for
from .errors import DomainError, InputError, InsufficientDataError

_TAG_RHO = 0x10
_TAG_Y = 0x11
_TAG_Z = 0x12


# ---------------------------------------------------------------------------
# empirical distributions and distances
# ---------------------------------------------------------------------------

class EmpiricalDistribution:
    """Sorted sample set with right-continuous ECDF evaluation."""

    def __init__(self, samples):
        s = np.sort(np.asarray(samples, dtype=float))
        if s.size == 0:
            raise InputError("empty sample set")
        self.samples = s
        self.size = s.size

    def ecdf(self, x):
        return np.searchsorted(self.samples, x, side="right") / self.size

    def survival(self, x):
        return 1.0 - self.ecdf(x)

    def quantile(self, q: float) -> float:
        q = min(max(q, 0.0), 1.0)
        idx = min(max(int(math.ceil(q * self.size)) - 1, 0), self.size - 1)
        return float(self.samples[idx])

    def shifted(self, s: float) -> "EmpiricalDistribution":
        return EmpiricalDistribution(self.samples + s)


def _sup_cdf_gap(f: EmpiricalDistribution, g: EmpiricalDistribution, delta: float) -> float:
    """sup_x [ G(x) - F(x + delta) ] for step CDFs.

    F(x + delta) is the ECDF of the once-shifted samples f - delta, so the
    scan counts jumps exactly instead of round-tripping x through +-delta
    (which can hop over a jump by one ulp).
    """
    fshift = np.sort(f.samples - delta)
    xs = np.concatenate([g.samples, fshift])
    gg = np.searchsorted(g.samples, xs, side="right") / g.size
    ff = np.searchsorted(fshift, xs, side="right") / f.size
    return float(np.max(gg - ff))


def levy_distance(a: EmpiricalDistribution, b: EmpiricalDistribution,
                  tol: float = 1e-9) -> float:
    """Levy metric between the two sample laws, exact to ``tol``."""

    def feasible(delta):
        return (_sup_cdf_gap(a, b, delta) <= delta
                and _sup_cdf_gap(b, a, delta) <= delta)

    if feasible(0.0):
        return 0.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return hi


def one_sided_distance(a: EmpiricalDistribution, b: EmpiricalDistribution,
                       tol: float = 1e-9) -> float:
    """Approximate stochastic domination of a by b:
    inf { delta : P(a > x) <= P(b > x - delta) + delta  for all x }.
    Zero iff a is dominated by b on the sample ECDFs; not symmetric.
    """

    def feasible(delta):
        # P(a > x) <= P(b > x - delta) + delta, with the b side shifted once
        bshift = np.sort(b.samples + delta)
        xs = np.concatenate([a.samples, bshift])
        sa = 1.0 - np.searchsorted(a.samples, xs, side="right") / a.size
        sb = 1.0 - np.searchsorted(bshift, xs, side="right") / b.size
        return float(np.max(sa - sb)) <= delta

    if feasible(0.0):
        return 0.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return hi


# ---------------------------------------------------------------------------
# overshoot law
# ---------------------------------------------------------------------------

def survival_y(gamma: float, d: int, x) -> np.ndarray:
    """P(Y >= x) = ((gamma + x)/gamma) exp(-sqrt(2d) x) for x >= 0."""
    s = math.sqrt(2.0 * d)
    x = np.asarray(x, dtype=float)
    return np.where(x <= 0.0, 1.0, (gamma + x) / gamma * np.exp(-s * x))


def _check_gamma(gamma: float, d: int):
    if gamma <= 1.0 / math.sqrt(2.0 * d):
        raise DomainError(
            f"gamma must exceed 1/sqrt(2d) = {1.0 / math.sqrt(2.0 * d):.6g} "
            "for a strictly decreasing survival function"
        )


def y_quantile(gamma: float, d: int, u) -> np.ndarray:
    """Inverse of the survival function (vectorized, Lambert-W branch -1)."""
    _check_gamma(gamma, d)
    s = math.sqrt(2.0 * d)
    u = np.asarray(u, dtype=float)
    arg = -s * gamma * u * math.exp(-s * gamma)
    t = -np.real(lambertw(arg, k=-1)) / s
    return np.maximum(t - gamma, 0.0)


def sample_y(gamma: float, d: int, seed: int) -> float:
    """One overshoot draw by inverse transform."""
    u = rng.generator(seed, _TAG_Y).random()
    u = max(u, 1e-300)
    return float(y_quantile(gamma, d, u))


# ---------------------------------------------------------------------------
# thinned-max construction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GStarParams:
    """Cell count R = (2^(k+l))^d, tail constant, threshold, coarse source."""

    k: int
    l: int
    d: int
    beta_star: float
    gamma: float
    coarse_family: str = "mbrw"

    def __post_init__(self):
        if self.k < 0 or self.l < 0 or self.d < 1:
            raise InputError("need k, l >= 0 and d >= 1")
        if self.beta_star <= 0:
            raise DomainError("beta_star must be positive")
        _check_gamma(self.gamma, self.d)
        if not (0.0 <= self.p_active <= 1.0):
            raise DomainError(
                f"activation probability {self.p_active:.6g} outside [0, 1]"
            )

    @property
    def KL(self) -> int:
        return 1 << (self.k + self.l)

    @property
    def R(self) -> int:
        return self.KL ** self.d

    @property
    def p_active(self) -> float:
        s = math.sqrt(2.0 * self.d)
        return self.beta_star * self.gamma * math.exp(-s * self.gamma)

    def coarse_spec(self) -> FieldSpec:
        return FieldSpec(self.coarse_family, self.d, self.k + self.l)


@lru_cache(maxsize=16)
def _coarse_factor(params: GStarParams):
    spec = params.coarse_spec()
    oracle = oracle_for(spec)
    pts = np.stack(
        np.unravel_index(np.arange(spec.npoints), (spec.N,) * spec.d), axis=1
    )
    return cholesky(build_dense(oracle, [tuple(p) for p in pts]))


@dataclass(frozen=True)
class GStarDraw:
    value: float
    empty: bool


def gstar_components(params: GStarParams, seed: int):
    """(rho, y, z) for one draw: flags, overshoots, coarse levels."""
    R = params.R
    rho = rng.generator(seed, _TAG_RHO).random(R) < params.p_active
    u = np.maximum(rng.generator(seed, _TAG_Y).random(R), 1e-300)
    y = y_quantile(params.gamma, params.d, u)
    factor = _coarse_factor(params)
    z = factor.matrix @ rng.generator(seed, _TAG_Z).standard_normal(R)
    return rho, y, z


def gstar_from_components(params: GStarParams, rho, y, z) -> GStarDraw:
    s = math.sqrt(2.0 * params.d)
    active = np.nonzero(rho)[0]
    if active.size == 0:
        return GStarDraw(0.0, True)
    g = y[active] + params.gamma + z[active] - s * math.log(params.KL)
    return GStarDraw(float(g.max()), False)


def sample_gstar(params: GStarParams, seed: int) -> GStarDraw:
    """One draw of the thinned max (0 with the empty flag when nothing fires)."""
    rho, y, z = gstar_components(params, seed)
    return gstar_from_components(params, rho, y, z)


def coarse_proxy_samples(params: GStarParams, seed: int, count: int) -> np.ndarray:
    """Derivative-martingale proxies Z = sum_i S_i exp(-sqrt(2d) S_i) with
    S_i = sqrt(2d) log(KL) - (coarse level i), one per draw."""
    s = math.sqrt(2.0 * params.d)
    factor = _coarse_factor(params)
    out = np.empty(count)
    for i in range(count):
        g = rng.generator(rng.replica_seed(seed, i), _TAG_Z).standard_normal(params.R)
        S = s * math.log(params.KL) - factor.matrix @ g
        out[i] = float(np.sum(S * np.exp(-s * S)))
    return out


# ---------------------------------------------------------------------------
# Gumbel mixture
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GumbelMixture:
    """Law with CDF E exp(-beta * Z * exp(-sqrt(2d) x)) over the Z samples."""

    beta_star: float
    z_samples: EmpiricalDistribution
    d: int = 2

    def __post_init__(self):
        if self.beta_star <= 0:
            raise DomainError("beta_star must be positive")

    @property
    def negative_z_fraction(self) -> float:
        return float(np.mean(self.z_samples.samples <= 0.0))


def gumbel_mixture_cdf(m: GumbelMixture, x) -> float | np.ndarray:
    """Mean over the Z samples of exp(-beta Z e^{-sqrt(2d) x}).

    Non-positive Z samples are kept as-is (their contribution exceeds 1);
    callers should consult ``m.negative_z_fraction`` to see whether the
    result is a genuine CDF.
    """
    s = math.sqrt(2.0 * m.d)
    x = np.asarray(x, dtype=float)
    z = m.z_samples.samples
    with np.errstate(over="ignore"):  # negative z may legitimately blow up
        vals = np.exp(-m.beta_star * z[None, :] * np.exp(-s * x.reshape(-1, 1))).mean(axis=1)
    return float(vals[0]) if x.ndim == 0 else vals


def _scalar_mixture_quantile(m: GumbelMixture, q: float, iters: int = 80) -> float:
    """Bisection of the (monotone, positive-Z) mixture CDF at one level."""
    lo, hi = -60.0, 60.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if gumbel_mixture_cdf(m, mid) < q:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _mixture_quantile_grid(m: GumbelMixture, qs: np.ndarray, resolution: int = 8192):
    """Quantiles of the mixture at many levels via one bracketed CDF sweep.

    Two scalar bisections bracket the relevant range, then the monotone CDF
    is tabulated once and inverted by interpolation; the x-grid spacing
    bounds the quantile error well below the distances compared here.
    """
    eps = min(float(qs.min()), 1.0 - float(qs.max()), 1e-4)
    lo = _scalar_mixture_quantile(m, eps) - 0.1
    hi = _scalar_mixture_quantile(m, 1.0 - eps) + 0.1
    xs = np.linspace(lo, hi, resolution)
    cs = np.maximum.accumulate(gumbel_mixture_cdf(m, xs))
    return np.interp(qs, cs, xs)


# ---------------------------------------------------------------------------
# fits and comparison
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FitResult:
    value: float
    stderr: float
    n_points: int


def fit_beta_star(table, z_window) -> FitResult:
    """Inverse-variance-weighted mean of the per-z tail constants."""
    lo, hi = float(z_window[0]), float(z_window[1])
    rows = [r for r in table if lo <= r.z <= hi and r.p_hat > 0]
    if len(rows) < 2:
        raise InsufficientDataError(
            f"need >= 2 usable z points with p_hat > 0 in [{lo}, {hi}]"
        )
    beta = np.array([r.beta_hat for r in rows])
    se = np.array([r.stderr for r in rows])
    if np.all(se == 0):
        return FitResult(float(beta.mean()), 0.0, len(rows))
    if np.any(se == 0):
        exact = beta[se == 0]
        return FitResult(float(exact.mean()), 0.0, int((se == 0).sum()))
    w = 1.0 / se ** 2
    value = float((w * beta).sum() / w.sum())
    return FitResult(value, float(math.sqrt(1.0 / w.sum())), len(rows))


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    stderr: float
    n_points: int


def tail_slope(ecdf: EmpiricalDistribution, z_window) -> SlopeFit:
    """Least-squares slope of log(P(X > z) / z) against z over the window.

    ``z_window`` is either (lo, hi) -- expanded to an 11-point grid -- or an
    explicit grid of z values.  Grid points with empty tails are dropped;
    at least three surviving points are required.
    """
    zw = np.asarray(z_window, dtype=float)
    zs = np.linspace(zw[0], zw[1], 11) if zw.size == 2 else zw
    surv = np.array([ecdf.survival(z) for z in zs])
    keep = surv > 0
    zs, surv = zs[keep], surv[keep]
    if zs.size < 3:
        raise InsufficientDataError("fewer than 3 window points with tail mass")
    y = np.log(surv / zs)
    zbar = zs.mean()
    sxx = float(((zs - zbar) ** 2).sum())
    slope = float(((zs - zbar) * (y - y.mean())).sum() / sxx)
    resid = y - (y.mean() + slope * (zs - zbar))
    dof = max(zs.size - 2, 1)
    stderr = float(math.sqrt(float((resid ** 2).sum()) / dof / sxx))
    return SlopeFit(slope, stderr, int(zs.size))


@dataclass(frozen=True)
class CompareResult:
    shift: float
    levy_after_shift: float


def compare_to_limit(empirical: EmpiricalDistribution, m: GumbelMixture,
                     grid: int = 4096) -> CompareResult:
    """Median-match the empirical law to the mixture, then report the Levy
    distance between the shifted ECDF and the mixture CDF on a quantile grid.
    """
    if m.negative_z_fraction > 0:
        raise DomainError("mixture comparison needs strictly positive Z samples")
    qs = (np.arange(grid) + 0.5) / grid
    mix_points = _mixture_quantile_grid(m, qs)
    mix_ecdf = EmpiricalDistribution(mix_points)
    shift = _scalar_mixture_quantile(m, 0.5) - empirical.quantile(0.5)
    levy = levy_distance(empirical.shifted(shift), mix_ecdf)
    return CompareResult(shift, levy)
