"""The four-component approximation field and its barrier statistics.

A realization on V_N is assembled from independent pieces:

* coarse      -- one reference-field value per box of side M = N/(KL),
                 constant inside the box (zero in the degenerate KL = 1 case);
* bottom      -- independent reference-field copies, one per box of side K'L';
* mbrw_part   -- the mid-scale hierarchy: levels j = k'+l' .. n-k-l of the
                 torus box construction, evaluated at each K'L'-box corner
                 (so constant per K'L' box) with level variables drawn
                 independently per coarse box;
* correction  -- one standard Gaussian per K'L' box, scaled by an
                 offset-dependent amplitude a(vbar) chosen so that
                 Var(total) = Var(reference at size N) + 4*alpha.

The retained per-level mid-scale increments give, at every K'L'-box corner,
a discrete path X(0..n*) from coarse to fine scales (the "backbone").
Barrier events compare that path against a linear ramp (strict version) or
the same ramp plus a logarithmic bulge (slack version); their counts and
the global bulge-violation flag are the Lambda / Gamma / G statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .covariance import LOG2, FieldSpec, build_dense, cholesky, oracle_for
from .errors import DomainError, InputError, NegativeCorrectionVariance, StateError
from .extremes import m_n
from .samplers import (
    SampledField,
    VOLUME_CAP,
    circular_window_sum,
    sample_field,
    sliding_window_sum,
)

_TAG_COARSE = 1
_TAG_BOTTOM = 2
_TAG_MID = 3
_TAG_CORR = 4


@dataclass(frozen=True)
class XiParams:
    """Scales of the approximation field; all sides are powers of two.

    alpha is the assumption constant entering the variance-matching target
    Var(reference) + 4*alpha.  When omitted it defaults to the smallest
    value keeping every correction variance non-negative (for the MBRW
    reference that is log(2)/2, making the correction exactly vanish).
    """

    d: int
    n: int
    k: int
    l: int
    k_prime: int
    l_prime: int
    alpha: float | None = None
    reference: str = "mbrw"

    def __post_init__(self):
        for name in ("k", "l", "k_prime", "l_prime"):
            if getattr(self, name) < 0:
                raise InputError(f"{name} must be >= 0")
        if self.d < 1 or self.n < 1:
            raise InputError("need d >= 1 and n >= 1")
        if self.k + self.l > self.n or self.k_prime + self.l_prime > self.n:
            raise InputError("box sides must divide N")
        if self.l_prime + self.k_prime > self.n - self.k - self.l:
            raise InputError(
                "scale ordering violated: need k'+l' <= n-k-l "
                "(non-empty mid-scale level range)"
            )
        if self.alpha is not None and self.alpha < 0:
            raise InputError("alpha must be >= 0")
        if (1 << self.n) ** self.d > VOLUME_CAP:
            raise InputError(f"lattice volume exceeds cap {VOLUME_CAP}")

    @property
    def N(self) -> int:
        return 1 << self.n

    @property
    def KL(self) -> int:
        return 1 << (self.k + self.l)

    @property
    def KpLp(self) -> int:
        return 1 << (self.k_prime + self.l_prime)

    @property
    def M(self) -> int:
        """Coarse box side N / (KL)."""
        return self.N // self.KL

    @property
    def levels(self) -> range:
        """Mid-scale levels, ascending."""
        return range(self.k_prime + self.l_prime, self.n - self.k - self.l + 1)

    @property
    def n_star(self) -> int:
        """Number of mid-scale levels = number of backbone increments."""
        return len(self.levels)

    def reference_spec(self, n: int) -> FieldSpec:
        return FieldSpec(self.reference, self.d, n)


@dataclass(frozen=True)
class XiField:
    params: XiParams
    seed: int
    coarse: np.ndarray
    bottom: np.ndarray
    mbrw_part: np.ndarray
    correction: np.ndarray
    total: np.ndarray
    a_grid: np.ndarray                  # (KpLp,)*d correction amplitudes
    level_values: dict | None = None    # level j -> (N/KpLp,)*d corner grid

    @property
    def corner_shape(self) -> tuple:
        q = self.params.N // self.params.KpLp
        return (q,) * self.params.d


@dataclass(frozen=True)
class BackboneDecomposition:
    v: tuple
    X: np.ndarray  # partial sums, coarse-to-fine; X[0] = 0


@dataclass(frozen=True)
class BarrierCounts:
    z: float
    lam: int
    gamma_count: int
    g_event: bool


# ---------------------------------------------------------------------------
# grid helpers
# ---------------------------------------------------------------------------

def _upsample(grid: np.ndarray, factor: int) -> np.ndarray:
    if factor == 1:
        return grid
    for ax in range(grid.ndim):
        grid = np.repeat(grid, factor, axis=ax)
    return grid


def _tile(grid: np.ndarray, reps: int) -> np.ndarray:
    return np.tile(grid, (reps,) * grid.ndim)


def block_max(grid: np.ndarray, side: int) -> np.ndarray:
    """Max over each aligned side-box; output has shape (N/side,)*d."""
    d = grid.ndim
    q = grid.shape[0] // side
    shape = ()
    for _ in range(d):
        shape += (q, side)
    work = grid.reshape(shape)
    for ax in range(d):
        work = work.max(axis=ax + 1)
    return work


def _blocks_to_grid(batch: np.ndarray, q: int, side: int, d: int) -> np.ndarray:
    """(q^d, (side,)*d) stack of blocks -> full (q*side,)*d grid."""
    work = batch.reshape((q,) * d + (side,) * d)
    perm = []
    for i in range(d):
        perm += [i, d + i]
    return work.transpose(perm).reshape((q * side,) * d)


# ---------------------------------------------------------------------------
# reference-field sampling (batched)
# ---------------------------------------------------------------------------

def _sample_reference_batch(spec: FieldSpec, seed: int, count: int) -> np.ndarray:
    """``count`` independent copies of the reference field, shape (count, pts).

    The dyadic families get a native batched path (per-level draws with a
    leading batch axis from one counter-based stream); anything else goes
    through a dense Cholesky factor.
    """
    N, d = spec.N, spec.d
    if spec.family == "mbrw":
        out = np.zeros((count,) + (N,) * d)
        for j in range(spec.n + 1):
            g = rng.generator(seed, _TAG_BOTTOM, j)
            b = g.standard_normal((count,) + (N,) * d) * math.sqrt(LOG2 * 2.0 ** (-d * j))
            for ax in range(d):
                b = circular_window_sum(b, 1 << j, ax + 1)
            out += b
        return out.reshape(count, -1)
    if spec.family == "brw":
        out = np.zeros((count,) + (N,) * d)
        for j in range(spec.n + 1):
            g = rng.generator(seed, _TAG_BOTTOM, j)
            coarse = g.standard_normal((count,) + (N >> j,) * d) * math.sqrt(LOG2)
            for ax in range(d):
                coarse = np.repeat(coarse, 1 << j, axis=ax + 1)
            out += coarse
        return out.reshape(count, -1)
    oracle = oracle_for(spec)
    pts = np.stack(np.unravel_index(np.arange(N ** d), (N,) * d), axis=1)
    factor = cholesky(build_dense(oracle, [tuple(p) for p in pts]))
    g = rng.generator(seed, _TAG_BOTTOM).standard_normal((factor.size, count))
    return (factor.matrix @ g).T


def _reference_variances(spec: FieldSpec) -> np.ndarray:
    """Per-site variance of the reference field, flat over its lattice."""
    oracle = oracle_for(spec)
    if getattr(oracle, "constant_variance", False):
        return np.full(spec.npoints, oracle.variance((0,) * spec.d))
    pts = np.stack(np.unravel_index(np.arange(spec.npoints), (spec.N,) * spec.d), axis=1)
    return oracle.pairwise(pts, pts)


# ---------------------------------------------------------------------------
# the construction
# ---------------------------------------------------------------------------

def minimal_alpha(params: XiParams) -> float:
    """Smallest alpha for which every correction variance is >= 0."""
    base = _correction_base(params)
    return max(0.0, float(-(base.min()) / 4.0))


def _correction_base(params: XiParams) -> np.ndarray:
    """a^2(vbar) - 4*alpha, i.e. the alpha-free part, per in-box offset."""
    d, n = params.d, params.n
    var_n = _reference_variances(params.reference_spec(n))
    # each vbar-class meets every coarse box equally often, so the class
    # mean splits into (global coarse mean) + (bottom variance at vbar)
    mean_var_n = _per_offset_mean(var_n, params.N, params.KpLp, d)
    if params.KL == 1:
        mean_var_coarse = 0.0
    else:
        mean_var_coarse = float(_reference_variances(params.reference_spec(params.k + params.l)).mean())
    var_bottom = _reference_variances(params.reference_spec(params.k_prime + params.l_prime))
    var_mid = params.n_star * LOG2
    return (
        mean_var_n.reshape(-1)
        - mean_var_coarse
        - var_bottom
        - var_mid
    )


def _per_offset_mean(flat_values: np.ndarray, N: int, side: int, d: int) -> np.ndarray:
    """Mean of a flat lattice array over each residue class mod ``side``."""
    q = N // side
    grid = flat_values.reshape((N,) * d)
    shape = ()
    for _ in range(d):
        shape += (q, side)
    work = grid.reshape(shape)
    for ax in range(d):
        work = work.mean(axis=ax)  # reduce the leading block axes one by one
    return work


def build_xi(params: XiParams, seed: int, retain_levels: bool = True) -> XiField:
    """Materialize all four components; deterministic given (params, seed)."""
    d, n, N = params.d, params.n, params.N
    KL, KpLp, M = params.KL, params.KpLp, params.M
    q = N // KpLp  # K'L'-boxes per axis

    # --- correction amplitudes -------------------------------------------
    base = _correction_base(params)
    alpha = minimal_alpha(params) if params.alpha is None else params.alpha
    a_sq = base + 4.0 * alpha
    bad = np.nonzero(a_sq < -1e-12)[0]
    if bad.size:
        off = np.unravel_index(bad[0], (KpLp,) * d)
        raise NegativeCorrectionVariance(off, a_sq[bad[0]])
    a_grid = np.sqrt(np.maximum(a_sq, 0.0)).reshape((KpLp,) * d)

    # --- coarse -----------------------------------------------------------
    if KL == 1:
        coarse = np.zeros((N,) * d)
    else:
        cf = sample_field(params.reference_spec(params.k + params.l),
                          rng.derive(seed, _TAG_COARSE))
        coarse = _upsample(cf.values.reshape((KL,) * d), M)

    # --- bottom -----------------------------------------------------------
    copies = _sample_reference_batch(
        params.reference_spec(params.k_prime + params.l_prime),
        rng.derive(seed, _TAG_BOTTOM), q ** d)
    bottom = _blocks_to_grid(copies, q, KpLp, d)

    # --- mid-scale hierarchy ----------------------------------------------
    qb = M // KpLp  # corners per axis inside one coarse box
    level_corners = {j: np.zeros((q,) * d) for j in params.levels}
    for i in range(KL ** d):
        box = np.unravel_index(i, (KL,) * d)
        sel = tuple(slice(b * qb, (b + 1) * qb) for b in box)
        for j in params.levels:
            w = 1 << j
            sigma = math.sqrt(LOG2 * 2.0 ** (-d * j))
            g = rng.generator(seed, _TAG_MID, i, j)
            extent = (qb - 1) * KpLp + w
            if extent <= N:
                draws = g.standard_normal((extent,) * d) * sigma
                vals = draws
                for ax in range(d):
                    vals = sliding_window_sum(vals, w, ax)
                    vals = np.moveaxis(np.moveaxis(vals, ax, 0)[::KpLp], 0, ax)
                level_corners[j][sel] = vals
            else:
                # wrap-around regime (single coarse box): true torus sum
                draws = g.standard_normal((N,) * d) * sigma
                vals = draws
                for ax in range(d):
                    vals = circular_window_sum(vals, w, ax)
                    vals = np.moveaxis(np.moveaxis(vals, ax, 0)[::KpLp], 0, ax)
                level_corners[j][sel] = vals
    mid_corner_total = np.zeros((q,) * d)
    for j in params.levels:
        mid_corner_total += level_corners[j]
    mbrw_part = _upsample(mid_corner_total, KpLp)

    # --- correction --------------------------------------------------------
    phi = rng.generator(seed, _TAG_CORR).standard_normal((q,) * d)
    correction = _tile(a_grid, q) * _upsample(phi, KpLp)

    # accumulate the non-coarse parts first so fine_field() can reproduce the
    # exact bits of total - coarse by re-summing them in the same order
    fine = (bottom + mbrw_part) + correction
    total = coarse + fine
    return XiField(
        params=params,
        seed=seed,
        coarse=coarse.reshape(-1),
        bottom=bottom.reshape(-1),
        mbrw_part=mbrw_part.reshape(-1),
        correction=correction.reshape(-1),
        total=total.reshape(-1),
        a_grid=a_grid,
        level_values={j: v.reshape(-1) for j, v in level_corners.items()}
        if retain_levels else None,
    )


def fine_field(xi: XiField) -> np.ndarray:
    """Everything except the coarse component (pointwise total - coarse).

    Computed as the component sum in construction order, so adding the
    coarse part back reproduces ``total`` bit-for-bit.
    """
    return (xi.bottom + xi.mbrw_part) + xi.correction


# ---------------------------------------------------------------------------
# backbones and barrier events
# ---------------------------------------------------------------------------

def _corner_index(xi: XiField, v) -> int:
    p = xi.params
    v = tuple(int(c) for c in (v if hasattr(v, "__len__") else (v,)))
    if len(v) != p.d or any(c % p.KpLp for c in v) or any(
        c < 0 or c >= p.N for c in v
    ):
        raise InputError(f"{v} is not a K'L'-box corner of the lattice")
    q = p.N // p.KpLp
    return int(np.ravel_multi_index(tuple(c // p.KpLp for c in v), (q,) * p.d))


def _backbone_matrix(xi: XiField) -> np.ndarray:
    """Partial sums over levels, coarse-to-fine: shape (corners, n*+1)."""
    if xi.level_values is None:
        raise StateError("mid-scale level increments were not retained")
    p = xi.params
    ordered = sorted(p.levels, reverse=True)  # earlier times = larger boxes
    ncorners = next(iter(xi.level_values.values())).size
    X = np.zeros((ncorners, p.n_star + 1))
    for t, j in enumerate(ordered, start=1):
        X[:, t] = X[:, t - 1] + xi.level_values[j]
    return X


def backbone(xi: XiField, v) -> BackboneDecomposition:
    """The scale-decomposition path at one K'L'-box corner."""
    idx = _corner_index(xi, v)
    X = _backbone_matrix(xi)[idx]
    return BackboneDecomposition(tuple(int(c) for c in (v if hasattr(v, "__len__") else (v,))), X)


def count_barrier_events(xi: XiField, z: float) -> BarrierCounts:
    """Barrier-crossing counts at integer times over all K'L'-box corners.

    Strict event: the backbone stays below the linear ramp z + (m / nbar) t
    at all integer t and the box's fine-field max reaches m + z.  Slack
    event: same with the ramp raised by 10 (log(t ^ (n*-t)))_+ + z^(1/20).
    The returned g_event flags any slack-ramp violation anywhere.
    """
    if z < 1.0:
        raise DomainError("barrier statistics need z >= 1")
    p = xi.params
    Nbar = p.M
    nbar = p.n - p.k - p.l
    mbar = m_n(Nbar, p.d)
    X = _backbone_matrix(xi)
    t = np.arange(p.n_star + 1, dtype=float)
    ramp = z + (mbar / nbar) * t
    bulge = 10.0 * np.log(np.maximum(np.minimum(t, p.n_star - t), 1.0))
    slack_ramp = ramp + bulge + z ** (1.0 / 20.0)

    under_ramp = (X <= ramp[None, :]).all(axis=1)
    under_slack = (X <= slack_ramp[None, :]).all(axis=1)

    fine = fine_field(xi).reshape((p.N,) * p.d)
    terminal = (block_max(fine, p.KpLp).reshape(-1) >= mbar + z)

    lam = int(np.count_nonzero(under_ramp & terminal))
    gam = int(np.count_nonzero(under_slack & terminal))
    return BarrierCounts(float(z), lam, gam, bool(not under_slack.all()))


# ---------------------------------------------------------------------------
# fine-field right tail
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TailPoint:
    z: float
    p_hat: float
    beta_hat: float
    stderr: float
    n_samples: int


def beta_hat_from_p(z: float, p: float, d: int) -> float:
    """Invert p ~ beta * z * exp(-sqrt(2d) z) for beta."""
    return p * math.exp(math.sqrt(2.0 * d) * z) / z


def coarse_box_fine_maxima(xi: XiField) -> np.ndarray:
    """Max of the fine field over each coarse box, flat (KL^d,)."""
    p = xi.params
    fine = fine_field(xi).reshape((p.N,) * p.d)
    return block_max(fine, p.M).reshape(-1)


def fine_right_tail(params: XiParams, z_grid, replicas: int, seed: int = 0) -> list[TailPoint]:
    """Empirical tail of the per-coarse-box fine-field maximum.

    All coarse boxes of a replica contribute (the fine field is i.i.d.
    across them).  z values must be >= 1; the classical estimates cover
    z <= sqrt(log(N/KL)) and larger z are reported on the same footing.
    """
    z_grid = [float(z) for z in z_grid]
    if any(z < 1.0 for z in z_grid):
        raise DomainError("tail grid must satisfy z >= 1")
    Nbar = params.M
    if Nbar < 3:
        raise DomainError("coarse box side must be >= 3 for the centering")
    mbar = m_n(Nbar, params.d)
    chunks = []
    for rep in range(replicas):
        xi = build_xi(params, rng.replica_seed(seed, rep), retain_levels=False)
        chunks.append(coarse_box_fine_maxima(xi))
    samples = np.concatenate(chunks)
    ns = samples.size
    sq = math.sqrt(2.0 * params.d)
    out = []
    for z in z_grid:
        p = float(np.count_nonzero(samples >= mbar + z)) / ns
        se_p = math.sqrt(max(p * (1.0 - p), 0.0) / ns)
        out.append(TailPoint(z, p, beta_hat_from_p(z, p, params.d),
                             se_p * math.exp(sq * z) / z, ns))
    return out
