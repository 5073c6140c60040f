"""Seeded, deterministic samplers for every field family.

Determinism contract: (spec, seed) -> bit-identical values, independent of
worker count or call order.  Within a field, the Gaussian draws of each
hierarchy level come from their own derived stream keyed by (seed, level),
so retained per-level increments are well defined and a retained run is
bit-identical to a plain run with the same seed.

Replica batches derive per-replica seeds with the documented counter
scheme in :mod:`lcgf.rng`; parallel execution only distributes fully
self-contained (seed -> field -> statistic) tasks, so output order and
bits never depend on the schedule.
"""

from __future__ import annotations

import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels, rng
from .covariance import LOG2, CholeskyFactor, FieldSpec, build_dense, cholesky, oracle_for
from .errors import CapacityError, InputError

#: refuse lattices with more sites than this (2**22)
VOLUME_CAP = 1 << 22

# stream tags (arbitrary but frozen)
_TAG_BRW = 0xB0
_TAG_MBRW = 0x3B
_TAG_DENSE = 0xDE


@dataclass(frozen=True)
class SampledField:
    """One realization on the lattice: flat row-major values + provenance."""

    spec: FieldSpec
    values: np.ndarray
    seed: int
    levels: dict | None = None  # level j -> flat per-site increment array

    @property
    def grid(self) -> np.ndarray:
        return self.values.reshape((self.spec.N,) * self.spec.d)


@dataclass(frozen=True)
class ReplicaPlan:
    """Replica batch: spec, count, and the master seed of the counter scheme."""

    spec: FieldSpec
    count: int
    master_seed: int

    def seed_for(self, index: int) -> int:
        return rng.replica_seed(self.master_seed, index)


def _check_volume(spec: FieldSpec):
    if spec.npoints > VOLUME_CAP:
        raise CapacityError(
            f"lattice volume {spec.npoints} exceeds cap {VOLUME_CAP}"
        )


# ---------------------------------------------------------------------------
# windowed sums (the workhorse of the multiscale construction)
# ---------------------------------------------------------------------------

def _axslice(ndim: int, axis: int, s: slice) -> tuple:
    return tuple(s if ax == axis else slice(None) for ax in range(ndim))


def circular_window_sum(a: np.ndarray, w: int, axis: int) -> np.ndarray:
    """Sum of the w entries ending at each index, wrapping around ``axis``.

    2-D inputs stream through the jitted rolling kernels; other shapes use
    the cumulative-sum formulation.  Both are fixed algorithms, so results
    are deterministic per shape.
    """
    if w == 1:
        return a.copy()
    if a.ndim == 2:
        out = np.empty_like(a)
        if axis in (1, -1):
            _kernels.circ_window_2d_axis1(a, w, out)
        else:
            _kernels.circ_window_2d_axis0(a, w, out)
        return out
    N = a.shape[axis]
    sl = lambda s: _axslice(a.ndim, axis, s)
    ext = np.concatenate([a[sl(slice(N - w + 1, N))], a], axis=axis)
    np.cumsum(ext, axis=axis, out=ext)
    out = np.empty_like(a)
    out[sl(slice(0, 1))] = ext[sl(slice(w - 1, w))]
    np.subtract(ext[sl(slice(w, None))], ext[sl(slice(0, N - 1))],
                out=out[sl(slice(1, None))])
    return out


def sliding_window_sum(a: np.ndarray, w: int, axis: int) -> np.ndarray:
    """Plain (non-wrapping) sliding sum; output is shorter by w - 1."""
    if w == 1:
        return a.copy()
    N = a.shape[axis]
    sl = lambda s: _axslice(a.ndim, axis, s)
    ext = np.cumsum(a, axis=axis)
    out = np.empty_like(a[sl(slice(0, N - w + 1))])
    out[sl(slice(0, 1))] = ext[sl(slice(w - 1, w))]
    np.subtract(ext[sl(slice(w, None))], ext[sl(slice(0, N - w))],
                out=out[sl(slice(1, None))])
    return out


# ---------------------------------------------------------------------------
# family samplers
# ---------------------------------------------------------------------------

def sample_brw(spec: FieldSpec, seed: int) -> SampledField:
    """Aligned-dyadic-box field: one N(0, log 2) draw per level and box."""
    if spec.family != "brw":
        raise InputError("spec is not a brw spec")
    _check_volume(spec)
    N, d = spec.N, spec.d
    values = np.zeros((N,) * d)
    for j in range(spec.n + 1):
        g = rng.generator(seed, _TAG_BRW, j)
        coarse = g.standard_normal((N >> j,) * d) * np.sqrt(LOG2)
        level = coarse
        for ax in range(d):
            level = np.repeat(level, 1 << j, axis=ax)
        values += level
    return SampledField(spec, values.reshape(-1), seed)


def sample_mbrw(spec: FieldSpec, seed: int, retain_levels: bool = False) -> SampledField:
    """Torus multiscale field per the defining box sum.

    Level j adds, at every site z, the sum of one shared N(0, log2 * 2^(-dj))
    variable per box containing z (boxes at all offsets, wrapped mod N) --
    i.e. a circular window sum of the level's per-corner draws.
    """
    if spec.family != "mbrw":
        raise InputError("spec is not an mbrw spec")
    _check_volume(spec)
    N, d = spec.N, spec.d
    values = np.zeros((N,) * d)
    levels = {} if retain_levels else None
    buf = np.empty((N,) * d)
    for j in range(spec.n + 1):
        g = rng.generator(seed, _TAG_MBRW, j)
        if j == spec.n:
            # top level: every site's box chain hits every torus box, so the
            # level field is the constant sum of all draws -- one Gaussian of
            # variance log 2
            level = np.full((N,) * d, g.standard_normal() * math.sqrt(LOG2))
        elif j == 0:
            # unit boxes: the level field is the draw array itself
            g.standard_normal(out=buf)
            buf *= math.sqrt(LOG2)
            level = buf if not retain_levels else buf.copy()
        else:
            g.standard_normal(out=buf)
            buf *= math.sqrt(LOG2 * 2.0 ** (-d * j))
            level = buf
            for ax in range(d):
                level = circular_window_sum(level, 1 << j, ax)
        values += level
        if retain_levels:
            levels[j] = level.reshape(-1).copy() if level is buf else level.reshape(-1)
    return SampledField(spec, values.reshape(-1), seed, levels)


def sample_dense(factor: CholeskyFactor, seed: int) -> np.ndarray:
    """L @ g with g i.i.d. standard normal; deterministic given seed."""
    g = rng.generator(seed, _TAG_DENSE)
    return factor.matrix @ g.standard_normal(factor.size)


@lru_cache(maxsize=8)
def _clrem_factor(spec: FieldSpec) -> CholeskyFactor:
    oracle = oracle_for(spec)
    pts = [(k,) for k in range(spec.N)]
    return cholesky(build_dense(oracle, pts, cap=max(VOLUME_CAP, spec.N)))


def sample_field(spec: FieldSpec, seed: int) -> SampledField:
    """Dispatch on the family; always returns a SampledField of site values."""
    if spec.family == "brw":
        return sample_brw(spec, seed)
    if spec.family == "mbrw":
        return sample_mbrw(spec, seed)
    if spec.family == "clrem":
        values = sample_dense(_clrem_factor(spec), seed)
        return SampledField(spec, values, seed)
    if spec.family == "dense":
        values = sample_dense(_dense_factor(spec), seed)
        return SampledField(spec, values, seed)
    if spec.family == "xi":
        from .approx import build_xi

        xi = build_xi(spec.xi, seed, retain_levels=False)
        return SampledField(spec, xi.total, seed)
    raise InputError(f"cannot sample family {spec.family!r}")


@lru_cache(maxsize=8)
def _dense_factor(spec: FieldSpec) -> CholeskyFactor:
    return cholesky(spec.dense)


# ---------------------------------------------------------------------------
# replica execution
# ---------------------------------------------------------------------------

def _stat_max(spec, seed, **kw):
    from .extremes import max_stat

    return max_stat(sample_field(spec, seed))


def _stat_dmart(spec, seed, **kw):
    from .extremes import derivative_martingale

    return derivative_martingale(sample_field(spec, seed))


def _stat_pair_max(spec, seed, r=2, **kw):
    from .extremes import restricted_pair_max

    return restricted_pair_max(sample_field(spec, seed), r)


def _stat_barrier(spec, seed, z=1.0, **kw):
    from .approx import build_xi, count_barrier_events

    if spec.family != "xi":
        raise InputError("barrier-counts needs an xi spec")
    return count_barrier_events(build_xi(spec.xi, seed), z)


def _stat_raw(spec, seed, **kw):
    return sample_field(spec, seed).values


STATISTICS = {
    "max": _stat_max,
    "derivative-martingale": _stat_dmart,
    "pair-max": _stat_pair_max,
    "barrier-counts": _stat_barrier,
    "raw": _stat_raw,
}


def run_replicas(plan: ReplicaPlan, statistic: str, workers: int = 1, **kwargs) -> list:
    """Per-replica statistic values, in replica-index order.

    The output is identical for any worker count: every task is a pure
    function of (spec, derived seed), and results are gathered by index.
    """
    try:
        fn = STATISTICS[statistic]
    except KeyError:
        raise InputError(
            f"unknown statistic {statistic!r}; known: {sorted(STATISTICS)}"
        )
    seeds = [plan.seed_for(i) for i in range(plan.count)]
    if workers <= 1:
        return [fn(plan.spec, s, **kwargs) for s in seeds]
    out = [None] * plan.count
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {pool.submit(fn, plan.spec, s, **kwargs): i for i, s in enumerate(seeds)}
        for fut, i in futures.items():
            out[i] = fut.result()
    return out


# ---------------------------------------------------------------------------
# field export
# ---------------------------------------------------------------------------

_FLD_MAGIC = b"LCGFFLD1"


def save_field(field: SampledField, path) -> None:
    """Binary layout: magic, u32 d, u32 N, u64 seed, then N^d LE f64."""
    with open(path, "wb") as fh:
        fh.write(_field_bytes(field))


def _field_bytes(field: SampledField) -> bytes:
    head = _FLD_MAGIC + struct.pack("<IIQ", field.spec.d, field.spec.N, field.seed)
    return head + np.ascontiguousarray(field.values, dtype="<f8").tobytes()


def load_field(path) -> tuple[np.ndarray, int, int, int]:
    """Returns (values, d, N, seed); the spec itself is not serialized."""
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _FLD_MAGIC:
            raise InputError(f"bad magic {magic!r}")
        d, N, seed = struct.unpack("<IIQ", fh.read(16))
        values = np.frombuffer(fh.read(8 * N ** d), dtype="<f8").astype(float)
    return values, d, N, seed


def field_csv_rows(field: SampledField):
    """Yield (coord..., value) tuples in row-major order."""
    N, d = field.spec.N, field.spec.d
    for flat, v in enumerate(field.values):
        coords = np.unravel_index(flat, (N,) * d)
        yield (*(int(c) for c in coords), float(v))
