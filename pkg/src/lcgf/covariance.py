"""Exact covariance oracles, dense-matrix assembly, and PD machinery.

Field families
--------------
* ``brw``   -- hierarchical field on aligned dyadic boxes: the covariance of
  two points is ``log 2`` times the number of levels at which they share the
  origin-anchored dyadic box.
* ``mbrw``  -- the translation-invariant variant: boxes at *all* integer
  offsets, identified modulo N (torus).  The level-j contribution to
  Cov(x, y) counts, per coordinate, the window offsets that collide mod N::

      (2^j - t)_+  +  (2^j - (N - t))_+ ,   t = torus distance

  The second (wrap) term is forced by the defining sum: at level j the box
  chains of x and y can also meet "around the back" of the torus once
  2^j + t > N.  The closed form is certified against brute-force enumeration
  of all (level, box, box') pairs in the tests.
* ``clrem`` -- N equally spaced points on the circle, off-diagonal entries
  ``-1/2 log(4 sin^2(dtheta/2))`` and diagonal ``log N + W``.
* ``dense`` -- any user-supplied symmetric matrix.

All oracles are immutable after construction; every operation here is pure.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack

from .errors import CapacityError, DomainError, InputError, NotPDError

LOG2 = math.log(2.0)

FAMILIES = ("brw", "mbrw", "clrem", "dense", "xi")

#: refuse to materialize dense matrices larger than this (rows)
DENSE_CAP = 20000

#: Cholesky pivot floor, as a multiple of trace/m (documented; never exceeded)
PIVOT_FLOOR_REL = 1e-10


# ---------------------------------------------------------------------------
# specs and plain data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DenseCovariance:
    """An explicit m x m covariance matrix (entries in variance units)."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InputError("covariance matrix must be square")
        scale = np.abs(m).max()
        if scale > 0 and np.abs(m - m.T).max() > 1e-12 * scale:
            raise InputError("covariance matrix not symmetric to 1e-12 relative")
        if np.any(np.diag(m) <= 0):
            raise InputError("covariance diagonal must be strictly positive")
        object.__setattr__(self, "entries", 0.5 * (m + m.T))

    @property
    def size(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class CholeskyFactor:
    """Lower-triangular factor L with L @ L.T equal to the source matrix."""

    matrix: np.ndarray

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class FieldSpec:
    """Declarative description of a field family instance.

    ``n`` fixes the lattice side N = 2^n for the dyadic families.  n = 0
    (a single site) is allowed as the degenerate base case.  CLREM is
    one-dimensional by construction and carries the diagonal offset W.
    """

    family: str
    d: int = 1
    n: int = 0
    W: float | None = None
    dense: DenseCovariance | None = None
    xi: object = None  # XiParams; typed loosely to avoid an import cycle

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InputError(f"unknown family {self.family!r}")
        if self.d < 1:
            raise InputError("dimension d must be >= 1")
        if self.n < 0:
            raise InputError("n must be >= 0")
        if self.family == "clrem":
            if self.d != 1:
                raise InputError("clrem is one-dimensional (points on the circle)")
            if self.W is None:
                raise InputError("clrem needs the diagonal offset W")
        if self.family == "dense" and self.dense is None:
            raise InputError("dense family needs a DenseCovariance")
        if self.family == "xi" and self.xi is None:
            raise InputError("xi family needs XiParams")

    @property
    def N(self) -> int:
        if self.family == "dense":
            return self.dense.size
        return 1 << self.n

    @property
    def npoints(self) -> int:
        if self.family == "dense":
            return self.dense.size
        return self.N ** self.d


def _check_point(spec: FieldSpec, x) -> tuple:
    x = tuple(int(c) for c in (x if hasattr(x, "__len__") else (x,)))
    if len(x) != spec.d:
        raise InputError(f"point {x} has dimension {len(x)}, spec has d={spec.d}")
    if any(c < 0 or c >= spec.N for c in x):
        raise InputError(f"point {x} outside [0, {spec.N})^{spec.d}")
    return x


# ---------------------------------------------------------------------------
# closed-form covariances
# ---------------------------------------------------------------------------

def _bit_length(a: np.ndarray) -> np.ndarray:
    """Vectorized int bit length (exact for values < 2**53)."""
    return np.where(a > 0, np.frexp(a.astype(np.float64))[1], 0)


def brw_covariance(spec: FieldSpec, x, y) -> float:
    """Covariance of the aligned-dyadic-box field at two lattice points."""
    if spec.family != "brw":
        raise InputError("spec is not a brw spec")
    x = _check_point(spec, x)
    y = _check_point(spec, y)
    return float(brw_covariance_pairs(spec, np.array([x]), np.array([y]))[0])


def brw_covariance_pairs(spec: FieldSpec, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Vectorized BRW covariance for row-aligned point arrays (m, d)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.int64))
    Y = np.atleast_2d(np.asarray(Y, dtype=np.int64))
    # levels j >= bitlen(x XOR y) share the aligned box; there are n+1 levels
    jstar = _bit_length(X ^ Y).max(axis=1)
    return LOG2 * (spec.n + 1 - jstar)


def mbrw_covariance(spec: FieldSpec, x, y) -> float:
    """Covariance of the torus-wrapped multiscale field at two points."""
    if spec.family != "mbrw":
        raise InputError("spec is not an mbrw spec")
    x = _check_point(spec, x)
    y = _check_point(spec, y)
    return float(mbrw_covariance_pairs(spec, np.array([x]), np.array([y]))[0])


def mbrw_covariance_pairs(spec: FieldSpec, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.int64))
    Y = np.atleast_2d(np.asarray(Y, dtype=np.int64))
    N = spec.N
    delta = np.abs(X - Y)
    t = np.minimum(delta, N - delta)  # torus distance per coordinate
    return mbrw_covariance_from_torus_gaps(spec.n, spec.d, t)


def mbrw_covariance_from_torus_gaps(n: int, d: int, t: np.ndarray) -> np.ndarray:
    """Covariance as a function of the per-coordinate torus gaps ``t``.

    t has shape (m, d); the result has shape (m,).
    """
    t = np.atleast_2d(np.asarray(t, dtype=np.int64))
    N = 1 << n
    out = np.zeros(t.shape[0], dtype=float)
    for j in range(n + 1):
        w = 1 << j
        per_coord = np.maximum(w - t, 0) + np.maximum(w - (N - t), 0)
        out += (LOG2 * float(2.0 ** (-d * j))) * per_coord.prod(axis=1)
    return out


def clrem_covariance(spec: FieldSpec, k: int, l: int) -> float:
    """Entry (k, l) of the circular log-REM covariance matrix."""
    if spec.family != "clrem":
        raise InputError("spec is not a clrem spec")
    N = spec.N
    k, l = int(k), int(l)
    if not (0 <= k < N and 0 <= l < N):
        raise InputError(f"indices ({k}, {l}) outside [0, {N})")
    if k == l:
        return math.log(N) + spec.W
    dtheta = 2.0 * math.pi * (k - l) / N
    return -0.5 * math.log(4.0 * math.sin(dtheta / 2.0) ** 2)


def clrem_matrix(N: int, W: float) -> np.ndarray:
    """The full N x N circular log-REM covariance matrix."""
    if N < 2:
        raise DomainError("clrem needs N >= 2")
    idx = np.arange(N)
    dtheta = 2.0 * np.pi * (idx[:, None] - idx[None, :]) / N
    with np.errstate(divide="ignore"):
        off = -0.5 * np.log(4.0 * np.sin(dtheta / 2.0) ** 2)
    np.fill_diagonal(off, math.log(N) + W)
    return off


# ---------------------------------------------------------------------------
# oracle objects
# ---------------------------------------------------------------------------

class CovarianceOracle:
    """Pairwise covariance function for a FieldSpec, independent of samples.

    ``torus`` declares the field's intrinsic geometry; the assumption
    checkers use ``intrinsic_gap`` (torus distance for wrapped families,
    Euclidean otherwise) when comparing against the log-distance profile.
    """

    torus = False

    def __init__(self, spec: FieldSpec):
        self.spec = spec
        self.d = spec.d

    def __call__(self, x, y) -> float:
        xp = np.atleast_2d(np.asarray(x, dtype=np.int64))
        yp = np.atleast_2d(np.asarray(y, dtype=np.int64))
        return float(self.pairwise(xp, yp)[0])

    def pairwise(self, X, Y) -> np.ndarray:
        raise NotImplementedError

    def variance(self, x) -> float:
        return self(x, x)

    def intrinsic_gap(self, X, Y) -> np.ndarray:
        """Distance used in log-profile comparisons; shape (m,)."""
        X = np.atleast_2d(np.asarray(X, dtype=np.int64))
        Y = np.atleast_2d(np.asarray(Y, dtype=np.int64))
        delta = np.abs(X - Y).astype(float)
        if self.torus:
            delta = np.minimum(delta, self.spec.N - delta)
        return np.sqrt((delta ** 2).sum(axis=1))


class BrwOracle(CovarianceOracle):
    constant_variance = True

    def pairwise(self, X, Y):
        return brw_covariance_pairs(self.spec, X, Y)

    def variance(self, x):
        return (self.spec.n + 1) * LOG2


class MbrwOracle(CovarianceOracle):
    torus = True
    constant_variance = True

    def pairwise(self, X, Y):
        return mbrw_covariance_pairs(self.spec, X, Y)

    def variance(self, x):
        return (self.spec.n + 1) * LOG2


class ClremOracle(CovarianceOracle):
    torus = True
    constant_variance = True

    def pairwise(self, X, Y):
        X = np.atleast_2d(np.asarray(X, dtype=np.int64))[:, 0]
        Y = np.atleast_2d(np.asarray(Y, dtype=np.int64))[:, 0]
        N = self.spec.N
        out = np.empty(X.shape[0], dtype=float)
        same = X == Y
        out[same] = math.log(N) + self.spec.W
        dtheta = 2.0 * np.pi * (X[~same] - Y[~same]) / N
        out[~same] = -0.5 * np.log(4.0 * np.sin(dtheta / 2.0) ** 2)
        return out


class DenseOracle(CovarianceOracle):
    constant_variance = False

    def pairwise(self, X, Y):
        X = np.atleast_2d(np.asarray(X, dtype=np.int64))[:, 0]
        Y = np.atleast_2d(np.asarray(Y, dtype=np.int64))[:, 0]
        return self.spec.dense.entries[X, Y]


def oracle_for(spec: FieldSpec) -> CovarianceOracle:
    try:
        cls = {
            "brw": BrwOracle,
            "mbrw": MbrwOracle,
            "clrem": ClremOracle,
            "dense": DenseOracle,
        }[spec.family]
    except KeyError:
        raise InputError(f"no covariance oracle for family {spec.family!r}")
    return cls(spec)


# ---------------------------------------------------------------------------
# dense assembly, Cholesky, minimal W
# ---------------------------------------------------------------------------

def build_dense(oracle: CovarianceOracle, points, cap: int = DENSE_CAP) -> DenseCovariance:
    """Materialize the covariance matrix of ``oracle`` on a point list."""
    pts = [tuple(int(c) for c in (p if hasattr(p, "__len__") else (p,))) for p in points]
    m = len(pts)
    if m == 0:
        raise InputError("empty point list")
    if len(set(pts)) != m:
        raise InputError("points must be distinct")
    if m > cap:
        raise CapacityError(f"matrix order {m} exceeds cap {cap}")
    P = np.asarray(pts, dtype=np.int64)
    # assemble row blocks through the vectorized pairwise path
    entries = np.empty((m, m), dtype=float)
    for i in range(m):
        entries[i, :] = oracle.pairwise(np.broadcast_to(P[i], P.shape), P)
    entries = 0.5 * (entries + entries.T)  # kill float asymmetry from assembly order
    return DenseCovariance(entries)


def cholesky(m: DenseCovariance) -> CholeskyFactor:
    """Lower Cholesky factor; raises NotPDError instead of regularizing.

    A diagonal jitter of at most PIVOT_FLOOR_REL * trace/m may be applied
    when the plain factorization fails; pivots at or below that floor are
    treated as failures, never silently lifted.
    """
    a = np.asarray(m.entries, dtype=float)
    n = a.shape[0]
    floor = PIVOT_FLOOR_REL * float(np.trace(a)) / n
    L, info = lapack.dpotrf(a, lower=1, clean=1, overwrite_a=0)
    if info == 0:
        piv = np.diag(L) ** 2
        bad = np.nonzero(piv <= floor)[0]
        if bad.size:
            raise NotPDError(int(bad[0]), float(piv[bad[0]]))
        return CholeskyFactor(L)
    if info < 0:
        raise InputError(f"illegal value in column {-info}")
    # retry once with the documented jitter floor on the diagonal
    L, info2 = lapack.dpotrf(a + floor * np.eye(n), lower=1, clean=1, overwrite_a=0)
    if info2 == 0:
        piv = np.diag(L) ** 2
        bad = np.nonzero(piv <= floor)[0]
        if bad.size:
            raise NotPDError(int(bad[0]), float(piv[bad[0]]))
        return CholeskyFactor(L)
    k = int(info2) - 1
    raise NotPDError(k, float(a[k, k]) if k < n else None)


def find_minimal_w(N: int, tol: float = 1e-6) -> float:
    """Smallest diagonal offset W that makes the circular log-REM PSD.

    Bisection on the sign of the smallest eigenvalue over the bracket
    [-log N, 10 log N].  Since W enters only on the diagonal, the smallest
    eigenvalue of R(W) is lam_min(R(0)) + W, which lets each bisection probe
    reuse a single eigendecomposition.
    """
    if N < 2:
        raise DomainError("need N >= 2")
    if tol <= 0:
        raise DomainError("tol must be positive")
    lam0 = float(np.linalg.eigvalsh(clrem_matrix(N, 0.0))[0])
    lo, hi = -math.log(N), 10.0 * math.log(N)
    if lam0 + hi < 0:
        raise DomainError("bracket does not contain the PSD threshold")
    if lam0 + lo >= 0:
        return lo
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if lam0 + mid >= 0:
            hi = mid
        else:
            lo = mid
    return hi


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

_COV_MAGIC = b"LCGFCOV1"


def save_dense(m: DenseCovariance, path, d: int = 1) -> None:
    """Binary layout: 8-byte magic, u32 m, u32 d, then row-major LE f64."""
    with open(path, "wb") as fh:
        fh.write(_COV_MAGIC)
        fh.write(struct.pack("<II", m.size, d))
        fh.write(np.ascontiguousarray(m.entries, dtype="<f8").tobytes())


def load_dense(path) -> tuple[DenseCovariance, int]:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _COV_MAGIC:
            raise InputError(f"bad magic {magic!r}")
        m, d = struct.unpack("<II", fh.read(8))
        data = np.frombuffer(fh.read(8 * m * m), dtype="<f8").reshape(m, m)
    return DenseCovariance(data.astype(float)), d


def save_dense_csv(m: DenseCovariance, path) -> None:
    np.savetxt(path, m.entries, delimiter=",", fmt="%.17g")


def load_dense_csv(path) -> DenseCovariance:
    return DenseCovariance(np.atleast_2d(np.loadtxt(path, delimiter=",")))
