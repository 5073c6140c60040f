"""Extreme-value statistics of sampled fields.

Natural logarithms throughout: the centering and every tail exponent in
this package only cohere with ln.  Distances between lattice points are
Euclidean here; torus identification belongs to the covariance layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, StateError


def m_n(N: int, d: int) -> float:
    """First-order centering sqrt(2d) log N - (3 / (2 sqrt(2d))) log log N."""
    if N <= 2:
        raise DomainError("centering needs N >= 3 (log log N must be positive)")
    if d < 1:
        raise DomainError("d must be >= 1")
    s = math.sqrt(2.0 * d)
    return s * math.log(N) - (1.5 / s) * math.log(math.log(N))


@dataclass(frozen=True)
class MaxStat:
    max_value: float
    argmax: tuple
    centered: float  # max_value - m_n(N, d); NaN when N < 3


def max_stat(field) -> MaxStat:
    """Exact maximum with lowest-row-major-index tie break."""
    values = field.values
    if values.size == 0:
        raise DomainError("empty field")
    flat = int(np.argmax(values))  # argmax returns the first maximizer
    N, d = field.spec.N, field.spec.d
    coords = tuple(int(c) for c in np.unravel_index(flat, (N,) * d))
    mv = float(values[flat])
    centered = mv - m_n(N, d) if N >= 3 else float("nan")
    return MaxStat(mv, coords, centered)


@dataclass(frozen=True)
class PairMaxStat:
    value: float
    pair: tuple
    r: int


def _coords_array(field) -> np.ndarray:
    N, d = field.spec.N, field.spec.d
    idx = np.arange(N ** d)
    return np.stack(np.unravel_index(idx, (N,) * d), axis=1)


def _annulus_feasible(N: int, r: int) -> bool:
    # an axis-aligned pair at separation r exists iff r <= min(N/r, N-1)
    return r >= 1 and r * r <= N * 1.0 and r <= N - 1 and N / r >= r


def restricted_pair_max(field, r: int) -> PairMaxStat:
    """Maximum of v(u) + v(w) over pairs with r <= |u - w| <= N/r.

    Exact: candidates are scanned in descending value order and the scan
    stops once even the best remaining sum cannot beat the incumbent.
    """
    N = field.spec.N
    if not _annulus_feasible(N, int(r)):
        raise DomainError(f"annulus r <= |u-v| <= N/r empty for r={r}, N={N}")
    r = int(r)
    values = field.values
    coords = _coords_array(field)
    order = np.argsort(values, kind="stable")[::-1]
    lo2, hi2 = float(r) ** 2, (float(N) / r) ** 2
    best = -np.inf
    best_pair = None
    vs = values[order]
    cs = coords[order]
    for i in range(1, len(order)):
        if vs[i] + vs[0] <= best:
            break
        diff = cs[:i].astype(float) - cs[i].astype(float)
        d2 = (diff ** 2).sum(axis=1)
        ok = np.nonzero((d2 >= lo2) & (d2 <= hi2))[0]
        for j in ok:
            s = float(vs[i] + vs[j])
            if s > best:
                best = s
                best_pair = (tuple(int(c) for c in cs[j]), tuple(int(c) for c in cs[i]))
    if best_pair is None:
        raise DomainError(f"no lattice pair with separation in [{r}, {N / r:.3g}]")
    return PairMaxStat(best, best_pair, r)


@dataclass(frozen=True)
class NearMaxReport:
    r: int
    c: float
    threshold: float
    pair_count: int
    pairs: tuple


def near_max_pairs(field, r: int, c: float, max_examples: int = 32) -> NearMaxReport:
    """Count pairs at mesoscopic separation |u-v| in (r, N/r), both sites
    above m_N - c log log r."""
    r = int(r)
    if r < 3:
        raise DomainError("need r >= 3 (log log r must be defined)")
    N, d = field.spec.N, field.spec.d
    if not _annulus_feasible(N, r):
        raise DomainError(f"annulus (r, N/r) empty for r={r}, N={N}")
    threshold = m_n(N, d) - c * math.log(math.log(r))
    values = field.values
    hot = np.nonzero(values >= threshold)[0]
    coords = np.stack(np.unravel_index(hot, (N,) * d), axis=1).astype(float)
    lo2, hi2 = float(r) ** 2, (float(N) / r) ** 2
    count = 0
    examples = []
    for a in range(len(hot)):
        diff = coords[a + 1:] - coords[a]
        d2 = (diff ** 2).sum(axis=1)
        ok = np.nonzero((d2 > lo2) & (d2 < hi2))[0]
        count += int(ok.size)
        for b in ok[: max(0, max_examples - len(examples))]:
            u = tuple(int(x) for x in coords[a])
            v = tuple(int(x) for x in coords[a + 1 + b])
            examples.append((u, v))
    return NearMaxReport(r, float(c), float(threshold), count, tuple(examples))


@dataclass(frozen=True)
class DerivativeMartingaleValue:
    z: float
    subset: object = None


def derivative_martingale(field, subset=None) -> DerivativeMartingaleValue:
    """Sum over the region of (s log N - v) * exp(-s (s log N - v)), s = sqrt(2d).

    Compensated summation (math.fsum): the terms span a dynamic range of
    exp(-s * O(log N)) and naive accumulation loses the small ones.
    """
    N, d = field.spec.N, field.spec.d
    s = math.sqrt(2.0 * d)
    values = field.values if subset is None else field.values[subset]
    gap = s * math.log(N) - values
    terms = gap * np.exp(-s * gap)
    return DerivativeMartingaleValue(math.fsum(terms.tolist()), subset)
