"""Acceptance suite: one test per criterion, each printing PASS/FAIL.

Run with ``pytest tests/test_acceptance.py -s`` to see the per-criterion
lines.  Every tolerance is stated inline; Monte Carlo runs use fixed seeds
and the stated replica counts, and each criterion checks its own runtime
budget.  Shared sampling batches (criteria 3/11 and 4/5) are produced once
by module fixtures and their cost is charged to every criterion that uses
them.
"""

import itertools
import math
import time

import numpy as np
import pytest
from scipy.stats import ks_2samp

from _oracles import brute_barrier_counts, brute_mbrw_cov
from lcgf import rng
from lcgf.approx import XiParams, build_xi, count_barrier_events, fine_right_tail
from lcgf.assumptions import check_a1
from lcgf.covariance import (
    DenseCovariance,
    FieldSpec,
    cholesky,
    clrem_matrix,
    find_minimal_w,
    mbrw_covariance_pairs,
    oracle_for,
)
from lcgf.extremes import derivative_martingale, m_n, max_stat
from lcgf.limitlaw import (
    EmpiricalDistribution,
    GStarParams,
    GumbelMixture,
    compare_to_limit,
    levy_distance,
    sample_gstar,
    coarse_proxy_samples,
    tail_slope,
)
from lcgf.perturb import BoxPerturbation, perturbed_field, scaled_mix_field, shift_check
from lcgf.samplers import sample_dense, sample_field, sample_mbrw

LOG2 = math.log(2.0)


def report(num, ok, runtime, detail):
    line = f"ACCEPTANCE {num:>2}: {'PASS' if ok else 'FAIL'} [{runtime:7.1f}s] {detail}"
    print(line, flush=True)


# ---------------------------------------------------------------------------
# shared Monte Carlo batches
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def center_batch():
    """2000 replicas at d=2, n in {7,8,9}: centered maxima + dmart values."""
    t0 = time.monotonic()
    out = {}
    for n in (7, 8, 9):
        spec = FieldSpec("mbrw", 2, n)
        cent = np.empty(2000)
        dm = np.empty(2000)
        for i in range(2000):
            f = sample_mbrw(spec, rng.replica_seed(0xA11CE + n, i))
            cent[i] = max_stat(f).centered
            dm[i] = derivative_martingale(f).z
        out[n] = (cent, dm)
    return out, time.monotonic() - t0


@pytest.fixture(scope="module")
def tail_batch_d2():
    """2e4 replicas of the centered maximum at d=2, n=9."""
    t0 = time.monotonic()
    spec = FieldSpec("mbrw", 2, 9)
    cent = np.empty(20_000)
    for i in range(20_000):
        cent[i] = max_stat(sample_mbrw(spec, rng.replica_seed(0xBEEF4, i))).centered
    return cent, time.monotonic() - t0


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------

def test_criterion_01_mbrw_exactness():
    t0 = time.monotonic()
    worst = 0.0
    for d, nmax in ((1, 4), (2, 3)):
        for n in range(nmax + 1):
            spec = FieldSpec("mbrw", d, n)
            pts = np.array(list(itertools.product(range(1 << n), repeat=d)))
            for x in pts:
                cf = mbrw_covariance_pairs(spec, np.broadcast_to(x, pts.shape), pts)
                bf = np.array([brute_mbrw_cov(n, d, tuple(x), tuple(y)) for y in pts])
                worst = max(worst, float(np.abs(cf - bf).max()))
    dt = time.monotonic() - t0
    ok = worst <= 1e-12 and dt < 10.0
    report(1, ok, dt, f"closed form vs brute force: max |diff| = {worst:.2e}")
    assert ok


def test_criterion_02_log_profile_boundedness():
    t0 = time.monotonic()
    sups = {}
    for d in (1, 2):
        for n in range(4, 11):
            spec = FieldSpec("mbrw", d, n)
            N = 1 << n
            pairs = []
            # structured near-diagonal and mid-range probes, then seeded fill
            for t in range(1, 17):
                pairs.append(((0,) * d, (t % N,) + (0,) * (d - 1)))
                pairs.append(((0,) * d, (t % N,) * d))
            for t in (N // 4, N // 2 - 1, N // 2):
                pairs.append(((0,) * d, (t,) + (0,) * (d - 1)))
            g = rng.generator(0x9A0, d, n)
            while len(pairs) < 500:
                u = tuple(int(c) for c in g.integers(0, N, size=d))
                v = tuple(int(c) for c in g.integers(0, N, size=d))
                pairs.append((u, v))
            U = np.array([p[0] for p in pairs])
            V = np.array([p[1] for p in pairs])
            cov = mbrw_covariance_pairs(spec, U, V)
            delta = np.abs(U - V)
            tor = np.minimum(delta, N - delta)
            dist = np.sqrt((tor.astype(float) ** 2).sum(axis=1))
            dev = np.abs(cov - (math.log(N) - np.log(np.maximum(dist, 1.0))))
            sups[(d, n)] = float(dev.max())
    growth = {d: sups[(d, 10)] - sups[(d, 8)] for d in (1, 2)}
    dt = time.monotonic() - t0
    ok = all(g <= 0.1 for g in growth.values()) and max(sups.values()) < 3.0 and dt < 30.0
    report(2, ok, dt,
           f"sup dev by (d,n): max {max(sups.values()):.3f}; "
           f"growth n=8->10: d1 {growth[1]:+.4f}, d2 {growth[2]:+.4f}")
    assert ok


def test_criterion_03_centering_stability(center_batch):
    batch, elapsed = center_batch
    t0 = time.monotonic()
    means = {n: float(batch[n][0].mean()) for n in (7, 8, 9)}
    drift = max(abs(means[8] - means[7]), abs(means[9] - means[8]))
    dt = (time.monotonic() - t0) + elapsed
    ok = drift < 0.5 and all(abs(m) < 3.0 for m in means.values()) and dt < 600.0
    report(3, ok, dt,
           f"mean centered max: n7 {means[7]:+.3f}, n8 {means[8]:+.3f}, "
           f"n9 {means[9]:+.3f}; max drift {drift:.3f}")
    assert ok


def test_criterion_04_right_tail_slopes(tail_batch_d2):
    cent_d2, elapsed = tail_batch_d2
    t0 = time.monotonic()
    fit2 = tail_slope(EmpiricalDistribution(cent_d2), (1.0, 3.5))
    spec1 = FieldSpec("mbrw", 1, 9)
    cent1 = np.empty(20_000)
    for i in range(20_000):
        cent1[i] = max_stat(sample_mbrw(spec1, rng.replica_seed(0xBEEF1, i))).centered
    fit1 = tail_slope(EmpiricalDistribution(cent1), (1.0, 3.5))
    dt = (time.monotonic() - t0) + elapsed
    ok = (-2.3 <= fit2.slope <= -1.7) and (-1.7 <= fit1.slope <= -1.15) and dt < 1800.0
    report(4, ok, dt,
           f"slope d2 {fit2.slope:.3f}+-{fit2.stderr:.3f} (want [-2.3,-1.7]); "
           f"slope d1 {fit1.slope:.3f}+-{fit1.stderr:.3f} (want [-1.7,-1.15])")
    assert ok


def test_criterion_05_left_tail_decay(tail_batch_d2):
    cent, _ = tail_batch_d2
    t0 = time.monotonic()
    n = cent.size
    ps = [float(np.mean(cent <= -lam)) for lam in (1, 2, 3)]
    L = [math.log(p) for p in ps]
    var_L = [(1 - p) / (n * p) for p in ps]
    second = L[0] - 2 * L[1] + L[2]
    se = math.sqrt(var_L[0] + 4 * var_L[1] + var_L[2])
    dt = time.monotonic() - t0
    ok = ps[0] > ps[1] > ps[2] > 0 and second <= 2 * se
    report(5, ok, dt,
           f"left tail P(<=-1,2,3) = {ps[0]:.4f}/{ps[1]:.4f}/{ps[2]:.4f}; "
           f"2nd diff of log {second:+.3f} <= 2SE {2 * se:.3f} (same run as #4)")
    assert ok


def test_criterion_06_box_noise_shift():
    t0 = time.monotonic()
    spec = FieldSpec("mbrw", 2, 9)
    res16 = shift_check(spec, BoxPerturbation(16, 16, 1.0, 1.0), 5000, seed=0xC6)
    res8 = shift_check(spec, BoxPerturbation(8, 8, 1.0, 1.0), 5000, seed=0xC6)
    err16 = abs(res16.mean_gap - 2.0)
    err8 = abs(res8.mean_gap - 2.0)
    se_pair = math.hypot(res8.stderr, res16.stderr)
    trend_ok = err16 <= err8 + 2 * se_pair
    dt = time.monotonic() - t0
    ok = err16 <= 0.4 and trend_ok and dt < 1200.0
    report(6, ok, dt,
           f"mean gap r=16: {res16.mean_gap:.4f}+-{res16.stderr:.4f} "
           f"(predicted 2.0, |err| {err16:.4f} vs 0.4); r=8 gap {res8.mean_gap:.4f} "
           f"(|err| {err8:.4f}); trend ok: {trend_ok}")
    assert ok


def test_criterion_07_scaling_identity():
    t0 = time.monotonic()
    spec = FieldSpec("mbrw", 1, 6)
    sig = BoxPerturbation(1, 1, 1.0, 1.0)
    a_n = math.sqrt(1.0 + sig.norm2_sq / math.log(64))
    R = 10_000
    mixed = np.empty(R)
    scaled = np.empty(R)
    for i in range(R):
        s = rng.replica_seed(0xC7, i)
        f = sample_field(spec, s)
        fp = sample_field(spec, rng.derive(s, 1))
        mixed[i] = scaled_mix_field(f, fp, sig).values.max()
        scaled[i] = a_n * sample_field(spec, rng.derive(s, 2)).values.max()
    p = ks_2samp(mixed, scaled).pvalue
    dt = time.monotonic() - t0
    ok = p >= 0.01 and dt < 120.0
    report(7, ok, dt, f"KS p = {p:.4f} between max(mix) and a_N max(base), 1e4 reps")
    assert ok


def test_criterion_08_fine_field_tail_flatness():
    t0 = time.monotonic()
    params = XiParams(2, 9, 1, 1, 2, 2)  # MBRW reference, minimal alpha
    rows = fine_right_tail(params, [2.0, 2.5, 3.0, 3.5, 4.0], replicas=1250, seed=0xC8)
    betas = [r.beta_hat for r in rows]
    ratio = max(betas) / min(betas) if min(betas) > 0 else math.inf
    dt = time.monotonic() - t0
    ok = (rows[0].n_samples >= 20_000 and all(0 < b < math.inf for b in betas)
          and ratio <= 2.0 and dt < 1800.0)
    report(8, ok, dt,
           f"beta(z) over [2,4]: [{min(betas):.3f}, {max(betas):.3f}], "
           f"ratio {ratio:.3f} (<= 2), {rows[0].n_samples} box samples")
    assert ok


def test_criterion_09_barrier_containment_and_recount():
    t0 = time.monotonic()
    params = XiParams(2, 6, 1, 1, 1, 0)  # coarse box side 16 = 2^4
    violations = 0
    for i in range(1000):
        bc = count_barrier_events(build_xi(params, rng.replica_seed(0xC9, i)), 1.0)
        violations += bc.lam > bc.gamma_count
    mismatches = 0
    for seed in (11, 12, 13):
        xi = build_xi(params, seed)
        for z in (1.0, 1.5, 2.5):
            got = count_barrier_events(xi, z)
            lam, gam, g = brute_barrier_counts(xi, z)
            mismatches += (got.lam, got.gamma_count, got.g_event) != (lam, gam, g)
    dt = time.monotonic() - t0
    ok = violations == 0 and mismatches == 0 and dt < 300.0
    report(9, ok, dt,
           f"containment violations {violations}/1000; brute-force recount "
           f"mismatches {mismatches}/9")
    assert ok


def test_criterion_10_gstar_mixture_consistency():
    t0 = time.monotonic()
    gp = GStarParams(k=2, l=1, d=2, beta_star=1.0, gamma=3.0)  # R = 64
    draws = [sample_gstar(gp, rng.replica_seed(0xCA, i)) for i in range(10_000)]
    vals = np.array([d.value for d in draws])
    empty = np.array([d.empty for d in draws])
    zs = coarse_proxy_samples(gp, 0xCA1, 10_000)
    neg_frac = float(np.mean(zs <= 0))
    mix = GumbelMixture(1.0, EmpiricalDistribution(zs[zs > 0]), d=2)
    res = compare_to_limit(EmpiricalDistribution(vals), mix)
    res_ne = compare_to_limit(EmpiricalDistribution(vals[~empty]), mix)
    dt = time.monotonic() - t0
    ok = res.levy_after_shift <= 0.05 and dt < 120.0
    report(10, ok, dt,
           f"levy_after_shift {res.levy_after_shift:.4f} (<= 0.05); "
           f"empty fraction {empty.mean():.3f}, nonpositive proxy fraction "
           f"{neg_frac:.3f}, non-empty-only levy {res_ne.levy_after_shift:.4f}")
    assert ok


def test_criterion_11_dmart_convergence_trend(center_batch):
    batch, elapsed = center_batch
    t0 = time.monotonic()
    e = {n: EmpiricalDistribution(batch[n][1]) for n in (7, 8, 9)}
    l78 = levy_distance(e[7], e[8])
    l89 = levy_distance(e[8], e[9])
    dt = (time.monotonic() - t0) + elapsed
    ok = (l78 > l89 or (l78 <= 0.1 and l89 <= 0.1)) and dt < 900.0
    report(11, ok, dt, f"levy(Z_7,Z_8) = {l78:.4f}, levy(Z_8,Z_9) = {l89:.4f}")
    assert ok


def test_criterion_12_clrem_centering():
    t0 = time.monotonic()
    means = {}
    for N in (128, 256, 512):
        w = find_minimal_w(N) + 0.01
        factor = cholesky(DenseCovariance(clrem_matrix(N, w)))  # must succeed
        cent = np.empty(5000)
        for i in range(5000):
            cent[i] = sample_dense(factor, rng.replica_seed(0xCC + N, i)).max() - m_n(N, 1)
        means[N] = float(cent.mean())
    drift = max(abs(means[256] - means[128]), abs(means[512] - means[256]))
    dt = time.monotonic() - t0
    ok = drift < 0.5 and dt < 600.0
    report(12, ok, dt,
           f"mean centered max: N128 {means[128]:+.3f}, N256 {means[256]:+.3f}, "
           f"N512 {means[512]:+.3f}; max drift {drift:.3f}")
    assert ok


def test_criterion_13_assumption_negative_control():
    t0 = time.monotonic()
    brw, mbrw = [], []
    for n in range(4, 9):
        for fam, acc in (("brw", brw), ("mbrw", mbrw)):
            spec = FieldSpec(fam, 1, n)
            a, _ = check_a1(oracle_for(spec), spec, 0.0, pair_budget=10**6)
            acc.append(a)
    diffs = np.diff(brw)
    band = max(mbrw) - min(mbrw)
    dt = time.monotonic() - t0
    ok = bool(np.all(diffs >= 0.5 * LOG2)) and band <= 0.2 and dt < 60.0
    report(13, ok, dt,
           f"brw alpha-hat growth per n: {np.round(diffs, 4).tolist()} "
           f"(>= {0.5 * LOG2:.4f}); mbrw band {band:.4f} (<= 0.2)")
    assert ok
