"""Dev-only: scaled-down dry runs of the statistical acceptance criteria.

Not part of the deliverable; estimates the bands before freezing tests.
"""
import math
import time

import numpy as np

from lcgf.covariance import FieldSpec, find_minimal_w, clrem_matrix, DenseCovariance, cholesky
from lcgf.samplers import sample_mbrw, sample_field, sample_dense
from lcgf.extremes import m_n, max_stat, derivative_martingale
from lcgf.perturb import BoxPerturbation, perturbed_field
from lcgf.approx import XiParams, build_xi, fine_right_tail, minimal_alpha
from lcgf.limitlaw import (EmpiricalDistribution, GStarParams, GumbelMixture,
                           sample_gstar, coarse_proxy_samples, compare_to_limit,
                           gumbel_mixture_cdf, levy_distance, tail_slope)
from lcgf import rng

t_start = time.time()


def stamp(msg):
    print(f'[{time.time()-t_start:7.1f}s] {msg}', flush=True)


# --- criterion 3 / 11 scaled: centered max + dmart at n=7,8,9, 400 reps ----
cent = {}
dmart = {}
for n in (7, 8, 9):
    spec = FieldSpec('mbrw', 2, n)
    ms, zs = [], []
    for i in range(400):
        f = sample_mbrw(spec, rng.replica_seed(300 + n, i))
        ms.append(max_stat(f).centered)
        zs.append(derivative_martingale(f).z)
    cent[n] = np.array(ms)
    dmart[n] = np.array(zs)
    stamp(f'n={n}: mean centered max {cent[n].mean():.4f} (se {cent[n].std()/20:.3f}), '
          f'dmart median {np.median(dmart[n]):.4f}, frac<=0 {np.mean(dmart[n]<=0):.3f}')
l78 = levy_distance(EmpiricalDistribution(dmart[7]), EmpiricalDistribution(dmart[8]))
l89 = levy_distance(EmpiricalDistribution(dmart[8]), EmpiricalDistribution(dmart[9]))
stamp(f'criterion 11 proxy: levy(7,8)={l78:.4f} levy(8,9)={l89:.4f}')

# --- criterion 4/5 scaled: 4000 reps at n=9 d=2 and d=1 --------------------
for d, window, band in ((2, (1.0, 3.5), (-2.3, -1.7)), (1, (1.0, 3.5), (-1.7, -1.15))):
    spec = FieldSpec('mbrw', d, 9)
    reps = 4000 if d == 2 else 20000
    cs = np.empty(reps)
    for i in range(reps):
        cs[i] = max_stat(sample_mbrw(spec, rng.replica_seed(40 + d, i))).centered
    ecdf = EmpiricalDistribution(cs)
    fit = tail_slope(ecdf, window)
    stamp(f'criterion 4 d={d}: slope {fit.slope:.4f} +- {fit.stderr:.4f} (band {band}), reps={reps}')
    if d == 2:
        for lam in (1, 2, 3):
            p = np.mean(cs <= -lam)
            stamp(f'  left tail P(<= -{lam}) = {p:.5f} (count {int(p*reps)})')

# --- criterion 6 scaled: shift check, 800 reps ------------------------------
spec = FieldSpec('mbrw', 2, 9)
for r in (8, 16):
    p = BoxPerturbation(r, r, 1.0, 1.0)
    gaps = np.empty(800)
    for i in range(800):
        s = rng.replica_seed(60 + r, i)
        base = sample_mbrw(spec, s)
        pert = perturbed_field(base, p, rng.derive(s, 0x9E))
        gaps[i] = pert.values.max() - base.values.max()
    stamp(f'criterion 6 r={r}: mean_gap {gaps.mean():.4f} (predicted 2.0, se {gaps.std()/math.sqrt(800):.4f})')

# --- criterion 8 scaled: fine-field tail, 300 reps (=4800 box samples) ------
params = XiParams(2, 9, 1, 1, 2, 2)
stamp(f'xi minimal alpha = {minimal_alpha(params):.6f} (log2/2 = {math.log(2)/2:.6f})')
rows = fine_right_tail(params, [2.0, 2.5, 3.0, 3.5, 4.0], 300, seed=88)
for r in rows:
    stamp(f'  z={r.z}: p={r.p_hat:.5f} beta={r.beta_hat:.4f} +- {r.stderr:.4f}')
betas = [r.beta_hat for r in rows]
stamp(f'criterion 8: beta range [{min(betas):.4f}, {max(betas):.4f}] ratio {max(betas)/min(betas):.3f}')

# --- criterion 10: gstar vs mixture (full size, it is cheap) ----------------
gp = GStarParams(k=2, l=1, d=2, beta_star=1.0, gamma=3.0)
stamp(f'gstar: R={gp.R} p_active={gp.p_active:.6f} (64p = {64*gp.p_active:.4f})')
draws = [sample_gstar(gp, rng.replica_seed(100, i)) for i in range(10000)]
vals = np.array([dr.value for dr in draws])
empty = np.array([dr.empty for dr in draws])
stamp(f'empty fraction = {empty.mean():.4f}')
zs = coarse_proxy_samples(gp, 101, 20000)
stamp(f'proxy Z: median {np.median(zs):.4f}, frac<=0 {np.mean(zs<=0):.4f}')
pos = zs[zs > 0]
mix = GumbelMixture(1.0, EmpiricalDistribution(pos), d=2)
emp_all = EmpiricalDistribution(vals)
emp_ne = EmpiricalDistribution(vals[~empty])
try:
    res_all = compare_to_limit(emp_all, mix)
    stamp(f'compare (all draws incl atom): shift {res_all.shift:.4f} levy {res_all.levy_after_shift:.4f}')
except Exception as e:
    stamp(f'compare all draws failed: {e}')
res_ne = compare_to_limit(emp_ne, mix)
stamp(f'compare (non-empty only):      shift {res_ne.shift:.4f} levy {res_ne.levy_after_shift:.4f}')

# --- criterion 12: CLREM, 1000 reps ------------------------------------------
for N in (128, 256, 512):
    W = find_minimal_w(N) + 0.01
    mat = DenseCovariance(clrem_matrix(N, W))
    fac = cholesky(mat)
    cs = np.empty(1000)
    for i in range(1000):
        x = sample_dense(fac, rng.replica_seed(120 + N, i))
        cs[i] = x.max() - m_n(N, 1)
    stamp(f'criterion 12 N={N}: W_min+0.01={W:.4f}, mean centered max {cs.mean():.4f} (se {cs.std()/math.sqrt(1000):.4f})')

stamp('done')
