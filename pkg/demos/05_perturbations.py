"""Robustness of the maximum under box noise and independent mixing.

Adding one centered Gaussian per box at two scales shifts the law of the
maximum by ||sigma||^2 sqrt(d/2) in the double limit (lattice first, then
box scales).  At desk scale the gap undershoots the limit prediction by an
O(log log N / log N) amount -- the trend table below makes that visible
rather than hiding it behind a verdict.

Mixing with an independent copy is different: it is an *exact* law
identity at every size (the covariance simply rescales), so the
Kolmogorov-Smirnov comparison has no finite-size excuse.
"""

import math

import numpy as np
from scipy.stats import ks_2samp

from lcgf import rng
from lcgf.covariance import FieldSpec
from lcgf.perturb import BoxPerturbation, perturbed_field, scaled_mix_field, shift_check
from lcgf.samplers import sample_field

print("== box-noise structure ==")
f = sample_field(FieldSpec("mbrw", 1, 4), 1)
p = BoxPerturbation(4, 2, 1.0, 0.5)
g = perturbed_field(f, p, seed=2)
diff = (g.values - f.values).reshape(4, 4)
print("per-site added noise (constant inside each 4-box):")
print(np.round(diff, 3))

print("\n== mean shift vs prediction across box scales (d=2, n=7) ==")
spec = FieldSpec("mbrw", 2, 7)
print("  r    mean gap   predicted   |error|")
for r in (4, 8, 16):
    res = shift_check(spec, BoxPerturbation(r, r, 1.0, 1.0), replicas=800, seed=50 + r)
    print(f"{r:3d}   {res.mean_gap:8.4f}   {res.predicted:9.4f}   {res.abs_error:7.4f}"
          f"   (se {res.stderr:.4f})")

print("\n== exact scaling identity of the independent mix ==")
spec = FieldSpec("mbrw", 1, 6)
sig = BoxPerturbation(1, 1, 1.0, 1.0)
a_n = math.sqrt(1.0 + sig.norm2_sq / math.log(64))
R = 4000
mixed = np.empty(R)
scaled = np.empty(R)
for i in range(R):
    s = rng.replica_seed(51, i)
    base = sample_field(spec, s)
    other = sample_field(spec, rng.derive(s, 1))
    mixed[i] = scaled_mix_field(base, other, sig).values.max()
    scaled[i] = a_n * sample_field(spec, rng.derive(s, 2)).values.max()
print(f"a_N = {a_n:.5f}; KS p-value between max(mix) and a_N max(base): "
      f"{ks_2samp(mixed, scaled).pvalue:.3f}")
