"""Assumption checkers: estimator semantics, witnesses, profile fits."""

import math

import numpy as np
import pytest

from lcgf.assumptions import check_a0, check_a1, estimate_fgh, probe_pairs
from lcgf.covariance import DenseCovariance, FieldSpec, oracle_for
from lcgf.errors import InputError

LOG2 = math.log(2.0)


def test_a0_mbrw_variance_term():
    # constant-variance field: Var - log N = log 2 exactly, so the estimate
    # is at least log 2 and the diagonal witnesses re-evaluate to it
    spec = FieldSpec("mbrw", 2, 6)
    a0, wit = check_a0(oracle_for(spec), spec, pair_budget=50_000)
    assert a0 >= LOG2 - 1e-12
    assert a0 < 2.0
    oracle = oracle_for(spec)
    for w in wit:
        var_u = oracle(w.u, w.u)
        var_v = oracle(w.v, w.v)
        cov = oracle(w.u, w.v)
        dist = math.dist(w.u, w.v)
        incr_term = 0.25 * (
            var_u + var_v - 2 * cov - 2 * math.log(max(dist, 1.0)) + abs(var_v - var_u)
        )
        dev = max(var_v - math.log(spec.N), incr_term)
        assert dev == pytest.approx(w.deviation, abs=1e-12)


def test_a0_constant_covariance_field_gives_zero():
    # Cov = log N everywhere: increments vanish, variance term is zero
    N = 16
    mat = DenseCovariance(np.full((N, N), math.log(N)))
    spec = FieldSpec("dense", 1, 0, dense=mat)
    a0, _ = check_a0(oracle_for(spec), spec, pair_budget=10_000)
    assert a0 == 0.0


def test_a0_budget_above_total_is_exhaustive():
    spec = FieldSpec("mbrw", 1, 4)
    oracle = oracle_for(spec)
    a_small, _ = check_a0(oracle, spec, pair_budget=10**6)
    a_big, _ = check_a0(oracle, spec, pair_budget=10**7)
    assert a_small == a_big  # both exhaustive


def test_a1_mbrw_bounded_and_brw_growing():
    mbrw_vals, brw_vals = [], []
    for n in range(3, 8):
        for fam, acc in (("mbrw", mbrw_vals), ("brw", brw_vals)):
            spec = FieldSpec(fam, 1, n)
            a, _ = check_a1(oracle_for(spec), spec, 0.0, pair_budget=10**6)
            acc.append(a)
    assert max(mbrw_vals) <= 3.0
    assert max(mbrw_vals) - min(mbrw_vals) < 0.2
    # negative control: the aligned-box hierarchy drifts linearly
    diffs = np.diff(brw_vals)
    assert np.all(diffs >= 0.5 * LOG2)


def test_a1_diagonal_only_probe():
    # u = v pairs: deviation reduces to |Var - log N|
    spec = FieldSpec("mbrw", 1, 5)
    oracle = oracle_for(spec)
    pts = np.arange(32)[:, None]
    cov = oracle.pairwise(pts, pts)
    dev = np.abs(cov - math.log(32))
    assert np.allclose(dev, LOG2)


def test_a1_witnesses_reevaluate():
    spec = FieldSpec("brw", 1, 6)
    oracle = oracle_for(spec)
    a, wit = check_a1(oracle, spec, 0.0, pair_budget=10**6)
    top = wit[0]
    dev = abs(
        oracle(top.u, top.v)
        - (math.log(spec.N) - math.log(max(math.dist(top.u, top.v), 1.0)))
    )
    assert dev == pytest.approx(top.deviation, abs=1e-12)
    assert dev == pytest.approx(a, abs=1e-12)


def test_a1_delta_restricts_probe():
    spec = FieldSpec("brw", 1, 6)
    oracle = oracle_for(spec)
    full, _ = check_a1(oracle, spec, 0.0, pair_budget=10**6)
    interior, wit = check_a1(oracle, spec, 0.25, pair_budget=10**6)
    assert interior <= full
    m = math.ceil(0.25 * 64)
    for w in wit:
        assert m <= w.u[0] < 64 - m


def test_alpha_monotone_in_budget():
    spec = FieldSpec("mbrw", 2, 5)
    oracle = oracle_for(spec)
    estimates = [
        check_a1(oracle, spec, 0.0, pair_budget=b)[0] for b in (100, 1000, 10_000)
    ]
    assert estimates == sorted(estimates)


def test_probe_pairs_prefix_property():
    pts = np.arange(1000)[:, None]
    iu1, iv1 = probe_pairs(pts, 500)
    iu2, iv2 = probe_pairs(pts, 800)
    assert np.array_equal(iu1, iu2[:500])
    assert np.array_equal(iv1, iv2[:500])
    with pytest.raises(InputError):
        probe_pairs(pts, 0)


# -- f/g/h fits -----------------------------------------------------------------

def mbrw_family(d):
    def at(N):
        return oracle_for(FieldSpec("mbrw", d, N.bit_length() - 1))

    return at


def test_fgh_mbrw_f_is_log2_and_g_diag_constant():
    fit = estimate_fgh(mbrw_family(2), [64, 128], L=3)
    for x, val in fit.f_hat.items():
        assert val == pytest.approx(LOG2, abs=1e-12)
    diag = [fit.g_hat[(u, u)] for u in {k[0] for k in fit.g_hat}]
    assert np.ptp(diag) == pytest.approx(0.0, abs=1e-12)
    # translation invariance makes the f + g reproduction exact
    assert fit.reproduction_error <= 1e-10


def test_fgh_stability_across_sizes():
    fit = estimate_fgh(mbrw_family(2), [128, 256], L=3)
    assert fit.stability["f"] <= 0.05
    assert fit.stability["g"] <= 0.05
    assert fit.stability["h"] <= 0.05


def test_fgh_rejects_bad_grid():
    with pytest.raises(InputError):
        estimate_fgh(mbrw_family(1), [64])
    with pytest.raises(InputError):
        estimate_fgh(mbrw_family(1), [128, 64])
    with pytest.raises(InputError):
        # x so close to the edge that offsets leave the lattice
        estimate_fgh(mbrw_family(1), [16, 32], L=8, x_grid=[(0.99,)])
