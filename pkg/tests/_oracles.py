"""Independent brute-force oracles shared by the unit and acceptance tests.

These deliberately re-derive everything from first principles (plain loops
over boxes, corners, and barrier times) and never call the closed forms or
the vectorized counters they certify.
"""

import itertools
import math

from lcgf.approx import backbone, fine_field
from lcgf.extremes import m_n

LOG2 = math.log(2.0)


def brute_brw_cov(n, d, x, y):
    """Count levels at which the aligned dyadic boxes coincide."""
    shared = 0
    for j in range(n + 1):
        if all((xi >> j) == (yi >> j) for xi, yi in zip(x, y)):
            shared += 1
    return LOG2 * shared


def brute_mbrw_cov(n, d, x, y):
    """Enumerate all (level, box, box') pairs with torus identification."""
    N = 1 << n
    total = 0.0
    for j in range(n + 1):
        w = 1 << j
        var = LOG2 * 2.0 ** (-d * j)
        cx = set()
        for off in itertools.product(range(w), repeat=d):
            cx.add(tuple((x[i] - off[i]) % N for i in range(d)))
        count = sum(
            1
            for off in itertools.product(range(w), repeat=d)
            if tuple((y[i] - off[i]) % N for i in range(d)) in cx
        )
        total += var * count
    return total


def brute_barrier_counts(xi, z):
    """Independent recount: walk every corner's exported backbone."""
    p = xi.params
    Nbar = p.M
    nbar = p.n - p.k - p.l
    mbar = m_n(Nbar, p.d)
    fine = fine_field(xi).reshape((p.N,) * p.d)
    q = p.N // p.KpLp
    lam = gam = 0
    g_event = False
    for corner in itertools.product(range(q), repeat=p.d):
        v = tuple(c * p.KpLp for c in corner)
        X = backbone(xi, v).X
        box = tuple(slice(c, c + p.KpLp) for c in v)
        hit = fine[box].max() >= mbar + z
        under_e = True
        under_f = True
        for t, x in enumerate(X):
            ramp = z + (mbar / nbar) * t
            m = min(t, p.n_star - t)
            slack = ramp + 10.0 * (math.log(m) if m >= 1 else 0.0) + z ** 0.05
            if x > ramp:
                under_e = False
            if x > slack:
                under_f = False
                g_event = True
        lam += under_e and hit
        gam += under_f and hit
    return lam, gam, g_event
