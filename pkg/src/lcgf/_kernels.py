"""Rolling-sum kernels for the 2-D hot path of the multiscale sampler.

The circular trailing-window sum is a linear recurrence
``s_j = s_{j-1} + a_j - a_{(j-w) mod N}``; the jitted kernels stream it at
memory bandwidth.  No fastmath: operation order is fixed, so results are
bit-reproducible for a given build.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def circ_window_2d_axis1(a, w, out):
    n0, n1 = a.shape
    for i in range(n0):
        s = a[i, 0]
        for k in range(n1 - w + 1, n1):
            s += a[i, k]
        out[i, 0] = s
        for j in range(1, n1):
            k = j - w
            if k < 0:
                k += n1
            s = s + a[i, j] - a[i, k]
            out[i, j] = s


@njit(cache=True)
def circ_window_2d_axis0(a, w, out):
    n0, n1 = a.shape
    for j in range(n1):
        out[0, j] = a[0, j]
    for i in range(n0 - w + 1, n0):
        for j in range(n1):
            out[0, j] += a[i, j]
    for i in range(1, n0):
        k = i - w
        if k < 0:
            k += n0
        for j in range(n1):
            out[i, j] = out[i - 1, j] + a[i, j] - a[k, j]
