"""Compiled inner loop of the midpoint-exponential integrator."""
import math

import numba
import numpy as np

SMALL_ANGLE = 1e-8


@numba.njit(cache=True)
def su2_chain(kappa, k0, h, alpha, beta, phase, rec):
    """
    Left-multiply the SU(2) element (alpha, beta) by exp(i kappa_j . sigma h_j) for each j.

    The propagator is e^{i phase} [[alpha, beta], [-conj(beta), conj(alpha)]];
    the scalar part only shifts ``phase``. ``rec`` holds sorted step counts
    (0..n) at which the running product is stored.
    """
    n = h.shape[0]
    m = rec.shape[0]
    out_a = np.empty(m, np.complex128)
    out_b = np.empty(m, np.complex128)
    out_p = np.empty(m, np.float64)
    r = 0
    while r < m and rec[r] == 0:
        out_a[r] = alpha
        out_b[r] = beta
        out_p[r] = phase
        r += 1
    for j in range(n):
        x = kappa[j, 0]
        y = kappa[j, 1]
        z = kappa[j, 2]
        hj = h[j]
        nk = math.sqrt(x * x + y * y + z * z)
        t = nk * hj
        c = math.cos(t)
        if t < SMALL_ANGLE:
            sc = hj * (1.0 - t * t / 6.0)
        else:
            sc = math.sin(t) / nk
        am = complex(c, sc * z)
        bm = complex(sc * y, sc * x)
        alpha, beta = (
            am * alpha - bm * beta.conjugate(),
            am * beta + bm * alpha.conjugate(),
        )
        phase += k0[j] * hj
        while r < m and rec[r] == j + 1:
            out_a[r] = alpha
            out_b[r] = beta
            out_p[r] = phase
            r += 1
    return alpha, beta, phase, out_a, out_b, out_p
