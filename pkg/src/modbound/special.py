"""Bessel function of the first kind, order zero."""
import math

from .errors import InvalidInputError

SERIES_LIMIT = 12.0
MAX_ARGUMENT = 1e4


def _j0_series(x):
    # sum_m (-1)^m (x/2)^(2m) / (m!)^2, summed exactly with fsum
    q = -0.25 * x * x
    term = 1.0
    terms = [term]
    m = 0
    while True:
        m += 1
        term *= q / (m * m)
        terms.append(term)
        if abs(term) < 1e-18 and m > abs(x):
            break
    return math.fsum(terms)


def _j0_hankel(x):
    """
    Hankel asymptotic expansion, truncated at its smallest term.

    J0(x) ~ sqrt(2/(pi x)) [P cos(x - pi/4) - Q sin(x - pi/4)] with
    a_k = prod_{j<=k} (2j-1)^2 / (k! 8^k), P = sum (-1)^k a_2k / x^2k and
    Q = sum (-1)^k a_(2k+1) / x^(2k+1).
    """
    p = 1.0
    q = 0.0
    term = 1.0
    k = 0
    while True:
        k += 1
        nxt = term * (2 * k - 1) ** 2 / (8.0 * k * x)
        if abs(nxt) >= abs(term) or abs(nxt) < 1e-17:
            break
        term = nxt
        # even k = 2m enters P with sign (-1)^m, odd k = 2m+1 enters Q with (-1)^(m+1)
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2:
            q -= sign * term
        else:
            p += sign * term
    chi = x - 0.25 * math.pi
    return math.sqrt(2.0 / (math.pi * x)) * (p * math.cos(chi) - q * math.sin(chi))


def bessel_j0(x: float) -> float:
    """J0(x) for |x| <= 1e4: power series up to |x| = 12, Hankel expansion beyond."""
    x = abs(float(x))
    if not math.isfinite(x) or x > MAX_ARGUMENT:
        raise InvalidInputError(f"bessel_j0 accuracy is only guaranteed for |x| <= {MAX_ARGUMENT:g}")
    if x <= SERIES_LIMIT:
        return _j0_series(x)
    return _j0_hankel(x)
