"""
Upper bounds on responsivity and the full-modulation length bound.

Integrals over the path use composite Gauss-Legendre quadrature. Each bound
is evaluated on ``grid`` and ``2 * grid`` panels; the finer value is
reported and the difference between the two is the error estimate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import pauli
from .errors import ConsistencyError, InvalidInputError
from .evolution import HamiltonianProfile, propagators_at

GL_ORDER = 8
DEFAULT_PANELS = 32
VARIANCE_TOL = 1e-12


class BoundKind(str, Enum):
    SCHWARTZ = "schwartz"
    PAULI_ARC = "pauli_arc"
    BLOCH_ANGLE = "bloch_angle"
    FULL_MODULATION_LENGTH = "full_modulation_length"
    ZENER_CLOSED_FORM = "zener_closed_form"


@dataclass(frozen=True)
class BoundReport:
    value: float
    kind: BoundKind
    quadrature_error_estimate: float = 0.0

    def __post_init__(self):
        if self.value < 0 or self.quadrature_error_estimate < 0:
            raise ConsistencyError(f"negative bound or error estimate in {self!r}")

    def __float__(self):
        return float(self.value)


def gauss_legendre(a, b, panels, order=GL_ORDER):
    """Nodes and weights of composite Gauss-Legendre on ``panels`` equal panels of [a, b]."""
    if panels < 1:
        raise InvalidInputError("need at least one quadrature panel")
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    centre = 0.5 * (edges[:-1] + edges[1:])
    nodes = (centre[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def path_quadrature(profile: HamiltonianProfile, panels):
    """
    Quadrature nodes in s and weights for integrals of ds over the profile's path.

    If the profile declares a substitution the rule is built in theta and the
    weights absorb ds/dtheta, which removes inverse square-root endpoint
    singularities from the integrand.
    """
    sub = profile.substitution
    if sub is None:
        return gauss_legendre(profile.s0, profile.s1, panels)
    theta, w = gauss_legendre(sub.theta0, sub.theta1, panels)
    s = np.clip(np.asarray(sub.s_of(theta), dtype=float), profile.s0, profile.s1)
    return s, w * np.asarray(sub.ds_dtheta(theta), dtype=float)


def _refined(integral, profile, grid):
    if profile.length == 0:
        return 0.0, 0.0
    coarse = integral(*path_quadrature(profile, grid))
    fine = integral(*path_quadrature(profile, 2 * grid))
    return fine, abs(fine - coarse)


def pauli_arc_bound(K1: HamiltonianProfile, grid=DEFAULT_PANELS) -> BoundReport:
    """Integral of |kappa_1(s)| ds, the two-mode responsivity bound."""

    def integral(s, w):
        _, kappa = K1.evaluate(s)
        return float(np.dot(w, np.linalg.norm(kappa, axis=1)))

    value, err = _refined(integral, K1, grid)
    return BoundReport(value, BoundKind.PAULI_ARC, err)


def _sqrt_variance(H0, K1, psi_i, s, steps):
    """sqrt(<K1_H(s)^2> - <K1_H(s)>^2) in the state psi_i at each s."""
    U = propagators_at(H0, s, steps)
    psi = U @ psi_i
    Kpsi = np.einsum("nij,nj->ni", K1.matrices(s), psi)
    mean = np.einsum("ni,ni->n", psi.conj(), Kpsi).real
    second = np.einsum("ni,ni->n", Kpsi.conj(), Kpsi).real
    var = second - mean**2
    worst = np.min(var + VARIANCE_TOL * np.maximum(1.0, second))
    if worst < 0:
        raise ConsistencyError(f"negative variance {np.min(var):.3e} in Schwartz integrand")
    return np.sqrt(np.maximum(var, 0.0))


def schwartz_bound(H0: HamiltonianProfile, K1: HamiltonianProfile, psi_i, grid=DEFAULT_PANELS,
                   steps=None) -> BoundReport:
    """
    Integral of the standard deviation of K1 in the interaction picture of H0.

    The state is psi_i carried along by H0, so <A_H(s)> = <psi_0(s)|A|psi_0(s)>.
    """
    if (H0.s0, H0.s1) != (K1.s0, K1.s1):
        raise InvalidInputError("H0 and K1 must share the same path")
    psi_i = pauli.as_ket(psi_i)
    if K1.length == 0:
        return BoundReport(0.0, BoundKind.SCHWARTZ, 0.0)
    s_c, w_c = path_quadrature(K1, grid)
    s_f, w_f = path_quadrature(K1, 2 * grid)
    # one propagation sweep serves both rules
    dev = _sqrt_variance(H0, K1, psi_i, np.concatenate([s_c, s_f]), steps)
    coarse = float(np.dot(w_c, dev[: s_c.size]))
    fine = float(np.dot(w_f, dev[s_c.size:]))
    return BoundReport(fine, BoundKind.SCHWARTZ, abs(fine - coarse))


def bloch_angle_bound(K1: HamiltonianProfile, eps, grid=DEFAULT_PANELS) -> BoundReport:
    """2 |eps| times the arc bound: the largest Bloch-sphere angle the perturbation can open."""
    arc = pauli_arc_bound(K1, grid)
    scale = 2.0 * abs(float(eps))
    return BoundReport(scale * arc.value, BoundKind.BLOCH_ANGLE, scale * arc.quadrature_error_estimate)


def full_modulation_min_length(kappa_max) -> float:
    """Shortest path that can swing T over [0, 1] when |eps kappa_1| <= kappa_max."""
    kappa_max = float(kappa_max)
    if not kappa_max > 0 or not math.isfinite(kappa_max):
        raise InvalidInputError("kappa_max must be positive and finite")
    return math.pi / (2.0 * kappa_max)


def zener_closed_form(lam) -> BoundReport:
    """pi * lambda: the arc bound for the circular Zener profile, in closed form."""
    lam = float(lam)
    if lam < 0:
        raise InvalidInputError("lambda must be non-negative")
    return BoundReport(math.pi * lam, BoundKind.ZENER_CLOSED_FORM, 0.0)
