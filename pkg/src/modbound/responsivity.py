"""
Transmission through the polarizer and its sensitivity to the perturbation.

Includes the density-operator construction of the optimal polarizer, the
second-order check of the fidelity expansion, and the Bloch-sphere angle
between perturbed and unperturbed outputs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from . import pauli
from .bounds import pauli_arc_bound, schwartz_bound
from .errors import DegenerateError, InvalidInputError
from .evolution import PerturbedHamiltonian, default_steps, propagate, propagators_at

DEFAULT_H_EPS = 1e-4
DEFAULT_EXPANSION_GRID = 128
MIN_EXPANSION_GRID = 8
TIE_TOL = 1e-12


@dataclass(frozen=True)
class ModulatorSetup:
    """Perturbed path plus the injected state and the polarizer state."""

    hamiltonian: PerturbedHamiltonian
    psi_i: np.ndarray
    psi_p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "psi_i", pauli.as_ket(self.psi_i))
        object.__setattr__(self, "psi_p", pauli.as_ket(self.psi_p))


@dataclass(frozen=True)
class ResponsivityReport:
    T0: float
    T_eps: float
    dT_deps: float
    eps_used: float
    bound_schwartz: float
    bound_pauli: float
    saturation_ratio: float


class Derivative(NamedTuple):
    value: float
    error: float


class OptimalPolarizer(NamedTuple):
    psi_p: np.ndarray
    responsivity: float


class ExpansionCheck(NamedTuple):
    lhs: float
    rhs: float


def _resolve_steps(hamiltonian: PerturbedHamiltonian, eps, steps):
    return default_steps(hamiltonian.total(eps)) if steps is None else steps


def final_state(hamiltonian: PerturbedHamiltonian, psi_i, eps, steps=None) -> np.ndarray:
    return propagate(hamiltonian.total(eps), psi_i, steps).state


def overlap_probability(psi_p, psi) -> float:
    return min(1.0, abs(np.vdot(psi_p, psi)) ** 2)


def orthogonal_weight(a, b) -> float:
    """
    1 - |<a|b>|^2 for normalized two-component states.

    Computed as the weight of b on the state orthogonal to a, which keeps full
    relative precision when a and b are nearly parallel.
    """
    perp = np.array([-np.conj(a[1]), np.conj(a[0])])
    return abs(np.vdot(perp, b)) ** 2


def transmission(setup: ModulatorSetup, eps, steps=None) -> float:
    """T(eps) = |<psi_p|psi_f(eps)>|^2."""
    psi_f = final_state(setup.hamiltonian, setup.psi_i, eps, steps)
    return overlap_probability(setup.psi_p, psi_f)


def finite_difference(f: Callable[[float], float], x0, h, richardson=True, mode="central") -> Derivative:
    """
    Numerical derivative of a scalar function with an a-posteriori error estimate.

    ``mode`` is "central" or "forward". With ``richardson`` the step-h and
    step-h/2 quotients are combined to cancel the leading truncation term;
    the error estimate is the size of that correction either way.
    """
    if not h > 0:
        raise InvalidInputError("finite-difference step must be positive")
    if mode == "central":
        def quotient(step):
            return (f(x0 + step) - f(x0 - step)) / (2.0 * step)
        order = 2
    elif mode == "forward":
        f0 = f(x0)

        def quotient(step):
            return (f(x0 + step) - f0) / step
        order = 1
    else:
        raise InvalidInputError(f"unknown finite-difference mode {mode!r}")
    d1 = quotient(h)
    d2 = quotient(0.5 * h)
    k = 2.0**order
    correction = (d2 - d1) / (k - 1.0)
    if richardson:
        return Derivative(d2 + correction, abs(correction))
    return Derivative(d1, abs(k * correction))


def responsivity_derivative(setup: ModulatorSetup, eps0=0.0, h_eps=DEFAULT_H_EPS, steps=None,
                            richardson=True, mode="central") -> Derivative:
    """
    dT/deps at eps0 with an error estimate.

    ``mode`` is "central", "forward", or "secant"; the latter is the finite
    quotient [T(eps0) - T(0)] / eps0, i.e. <psi_p|delta_rho|psi_p> / eps.
    The step count is fixed from eps0 and reused for every stencil point.
    """
    if not h_eps > 0:
        raise InvalidInputError("h_eps must be positive")
    steps = _resolve_steps(setup.hamiltonian, eps0, steps)

    def T(eps):
        return transmission(setup, eps, steps)

    if mode == "secant":
        if eps0 == 0:
            raise DegenerateError("the secant quotient needs eps0 != 0")
        return Derivative((T(eps0) - T(0.0)) / eps0, float("nan"))
    return finite_difference(T, eps0, h_eps, richardson=richardson, mode=mode)


def responsivity_fd(setup: ModulatorSetup, eps0=0.0, h_eps=DEFAULT_H_EPS, steps=None,
                    richardson=True, mode="central") -> float:
    return responsivity_derivative(setup, eps0, h_eps, steps, richardson, mode).value


def _output_pair(hamiltonian, psi_i, eps, steps):
    steps = _resolve_steps(hamiltonian, eps, steps)
    return (final_state(hamiltonian, psi_i, eps, steps),
            final_state(hamiltonian, psi_i, 0.0, steps))


def delta_rho(setup: ModulatorSetup, eps, steps=None) -> np.ndarray:
    """rho(eps) - rho(0) for the output states; the zero matrix at eps = 0."""
    if eps == 0:
        return np.zeros((2, 2), dtype=complex)
    a, b = _output_pair(setup.hamiltonian, setup.psi_i, eps, steps)
    return np.outer(a, a.conj()) - np.outer(b, b.conj())


def delta_rho_eigenvalue(setup: ModulatorSetup, eps, steps=None) -> float:
    """sqrt(1 - |<psi_f(eps)|psi_f(0)>|^2); delta_rho has eigenvalues +/- this value."""
    a, b = _output_pair(setup.hamiltonian, setup.psi_i, eps, steps)
    return math.sqrt(orthogonal_weight(b, a))


def optimal_polarizer(hamiltonian: PerturbedHamiltonian, psi_i, eps, steps=None) -> OptimalPolarizer:
    """
    Polarizer state maximizing |<psi_p|delta_rho|psi_p>| / |eps|.

    The two eigenvalues of delta_rho always tie in modulus; the eigenvector of
    the positive one is returned.
    """
    if eps == 0:
        raise DegenerateError("delta_rho vanishes at eps = 0; the optimal polarizer is undefined")
    psi_i = pauli.as_ket(psi_i)
    a, b = _output_pair(hamiltonian, psi_i, eps, steps)
    drho = np.outer(a, a.conj()) - np.outer(b, b.conj())
    vals, vecs = np.linalg.eigh(drho)
    # eigh orders ascending: vals[0] <= 0 <= vals[1] up to rounding
    pick = 0 if abs(vals[0]) > abs(vals[1]) * (1 + TIE_TOL) + TIE_TOL else 1
    psi_p = pauli.fix_phase(vecs[:, pick])
    achieved = abs(np.vdot(psi_p, drho @ psi_p).real) / abs(eps)
    return OptimalPolarizer(psi_p, achieved)


def bloch_angle(hamiltonian: PerturbedHamiltonian, psi_i, eps, steps=None) -> float:
    """Angle in [0, pi] between the Bloch vectors of psi_f(eps) and psi_f(0)."""
    if eps == 0:
        return 0.0
    a, b = _output_pair(hamiltonian, pauli.as_ket(psi_i), eps, steps)
    p, q = pauli.bloch_vector(a), pauli.bloch_vector(b)
    return math.atan2(float(np.linalg.norm(np.cross(p, q))), float(np.dot(p, q)))


def infidelity_expansion_check(setup: ModulatorSetup, eps, steps=None,
                               grid=DEFAULT_EXPANSION_GRID) -> ExpansionCheck:
    """
    Compare 1 - |<psi_i|U^dagger(0) U(eps)|psi_i>|^2 with its second-order expansion.

    lhs comes from direct propagation. rhs is eps^2 times the double integral
    of <dK1_H(s') dK1_H(s'')>, dK1 = K1 - <K1>, on a uniform tensor grid with
    trapezoid weights. The integrand is Hermitian in (s', s''), so only the
    upper triangle is summed and the result is real.
    """
    if int(grid) < MIN_EXPANSION_GRID:
        raise InvalidInputError(f"expansion grid needs at least {MIN_EXPANSION_GRID} points per axis")
    grid = int(grid)
    H = setup.hamiltonian
    base, K1 = H.base, H.perturbation
    steps = _resolve_steps(H, eps, steps)
    a, b = _output_pair(H, setup.psi_i, eps, steps)
    lhs = orthogonal_weight(b, a)
    if base.length == 0:
        return ExpansionCheck(lhs, 0.0)

    s = np.linspace(base.s0, base.s1, grid)
    w = np.full(grid, (base.s1 - base.s0) / (grid - 1))
    w[0] *= 0.5
    w[-1] *= 0.5
    U = propagators_at(base, s, steps)
    psi0 = U @ setup.psi_i
    Kpsi = np.einsum("nij,nj->ni", K1.matrices(s), psi0)
    mean = np.einsum("ni,ni->n", psi0.conj(), Kpsi)
    dev = Kpsi - mean[:, None] * psi0
    # back to the interaction picture: v(s) = u0^dagger(s) dK1(s) u0(s) psi_i
    v = np.einsum("nji,nj->ni", U.conj(), dev)
    gram = v.conj() @ v.T
    weighted = w[:, None] * w[None, :] * gram
    upper = np.triu(weighted, k=1)
    double_integral = float(np.trace(weighted).real + 2.0 * upper.sum().real)
    return ExpansionCheck(lhs, eps * eps * double_integral)


def responsivity_report(setup: ModulatorSetup, eps, steps=None, h_eps=DEFAULT_H_EPS,
                        grid=None) -> ResponsivityReport:
    """
    T, dT/deps at ``eps`` and both bounds, evaluated at the same operating point.

    The Schwartz bound uses K0 + eps K1 as the unperturbed Hamiltonian, which
    is exact for the linear response about ``eps``.
    """
    H = setup.hamiltonian
    steps = _resolve_steps(H, eps, steps)
    quad = {} if grid is None else {"grid": grid}
    T0 = transmission(setup, 0.0, steps)
    T_eps = transmission(setup, eps, steps)
    d = responsivity_fd(setup, eps, h_eps, steps)
    sb = schwartz_bound(H.total(eps), H.perturbation, setup.psi_i, steps=steps, **quad).value
    pb = pauli_arc_bound(H.perturbation, **quad).value
    ratio = abs(d) / pb if pb > 0 else 0.0
    return ResponsivityReport(T0, T_eps, d, float(eps), sb, pb, ratio)
