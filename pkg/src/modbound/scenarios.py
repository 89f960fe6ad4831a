"""
Ready-made modulators.

``LinearBirefringenceScenario``: circularly polarized light, uniform linear
birefringence and a linear polarizer; T(eps) has a closed form.

``ZenerScenario``: kappa(s) traces a half circle of radius gamma*lambda in the
(2, 3) plane, so lambda tunes the device between the non-adiabatic and the
adiabatic regime. T is the Zener transition probability.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial

import numpy as np

from . import pauli
from .bounds import pauli_arc_bound, schwartz_bound
from .errors import InvalidInputError
from .evolution import (
    MIN_STEPS,
    STEPS_PER_ARC,
    HamiltonianProfile,
    PerturbedHamiltonian,
    Substitution,
    constant_profile,
    propagate,
    zero_profile,
)
from .responsivity import ModulatorSetup, ResponsivityReport, finite_difference, overlap_probability
from .special import bessel_j0

X_HAT = np.array([1.0, 0.0, 0.0])
Y_HAT = np.array([0.0, 1.0, 0.0])
Z_HAT = np.array([0.0, 0.0, 1.0])

DEFAULT_FD_H = 5e-4
DEFAULT_LAMBDA_GRID = np.linspace(0.0, 5.0, 501)
FIGURE1_LAMBDA = 5.0
FIGURE1_SAMPLES = 400


def example1_transmission_analytic(k1, s1, eps) -> float:
    """sin^2(eps k1 s1 / 2 - pi/4)."""
    return math.sin(0.5 * eps * k1 * s1 - 0.25 * math.pi) ** 2


@dataclass(frozen=True)
class LinearBirefringenceScenario:
    """
    K0 = 0, K1 = (k1/2) sigma_1 on [s0, s1]; |+;y> at s = 0, polarizer |+;z>.

    When s0 != 0 the injected state is |+;y> carried from s = 0 to s0, so the
    closed form for T depends on s1 only.
    """

    k1: float = 1.0
    s0: float = 0.0
    s1: float = 2.0

    @classmethod
    def full_modulation(cls, k1, eps) -> "LinearBirefringenceScenario":
        """Path [-pi/(2 eps k1), pi/(2 eps k1)], over which T sweeps from 1 to 0."""
        if eps * k1 == 0:
            raise InvalidInputError("full modulation needs eps * k1 != 0")
        half = math.pi / (2.0 * abs(eps * k1))
        return cls(k1, -half, half)

    @property
    def kappa1(self) -> np.ndarray:
        return np.array([0.5 * self.k1, 0.0, 0.0])

    def hamiltonian(self, eps=0.0) -> PerturbedHamiltonian:
        return PerturbedHamiltonian(
            zero_profile(self.s0, self.s1),
            constant_profile(self.s0, self.s1, self.kappa1),
            float(eps),
        )

    def initial_state(self, eps=0.0) -> np.ndarray:
        psi = pauli.eigenket(Y_HAT, +1)
        if self.s0 >= 0:
            return pauli.pauli_exp(eps * self.kappa1, 0.0, self.s0) @ psi
        return pauli.pauli_exp(-eps * self.kappa1, 0.0, -self.s0) @ psi

    def setup(self, eps_ref=0.0) -> ModulatorSetup:
        return ModulatorSetup(self.hamiltonian(eps_ref), self.initial_state(eps_ref),
                              pauli.eigenket(Z_HAT, +1))

    def transmission_analytic(self, eps) -> float:
        return example1_transmission_analytic(self.k1, self.s1, eps)

    def path_transmission(self, eps, samples=FIGURE1_SAMPLES, steps=None):
        """(s, T(s)) with the polarizer placed at each sample point along the path."""
        H = self.hamiltonian(eps).total()
        steps = max(samples - 1, MIN_STEPS) if steps is None else steps
        traj = propagate(H, self.initial_state(eps), steps, record=samples).trajectory
        psi_p = pauli.eigenket(Z_HAT, +1)
        return traj.s, np.array([overlap_probability(psi_p, p) for p in traj.states])


@dataclass(frozen=True)
class ZenerScenario:
    """kappa(s) = gamma (0, sqrt(lam^2 - (gamma s)^2), gamma s) on [-lam/gamma, lam/gamma]."""

    gamma: float = 1.0
    lam: float = 1.0

    def __post_init__(self):
        if not self.gamma > 0:
            raise InvalidInputError("gamma must be positive")
        if not self.lam >= 0:
            raise InvalidInputError("lambda must be non-negative")

    @property
    def s0(self) -> float:
        return -self.lam / self.gamma

    @property
    def s1(self) -> float:
        return self.lam / self.gamma

    @property
    def psi_i(self) -> np.ndarray:
        return pauli.eigenket(Z_HAT, -1)

    psi_p = psi_i

    def _substitution(self) -> Substitution:
        r = self.lam / self.gamma
        return Substitution(-0.5 * math.pi, 0.5 * math.pi,
                            lambda t: r * np.sin(t), lambda t: r * np.cos(t))

    def _radicand(self, s):
        gs = self.gamma * s
        # rounding can push |gamma s| a hair past lambda at the endpoints
        return np.maximum(self.lam**2 - gs * gs, 0.0)

    def profile(self) -> HamiltonianProfile:
        g = self.gamma

        def kappa(s):
            out = np.empty((s.shape[0], 3))
            out[:, 0] = 0.0
            out[:, 1] = g * np.sqrt(self._radicand(s))
            out[:, 2] = g * g * s
            return out

        return HamiltonianProfile(self.s0, self.s1, kappa, substitution=self._substitution())

    def lambda_derivative(self) -> HamiltonianProfile:
        """d kappa / d lambda at fixed s; inverse square-root singular at both ends."""
        g, lam = self.gamma, self.lam

        def kappa(s):
            out = np.zeros((s.shape[0], 3))
            with np.errstate(divide="ignore"):
                out[:, 1] = g * lam / np.sqrt(self._radicand(s))
            return out

        return HamiltonianProfile(self.s0, self.s1, kappa, piecewise_smooth=False,
                                  substitution=self._substitution())

    def default_steps(self) -> int:
        # the arc integral of |kappa| is exactly 2 lam^2
        return max(MIN_STEPS, int(math.ceil(STEPS_PER_ARC * 2.0 * self.lam**2)))

    def transmission(self, steps=None) -> float:
        steps = self.default_steps() if steps is None else steps
        psi_f = propagate(self.profile(), self.psi_i, steps).state
        return overlap_probability(self.psi_p, psi_f)

    def trajectory(self, samples=FIGURE1_SAMPLES, steps=None):
        """(s, Bloch vectors p(s), kappa(s)/|kappa(s)|) along the path."""
        steps = self.default_steps() if steps is None else steps
        H = self.profile()
        traj = propagate(H, self.psi_i, steps, record=samples).trajectory
        _, kappa = H.evaluate(traj.s)
        norm = np.linalg.norm(kappa, axis=1, keepdims=True)
        khat = np.divide(kappa, norm, out=np.zeros_like(kappa), where=norm > 0)
        return traj.s, traj.bloch, khat


def zener_transmission(lam, gamma=1.0, steps=None) -> float:
    """T(lambda); even in lambda, so negative arguments are folded onto |lambda|."""
    return ZenerScenario(gamma, abs(float(lam))).transmission(steps)


def zener_T_approx(lam) -> float:
    """Lowest-order Zener transition probability (pi^2 / 4) J0(2 lam^2)^2."""
    return 0.25 * math.pi**2 * bessel_j0(2.0 * lam * lam) ** 2


def zener_derivative(lam, gamma=1.0, steps=None, fd_h=DEFAULT_FD_H):
    """dT/dlambda by Richardson-refined central differences with a fixed step count."""
    steps = ZenerScenario(gamma, lam).default_steps() if steps is None else steps
    return finite_difference(partial(zener_transmission, gamma=gamma, steps=steps), lam, fd_h)


@dataclass(frozen=True)
class SweepRecord:
    lam: float
    T: float
    dT_dlambda: float
    bound_pi_lambda: float
    T_bessel_approx: float
    saturation_ratio: float


def zener_point(lam, gamma=1.0, steps=None, fd_h=DEFAULT_FD_H) -> SweepRecord:
    lam = float(lam)
    steps = ZenerScenario(gamma, lam).default_steps() if steps is None else steps
    T = zener_transmission(lam, gamma, steps)
    d = zener_derivative(lam, gamma, steps, fd_h).value
    bound = math.pi * lam
    ratio = abs(d) / bound if lam > 0 else 0.0
    return SweepRecord(lam, T, d, bound, zener_T_approx(lam), ratio)


def _check_grid(grid):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise InvalidInputError("lambda grid must be a non-empty 1-d sequence")
    if not np.all(np.isfinite(grid)) or np.any(grid < 0):
        raise InvalidInputError("lambda grid values must be finite and non-negative")
    if np.any(np.diff(grid) <= 0):
        raise InvalidInputError("lambda grid must be strictly increasing")
    return grid


def workers_from_env(default=1) -> int:
    raw = os.environ.get("MODBOUND_WORKERS")
    if raw is None or raw == "":
        return default
    try:
        n = int(raw)
    except ValueError:
        raise InvalidInputError(f"MODBOUND_WORKERS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise InvalidInputError(f"MODBOUND_WORKERS must be a positive integer, got {raw!r}")
    return n


def zener_sweep(gamma=1.0, lambda_grid=DEFAULT_LAMBDA_GRID, steps=None, fd_h=DEFAULT_FD_H,
                workers=1) -> list:
    """
    One SweepRecord per lambda. Points are independent; with workers > 1
    they are spread over a process pool and returned in grid order.
    """
    grid = _check_grid(lambda_grid)
    if not fd_h > 0:
        raise InvalidInputError("fd_h must be positive")
    point = partial(zener_point, gamma=gamma, steps=steps, fd_h=fd_h)
    if workers is None or workers <= 1:
        return [point(x) for x in grid]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(point, grid.tolist(), chunksize=max(1, grid.size // (8 * workers))))


def zener_report(lam, gamma=1.0, steps=None, fd_h=DEFAULT_FD_H, grid=None) -> ResponsivityReport:
    """
    Responsivity report with lambda as the control parameter.

    T0 and T_eps both hold T(lambda); K1 is d kappa / d lambda at fixed s.
    """
    sc = ZenerScenario(gamma, float(lam))
    steps = sc.default_steps() if steps is None else steps
    quad = {} if grid is None else {"grid": grid}
    T = sc.transmission(steps)
    d = zener_derivative(sc.lam, gamma, steps, fd_h).value
    K1 = sc.lambda_derivative()
    sb = schwartz_bound(sc.profile(), K1, sc.psi_i, steps=steps, **quad).value
    pb = pauli_arc_bound(K1, **quad).value
    ratio = abs(d) / pb if pb > 0 else 0.0
    return ResponsivityReport(T, T, d, sc.lam, sb, pb, ratio)


def random_ket(rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=2) + 1j * rng.normal(size=2)
    return z / np.linalg.norm(z)


def _fourier_vector(rng, s0, s1, modes, amplitude):
    L = s1 - s0
    amp = rng.normal(scale=amplitude / math.sqrt(modes), size=(3, modes))
    phase = rng.uniform(0, 2 * math.pi, size=(3, modes))
    freq = 2 * math.pi * np.arange(modes) / L

    def kappa(s):
        arg = freq[None, None, :] * (s[:, None, None] - s0) + phase[None]
        return (amp[None] * np.cos(arg)).sum(axis=2)

    return kappa


def random_hamiltonian(rng: np.random.Generator, s0=0.0, s1=1.0, modes=3, base_amplitude=1.5,
                       pert_amplitude=1.0, scalar_part=True) -> PerturbedHamiltonian:
    """Smooth random K0 and K1 built from a few Fourier modes of random amplitude and phase."""
    k0 = None
    if scalar_part:
        c = rng.normal(size=2)
        k0 = lambda s: c[0] + c[1] * np.sin(2 * math.pi * (s - s0) / (s1 - s0))  # noqa: E731
    base = HamiltonianProfile(s0, s1, _fourier_vector(rng, s0, s1, modes, base_amplitude), k0)
    pert = HamiltonianProfile(s0, s1, _fourier_vector(rng, s0, s1, modes, pert_amplitude))
    return PerturbedHamiltonian(base, pert, 0.0)


def random_setup(rng: np.random.Generator, **kwargs) -> ModulatorSetup:
    return ModulatorSetup(random_hamiltonian(rng, **kwargs), random_ket(rng), random_ket(rng))
