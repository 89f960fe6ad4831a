"""
Path-dependent Hamiltonians and their propagation.

The field obeys d|psi>/ds = i K(s) |psi> with K(s) = k0(s) I + kappa(s) . sigma.
Integration uses the midpoint exponential: each of ``steps`` equal intervals
contributes exp(i K(s_mid) h) in closed form, so every propagator is unitary
up to rounding regardless of step size.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, NamedTuple, Optional

import numpy as np

from . import pauli
from ._kernel import su2_chain
from .errors import EvaluationError, InvalidInputError

STEPS_PER_ARC = 20_000
MIN_STEPS = 1_000
CHUNK = 1 << 18
ARC_PROBE_POINTS = 1_000
RANGE_TOL = 1e-12


@dataclass(frozen=True)
class Substitution:
    """
    Change of variables s = s_of(theta) over [theta0, theta1].

    Profiles whose integrands are singular at the endpoints (inverse square
    root behaviour) declare one so quadratures can integrate a smooth function.
    """

    theta0: float
    theta1: float
    s_of: Callable[[np.ndarray], np.ndarray]
    ds_dtheta: Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class HamiltonianProfile:
    """
    K(s) = k0(s) I + kappa(s) . sigma on [s0, s1].

    ``kappa`` maps an array of n path coordinates to an (n, 3) array; ``k0``
    (optional) maps it to an (n,) array. Both are evaluated lazily at the
    points the integrator or quadrature asks for.
    """

    s0: float
    s1: float
    kappa: Callable[[np.ndarray], np.ndarray]
    k0: Optional[Callable[[np.ndarray], np.ndarray]] = None
    piecewise_smooth: bool = True
    substitution: Optional[Substitution] = None

    def __post_init__(self):
        if not (math.isfinite(self.s0) and math.isfinite(self.s1)):
            raise InvalidInputError("profile endpoints must be finite")
        # a zero-length path is allowed; it propagates as the identity
        if self.s1 < self.s0:
            raise InvalidInputError(f"need s1 >= s0, got [{self.s0}, {self.s1}]")

    @property
    def length(self) -> float:
        return self.s1 - self.s0

    def evaluate(self, s):
        """Return (k0, kappa) at the points ``s`` as arrays of shape (n,) and (n, 3)."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        kappa = np.asarray(self.kappa(s), dtype=float).reshape(s.shape[0], 3)
        if self.k0 is None:
            k0 = np.zeros(s.shape[0])
        else:
            k0 = np.broadcast_to(np.asarray(self.k0(s), dtype=float), s.shape)
        # a single sum is much cheaper than elementwise isfinite on long grids
        if not math.isfinite(float(kappa.sum()) + float(k0.sum())):
            bad = ~(np.isfinite(kappa).all(axis=1) & np.isfinite(k0))
            if bad.any():
                where = float(s[np.argmax(bad)])
                raise EvaluationError(f"profile is not finite at s = {where!r}", s=where)
        return k0, kappa

    def generator_at(self, s) -> np.ndarray:
        k0, kappa = self.evaluate([s])
        return pauli.generator(kappa[0], k0[0])

    def matrices(self, s) -> np.ndarray:
        """K(s) as an (n, 2, 2) array."""
        k0, kappa = self.evaluate(s)
        out = np.einsum("n,ij->nij", k0.astype(complex), pauli.IDENTITY)
        out += np.einsum("nk,kij->nij", kappa.astype(complex), pauli.SIGMA)
        return out

    def contains(self, s) -> bool:
        return self.s0 - RANGE_TOL <= s <= self.s1 + RANGE_TOL


def constant_profile(s0, s1, kappa, k0=0.0) -> HamiltonianProfile:
    kappa = pauli.pauli_vector(*kappa)
    k0 = float(k0)
    return HamiltonianProfile(
        s0,
        s1,
        kappa=lambda s: np.broadcast_to(kappa, (len(s), 3)),
        k0=None if k0 == 0.0 else lambda s: np.full(len(s), k0),
    )


def zero_profile(s0, s1) -> HamiltonianProfile:
    return constant_profile(s0, s1, (0.0, 0.0, 0.0))


def tabulated_profile(s, kappa, k0=None) -> HamiltonianProfile:
    """Piecewise-linear interpolation of tabulated samples (s strictly increasing)."""
    s = np.asarray(s, dtype=float)
    kappa = np.asarray(kappa, dtype=float)
    if s.ndim != 1 or s.size < 2 or np.any(np.diff(s) <= 0):
        raise InvalidInputError("tabulated s must be strictly increasing with >= 2 points")
    if kappa.shape != (s.size, 3):
        raise InvalidInputError("tabulated kappa must have shape (n, 3)")

    def kappa_fn(x):
        return np.stack([np.interp(x, s, kappa[:, i]) for i in range(3)], axis=1)

    k0_fn = None
    if k0 is not None:
        k0 = np.asarray(k0, dtype=float)
        k0_fn = lambda x: np.interp(x, s, k0)  # noqa: E731
    return HamiltonianProfile(float(s[0]), float(s[-1]), kappa_fn, k0_fn)


def _sum_profiles(a: HamiltonianProfile, b: HamiltonianProfile, eps: float) -> HamiltonianProfile:
    def kappa(s):
        return np.asarray(a.kappa(s), dtype=float) + eps * np.asarray(b.kappa(s), dtype=float)

    k0 = None
    if a.k0 is not None or b.k0 is not None:
        def k0(s):
            out = np.zeros(len(s))
            if a.k0 is not None:
                out = out + a.k0(s)
            if b.k0 is not None:
                out = out + eps * np.asarray(b.k0(s))
            return out

    return HamiltonianProfile(a.s0, a.s1, kappa, k0, a.piecewise_smooth and b.piecewise_smooth)


@dataclass(frozen=True)
class PerturbedHamiltonian:
    """K(s) = K0(s) + epsilon K1(s) with K0 = ``base`` and K1 = ``perturbation``."""

    base: HamiltonianProfile
    perturbation: HamiltonianProfile
    epsilon: float = 0.0

    def __post_init__(self):
        if (self.base.s0, self.base.s1) != (self.perturbation.s0, self.perturbation.s1):
            raise InvalidInputError("base and perturbation must share the same [s0, s1]")

    def with_epsilon(self, eps) -> "PerturbedHamiltonian":
        return PerturbedHamiltonian(self.base, self.perturbation, float(eps))

    def total(self, eps=None) -> HamiltonianProfile:
        """The full profile K0 + eps K1 (``self.epsilon`` when eps is omitted)."""
        eps = self.epsilon if eps is None else float(eps)
        if eps == 0.0:
            return self.base
        return _sum_profiles(self.base, self.perturbation, eps)


@dataclass(frozen=True)
class Trajectory:
    """Samples of the state and its Bloch vector along the path."""

    s: np.ndarray
    states: np.ndarray
    bloch: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "bloch", np.array([pauli.bloch_vector(p) for p in self.states]))

    def __len__(self):
        return len(self.s)

    def __iter__(self) -> Iterator[tuple]:
        return iter(zip(self.s, self.states, self.bloch))


class Propagation(NamedTuple):
    state: np.ndarray
    propagator: np.ndarray
    trajectory: Optional[Trajectory]


def arc_length(H: HamiltonianProfile, points=ARC_PROBE_POINTS) -> float:
    """Midpoint estimate of the dimensionless arc integral of |kappa| ds."""
    if H.length == 0:
        return 0.0
    h = H.length / points
    _, kappa = H.evaluate(H.s0 + (np.arange(points) + 0.5) * h)
    return float(np.linalg.norm(kappa, axis=1).sum() * h)


def default_steps(H: HamiltonianProfile) -> int:
    """STEPS_PER_ARC steps per unit of arc, never fewer than MIN_STEPS."""
    return max(MIN_STEPS, int(math.ceil(STEPS_PER_ARC * arc_length(H))))


def _check_steps(steps) -> int:
    if isinstance(steps, bool) or int(steps) != steps or steps < 1:
        raise InvalidInputError(f"steps must be a positive integer, got {steps!r}")
    return int(steps)


def _to_matrices(alpha, beta, phase) -> np.ndarray:
    alpha = np.atleast_1d(alpha)
    beta = np.atleast_1d(beta)
    ph = np.exp(1j * np.atleast_1d(phase))
    out = np.empty((alpha.shape[0], 2, 2), dtype=complex)
    out[:, 0, 0] = alpha
    out[:, 0, 1] = beta
    out[:, 1, 0] = -np.conj(beta)
    out[:, 1, 1] = np.conj(alpha)
    return out * ph[:, None, None]


def _chain(H: HamiltonianProfile, edges: np.ndarray, record: np.ndarray) -> np.ndarray:
    """
    Propagators from edges[0] to edges[k] for every k in ``record``.

    ``edges`` is the non-decreasing list of step boundaries; each step uses
    the generator at its midpoint.
    """
    n = edges.shape[0] - 1
    record = np.asarray(record, dtype=np.int64)
    alpha, beta, phase = 1.0 + 0.0j, 0.0j, 0.0
    ra = np.empty(record.shape[0], complex)
    rb = np.empty(record.shape[0], complex)
    rp = np.empty(record.shape[0])
    order = np.argsort(record, kind="stable")
    rec_sorted = record[order]
    start = 0
    while True:
        stop = min(start + CHUNK, n)
        lo = 0 if start == 0 else start + 1
        sel = (rec_sorted >= lo) & (rec_sorted <= stop)
        e = edges[start:stop + 1]
        if stop > start:
            mid = 0.5 * (e[:-1] + e[1:])
            k0, kappa = H.evaluate(mid)
            h = np.diff(e)
        else:
            k0, kappa, h = np.zeros(0), np.zeros((0, 3)), np.zeros(0)
        alpha, beta, phase, a, b, p = su2_chain(
            np.ascontiguousarray(kappa), np.ascontiguousarray(k0, dtype=float), h,
            alpha, beta, phase, rec_sorted[sel] - start,
        )
        idx = order[sel]
        ra[idx], rb[idx], rp[idx] = a, b, p
        if stop >= n:
            break
        start = stop
    return _to_matrices(ra, rb, rp)


def propagate(H: HamiltonianProfile, psi_i, steps=None, record=None) -> Propagation:
    """
    Integrate from s0 to s1 starting in ``psi_i``.

    Returns (final state, propagator U(s1, s0), trajectory or None). With
    ``record`` = m the trajectory holds m samples on step boundaries as
    close to equally spaced as the step grid allows, endpoints included.
    """
    psi_i = pauli.as_ket(psi_i)
    steps = default_steps(H) if steps is None else _check_steps(steps)
    if H.length == 0:
        U = pauli.IDENTITY.copy()
        traj = None
        if record is not None:
            traj = Trajectory(np.full(int(record), H.s0), np.tile(psi_i, (int(record), 1)))
        return Propagation(psi_i.copy(), U, traj)
    h = H.length / steps
    edges = H.s0 + np.arange(steps + 1) * h
    edges[-1] = H.s1
    if record is None:
        U = _chain(H, edges, np.array([steps]))[0]
        return Propagation(U @ psi_i, U, None)
    record = int(record)
    if record < 2 or record - 1 > steps:
        raise InvalidInputError("record must satisfy 2 <= record <= steps + 1")
    idx = np.rint(np.arange(record) * (steps / (record - 1))).astype(np.int64)
    Us = _chain(H, edges, idx)
    states = Us @ psi_i
    return Propagation(states[-1], Us[-1], Trajectory(edges[idx], states))


def _check_range(H, *points):
    for s in points:
        if not H.contains(s):
            raise InvalidInputError(f"s = {s!r} is outside [{H.s0}, {H.s1}]")


def propagator_between(H: HamiltonianProfile, s_a, s_b, steps=None) -> np.ndarray:
    """u(s_b, s_a) with ``steps`` equal midpoint steps on [s_a, s_b]."""
    _check_range(H, s_a, s_b)
    if s_b < s_a:
        raise InvalidInputError("need s_a <= s_b")
    if s_a == s_b:
        return pauli.IDENTITY.copy()
    steps = default_steps(H) if steps is None else _check_steps(steps)
    edges = s_a + np.arange(steps + 1) * ((s_b - s_a) / steps)
    edges[-1] = s_b
    return _chain(H, edges, np.array([steps]))[0]


def propagators_at(H: HamiltonianProfile, points, steps=None) -> np.ndarray:
    """
    u(s, s0) for every s in ``points``, as an (n, 2, 2) array.

    A single sweep covers all points; each gap between consecutive points
    gets a share of ``steps`` proportional to its length (at least one).
    """
    points = np.asarray(points, dtype=float)
    _check_range(H, *points)
    steps = default_steps(H) if steps is None else _check_steps(steps)
    order = np.argsort(points, kind="stable")
    sp = np.clip(points[order], H.s0, H.s1)
    knots = np.concatenate([[H.s0], sp])
    segments = [knots[:1]]
    record = np.empty(sp.shape[0], dtype=np.int64)
    count = 0
    for i, (a, b) in enumerate(zip(knots[:-1], knots[1:])):
        if b > a:
            n = max(1, int(round(steps * (b - a) / H.length)))
            seg = a + np.arange(1, n + 1) * ((b - a) / n)
            seg[-1] = b
            segments.append(seg)
            count += n
        record[i] = count
    edges = np.concatenate(segments)
    Us = _chain(H, edges, record)
    out = np.empty_like(Us)
    out[order] = Us
    return out


def interaction_picture(H0: HamiltonianProfile, A, s, steps=None) -> np.ndarray:
    """A_H(s) = u0^dagger(s, s0) A u0(s, s0)."""
    A = pauli.hermitian(A, tol=1e-10)
    u = propagator_between(H0, H0.s0, s, steps)
    return u.conj().T @ A @ u
