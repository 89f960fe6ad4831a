"""
Two-mode linear algebra in the Pauli basis.

States are complex arrays of shape (2,), Pauli vectors are real arrays of
shape (3,) and operators are complex arrays of shape (2, 2). The helpers
``ket``, ``hermitian`` and ``unitary`` validate their input and return plain
numpy arrays so the rest of the package can stay array-native.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import InvalidInputError

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10
NORM_TOL = 1e-12
# below this value of |kappa| h the sin(x)/x factor is taken from its series
SMALL_ANGLE = 1e-8
PHASE_CUTOFF = 1e-8

IDENTITY = np.eye(2, dtype=complex)
SIGMA = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)
SIGMA.flags.writeable = False


def ket(a0, a1, normalize=True):
    """Build a two-component state, normalized by default."""
    psi = np.array([a0, a1], dtype=complex)
    if not np.all(np.isfinite(psi)):
        raise InvalidInputError("ket amplitudes must be finite")
    norm = np.linalg.norm(psi)
    if normalize:
        if norm == 0:
            raise InvalidInputError("cannot normalize the zero vector")
        psi = psi / norm
    return psi


def as_ket(psi, tol=NORM_TOL) -> np.ndarray:
    """Validate an existing state vector (shape and unit norm)."""
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (2,):
        raise InvalidInputError(f"a ket has shape (2,), got {psi.shape}")
    if abs(np.linalg.norm(psi) - 1.0) > tol:
        raise InvalidInputError("ket is not normalized")
    return psi


def pauli_vector(x1, x2, x3) -> np.ndarray:
    v = np.array([x1, x2, x3], dtype=float)
    if not np.all(np.isfinite(v)):
        raise InvalidInputError("Pauli vector components must be finite")
    return v


def is_hermitian(m, tol=HERMITIAN_TOL) -> bool:
    m = np.asarray(m)
    return bool(np.max(np.abs(m - m.conj().T)) <= tol)


def unitarity_residual(m) -> float:
    """max |U^dagger U - I| entrywise."""
    m = np.asarray(m)
    return float(np.max(np.abs(m.conj().T @ m - IDENTITY)))


def is_unitary(m, tol=UNITARY_TOL) -> bool:
    return unitarity_residual(m) <= tol


def hermitian(m, tol=HERMITIAN_TOL) -> np.ndarray:
    """Return ``m`` as a complex 2x2 array after checking M = M^dagger."""
    m = np.asarray(m, dtype=complex)
    if m.shape != (2, 2):
        raise InvalidInputError(f"expected a 2x2 matrix, got shape {m.shape}")
    if not is_hermitian(m, tol):
        raise InvalidInputError("matrix is not Hermitian")
    return m


def unitary(m, tol=UNITARY_TOL) -> np.ndarray:
    """Return ``m`` as a complex 2x2 array after checking U^dagger U = I."""
    m = np.asarray(m, dtype=complex)
    if m.shape != (2, 2):
        raise InvalidInputError(f"expected a 2x2 matrix, got shape {m.shape}")
    if not is_unitary(m, tol):
        raise InvalidInputError("matrix is not unitary")
    return m


def pauli_matrix(index: int) -> np.ndarray:
    """Pauli matrix sigma_1, sigma_2 or sigma_3."""
    if index not in (1, 2, 3):
        raise InvalidInputError(f"Pauli index must be 1, 2 or 3, got {index!r}")
    return SIGMA[index - 1].copy()


def dot_sigma(v) -> np.ndarray:
    """v . sigma for a real 3-vector ``v``."""
    x, y, z = np.asarray(v, dtype=float)
    return np.array([[z, x - 1j * y], [x + 1j * y, -z]], dtype=complex)


def generator(kappa, k0=0.0) -> np.ndarray:
    """Hermitian generator k0 I + kappa . sigma."""
    return k0 * IDENTITY + dot_sigma(kappa)


def decompose(m):
    """Split a Hermitian 2x2 matrix into (k0, kappa) with m = k0 I + kappa . sigma."""
    m = hermitian(m)
    k0 = 0.5 * (m[0, 0] + m[1, 1]).real
    kappa = np.array([m[1, 0].real, m[1, 0].imag, 0.5 * (m[0, 0] - m[1, 1]).real])
    return k0, kappa


def fix_phase(psi) -> np.ndarray:
    """Rotate the global phase so the first component with modulus > 1e-8 is real positive."""
    psi = np.asarray(psi, dtype=complex)
    for a in psi:
        if abs(a) > PHASE_CUTOFF:
            return psi * (abs(a) / a)
    return psi


def eigenket(u_hat, sign: int) -> np.ndarray:
    """Normalized eigenvector of sigma . u_hat with eigenvalue ``sign`` (+1 or -1)."""
    if sign not in (1, -1):
        raise InvalidInputError("sign must be +1 or -1")
    x, y, z = np.asarray(u_hat, dtype=float)
    if abs(math.sqrt(x * x + y * y + z * z) - 1.0) > 1e-10:
        raise InvalidInputError("u_hat must be a unit vector")
    # two closed-form candidates; each degenerates at one pole
    first = np.array([z + sign, x + 1j * y])
    second = np.array([x - 1j * y, sign - z])
    v = first if np.linalg.norm(first) >= np.linalg.norm(second) else second
    return fix_phase(v / np.linalg.norm(v))


def bloch_vector(psi) -> np.ndarray:
    """Expectation values (<sigma_1>, <sigma_2>, <sigma_3>) of a state."""
    a0, a1 = np.asarray(psi, dtype=complex)
    c = np.conj(a0) * a1
    return np.array([2 * c.real, 2 * c.imag, abs(a0) ** 2 - abs(a1) ** 2])


def pauli_exp(kappa, k0=0.0, h=1.0) -> np.ndarray:
    """
    Closed-form exp(i (k0 I + kappa . sigma) h).

    Equals e^{i k0 h} [cos(|kappa| h) I + i sin(|kappa| h) kappa_hat . sigma].
    """
    kappa = np.asarray(kappa, dtype=float)
    if h < 0:
        raise InvalidInputError("step length h must be non-negative")
    nk = float(np.linalg.norm(kappa))
    t = nk * h
    if t < SMALL_ANGLE:
        sinc_h = h * (1.0 - t * t / 6.0)
    else:
        sinc_h = math.sin(t) / nk
    u = math.cos(t) * IDENTITY + 1j * sinc_h * dot_sigma(kappa)
    if k0 != 0.0:
        u = u * complex(math.cos(k0 * h), math.sin(k0 * h))
    return u
