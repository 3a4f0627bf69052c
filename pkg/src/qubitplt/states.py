"""Two-qubit density matrices: named families, product states, random ensembles.

Basis convention, used everywhere in the package: ``|a b> = |2a + b>`` with
``|0> = |up>``, so ``sigma_z |0> = +|0>``. Density matrices are plain
``complex128`` arrays of shape ``(4, 4)``; normalization is optional and
the random ensembles return unnormalized matrices on purpose.

Random generators take an explicit integer seed and use numpy's PCG64
bit generator, which is reproducible across platforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonHermitianInput, NonUnitaryInput, NotADensityMatrix, ParamOutOfRange
from .linalg import hermitian_eigenvalues

HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-10
BLOCH_SLACK = 1e-12
UNITARY_TOL = 1e-10
DEFAULT_MIXTURE_TERMS = 4

IDENTITY = np.eye(2, dtype=np.complex128)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
PAULIS = np.stack([IDENTITY, SIGMA_X, SIGMA_Y, SIGMA_Z])

UP = np.array([1, 0], dtype=np.complex128)
DOWN = np.array([0, 1], dtype=np.complex128)
SINGLET = (np.kron(UP, DOWN) - np.kron(DOWN, UP)) / np.sqrt(2.0)


def projector(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=np.complex128)
    return np.outer(psi, psi.conj())


def validate_density(rho, herm_tol: float = HERMITIAN_TOL, psd_tol: float = PSD_TOL) -> np.ndarray:
    """Return ``rho`` as a 4x4 complex array after checking it is a state.

    Checks, in order: shape and finiteness, Hermiticity
    (``max|rho - rho^H| <= herm_tol * max|rho|``), positive trace, and
    positivity (smallest eigenvalue ``>= -psd_tol * Tr rho``).

    Raises
    ------
    NonHermitianInput, NotADensityMatrix
        With ``residual`` set to the violating quantity.
    """
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.shape != (4, 4):
        raise NotADensityMatrix(f"expected a 4x4 matrix, got shape {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise NotADensityMatrix("density matrix has non-finite entries")
    scale = np.abs(rho).max()
    asym = np.abs(rho - rho.conj().T).max()
    if asym > herm_tol * scale:
        raise NonHermitianInput(f"density matrix is not Hermitian: max|rho - rho^H| = {asym:.3e}", residual=float(asym))
    trace = float(np.trace(rho).real)
    if not trace > 0.0:
        raise NotADensityMatrix(f"density matrix has non-positive trace {trace:.3e}", residual=trace)
    low = float(hermitian_eigenvalues(rho, tol=herm_tol)[0])
    if low < -psd_tol * trace:
        raise NotADensityMatrix(f"density matrix is not positive semidefinite: min eigenvalue {low:.3e}", residual=low)
    return rho


def _check_unit_interval(name, value):
    if not 0.0 <= value <= 1.0:
        raise ParamOutOfRange(f"{name} must lie in [0, 1], got {value!r}")


def werner(alpha: float) -> np.ndarray:
    """Werner state ``(1 - alpha)/4 I + alpha |S><S|``, with ``S`` the singlet."""
    _check_unit_interval("alpha", alpha)
    return (1.0 - alpha) / 4.0 * np.eye(4, dtype=np.complex128) + alpha * projector(SINGLET)


@dataclass(frozen=True)
class RudolphParams:
    """Parameters ``(r, s, t)`` of the family with Pauli expansion

    ``4 rho = I + r Z.I + s I.Z + (r - s + 1) Z.Z + t (X.X - Y.Y)``.

    Valid iff ``s - r >= 0``, ``|r| <= 1``, ``|s| <= 1`` and
    ``t**2 <= h2 = (1 - s)(1 + r)``.
    """

    r: float
    s: float
    t: float

    @property
    def h2(self) -> float:
        return (1.0 - self.s) * (1.0 + self.r)

    def validate(self) -> None:
        r, s, t = self.r, self.s, self.t
        if s - r < 0.0:
            raise ParamOutOfRange(f"need s - r >= 0, got s - r = {s - r!r}")
        if abs(r) > 1.0:
            raise ParamOutOfRange(f"need |r| <= 1, got r = {r!r}")
        if abs(s) > 1.0:
            raise ParamOutOfRange(f"need |s| <= 1, got s = {s!r}")
        if t * t > self.h2:
            raise ParamOutOfRange(f"need t^2 <= (1 - s)(1 + r) = {self.h2!r}, got t = {t!r}")


def rudolph_state(p: RudolphParams) -> np.ndarray:
    p.validate()
    k = np.kron
    return 0.25 * (
        (p.r - p.s + 1.0) * k(SIGMA_Z, SIGMA_Z)
        + p.r * k(SIGMA_Z, IDENTITY)
        + p.s * k(IDENTITY, SIGMA_Z)
        + p.t * k(SIGMA_X, SIGMA_X)
        - p.t * k(SIGMA_Y, SIGMA_Y)
        + k(IDENTITY, IDENTITY)
    )


def singlet_polarized_mixture(x: float) -> np.ndarray:
    """``x |S><S| + (1 - x) |up up><up up|``."""
    _check_unit_interval("x", x)
    return x * projector(SINGLET) + (1.0 - x) * projector(np.kron(UP, UP))


def qubit_state(bloch) -> np.ndarray:
    """One-qubit density matrix ``(I + n.sigma)/2`` for a Bloch vector ``n``."""
    n = np.asarray(bloch, dtype=np.float64)
    if n.shape != (3,):
        raise ParamOutOfRange(f"Bloch vector needs 3 components, got shape {n.shape}")
    if np.linalg.norm(n) > 1.0 + BLOCH_SLACK:
        raise ParamOutOfRange(f"Bloch vector norm {np.linalg.norm(n)!r} exceeds 1")
    return 0.5 * (IDENTITY + np.tensordot(n, PAULIS[1:], axes=1))


def _qubit_states(vectors):
    return 0.5 * (IDENTITY + np.einsum("ka,aij->kij", vectors, PAULIS[1:]))


def product_state(a, b) -> np.ndarray:
    return np.kron(qubit_state(a), qubit_state(b))


def _generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed)))


def _complex_gaussian(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def random_ginibre(seed: int) -> np.ndarray:
    """``M M^H`` with ``M`` a 4x4 matrix of i.i.d. standard complex Gaussians.

    Unnormalized; full rank with probability one.
    """
    m = _complex_gaussian(_generator(seed), (4, 4))
    return m @ m.conj().T


def _ball_points(rng, count, radius):
    direction = rng.standard_normal((count, 3))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    return radius * rng.random(count)[:, None] ** (1.0 / 3.0) * direction


def random_separable(seed: int, k: int = DEFAULT_MIXTURE_TERMS, max_radius: float = 1.0) -> np.ndarray:
    """Convex mixture of ``k`` random product states.

    Weights are uniform on the probability simplex and every local Bloch
    vector is uniform in the ball of radius ``max_radius`` (the closed unit
    ball by default). Separable by construction.
    """
    if not 1 <= k <= 16:
        raise ParamOutOfRange(f"mixture length k must lie in [1, 16], got {k!r}")
    _check_unit_interval("max_radius", max_radius)
    rng = _generator(seed)
    weights = rng.dirichlet(np.ones(k))
    first = _qubit_states(_ball_points(rng, k, max_radius))
    second = _qubit_states(_ball_points(rng, k, max_radius))
    return np.einsum("k,kij,klm->iljm", weights, first, second).reshape(4, 4)


def random_pure(seed: int) -> np.ndarray:
    psi = _complex_gaussian(_generator(seed), 4)
    psi /= np.linalg.norm(psi)
    return projector(psi)


def random_unitary(seed: int, dim: int = 2) -> np.ndarray:
    """Haar-random unitary from the QR decomposition of a Ginibre matrix."""
    z = _complex_gaussian(_generator(seed), (dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def _check_unitary(name, u):
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (2, 2):
        raise NonUnitaryInput(f"{name} must be 2x2, got shape {u.shape}")
    err = np.abs(u @ u.conj().T - IDENTITY).max()
    if err > UNITARY_TOL:
        raise NonUnitaryInput(f"{name} is not unitary: max|U U^H - I| = {err:.3e}")
    return u


def apply_local_unitary(rho, u, v) -> np.ndarray:
    """``(u (x) v) rho (u (x) v)^H``."""
    w = np.kron(_check_unitary("u", u), _check_unitary("v", v))
    return w @ np.asarray(rho, dtype=np.complex128) @ w.conj().T


ENSEMBLES = {
    "ginibre": random_ginibre,
    "separable": random_separable,
    "pure": random_pure,
}
