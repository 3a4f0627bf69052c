"""Entanglement criteria for two-qubit states.

The Lorentz test expands ``rho`` in the Pauli basis, squares the
coefficient matrix with the Minkowski metric, and compares the square roots
of the resulting spectrum. The three reference criteria (partial transpose,
realignment, concurrence) are implemented alongside it so every state can be
cross-checked.

All array functions accept a single ``(4, 4)`` matrix or a stack
``(..., 4, 4)``. The scalar-facing functions (``plt_verdict``,
``ppt_verdict``, ``analyze``, ...) take one state at a time.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import linalg
from .errors import EigenvaluePositivityViolation, InvalidState, NonRealCoefficient, QubitPltError
from .states import PAULIS, SIGMA_Y, validate_density

MINKOWSKI = np.diag([1.0, -1.0, -1.0, -1.0])
PAULI_PRODUCTS = np.einsum("mij,nkl->mnikjl", PAULIS, PAULIS).reshape(4, 4, 4, 4)
SPIN_FLIP = np.kron(SIGMA_Y, SIGMA_Y).real

COEFFICIENT_IMAG_TOL = 1e-12
# eigenvalues of B this close to zero (relative to its scale) are rounding
# noise; keeps exact product states at T = 0 instead of T ~ +-sqrt(eps)
ZERO_FLOOR = 64 * linalg.EPS
SCALE_FLOOR = np.finfo(np.float64).tiny


@dataclass(frozen=True)
class Tolerances:
    boundary_eps: float = 1e-9
    imag_tol: float = 1e-6
    neg_tol: float = 1e-8
    herm_tol: float = 1e-10


DEFAULT_TOLERANCES = Tolerances()


class Label(str, Enum):
    SEPARABLE = "separable"
    ENTANGLED = "entangled"
    BOUNDARY = "boundary"
    INCONCLUSIVE = "inconclusive"


_CODE_TO_LABEL = {1: Label.SEPARABLE, -1: Label.ENTANGLED, 0: Label.BOUNDARY}


@dataclass(frozen=True)
class Verdict:
    """Outcome of one criterion.

    ``label`` is BOUNDARY iff ``|statistic| <= tolerance_used * scale``.
    """

    label: Label
    statistic: float
    tolerance_used: float
    scale: float


def _classify(statistic, scale, eps):
    """+1 separable, -1 entangled, 0 boundary."""
    band = eps * scale
    return np.where(statistic > band, 1, np.where(statistic < -band, -1, 0))


# --- Pauli expansion and the Lorentz square ----------------------------------


def pauli_coefficients(rho, tol: float = COEFFICIENT_IMAG_TOL) -> np.ndarray:
    """Real coefficient matrix ``A[mu, nu] = Tr(rho sigma_mu (x) sigma_nu)``.

    ``A[0, 0]`` is the trace of ``rho``.

    Raises
    ------
    NonRealCoefficient
        If any trace has an imaginary part above ``tol * Tr rho``, which can
        only happen for a non-Hermitian input.
    """
    rho = np.asarray(rho, dtype=np.complex128)
    raw = np.einsum("...ij,mnji->...mn", rho, PAULI_PRODUCTS)
    trace = np.abs(raw[..., 0, 0].real)
    residue = np.abs(raw.imag).max(axis=(-2, -1))
    if np.any(residue > tol * trace):
        worst = float(np.max(residue))
        raise NonRealCoefficient(f"Pauli coefficients have imaginary residue {worst:.3e}", residual=worst)
    return raw.real.copy()


def reconstruct_density(coefficients, herm_tol: float = 1e-10, psd_tol: float = 1e-10) -> np.ndarray:
    """Inverse of :func:`pauli_coefficients`: ``rho = 1/4 sum A[mu, nu] sigma_mu (x) sigma_nu``.

    Raises
    ------
    NotADensityMatrix
        If the result is not positive semidefinite (``A`` did not come from a
        physical state).
    """
    a = np.asarray(coefficients, dtype=np.float64)
    rho = 0.25 * np.einsum("...mn,mnij->...ij", a, PAULI_PRODUCTS)
    for single in rho.reshape((-1, 4, 4)):
        validate_density(single, herm_tol=herm_tol, psd_tol=psd_tol)
    return rho


def lorentz_square(coefficients, metric=MINKOWSKI) -> np.ndarray:
    """``B = A G A^T G``.

    With ``G = diag(1, -1, -1, -1)`` this reproduces the mixed-index matrices
    written out for the Werner, two-parameter and singlet/polarized families. ``B G``
    is symmetric. ``metric`` is exposed only so tests can swap in a wrong one.
    """
    a = np.asarray(coefficients, dtype=np.float64)
    g = np.diagonal(np.asarray(metric, dtype=np.float64))
    return np.einsum("...ik,k,...jk,j->...ij", a, g, a, g)


@dataclass(frozen=True)
class PltSpectrum:
    """Clamped spectrum of ``B`` and the statistic ``T``.

    Attributes
    ----------
    eigenvalues : ndarray (..., 4)
        Real parts of the eigenvalues of ``B``, clamped at zero and sorted
        descending; the first entry is the dominant one.
    mu : ndarray (..., 4)
        Square roots of ``eigenvalues``.
    T : ndarray (...)
        ``mu[0] - mu[1] - mu[2] - mu[3]``; negative means entangled.
    imag_residue : ndarray (...)
        Largest ``|Im lambda|`` thrown away.
    min_real : ndarray (...)
        Most negative raw real part before clamping.
    norm : ndarray (...)
        Reference scale for the tolerances, ``max(max|B|, (Tr rho)^2)``.
    violation : bool ndarray (...)
        Eigenvalues escaped the tolerance window, or the solver failed.
    """

    eigenvalues: np.ndarray
    mu: np.ndarray
    T: np.ndarray
    imag_residue: np.ndarray
    min_real: np.ndarray
    norm: np.ndarray
    violation: np.ndarray

    @property
    def T_normalized(self):
        """``T / mu[0]`` (zero where ``mu[0]`` vanishes)."""
        mu0 = self.mu[..., 0]
        safe = np.where(mu0 > 0.0, mu0, 1.0)
        return np.where(mu0 > 0.0, self.T / safe, 0.0)


def plt_spectrum(
    lorentz,
    imag_tol: float = DEFAULT_TOLERANCES.imag_tol,
    neg_tol: float = DEFAULT_TOLERANCES.neg_tol,
    scale=None,
    strict: bool = True,
) -> PltSpectrum:
    """Eigenvalues of ``B``, their square roots and the statistic ``T``.

    Imaginary parts up to ``imag_tol * norm`` and negative real parts down to
    ``-neg_tol * norm`` are treated as rounding and clamped away. ``norm`` is
    ``max|B|``, raised to ``scale`` when given (the pipeline passes
    ``(Tr rho)^2`` so that product states, whose ``B`` is pure rounding noise,
    still have a meaningful reference).

    Raises
    ------
    EigenvaluePositivityViolation
        When ``strict`` and some eigenvalue falls outside the window, or the
        eigensolver failed. With ``strict=False`` the offending entries are
        flagged in ``violation`` instead.
    """
    b = np.asarray(lorentz, dtype=np.float64)
    eig = linalg.general_real_eigenvalues(b, imag_tol=imag_tol, raise_on_failure=False, scale=scale)
    norm = np.abs(b).max(axis=(-2, -1))
    if scale is not None:
        norm = np.maximum(norm, scale)
    with np.errstate(invalid="ignore"):
        real = eig.values.real
        imag = np.abs(eig.values.imag)
        imag_residue = np.nan_to_num(imag.max(axis=-1), nan=np.inf)
        min_real = np.nan_to_num(real.min(axis=-1), nan=-np.inf)
        ref = norm[..., None]
        violation = (min_real < -neg_tol * norm) | (imag_residue > imag_tol * norm) | ~eig.converged
        lam = np.where((real <= 0.0) | (np.abs(real) <= ZERO_FLOOR * ref), 0.0, real)
    lam = np.nan_to_num(lam, nan=0.0)
    lam = -np.sort(-lam, axis=-1)
    mu = np.sqrt(lam)
    t = mu[..., 0] - mu[..., 1] - mu[..., 2] - mu[..., 3]
    if strict and np.any(violation):
        raise EigenvaluePositivityViolation(
            f"B spectrum outside tolerance: min Re = {float(np.min(min_real)):.3e}, "
            f"max |Im| = {float(np.max(imag_residue)):.3e}, norm = {float(np.max(norm)):.3e}"
        )
    return PltSpectrum(lam, mu, t, imag_residue, min_real, norm, violation)


def plt_verdict(spectrum: PltSpectrum, boundary_eps: float = DEFAULT_TOLERANCES.boundary_eps) -> Verdict:
    """Separable iff ``T > eps * mu0``, entangled iff ``T < -eps * mu0``, else boundary."""
    t = float(spectrum.T)
    scale = max(float(spectrum.mu[..., 0]), SCALE_FLOOR)
    code = int(_classify(t, scale, boundary_eps))
    return Verdict(_CODE_TO_LABEL[code], t, boundary_eps, scale)


def plt_statistic(rho, tol: Tolerances = DEFAULT_TOLERANCES, strict: bool = True, metric=MINKOWSKI) -> PltSpectrum:
    """Full pipeline ``rho -> A -> B -> spectrum``, stack-aware."""
    a = pauli_coefficients(rho)
    return plt_spectrum(
        lorentz_square(a, metric), imag_tol=tol.imag_tol, neg_tol=tol.neg_tol, scale=a[..., 0, 0] ** 2, strict=strict
    )


# --- reference criteria --------------------------------------------------------


def partial_transpose(rho) -> np.ndarray:
    """Transpose on the second qubit: ``[(a,b),(a',b')] <- [(a,b'),(a',b)]``."""
    rho = np.asarray(rho, dtype=np.complex128)
    lead = rho.shape[:-2]
    t = rho.reshape(lead + (2, 2, 2, 2))
    return np.swapaxes(t, -3, -1).reshape(lead + (4, 4))


def ppt_min_eigenvalue(rho, herm_tol: float = DEFAULT_TOLERANCES.herm_tol) -> np.ndarray:
    return linalg.hermitian_eigenvalues(partial_transpose(rho), tol=herm_tol)[..., 0]


def ppt_verdict(rho, boundary_eps: float = DEFAULT_TOLERANCES.boundary_eps) -> tuple[float, Verdict]:
    rho = np.asarray(rho, dtype=np.complex128)
    low = float(ppt_min_eigenvalue(rho))
    scale = float(np.trace(rho).real)
    code = int(_classify(low, scale, boundary_eps))
    return low, Verdict(_CODE_TO_LABEL[code], low, boundary_eps, scale)


def realignment(rho) -> np.ndarray:
    """Realigned matrix ``R[(a,a'),(b,b')] = rho[(a,b),(a',b')]``."""
    rho = np.asarray(rho, dtype=np.complex128)
    lead = rho.shape[:-2]
    t = rho.reshape(lead + (2, 2, 2, 2))
    return np.swapaxes(t, -3, -2).reshape(lead + (4, 4))


def ccn_norm(rho) -> np.ndarray:
    """Trace norm of the realigned, unit-trace state."""
    rho = np.asarray(rho, dtype=np.complex128)
    trace = np.trace(rho, axis1=-2, axis2=-1).real
    return linalg.singular_values(realignment(rho / trace[..., None, None])).sum(axis=-1)


def ccn_verdict(rho, boundary_eps: float = DEFAULT_TOLERANCES.boundary_eps) -> tuple[float, Verdict]:
    """Entangled if the realigned trace norm exceeds ``1 + eps``; otherwise inconclusive.

    The realignment test only ever certifies entanglement.
    """
    norm = float(ccn_norm(rho))
    label = Label.ENTANGLED if norm > 1.0 + boundary_eps else Label.INCONCLUSIVE
    return norm, Verdict(label, norm - 1.0, boundary_eps, 1.0)


def concurrence_statistic(rho, herm_tol: float = DEFAULT_TOLERANCES.herm_tol) -> np.ndarray:
    """``sqrt(nu0) - sqrt(nu1) - sqrt(nu2) - sqrt(nu3)`` before the ``max(0, .)``.

    ``nu`` are the eigenvalues of ``rho (Y(x)Y) rho* (Y(x)Y)`` for the unit-trace
    state. Their square roots are obtained as the singular values of
    ``conj(W) (Y(x)Y) W`` with ``W = sqrt(rho)``, which avoids an eigensolve of
    a non-Hermitian product.
    """
    rho = np.asarray(rho, dtype=np.complex128)
    trace = np.trace(rho, axis1=-2, axis2=-1).real
    values, vecs = linalg.hermitian_eigensystem(rho / trace[..., None, None], tol=herm_tol)
    root = np.sqrt(np.clip(values, 0.0, None))
    w = np.einsum("...ik,...k,...jk->...ij", vecs, root, vecs.conj())
    sv = linalg.singular_values(np.einsum("...ik,kl,...lj->...ij", w.conj(), SPIN_FLIP, w))
    return sv[..., 0] - sv[..., 1] - sv[..., 2] - sv[..., 3]


def concurrence(rho) -> np.ndarray:
    """Concurrence of the normalized state, in ``[0, 1]``."""
    return np.maximum(concurrence_statistic(rho), 0.0)


def concurrence_verdict(rho, boundary_eps: float = DEFAULT_TOLERANCES.boundary_eps) -> tuple[float, Verdict]:
    raw = float(concurrence_statistic(rho))
    code = int(_classify(-raw, 1.0, boundary_eps))
    return max(raw, 0.0), Verdict(_CODE_TO_LABEL[code], raw, boundary_eps, 1.0)


# --- aggregation --------------------------------------------------------------------


@dataclass(frozen=True)
class CriteriaReport:
    trace: float
    coefficients: np.ndarray
    lorentz: np.ndarray
    plt: PltSpectrum
    plt_verdict: Verdict
    ppt_min_eig: float
    ppt_verdict: Verdict
    ccn_norm: float
    ccn_verdict: Verdict
    concurrence: float
    concurrence_verdict: Verdict
    label: str | None = field(default=None)

    def to_dict(self) -> dict:
        def verdict(v: Verdict) -> dict:
            return {"label": v.label.value, "statistic": v.statistic, "tolerance": v.tolerance_used, "scale": v.scale}

        return {
            "label": self.label,
            "trace": self.trace,
            "A": self.coefficients.tolist(),
            "B": self.lorentz.tolist(),
            "lambda": self.plt.eigenvalues.tolist(),
            "mu": self.plt.mu.tolist(),
            "T": float(self.plt.T),
            "T_normalized": float(self.plt.T_normalized),
            "imag_residue": float(self.plt.imag_residue),
            "plt": verdict(self.plt_verdict),
            "ppt": {"min_eig": self.ppt_min_eig, **verdict(self.ppt_verdict)},
            "ccn": {"norm": self.ccn_norm, **verdict(self.ccn_verdict)},
            "concurrence": {"value": self.concurrence, **verdict(self.concurrence_verdict)},
        }


def _labelled(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except InvalidState as exc:
        raise type(exc)(f"{name}: {exc}", residual=exc.residual) from exc
    except QubitPltError as exc:
        raise type(exc)(f"{name}: {exc}") from exc


def analyze(rho, tol: Tolerances = DEFAULT_TOLERANCES, label: str | None = None) -> CriteriaReport:
    """Run the Lorentz test and all three reference criteria on one state."""
    rho = _labelled("input", validate_density, rho, herm_tol=tol.herm_tol)
    a = _labelled("pauli", pauli_coefficients, rho)
    b = lorentz_square(a)
    spectrum = _labelled(
        "plt", plt_spectrum, b, imag_tol=tol.imag_tol, neg_tol=tol.neg_tol, scale=a[0, 0] ** 2
    )
    low, ppt = _labelled("ppt", ppt_verdict, rho, tol.boundary_eps)
    norm, ccn = _labelled("ccn", ccn_verdict, rho, tol.boundary_eps)
    conc, conc_v = _labelled("concurrence", concurrence_verdict, rho, tol.boundary_eps)
    return CriteriaReport(
        trace=float(a[0, 0]),
        coefficients=a,
        lorentz=b,
        plt=spectrum,
        plt_verdict=plt_verdict(spectrum, tol.boundary_eps),
        ppt_min_eig=low,
        ppt_verdict=ppt,
        ccn_norm=norm,
        ccn_verdict=ccn,
        concurrence=conc,
        concurrence_verdict=conc_v,
        label=label,
    )


@dataclass(frozen=True)
class BatchEvaluation:
    """Vectorized criterion results for a stack of states (codes: +1/0/-1)."""

    spectrum: PltSpectrum
    plt_codes: np.ndarray
    ppt_min_eig: np.ndarray
    ppt_codes: np.ndarray
    b_norm: np.ndarray
    concurrence_raw: np.ndarray | None = None
    concurrence_codes: np.ndarray | None = None


def evaluate_batch(rhos, tol: Tolerances = DEFAULT_TOLERANCES, with_concurrence: bool = False) -> BatchEvaluation:
    """PLT and PPT (optionally concurrence) on a stack of states, without raising
    on positivity violations; they are reported in ``spectrum.violation``."""
    rhos = np.asarray(rhos, dtype=np.complex128)
    a = pauli_coefficients(rhos)
    b = lorentz_square(a)
    trace = a[..., 0, 0]
    spectrum = plt_spectrum(b, imag_tol=tol.imag_tol, neg_tol=tol.neg_tol, scale=trace**2, strict=False)
    plt_codes = _classify(spectrum.T, np.maximum(spectrum.mu[..., 0], SCALE_FLOOR), tol.boundary_eps)
    low = ppt_min_eigenvalue(rhos, herm_tol=tol.herm_tol)
    ppt_codes = _classify(low, trace, tol.boundary_eps)
    conc = codes = None
    if with_concurrence:
        conc = concurrence_statistic(rhos, herm_tol=tol.herm_tol)
        codes = _classify(-conc, 1.0, tol.boundary_eps)
    return BatchEvaluation(spectrum, plt_codes, low, ppt_codes, np.abs(b).max(axis=(-2, -1)), conc, codes)


def code_label(code: int) -> Label:
    return _CODE_TO_LABEL[int(code)]
