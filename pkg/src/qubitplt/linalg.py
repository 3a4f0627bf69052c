"""Eigenvalue and singular-value routines for small dense matrices.

Everything here works on a single ``(n, n)`` matrix or on a stack of shape
``(..., n, n)``; results carry the same leading axes. The sweeps are written
as elementwise updates over the batch axis, never as reductions across it,
so a matrix gets bit-identical results whether it is processed alone or as
part of a large batch. The harness relies on that for replaying states.

Algorithms:

* Hermitian eigenvalues: cyclic complex Jacobi.
* Singular values: one-sided (Hestenes) Jacobi, which keeps tiny singular
  values accurate to working precision instead of ``sqrt(eps)``.
* General real eigenvalues: Householder reduction to Hessenberg form
  followed by Francis double-shift QR with deflation by splitting.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import ConvergenceFailure, NonHermitianInput

EPS = np.finfo(np.float64).eps
TINY = np.finfo(np.float64).tiny

MAX_JACOBI_SWEEPS = 50
MAX_QR_ITERATIONS = 120
EXCEPTIONAL_SHIFT_AT = (10, 20, 40, 80)

HERMITIAN_TOL = 1e-10
IMAG_TOL = 1e-6


@dataclass(frozen=True)
class EigenResult:
    """Eigenvalues of a real matrix (or stack of them).

    Attributes
    ----------
    values : complex ndarray, shape (..., n)
        Eigenvalues with multiplicity, sorted by descending real part and
        then descending imaginary part. Conjugate pairs share real parts
        exactly.
    is_real : bool ndarray, shape (..., n)
        ``|Im| <= imag_tol * ||M||_max`` for each value.
    converged : bool ndarray, shape (...)
        False where the QR iteration ran out of steps; values there are NaN.
    """

    values: np.ndarray
    is_real: np.ndarray
    converged: np.ndarray


def _as_stack(m, dtype):
    arr = np.asarray(m, dtype=dtype)
    if arr.ndim < 2 or arr.shape[-1] != arr.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix has non-finite entries")
    lead = arr.shape[:-2]
    n = arr.shape[-1]
    return arr.reshape((-1, n, n)).copy(), lead


def _max_abs(stack):
    return np.abs(stack).max(axis=(-2, -1))


def _ldexp(x, exponent):
    if np.iscomplexobj(x):
        return np.ldexp(x.real, exponent) + 1j * np.ldexp(x.imag, exponent)
    return np.ldexp(x, exponent)


def _equilibrate(stack):
    """Scale each matrix by an exact power of two so ``max|M|`` lies in [1/2, 1).

    Keeps squared norms inside the normal range; undo with ``_ldexp(x, exponent)``.
    """
    _, exponent = np.frexp(_max_abs(stack))
    return _ldexp(stack, -exponent[:, None, None]), exponent


# --- Jacobi machinery -------------------------------------------------------


def _rotation(app, aqq, apq):
    """Parameters ``(c, s, phase)`` of the rotation that zeroes ``apq``.

    The rotation is ``J = [[c, s*phase], [-s*conj(phase), c]]`` acting on
    columns ``p, q``; ``J^H [[app, apq], [conj(apq), aqq]] J`` is diagonal.
    """
    mag = np.abs(apq)
    active = mag > 0.0
    safe = np.where(active, mag, 1.0)
    # via the argument: apq / |apq| overflows when apq is subnormal
    phase = np.where(active, np.exp(1j * np.angle(apq)), 1.0)
    with np.errstate(over="ignore", invalid="ignore"):
        tau = (aqq - app) / (2.0 * safe)
        t = np.where(tau >= 0.0, 1.0, -1.0) / (np.abs(tau) + np.hypot(1.0, tau))
    t = np.where(active & np.isfinite(t), t, 0.0)
    c = 1.0 / np.sqrt(1.0 + t * t)
    return c, t * c, phase


def _rotate_columns(a, p, q, c, s, phase):
    cp = a[:, :, p].copy()
    cq = a[:, :, q].copy()
    a[:, :, p] = c[:, None] * cp - (s * np.conj(phase))[:, None] * cq
    a[:, :, q] = (s * phase)[:, None] * cp + c[:, None] * cq


def _rotate_rows(a, p, q, c, s, phase):
    rp = a[:, p, :].copy()
    rq = a[:, q, :].copy()
    a[:, p, :] = c[:, None] * rp - (s * phase)[:, None] * rq
    a[:, q, :] = (s * np.conj(phase))[:, None] * rp + c[:, None] * rq


def _off_norm(a):
    n = a.shape[-1]
    mask = ~np.eye(n, dtype=bool)
    return np.sqrt((np.abs(a[:, mask]) ** 2).sum(axis=-1))


def _jacobi_hermitian(h, want_vectors):
    a = h.astype(np.complex128)
    nb, n = a.shape[0], a.shape[-1]
    vecs = np.broadcast_to(np.eye(n, dtype=np.complex128), a.shape).copy() if want_vectors else None
    fro = np.sqrt((np.abs(a) ** 2).sum(axis=(-2, -1)))
    pairs = list(combinations(range(n), 2))
    for sweep in range(MAX_JACOBI_SWEEPS + 1):
        done = _off_norm(a) <= EPS * fro
        if done.all() or sweep == MAX_JACOBI_SWEEPS:
            break
        for p, q in pairs:
            c, s, phase = _rotation(a[:, p, p].real, a[:, q, q].real, a[:, p, q])
            c = np.where(done, 1.0, c)
            s = np.where(done, 0.0, s)
            _rotate_columns(a, p, q, c, s, phase)
            _rotate_rows(a, p, q, c, s, phase)
            a[:, p, q] = np.where(done, a[:, p, q], 0.0)
            a[:, q, p] = np.where(done, a[:, q, p], 0.0)
            if want_vectors:
                _rotate_columns(vecs, p, q, c, s, phase)
    values = np.diagonal(a, axis1=-2, axis2=-1).real.copy()
    order = np.argsort(values, axis=-1, kind="stable")
    values = np.take_along_axis(values, order, axis=-1)
    if want_vectors:
        vecs = np.take_along_axis(vecs, order[:, None, :], axis=-1)
    return values, vecs, done


def _hermitian_part(m, tol):
    stack, lead = _as_stack(m, np.complex128)
    herm = stack.conj().transpose(0, 2, 1)
    asym = _max_abs(stack - herm)
    scale = _max_abs(stack)
    bad = asym > tol * scale
    if bad.any():
        worst = float(asym[bad].max())
        raise NonHermitianInput(f"matrix is not Hermitian: max|M - M^H| = {worst:.3e}", residual=worst)
    return 0.5 * (stack + herm), lead


def hermitian_eigenvalues(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix, ascending.

    Parameters
    ----------
    m : array_like, shape (..., n, n)
        Hermitian up to ``tol * max|M|``; the Hermitian part is diagonalized.
    tol : float
        Relative Hermiticity tolerance.

    Raises
    ------
    NonHermitianInput
        If ``max|M - M^H| > tol * max|M|``.
    ConvergenceFailure
        If the Jacobi sweeps do not converge (not observed in practice).
    """
    herm, lead = _hermitian_part(m, tol)
    herm, exponent = _equilibrate(herm)
    values, _, done = _jacobi_hermitian(herm, want_vectors=False)
    if not done.all():
        raise ConvergenceFailure("Jacobi eigenvalue sweeps did not converge")
    values = _ldexp(values, exponent[:, None])
    return values.reshape(lead + values.shape[-1:])


def hermitian_eigensystem(m, tol: float = HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and the matching orthonormal eigenvectors (columns)."""
    herm, lead = _hermitian_part(m, tol)
    herm, exponent = _equilibrate(herm)
    values, vecs, done = _jacobi_hermitian(herm, want_vectors=True)
    if not done.all():
        raise ConvergenceFailure("Jacobi eigenvalue sweeps did not converge")
    values = _ldexp(values, exponent[:, None])
    n = values.shape[-1]
    return values.reshape(lead + (n,)), vecs.reshape(lead + (n, n))


def _one_sided_jacobi(m):
    u = m.astype(np.complex128)
    nb, n = u.shape[0], u.shape[-1]
    pairs = list(combinations(range(n), 2))
    done = np.zeros(nb, dtype=bool)
    # columns below eps * ||M||_F are rounding dust; rotating them never settles
    dust = (EPS * np.sqrt((np.abs(u) ** 2).sum(axis=(-2, -1)))) ** 2
    for _ in range(MAX_JACOBI_SWEEPS):
        rotated = np.zeros(nb, dtype=bool)
        for p, q in pairs:
            alpha = (np.abs(u[:, :, p]) ** 2).sum(axis=-1)
            beta = (np.abs(u[:, :, q]) ** 2).sum(axis=-1)
            gamma = (np.conj(u[:, :, p]) * u[:, :, q]).sum(axis=-1)
            orthogonal = np.abs(gamma) <= u.shape[-2] * EPS * np.sqrt(alpha * beta)
            need = ~orthogonal & (np.minimum(alpha, beta) > dust) & ~done
            c, s, phase = _rotation(alpha, beta, gamma)
            c = np.where(need, c, 1.0)
            s = np.where(need, s, 0.0)
            _rotate_columns(u, p, q, c, s, phase)
            rotated |= need
        done |= ~rotated
        if done.all():
            break
    sv = np.sqrt((np.abs(u) ** 2).sum(axis=-2))
    return -np.sort(-sv, axis=-1), done


def singular_values(m) -> np.ndarray:
    """Singular values of a complex matrix, descending.

    One-sided Jacobi on the columns of ``M``; the converged column norms are
    the singular values, i.e. the square roots of the eigenvalues of
    ``M^H M`` without forming that product.
    """
    stack, lead = _as_stack(m, np.complex128)
    stack, exponent = _equilibrate(stack)
    sv, done = _one_sided_jacobi(stack)
    if not done.all():
        raise ConvergenceFailure("one-sided Jacobi SVD did not converge")
    sv = _ldexp(sv, exponent[:, None])
    return sv.reshape(lead + sv.shape[-1:])


# --- Hessenberg QR ------------------------------------------------------------


def _householder(x):
    """Householder vector ``v`` and ``beta`` with ``(I - beta v v^T) x = -sign(x0)|x| e0``."""
    # the reflector ignores the length of v, so rescale exactly to dodge underflow
    _, exponent = np.frexp(np.abs(x).max(axis=-1))
    x = np.ldexp(x, -exponent[:, None])
    norm = np.sqrt((x * x).sum(axis=-1))
    sign = np.where(x[:, 0] >= 0.0, 1.0, -1.0)
    v = x.copy()
    v[:, 0] = x[:, 0] + sign * norm
    vtv = (v * v).sum(axis=-1)
    beta = np.where(vtv > 0.0, 2.0 / np.where(vtv > 0.0, vtv, 1.0), 0.0)
    return v, beta


def _reflect_rows(h, k, v, beta, cols):
    """``h[k:k+len(v), cols] = (I - beta v v^T) h[k:k+len(v), cols]``."""
    size = v.shape[-1]
    block = h[:, k:k + size, cols]
    w = v[:, 0, None] * block[:, 0, :]
    for i in range(1, size):
        w = w + v[:, i, None] * block[:, i, :]
    w = beta[:, None] * w
    h[:, k:k + size, cols] = block - v[:, :, None] * w[:, None, :]


def _reflect_columns(h, k, v, beta, rows):
    """``h[rows, k:k+len(v)] = h[rows, k:k+len(v)] (I - beta v v^T)``."""
    size = v.shape[-1]
    block = h[:, rows, k:k + size]
    w = block[:, :, 0] * v[:, 0, None]
    for i in range(1, size):
        w = w + block[:, :, i] * v[:, i, None]
    w = beta[:, None] * w
    h[:, rows, k:k + size] = block - w[:, :, None] * v[:, None, :]


def _hessenberg(a):
    h = a.copy()
    n = h.shape[-1]
    for k in range(n - 2):
        v, beta = _householder(h[:, k + 1:, k].copy())
        _reflect_rows(h, k + 1, v, beta, slice(0, n))
        _reflect_columns(h, k + 1, v, beta, slice(0, n))
        h[:, k + 2:, k] = 0.0
    return h


def _francis_step(h, s, t):
    """One implicit double-shift QR step; shifts are the roots of z^2 - s z + t."""
    n = h.shape[-1]
    x = h[:, 0, 0] * h[:, 0, 0] + h[:, 0, 1] * h[:, 1, 0] - s * h[:, 0, 0] + t
    y = h[:, 1, 0] * (h[:, 0, 0] + h[:, 1, 1] - s)
    z = h[:, 1, 0] * h[:, 2, 1]
    for k in range(n - 2):
        v, beta = _householder(np.stack([x, y, z], axis=-1))
        _reflect_rows(h, k, v, beta, slice(max(0, k - 1), n))
        _reflect_columns(h, k, v, beta, slice(0, min(k + 4, n)))
        x = h[:, k + 1, k].copy()
        y = h[:, k + 2, k].copy()
        if k < n - 3:
            z = h[:, k + 3, k].copy()
    v, beta = _householder(np.stack([x, y], axis=-1))
    _reflect_rows(h, n - 2, v, beta, slice(n - 3, n))
    _reflect_columns(h, n - 2, v, beta, slice(0, n))
    for k in range(n - 2):
        h[:, k + 2:, k] = 0.0


def _shifts(h, iteration):
    n = h.shape[-1]
    a, b = h[:, n - 2, n - 2], h[:, n - 2, n - 1]
    c, d = h[:, n - 1, n - 2], h[:, n - 1, n - 1]
    if iteration in EXCEPTIONAL_SHIFT_AT:
        # ad hoc shift to break cycles (same constants as LAPACK's dlahqr)
        w = np.abs(h[:, n - 1, n - 2]) + np.abs(h[:, n - 2, n - 3])
        a = 0.75 * w + d
        b = -0.4375 * w
        c = w
        d = a
    return a + d, a * d - b * c


def _split_position(h, iteration, floor):
    """Largest ``j`` with a negligible subdiagonal ``h[j, j-1]``; 0 if none.

    Tight clusters (e.g. ``c I + rounding``, which every pure state produces)
    leave the shifts nothing to resolve, and the subdiagonal then hovers at a
    few ulps forever. The test is therefore relaxed by 4x every 30 stalled
    iterations, capping the added backward error at ``64 eps ||H||``.
    ``floor`` is a per-matrix absolute threshold from the caller.
    """
    n = h.shape[-1]
    smlnum = TINY * (n / EPS)
    scale = _max_abs(h)
    slack = EPS * 4.0 ** min(iteration // 30, 3)
    pos = np.zeros(h.shape[0], dtype=int)
    for j in range(1, n):
        tst = np.abs(h[:, j - 1, j - 1]) + np.abs(h[:, j, j])
        tst = np.where(tst == 0.0, scale, tst)
        small = np.abs(h[:, j, j - 1]) <= np.maximum(np.maximum(slack * tst, smlnum), floor)
        pos = np.where(small, j, pos)
    return pos


def _eig2(h):
    a, b = h[:, 0, 0], h[:, 0, 1]
    c, d = h[:, 1, 0], h[:, 1, 1]
    mean = 0.5 * (a + d)
    half = 0.5 * (a - d)
    disc = half * half + b * c
    # A discriminant below its own rounding error is a (numerically) defective
    # double root; picking a sign there would split it by +-sqrt(eps).
    noise = 32.0 * EPS * (np.abs(half) + np.abs(b) + np.abs(c)) ** 2
    disc = np.where(np.abs(disc) <= noise, 0.0, disc)
    root = np.sqrt(np.abs(disc))
    real = disc >= 0.0
    lo = np.where(real, mean - root, mean).astype(np.complex128)
    hi = np.where(real, mean + root, mean).astype(np.complex128)
    lo = lo - 1j * np.where(real, 0.0, root)
    hi = hi + 1j * np.where(real, 0.0, root)
    return np.stack([hi, lo], axis=-1)


def _hessenberg_eigenvalues(h, floor):
    nb, n = h.shape[0], h.shape[-1]
    if n == 1:
        return h[:, 0, 0].astype(np.complex128)[:, None], np.ones(nb, dtype=bool)
    if n == 2:
        return _eig2(h), np.ones(nb, dtype=bool)
    h = h.copy()
    split = np.zeros(nb, dtype=int)
    ok = np.ones(nb, dtype=bool)
    pending = np.arange(nb)
    for iteration in range(MAX_QR_ITERATIONS + 1):
        sub = h[pending]
        pos = _split_position(sub, iteration, floor[pending])
        found = pos > 0
        split[pending[found]] = pos[found]
        pending = pending[~found]
        if pending.size == 0:
            break
        if iteration == MAX_QR_ITERATIONS:
            ok[pending] = False
            break
        sub = sub[~found]
        s, t = _shifts(sub, iteration)
        _francis_step(sub, s, t)
        h[pending] = sub
    values = np.full((nb, n), np.nan + 0j)
    for j in range(1, n):
        idx = np.flatnonzero(split == j)
        if idx.size == 0:
            continue
        top, ok_top = _hessenberg_eigenvalues(h[idx, :j, :j], floor[idx])
        bottom, ok_bottom = _hessenberg_eigenvalues(h[idx, j:, j:], floor[idx])
        values[idx, :j] = top
        values[idx, j:] = bottom
        ok[idx] &= ok_top & ok_bottom
    return values, ok


def _sort_descending(values):
    order = np.lexsort((-values.imag, -values.real), axis=-1)
    return np.take_along_axis(values, order, axis=-1)


def general_real_eigenvalues(
    m, imag_tol: float = IMAG_TOL, raise_on_failure: bool = True, scale=None
) -> EigenResult:
    """Eigenvalues of a real (not necessarily symmetric) matrix.

    Parameters
    ----------
    m : array_like, shape (..., n, n)
        Real matrix or stack of them.
    imag_tol : float
        Values with ``|Im| <= imag_tol * max|M|`` are flagged real. The loose
        default absorbs the ``sqrt(eps)`` splitting of defective eigenvalues.
    raise_on_failure : bool
        Raise :class:`ConvergenceFailure` if any matrix fails to converge;
        otherwise report it through ``EigenResult.converged``.
    scale : float or array_like, optional
        Absolute size of the rounding already present in ``m`` (for instance
        when ``m`` came out of a cancelling product of larger factors).
        Subdiagonals below ``eps * scale`` are deflated, which lets tight
        clusters of small eigenvalues converge.
    """
    stack, lead = _as_stack(m, np.float64)
    n = stack.shape[-1]
    floor = np.zeros(stack.shape[0])
    if scale is not None:
        floor = EPS * np.broadcast_to(np.asarray(scale, dtype=np.float64), lead).reshape(-1)
    h, exponent = _equilibrate(stack)
    # normwise deflation (backward stable) on top of the usual neighbour test
    floor = np.maximum(np.ldexp(floor, -exponent), EPS * _max_abs(h))
    values, ok = _hessenberg_eigenvalues(_hessenberg(h), floor)
    values = _ldexp(values, exponent[:, None])
    if raise_on_failure and not ok.all():
        raise ConvergenceFailure("Hessenberg QR iteration did not converge")
    values = _sort_descending(values)
    is_real = np.abs(values.imag) <= imag_tol * _max_abs(stack)[:, None]
    return EigenResult(
        values=values.reshape(lead + (n,)),
        is_real=is_real.reshape(lead + (n,)),
        converged=ok.reshape(lead),
    )
