"""Closed-form regression checks behind ``qubitplt selftest``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .criteria import MINKOWSKI, ccn_norm, lorentz_square, pauli_coefficients, plt_spectrum, ppt_min_eigenvalue
from .harness import bisect_zero, grid
from .states import RudolphParams, rudolph_state, singlet_polarized_mixture, werner


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


def _spectrum(rho, metric):
    a = pauli_coefficients(rho)
    return plt_spectrum(lorentz_square(a, metric), scale=a[0, 0] ** 2, strict=False)


def _max_error(pairs):
    return max(float(np.max(np.abs(np.asarray(got) - np.asarray(want)))) for got, want in pairs)


def _check(name, error, tol):
    return Check(name, bool(error <= tol), f"max error {error:.3e} (tol {tol:.0e})")


def run_selftest(metric=MINKOWSKI) -> list[Check]:
    """Run every closed-form check; ``metric`` is swappable for mutation tests."""
    checks = []
    alphas = grid(0.0, 1.0, 101)

    err = _max_error((pauli_coefficients(werner(a)), np.diag([1.0, -a, -a, -a])) for a in alphas)
    checks.append(_check("werner coefficient matrix", err, 1e-14))
    err = _max_error((lorentz_square(pauli_coefficients(werner(a)), metric), np.diag([1.0, a * a, a * a, a * a])) for a in alphas)
    checks.append(_check("werner lorentz square", err, 1e-14))
    err = _max_error((_spectrum(werner(a), metric).T, 1.0 - 3.0 * a) for a in alphas)
    checks.append(_check("werner T = 1 - 3 alpha", err, 1e-10))
    err = _max_error((ppt_min_eigenvalue(werner(a)), (1.0 - 3.0 * a) / 4.0) for a in alphas)
    checks.append(_check("werner PPT min eigenvalue", err, 1e-10))
    try:
        root = bisect_zero(lambda a: float(_spectrum(werner(a), metric).T), 0.0, 1.0, 1e-12)
        checks.append(_check("werner threshold 1/3", abs(root - 1.0 / 3.0), 1e-12))
    except ValueError as exc:
        checks.append(Check("werner threshold 1/3", False, str(exc)))

    r, s = 0.25, 0.5
    h2 = (1.0 - s) * (1.0 + r)
    ts = grid(0.0, 0.25, 26)
    err = _max_error(
        (pauli_coefficients(rudolph_state(RudolphParams(r, s, t))),
         [[1, 0, 0, s], [0, t, 0, 0], [0, 0, -t, 0], [r, 0, 0, r - s + 1]])
        for t in ts
    )
    checks.append(_check("rudolph coefficient matrix", err, 1e-14))
    err = _max_error(
        (lorentz_square(pauli_coefficients(rudolph_state(RudolphParams(r, s, t))), metric),
         [[1 - s * s, 0, 0, (s - r) * (1 - s)], [0, t * t, 0, 0], [0, 0, t * t, 0],
          [-(s - r) * (1 - s), 0, 0, -(2 * r - s + 1) * (s - 1)]])
        for t in ts
    )
    checks.append(_check("rudolph lorentz square", err, 1e-14))
    spectra = [(t, _spectrum(rudolph_state(RudolphParams(r, s, t)), metric)) for t in ts]
    err = _max_error((sp.eigenvalues, sorted([h2, h2, t * t, t * t], reverse=True)) for t, sp in spectra)
    checks.append(_check("rudolph spectrum (h2, h2, t2, t2)", err, 1e-8))
    err = _max_error((sp.T, -2.0 * t) for t, sp in spectra)
    checks.append(_check("rudolph T = -2t", err, 1e-8))
    err = _max_error((sp.T_normalized, -4.0 * math.sqrt(2.0 / 5.0) * t) for t, sp in spectra)
    checks.append(_check("rudolph T/mu0 = -4 sqrt(2/5) t", err, 1e-8))

    rho = rudolph_state(RudolphParams(r, s, 1.0 / 16.0))
    norm, t_stat, low = float(ccn_norm(rho)), float(_spectrum(rho, metric).T), float(ppt_min_eigenvalue(rho))
    checks.append(Check(
        "realignment misses rudolph(1/4, 1/2, 1/16)",
        norm <= 1.0 and t_stat < 0.0 and low < 0.0,
        f"ccn norm {norm:.12f}, T {t_stat:.6g}, PPT min eigenvalue {low:.6g}",
    ))

    xs = grid(0.0, 1.0, 11)
    err = _max_error(
        (pauli_coefficients(singlet_polarized_mixture(x)),
         [[1, 0, 0, 1 - x], [0, -x, 0, 0], [0, 0, -x, 0], [1 - x, 0, 0, 1 - 2 * x]])
        for x in xs
    )
    checks.append(_check("singlet/polarized coefficient matrix", err, 1e-14))
    err = _max_error(
        (lorentz_square(pauli_coefficients(singlet_polarized_mixture(x)), metric),
         [[-(x - 2) * x, 0, 0, 2 * (x - 1) * x], [0, x * x, 0, 0], [0, 0, x * x, 0],
          [-2 * (x - 1) * x, 0, 0, x * (3 * x - 2)]])
        for x in xs
    )
    checks.append(_check("singlet/polarized lorentz square", err, 1e-14))
    spectra = [(x, _spectrum(singlet_polarized_mixture(x), metric)) for x in xs]
    err = _max_error((sp.eigenvalues, [x * x] * 4) for x, sp in spectra)
    checks.append(_check("singlet/polarized spectrum x^2", err, 1e-7))
    err = _max_error((sp.T, -2.0 * x) for x, sp in spectra)
    checks.append(_check("singlet/polarized T = -2x", err, 1e-10))
    return checks
