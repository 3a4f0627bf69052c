"""Parameter sweeps, threshold bisection and randomized agreement studies."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .criteria import DEFAULT_TOLERANCES, CriteriaReport, Tolerances, analyze, evaluate_batch, plt_statistic
from .errors import NoSignChange, ParamOutOfRange
from .states import ENSEMBLES, RudolphParams, rudolph_state, singlet_polarized_mixture, werner

DEFAULT_BATCH = {"ginibre": 100_000, "separable": 100_000, "pure": 10_000}
CHUNK = 20_000


@dataclass(frozen=True)
class Family:
    """A one-parameter state family: ``werner``, ``singlet_polarized`` or ``rudolph``.

    For ``rudolph`` the swept parameter is ``t`` with ``r`` and ``s`` fixed.
    """

    name: str
    r: float | None = None
    s: float | None = None

    def __post_init__(self):
        if self.name not in ("werner", "singlet_polarized", "rudolph"):
            raise ParamOutOfRange(f"unknown family {self.name!r}")
        if self.name == "rudolph" and (self.r is None or self.s is None):
            raise ParamOutOfRange("the rudolph family needs fixed r and s")

    def state(self, param: float) -> np.ndarray:
        if self.name == "werner":
            return werner(param)
        if self.name == "singlet_polarized":
            return singlet_polarized_mixture(param)
        return rudolph_state(RudolphParams(self.r, self.s, param))

    def check_range(self, lo: float, hi: float) -> None:
        if self.name == "rudolph":
            # validity is monotone in |t|, so the endpoints cover the interval
            RudolphParams(self.r, self.s, lo).validate()
            RudolphParams(self.r, self.s, hi).validate()
        elif not (0.0 <= lo and hi <= 1.0):
            raise ParamOutOfRange(f"{self.name} parameter must stay in [0, 1], got [{lo!r}, {hi!r}]")

    def statistic(self, param: float, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
        return float(plt_statistic(self.state(param), tol).T)


@dataclass(frozen=True)
class SweepRow:
    param: float
    T: float
    T_normalized: float
    plt_verdict: str
    ppt_min_eig: float
    ppt_verdict: str
    ccn_norm: float
    concurrence: float

    @classmethod
    def from_report(cls, param: float, report: CriteriaReport) -> SweepRow:
        return cls(
            param=param,
            T=float(report.plt.T),
            T_normalized=float(report.plt.T_normalized),
            plt_verdict=report.plt_verdict.label.value,
            ppt_min_eig=report.ppt_min_eig,
            ppt_verdict=report.ppt_verdict.label.value,
            ccn_norm=report.ccn_norm,
            concurrence=report.concurrence,
        )


def grid(lo: float, hi: float, steps: int) -> list[float]:
    """``steps`` points from ``lo`` to ``hi`` inclusive.

    Each point is ``(lo*(n-k) + hi*k) / n``, a single rounding away from the
    exact rational grid point, so ``k/100`` on ``[0, 1]`` is exactly the double
    nearest to ``k/100``.
    """
    if steps < 2:
        raise ParamOutOfRange(f"a sweep needs at least 2 steps, got {steps}")
    if not lo < hi:
        raise ParamOutOfRange(f"need lo < hi, got [{lo!r}, {hi!r}]")
    n = steps - 1
    return [lo if k == 0 else hi if k == n else (lo * (n - k) + hi * k) / n for k in range(steps)]


def sweep(family: Family, lo: float, hi: float, steps: int, tol: Tolerances = DEFAULT_TOLERANCES) -> list[SweepRow]:
    family.check_range(lo, hi)
    points = grid(lo, hi, steps)
    return [SweepRow.from_report(p, analyze(family.state(p), tol)) for p in points]


def sign_changes(rows: list[SweepRow]) -> list[tuple[float, float]]:
    """Consecutive grid intervals where ``T`` changes sign (zeros count as a side)."""
    out = []
    for left, right in zip(rows, rows[1:]):
        if (left.T > 0.0 and right.T <= 0.0) or (left.T < 0.0 and right.T >= 0.0):
            out.append((left.param, right.param))
    return out


def bisect_zero(fn, lo: float, hi: float, tol: float) -> float:
    """Bisection for a sign change of ``fn`` on ``[lo, hi]``, to width ``tol``.

    Raises
    ------
    NoSignChange
        If ``fn(lo)`` and ``fn(hi)`` do not have strictly opposite signs.
    """
    if not tol > 0.0:
        raise ParamOutOfRange(f"tolerance must be positive, got {tol!r}")
    f_lo, f_hi = fn(lo), fn(hi)
    if not f_lo * f_hi < 0.0:
        raise NoSignChange(f"T({lo!r}) = {f_lo:.6g} and T({hi!r}) = {f_hi:.6g} do not bracket a zero")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        f_mid = fn(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid > 0.0) == (f_lo > 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def bisect_threshold(family: Family, lo: float, hi: float, tol: float = 1e-12) -> float:
    """Parameter where the family's ``T`` crosses zero, located to within ``tol``."""
    family.check_range(lo, hi)
    return bisect_zero(family.statistic, lo, hi, tol)


# --- agreement studies -------------------------------------------------------------


def state_seed(master: int, index: int) -> int:
    """Per-state 64-bit seed derived from ``(master, index)`` alone.

    Independent of evaluation order, so any state of a batch can be rebuilt
    in isolation.
    """
    words = np.random.SeedSequence([int(master), int(index)]).generate_state(2, dtype=np.uint32)
    return int(words[0]) | (int(words[1]) << 32)


def make_state(ensemble: str, seed: int) -> np.ndarray:
    try:
        return ENSEMBLES[ensemble](seed)
    except KeyError:
        raise ParamOutOfRange(f"unknown ensemble {ensemble!r}; choose from {sorted(ENSEMBLES)}") from None


@dataclass
class AgreementStats:
    """Counts from one PLT-versus-PPT batch.

    ``total = agree + disagree + boundary_excluded``. States where the
    eigensolver failed count as disagreements (agreement could not be
    established) and are also tallied in ``failures``. Ratios are taken
    against ``max|B|``.
    """

    ensemble: str
    seed: int
    total: int = 0
    agree: int = 0
    disagree: int = 0
    boundary_excluded: int = 0
    positivity_violations: int = 0
    failures: int = 0
    plt_entangled: int = 0
    ppt_entangled: int = 0
    max_abs_imag_ratio: float = 0.0
    min_real_ratio: float = 0.0
    disagreeing_seeds: list[int] = field(default_factory=list)
    violating_seeds: list[int] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.disagree == 0 and self.positivity_violations == 0

    def to_dict(self) -> dict:
        return asdict(self)

    def merge_chunk(self, seeds: list[int], result) -> None:
        spec = result.spectrum
        failed = ~np.isfinite(spec.min_real) | ~np.isfinite(spec.imag_residue)
        boundary = ((result.plt_codes == 0) | (result.ppt_codes == 0)) & ~failed
        agree = (result.plt_codes == result.ppt_codes) & ~boundary & ~failed
        disagree = ~agree & ~boundary
        self.total += len(seeds)
        self.agree += int(agree.sum())
        self.disagree += int(disagree.sum())
        self.boundary_excluded += int(boundary.sum())
        self.failures += int(failed.sum())
        self.positivity_violations += int(spec.violation.sum())
        self.plt_entangled += int((result.plt_codes == -1).sum())
        self.ppt_entangled += int((result.ppt_codes == -1).sum())
        nonzero = result.b_norm > 0.0
        safe = np.where(nonzero, result.b_norm, 1.0)
        with np.errstate(invalid="ignore"):
            imag = np.where(nonzero & ~failed, spec.imag_residue / safe, 0.0)
            real = np.where(nonzero & ~failed, spec.min_real / safe, 0.0)
        self.max_abs_imag_ratio = max(self.max_abs_imag_ratio, float(imag.max(initial=0.0)))
        self.min_real_ratio = min(self.min_real_ratio, float(real.min(initial=0.0)))
        self.disagreeing_seeds.extend(seeds[i] for i in np.flatnonzero(disagree))
        self.violating_seeds.extend(seeds[i] for i in np.flatnonzero(spec.violation))


def compare_batch(
    ensemble: str, n: int, seed: int, tol: Tolerances = DEFAULT_TOLERANCES, chunk: int = CHUNK
) -> AgreementStats:
    """Compare the Lorentz and partial-transpose verdicts on ``n`` random states.

    State ``i`` is generated from ``state_seed(seed, i)``; chunking only
    affects memory use, never the counts.
    """
    if n < 1:
        raise ParamOutOfRange(f"batch size must be at least 1, got {n}")
    make_state(ensemble, 0)
    stats = AgreementStats(ensemble=ensemble, seed=int(seed))
    for start in range(0, n, chunk):
        seeds = [state_seed(seed, i) for i in range(start, min(start + chunk, n))]
        rhos = np.stack([ENSEMBLES[ensemble](s) for s in seeds])
        stats.merge_chunk(seeds, evaluate_batch(rhos, tol))
    return stats


def replay(ensemble: str, per_state_seed: int, tol: Tolerances = DEFAULT_TOLERANCES) -> CriteriaReport:
    """Full report for one state of a batch, from its stored per-state seed."""
    return analyze(make_state(ensemble, per_state_seed), tol, label=f"{ensemble}:{per_state_seed}")


def rudolph_normalized_slope(r: float, s: float) -> float:
    """Slope of ``T / mu0`` in ``|t|``: ``-2 / sqrt((1 - s)(1 + r))``."""
    return -2.0 / math.sqrt((1.0 - s) * (1.0 + r))
