"""Two-qubit entanglement detection with the partial Lorentz transformation test.

The coefficient matrix ``A[mu, nu] = Tr(rho sigma_mu (x) sigma_nu)`` is squared
with the Minkowski metric into ``B = A G A^T G``. With ``mu_a`` the square roots
of the eigenvalues of ``B`` (``mu_0`` the largest), a state is separable iff
``T = mu_0 - mu_1 - mu_2 - mu_3 >= 0``.
"""

from .criteria import (
    MINKOWSKI,
    CriteriaReport,
    Label,
    PltSpectrum,
    Tolerances,
    Verdict,
    analyze,
    ccn_norm,
    ccn_verdict,
    concurrence,
    lorentz_square,
    partial_transpose,
    pauli_coefficients,
    plt_spectrum,
    plt_statistic,
    plt_verdict,
    ppt_verdict,
    realignment,
    reconstruct_density,
)
from .errors import *  # noqa: F401,F403
from .harness import AgreementStats, Family, SweepRow, bisect_threshold, compare_batch, sweep
from .states import (
    RudolphParams,
    apply_local_unitary,
    product_state,
    random_ginibre,
    random_pure,
    random_separable,
    rudolph_state,
    singlet_polarized_mixture,
    werner,
)

__version__ = "0.1.0"
