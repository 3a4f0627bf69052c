import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qubitplt import states
from qubitplt.errors import NonHermitianInput, NonUnitaryInput, NotADensityMatrix, ParamOutOfRange

unit = st.floats(0.0, 1.0)
seeds = st.integers(0, 2**64 - 1)


def test_basis_convention():
    # |0> = |up> is the +1 eigenvector of sigma_z; |ab> sits at index 2a + b
    assert states.SIGMA_Z @ states.UP == pytest.approx(states.UP)
    up_down = np.kron(states.UP, states.DOWN)
    assert np.flatnonzero(up_down) == [1]
    np.testing.assert_allclose(states.SINGLET, [0, 1 / np.sqrt(2), -1 / np.sqrt(2), 0])


class TestValidate:
    def test_accepts_unnormalized(self):
        rho = states.validate_density(3.0 * states.werner(0.2))
        assert np.trace(rho).real == pytest.approx(3.0)

    def test_shape(self):
        with pytest.raises(NotADensityMatrix):
            states.validate_density(np.eye(3))

    def test_non_finite(self):
        rho = np.eye(4, dtype=complex)
        rho[2, 2] = np.nan
        with pytest.raises(NotADensityMatrix):
            states.validate_density(rho)

    def test_non_hermitian(self):
        rho = np.eye(4, dtype=complex)
        rho[0, 3] = 0.1j
        with pytest.raises(NonHermitianInput) as info:
            states.validate_density(rho)
        assert info.value.residual == pytest.approx(0.1)

    def test_negative_eigenvalue(self):
        with pytest.raises(NotADensityMatrix) as info:
            states.validate_density(np.diag([1.0, 1.0, 1.0, -0.5]))
        assert info.value.residual == pytest.approx(-0.5)

    def test_zero_trace(self):
        with pytest.raises(NotADensityMatrix):
            states.validate_density(np.zeros((4, 4)))


class TestFamilies:
    def test_werner_endpoints(self):
        np.testing.assert_allclose(states.werner(0.0), np.eye(4) / 4)
        np.testing.assert_allclose(states.werner(1.0), states.projector(states.SINGLET))

    @pytest.mark.parametrize("alpha", [-0.1, 1.5])
    def test_werner_range(self, alpha):
        with pytest.raises(ParamOutOfRange):
            states.werner(alpha)

    def test_rudolph_matrix(self):
        rho = states.rudolph_state(states.RudolphParams(0.25, 0.5, 1 / 16))
        want = np.zeros((4, 4))
        want[0, 0] = (1 + 0.25 + 0.5 + 0.75) / 4
        want[1, 1] = (1 + 0.25 - 0.5 - 0.75) / 4
        want[2, 2] = (1 - 0.25 + 0.5 - 0.75) / 4
        want[3, 3] = (1 - 0.25 - 0.5 + 0.75) / 4
        # t (XX - YY) couples |00> and |11> with weight 2t
        want[0, 3] = want[3, 0] = 2 * (1 / 16) / 4
        np.testing.assert_allclose(rho, want, atol=1e-15)

    @pytest.mark.parametrize(
        "params, clause",
        [((0.5, 0.25, 0.0), "s - r"), ((-1.5, 0.5, 0.0), "|r|"), ((0.0, 1.5, 0.0), "|s|"), ((0.25, 0.5, 0.8), "t^2")],
    )
    def test_rudolph_validation_names_clause(self, params, clause):
        with pytest.raises(ParamOutOfRange, match=clause.replace("|", r"\|").replace("^", r"\^")):
            states.rudolph_state(states.RudolphParams(*params))

    @given(st.floats(-1.0, 1.0), st.floats(-1.0, 1.0), unit)
    def test_rudolph_valid_region_is_physical(self, r, s, frac):
        if s < r:
            r, s = s, r
        p = states.RudolphParams(r, s, frac * np.sqrt((1 - s) * (1 + r)))
        states.validate_density(states.rudolph_state(p), psd_tol=1e-9)

    @given(unit)
    def test_singlet_polarized_is_state(self, x):
        rho = states.validate_density(states.singlet_polarized_mixture(x))
        assert np.trace(rho).real == pytest.approx(1.0)

    def test_bloch_checks(self):
        with pytest.raises(ParamOutOfRange):
            states.qubit_state([1.0, 1.0, 0.0])
        with pytest.raises(ParamOutOfRange):
            states.qubit_state([1.0, 0.0])

    def test_product_state(self):
        rho = states.product_state([0, 0, 1], [0, 0, -1])
        np.testing.assert_allclose(rho, states.projector(np.kron(states.UP, states.DOWN)))


class TestRandom:
    @pytest.mark.parametrize("name", sorted(states.ENSEMBLES))
    def test_reproducible(self, name):
        gen = states.ENSEMBLES[name]
        np.testing.assert_array_equal(gen(123), gen(123))
        assert not np.array_equal(gen(123), gen(124))

    @pytest.mark.parametrize("name", sorted(states.ENSEMBLES))
    @given(seed=seeds)
    def test_generates_states(self, name, seed):
        states.validate_density(states.ENSEMBLES[name](seed))

    def test_pure_is_rank_one(self):
        rho = states.random_pure(5)
        np.testing.assert_allclose(rho @ rho, rho, atol=1e-14)

    def test_separable_unit_trace(self):
        assert np.trace(states.random_separable(9)).real == pytest.approx(1.0)

    def test_separable_parameters(self):
        with pytest.raises(ParamOutOfRange):
            states.random_separable(1, k=0)
        with pytest.raises(ParamOutOfRange):
            states.random_separable(1, max_radius=1.5)
        rho = states.random_separable(1, k=1, max_radius=0.0)
        np.testing.assert_allclose(rho, np.eye(4) / 4, atol=1e-15)

    @given(seed=seeds)
    def test_unitary(self, seed):
        u = states.random_unitary(seed)
        np.testing.assert_allclose(u @ u.conj().T, np.eye(2), atol=1e-13)


def test_local_unitary_preserves_spectrum():
    rho = states.random_ginibre(3)
    out = states.apply_local_unitary(rho, states.random_unitary(1), states.random_unitary(2))
    np.testing.assert_allclose(np.linalg.eigvalsh(out), np.linalg.eigvalsh(rho), atol=1e-12)


def test_local_unitary_rejects_non_unitary():
    with pytest.raises(NonUnitaryInput):
        states.apply_local_unitary(np.eye(4), 2 * np.eye(2), np.eye(2))
