"""Tests for single-system optimal work extraction."""

import numpy as np
import pytest

from daemonwork.quantum import Hamiltonian, OutOfRange, random_density, random_unitary
from daemonwork.quasiprob import mean_work, work_quasiprob
from daemonwork.extraction import (
    DegenerateDenominator,
    NotQubit,
    OptimizerOptions,
    average_work,
    coherent_contribution,
    energy,
    ergotropy,
    inverse_tilde,
    is_passive,
    optimal_utility,
    optimal_utility_exponential,
    optimal_utility_numeric,
    optimal_utility_qubit,
    small_z_expansion,
    tilde_state,
)
from daemonwork.utility import (
    cubic_from_xyz,
    exponential_utility,
    linear_utility,
    polynomial_utility,
    xyz_moments,
)
from daemonwork.zoo import example_state
from daemonwork.quantum import partial_trace_ancilla

from oracles import brute_max_expected_utility, brute_max_work

H01 = Hamiltonian(np.array([0.0, 1.0]))
PLUS = np.full((2, 2), 0.5, dtype=complex)
SWAP = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)

FAST = OptimizerOptions(n_starts=6, maxiter=2500, xatol=1e-6, fatol=1e-11)


def gibbs(h: Hamiltonian, r: float) -> np.ndarray:
    w = np.exp(r * h.energies)
    return np.diag(w / w.sum()).astype(complex)


class TestAverageWork:
    def test_identity_cycle(self):
        assert average_work(random_density(2, seed=1).mat, np.eye(2), H01) == 0.0

    def test_swap_population_inversion(self):
        assert average_work(np.diag([0.3, 0.7]).astype(complex), SWAP, H01) == pytest.approx(0.4)

    def test_matches_quasiprob_mean(self):
        for i in range(20):
            rho = random_density(3, seed=[60, i]).mat
            u_mat = random_unitary(3, seed=[61, i]).mat
            h = Hamiltonian(np.array([0.0, 0.7, 1.9]))
            q = np.random.default_rng([62, i]).uniform()
            assert average_work(rho, u_mat, h) == pytest.approx(
                mean_work(work_quasiprob(rho, u_mat, h, q)), abs=1e-10
            )


class TestErgotropy:
    def test_passive_state(self):
        value, _ = ergotropy(np.diag([0.7, 0.3]).astype(complex), H01)
        assert value == 0.0

    def test_population_inversion(self):
        value, u_opt = ergotropy(np.diag([0.3, 0.7]).astype(complex), H01)
        assert value == pytest.approx(0.4)
        assert average_work(np.diag([0.3, 0.7]).astype(complex), u_opt, H01) == pytest.approx(0.4)

    def test_pure_superposition(self):
        value, _ = ergotropy(PLUS, H01)
        assert value == pytest.approx(0.5)

    def test_against_grid_oracle(self):
        for i in range(5):
            rho = random_density(2, seed=[63, i]).mat
            value, _ = ergotropy(rho, H01)
            sweep = brute_max_work(rho, H01.energies)
            # the closed form dominates the sweep and the sweep resolves it
            # to its quadratic-in-step accuracy
            assert value >= sweep - 1e-9
            assert value == pytest.approx(sweep, abs=2e-3)

    def test_nonnegative_and_passive_iff_zero(self):
        for i in range(1000):
            d = 2 + i % 3
            h = Hamiltonian(np.arange(d, dtype=float))
            rho = random_density(d, seed=[64, i])
            value, _ = ergotropy(rho.mat, h)
            assert value >= 0.0
            assert (value < 1e-12) == is_passive(rho.mat, h)

    def test_optimal_unitary_achieves_value(self):
        for i in range(20):
            d = 2 + i % 3
            h = Hamiltonian(np.arange(d, dtype=float))
            rho = random_density(d, seed=[65, i]).mat
            value, u_opt = ergotropy(rho, h)
            assert average_work(rho, u_opt, h) == pytest.approx(value, abs=1e-12)


class TestIsPassive:
    def test_gibbs_like(self):
        assert is_passive(gibbs(H01, -1.0), H01)

    def test_inverted_populations(self):
        assert not is_passive(np.diag([0.3, 0.7]).astype(complex), H01)

    def test_coherent_state(self):
        assert not is_passive(PLUS, H01)


class TestTildeState:
    def test_zero_rate_identity(self):
        rho = random_density(2, seed=70).mat
        til = tilde_state(rho, H01, 0.0)
        assert np.abs(til.mat - rho).max() < 1e-14

    def test_symmetric_point_on_diagonal_state(self):
        rho = np.diag([0.3, 0.7]).astype(complex)
        til = tilde_state(rho, H01, 0.8, 0.5)
        assert np.allclose(til.mat, np.diag([0.3, 0.7 * np.exp(-0.8)]))

    def test_hermitian_and_ordered(self):
        for i in range(20):
            rho = random_density(3, seed=[71, i]).mat
            h = Hamiltonian(np.array([0.0, 0.5, 1.3]))
            til = tilde_state(rho, h, 0.9, 0.3)
            assert np.abs(til.mat - til.mat.conj().T).max() < 1e-12
            assert np.all(np.diff(til.values) <= 1e-12)

    def test_positive_at_symmetric_point(self):
        for i in range(10):
            rho = random_density(3, seed=[72, i]).mat
            h = Hamiltonian(np.array([0.0, 0.5, 1.3]))
            til = tilde_state(rho, h, -1.1, 0.5)
            assert np.linalg.eigvalsh(til.mat).min() > -1e-12

    def test_trace_identity(self):
        # Tr[tilde(rho)] = Tr[rho e^{-rH}] for every q
        rho = random_density(2, seed=73).mat
        for q in (0.0, 0.3, 0.7, 1.0):
            til = tilde_state(rho, H01, 0.6, q)
            expected = np.trace(rho @ np.diag(np.exp(-0.6 * H01.energies))).real
            assert til.mat.trace().real == pytest.approx(expected, abs=1e-12)


class TestInverseTilde:
    def test_symmetric_point_closed_form(self):
        til = random_density(2, seed=74).mat
        lift = np.diag(np.exp(0.7 * H01.energies / 2))
        assert np.abs(inverse_tilde(til, H01, 0.7, 0.5) - lift @ til @ lift).max() < 1e-12

    def test_zero_rate_identity(self):
        til = random_density(2, seed=75).mat
        assert np.abs(inverse_tilde(til, H01, 0.0, 0.3) - til).max() < 1e-14

    def test_round_trips(self):
        for i in range(20):
            rho = random_density(3, seed=[76, i]).mat
            h = Hamiltonian(np.array([0.0, 0.5, 1.3]))
            r, q = 0.7, 0.3
            forward = tilde_state(rho, h, r, q).mat
            assert np.abs(inverse_tilde(forward, h, r, q) - rho).max() < 1e-10
            back = inverse_tilde(rho, h, r, q)
            assert np.abs(tilde_state(back, h, r, q).mat - rho).max() < 1e-10


class TestExponentialClosedForm:
    def test_matched_gibbs_state_extracts_nothing(self):
        r = 1.0
        value, _ = optimal_utility_exponential(gibbs(H01, r), H01, r)
        assert value == pytest.approx(0.0, abs=1e-14)

    def test_worked_marginal_value(self):
        state = example_state(0.0, 1.0, 1.0, 0.2)
        reduced = partial_trace_ancilla(state)
        value, u_opt = optimal_utility_exponential(reduced.mat, H01, 1.0)
        assert value == pytest.approx(0.4 * np.sinh(0.5), abs=1e-12)
        # the returned cycle achieves the value through the quasiprobability
        from daemonwork.quasiprob import expected_utility

        p = work_quasiprob(reduced.mat, u_opt, H01, 0.5)
        assert expected_utility(p, exponential_utility(1.0)) == pytest.approx(value, abs=1e-12)

    def test_matches_numeric_optimizer(self):
        for i, (d, r, q) in enumerate(
            [(2, -1.0, 0.5), (2, 0.5, 0.0), (2, 1.0, 0.3), (3, -1.0, 1.0), (3, 0.5, 0.5), (3, 1.0, 0.3)]
        ):
            h = Hamiltonian(np.arange(d, dtype=float))
            rho = random_density(d, seed=[77, i]).mat
            closed, _ = optimal_utility_exponential(rho, h, r, q)
            numeric = optimal_utility_numeric(rho, h, exponential_utility(r), q, FAST)
            assert closed == pytest.approx(numeric.value, abs=1e-6)
            assert closed >= numeric.value - 1e-9


class TestQubitClosedForm:
    def test_incoherent_branches(self):
        u = cubic_from_xyz(0.7, 0.4, 0.5)
        mom = xyz_moments(u, 0.0, 1.0, 0.5)
        p = 0.2  # X - pY = 0.62 > 0
        rho = np.diag([p, 1 - p]).astype(complex)
        assert optimal_utility_qubit(rho, H01, u) == pytest.approx(mom.X - p * mom.Y)
        u = cubic_from_xyz(0.2, 0.8, 0.5)
        p = 0.9  # X - pY = -0.52 <= 0, no coherence: nothing extractable
        rho = np.diag([p, 1 - p]).astype(complex)
        assert optimal_utility_qubit(rho, H01, u) == pytest.approx(0.0)

    def test_balanced_coherent_point(self):
        # X - pY = 0 with |c| Z = 0.3: the optimum equals |c| Z, checked
        # against both the dense sweep and the numerical optimizer
        x_mom, y_mom, z_mom = 0.5, 1.0, 0.6
        p, c = 0.5, 0.5
        rho = np.array([[p, c], [c, 1 - p]], dtype=complex)
        u = cubic_from_xyz(x_mom, y_mom, z_mom)
        value = optimal_utility_qubit(rho, H01, u)
        assert value == pytest.approx(0.3, abs=1e-12)
        assert value == pytest.approx(
            brute_max_expected_utility(rho, H01.energies, 0.5, u), abs=1e-5
        )
        numeric = optimal_utility_numeric(rho, H01, u, 0.5, FAST)
        assert value == pytest.approx(numeric.value, abs=1e-6)

    def test_random_cubic_against_numeric(self):
        rng = np.random.default_rng(78)
        for i in range(12):
            x_mom, y_mom, z_mom = rng.uniform(-1, 1, size=3)
            u = cubic_from_xyz(x_mom, y_mom, z_mom)
            rho = random_density(2, seed=[79, i]).mat
            q = (0.0, 0.3, 0.5, 0.7, 1.0)[i % 5]
            value = optimal_utility_qubit(rho, H01, u, q)
            numeric = optimal_utility_numeric(rho, H01, u, q, FAST)
            assert value == pytest.approx(numeric.value, abs=1e-6)

    def test_consistent_with_exponential_form(self):
        for i in range(10):
            rho = random_density(2, seed=[80, i]).mat
            r = (-1.2, 0.4, 0.9, 1.7)[i % 4]
            q = (0.5, 0.3)[i % 2]
            via_qubit = optimal_utility_qubit(rho, H01, exponential_utility(r), q)
            via_tilde, _ = optimal_utility_exponential(rho, H01, r, q)
            assert via_qubit == pytest.approx(via_tilde, abs=1e-12)

    def test_achieving_unitary(self):
        from daemonwork.extraction import _qubit_optimum
        from daemonwork.quasiprob import expected_utility

        for i in range(10):
            rho = random_density(2, seed=[81, i]).mat
            u = cubic_from_xyz(*np.random.default_rng([82, i]).uniform(-1, 1, 3))
            value, u_opt = _qubit_optimum(rho, H01, u, 0.5)
            achieved = expected_utility(work_quasiprob(rho, u_opt, H01, 0.5), u)
            assert achieved == pytest.approx(value, abs=1e-10)

    def test_not_qubit(self):
        h3 = Hamiltonian(np.arange(3, dtype=float))
        with pytest.raises(NotQubit):
            optimal_utility_qubit(random_density(3, seed=83).mat, h3, linear_utility())


class TestSmallZExpansion:
    def test_vanishing_coupling_leading_term(self):
        assert small_z_expansion(0.8, 0.5, 0.4, 0.3, 0.0) == pytest.approx(0.6)
        assert small_z_expansion(0.8, 0.5, 0.4, 0.0, 0.7) == pytest.approx(0.6)
        assert small_z_expansion(-0.8, 0.5, 0.4, 0.0, 0.7) == pytest.approx(0.0)

    def test_against_closed_form(self):
        # D = -0.5, kappa = 0.05: residual within the kappa^6/|D|^5 envelope
        x_mom, y_mom, z_mom = -0.1, 0.8, 0.25
        p, c = 0.5, 0.2
        rho = np.array([[p, c], [c, 1 - p]], dtype=complex)
        u = cubic_from_xyz(x_mom, y_mom, z_mom)
        exact = optimal_utility_qubit(rho, H01, u)
        approx = small_z_expansion(x_mom, y_mom, p, c, z_mom)
        kappa = c * z_mom
        envelope = 4 * kappa**6 / 0.5**5
        assert abs(exact - approx) < envelope
        assert abs(exact - approx) < 1e-6

    def test_random_error_envelope(self):
        rng = np.random.default_rng(84)
        for _ in range(50):
            x_mom, y_mom = rng.uniform(-1, 1, size=2)
            p = rng.uniform(0, 1)
            d_lin = x_mom - p * y_mom
            if abs(d_lin) < 0.2:
                continue
            c = rng.uniform(0, 0.5)
            z_mom = rng.uniform(-0.2, 0.2)
            u = cubic_from_xyz(x_mom, y_mom, z_mom)
            rho = np.array([[p, c], [c, 1 - p]], dtype=complex)
            exact = optimal_utility_qubit(rho, H01, u)
            approx = small_z_expansion(x_mom, y_mom, p, c, z_mom)
            kappa = abs(c * z_mom)
            assert abs(exact - approx) <= 4 * kappa**6 / abs(d_lin) ** 5 + 1e-14

    def test_degenerate_denominator(self):
        with pytest.raises(DegenerateDenominator):
            small_z_expansion(0.5, 1.0, 0.5, 0.1, 0.1)


class TestNumericOptimizer:
    def test_linear_reduces_to_ergotropy(self):
        for i in range(5):
            rho = random_density(2, seed=[85, i]).mat
            erg, _ = ergotropy(rho, H01)
            numeric = optimal_utility_numeric(rho, H01, linear_utility(), 0.5, FAST)
            assert numeric.value == pytest.approx(erg, abs=1e-6)

    def test_never_below_trivial_starts(self):
        rho = random_density(3, seed=86).mat
        h = Hamiltonian(np.arange(3, dtype=float))
        u = polynomial_utility([1.0, -0.3, 0.1])
        numeric = optimal_utility_numeric(rho, h, u, 0.5, FAST)
        from daemonwork.quasiprob import expected_utility

        at_identity = expected_utility(work_quasiprob(rho, np.eye(3), h, 0.5), u)
        erg_u = ergotropy(rho, h).unitary
        at_ergotropy = expected_utility(work_quasiprob(rho, erg_u, h, 0.5), u)
        assert numeric.value >= at_identity - 1e-12
        assert numeric.value >= at_ergotropy - 1e-12

    def test_deterministic_given_options(self):
        rho = random_density(2, seed=87).mat
        u = cubic_from_xyz(0.3, 0.6, -0.4)
        a = optimal_utility_numeric(rho, H01, u, 0.5, FAST)
        b = optimal_utility_numeric(rho, H01, u, 0.5, FAST)
        assert a.value == b.value
        assert np.array_equal(a.unitary, b.unitary)


class TestDispatcher:
    def test_routes(self):
        rho = random_density(2, seed=88).mat
        assert optimal_utility(rho, H01, linear_utility()).method == "ergotropy"
        assert optimal_utility(rho, H01, exponential_utility(1.0)).method == "exponential"
        assert optimal_utility(rho, H01, cubic_from_xyz(0.1, 0.2, 0.3)).method == "qubit"
        h3 = Hamiltonian(np.arange(3, dtype=float))
        rho3 = random_density(3, seed=89).mat
        assert optimal_utility(rho3, h3, cubic_from_xyz(0.1, 0.2, 0.3), opts=FAST).method == "numeric"

    def test_unpacking(self):
        value, unitary = optimal_utility(random_density(2, seed=90).mat, H01, linear_utility())
        assert isinstance(value, float)
        assert unitary.shape == (2, 2)


class TestQDependence:
    def test_symmetric_point_is_local_minimum(self):
        # exponential utility: q = 1/2 minimizes the optimal value locally
        for i in range(15):
            rho = random_density(2, seed=[91, i]).mat
            r = (-0.8, 0.6, 1.2)[i % 3]
            at_half, _ = optimal_utility_exponential(rho, H01, r, 0.5)
            for q in (0.4, 0.45, 0.55, 0.6):
                other, _ = optimal_utility_exponential(rho, H01, r, q)
                assert at_half <= other + 1e-10


class TestConvexity:
    def test_mixtures_never_beat_average(self):
        rng = np.random.default_rng(92)
        for i in range(30):
            u = (linear_utility(), exponential_utility(0.9), cubic_from_xyz(0.4, 0.7, 0.2))[i % 3]
            weights = rng.dirichlet(np.ones(3))
            parts = [random_density(2, seed=[93, i, k]).mat for k in range(3)]
            mix = sum(w * p for w, p in zip(weights, parts))
            lhs = optimal_utility(mix, H01, u).value
            rhs = sum(
                w * optimal_utility(p, H01, u).value for w, p in zip(weights, parts)
            )
            assert lhs <= rhs + 1e-10


class TestCoherentContribution:
    def test_incoherent_state(self):
        rho = np.diag([0.3, 0.7]).astype(complex)
        assert coherent_contribution(rho, H01, exponential_utility(1.0)) == pytest.approx(0.0, abs=1e-12)

    def test_incoherent_utility_kills_coherence(self):
        u = cubic_from_xyz(0.5, 0.8, 0.0)  # Z = 0
        for i in range(10):
            rho = random_density(2, seed=[94, i]).mat
            assert coherent_contribution(rho, H01, u) == pytest.approx(0.0, abs=1e-12)

    def test_pure_superposition_linear(self):
        assert coherent_contribution(PLUS, H01, linear_utility()) == pytest.approx(0.5)
