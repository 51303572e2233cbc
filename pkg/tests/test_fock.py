import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bogoliubov.algebra import QuadraticProblem
from bogoliubov.diagonalize import diagonalize
from bogoliubov.energy import classical_energy, normal_energy
from bogoliubov.errors import InvalidInput, SizeLimit
from bogoliubov.fock import (StateVector, TruncationWarning, annihilation, build_basis,
                             coherent_state, creation, d_gamma, ground_energy,
                             implementation_residual, implementer_group_check,
                             lowest_eigenpairs, natural_implementer,
                             ntau_and_iuy_checks, oracle_ground_energy,
                             pairing_positivity_margin, quadratic_hamiltonian,
                             reduced_density_and_pairing, second_quantize,
                             vacuum_overlap)

from problem_factory import random_problem, single_mode


class TestBasis:
    @pytest.mark.parametrize("m, cutoff, size", [(1, 3, 4), (2, 2, 6), (3, 4, 35)])
    def test_sizes(self, m, cutoff, size):
        b = build_basis(m, cutoff)
        assert b.size == size == math.comb(m + cutoff, m)
        assert not b.states[0].any()

    def test_graded_lexicographic_order_and_index(self):
        b = build_basis(3, 4)
        keys = [(int(s.sum()), tuple(s)) for s in b.states]
        assert keys == sorted(keys)
        for k, s in enumerate(b.states):
            assert b.index(s) == k

    def test_index_rejects_outside(self):
        b = build_basis(2, 3)
        with pytest.raises(InvalidInput):
            b.index([2, 2])
        with pytest.raises(InvalidInput):
            b.index([-1, 0])

    def test_size_cap(self):
        with pytest.raises(SizeLimit):
            build_basis(10, 10, size_cap=1000)
        with pytest.raises(InvalidInput):
            build_basis(0, 3)


class TestLadders:
    def test_single_mode_creation_matrix(self):
        b = build_basis(1, 2)
        assert np.allclose(creation(0, b).dense(), [[0, 0, 0], [1, 0, 0], [0, np.sqrt(2), 0]])
        assert np.allclose(annihilation(0, b).dense(), creation(0, b).dense().T)

    def test_mode_range(self):
        with pytest.raises(InvalidInput):
            creation(2, build_basis(2, 2))

    def test_ccr_below_cutoff(self):
        b = build_basis(3, 5)
        low = b.window(b.cutoff - 1)
        a = [annihilation(i, b).matrix for i in range(3)]
        ad = [creation(i, b).matrix for i in range(3)]
        for i in range(3):
            for j in range(3):
                comm = (a[i] @ ad[j] - ad[j] @ a[i]).toarray()[np.ix_(low, low)]
                assert np.allclose(comm, np.eye(low.size) * (i == j))
                assert np.allclose((a[i] @ a[j] - a[j] @ a[i]).toarray(), 0)

    def test_annihilation_kills_vacuum(self):
        b = build_basis(2, 3)
        assert np.allclose(annihilation(1, b) @ b.vacuum(), 0)


def test_quadratic_hamiltonian_is_hermitian():
    p = random_problem(np.random.default_rng(0), 3)
    b = build_basis(3, 6)
    for ordering in ("normal", "weyl"):
        assert quadratic_hamiltonian(p, b, ordering).hermiticity_residual() <= 1e-12


def test_weyl_ordering_shifts_by_half_trace():
    p = single_mode()
    b = build_basis(1, 8)
    diff = quadratic_hamiltonian(p, b, "weyl").dense() - quadratic_hamiltonian(p, b, "normal").dense()
    assert np.allclose(diff, 0.5 * np.eye(b.size))


def test_free_hamiltonian_ground_state_is_vacuum():
    b = build_basis(2, 4)
    e, psi = ground_energy(d_gamma(np.diag([1.0, 2.0]), b))
    assert e == pytest.approx(0.0, abs=1e-12)
    assert abs(psi.amplitudes[0]) == pytest.approx(1.0)


def test_single_mode_oracle_converges():
    errs = [abs(ground_energy(quadratic_hamiltonian(single_mode(), build_basis(1, n)))[0] + 0.1)
            for n in (8, 16, 32, 64)]
    assert errs[-1] <= 1e-8
    # below 1e-14 the error is roundoff and need not decrease any further
    assert all(b < a or b < 1e-14 for a, b in zip(errs, errs[1:]))


def test_two_mode_fixture_ground_energy():
    p = QuadraticProblem(np.diag([1.2, 2.1]), np.diag([0.2, 0.1]))
    e, _ = ground_energy(quadratic_hamiltonian(p, build_basis(2, 40)))
    assert e == pytest.approx(-0.009583, abs=1e-6)


def test_low_spectrum_spacing():
    vals, _ = lowest_eigenpairs(quadratic_hamiltonian(single_mode(), build_basis(1, 64)), k=4)
    assert np.allclose(vals, -0.1 + 0.8 * np.arange(4), atol=1e-6)


def test_sparse_eigensolver_path():
    p = random_problem(np.random.default_rng(1), 3, a_max=0.5)
    b = build_basis(3, 24)
    assert b.size > 2000
    e, _ = ground_energy(quadratic_hamiltonian(p, b))
    assert e == pytest.approx(normal_energy(p, "fs1"), abs=1e-6)


def test_adaptive_oracle():
    e, cutoff = oracle_ground_energy(single_mode(), tol=1e-8)
    assert e == pytest.approx(-0.1, abs=1e-8) and cutoff >= 32


class TestCoherentState:
    def test_zero_is_vacuum(self):
        b = build_basis(2, 6)
        assert np.allclose(coherent_state(np.zeros(2), b).amplitudes, b.vacuum().amplitudes)

    def test_poisson_ratio(self):
        psi = coherent_state(np.array([0.5]), build_basis(1, 32)).amplitudes
        assert abs(psi[1] / psi[0]) == pytest.approx(0.5, abs=1e-10)

    def test_truncation_warning(self):
        with pytest.warns(TruncationWarning):
            coherent_state(np.array([3.0]), build_basis(1, 8))

    @pytest.mark.parametrize("seed", range(4))
    def test_energy_matches_classical(self, seed):
        rng = np.random.default_rng(seed)
        p = random_problem(rng, 2)
        b = build_basis(2, 32)
        w = rng.normal(size=2) + 1j * rng.normal(size=2)
        w *= rng.uniform(0.1, 1.0) / np.linalg.norm(w)
        val = coherent_state(w, b).expectation(quadratic_hamiltonian(p, b)).real
        assert val == pytest.approx(classical_energy(p, w), abs=1e-6)


class TestImplementer:
    def test_identity(self):
        b = build_basis(2, 5)
        assert np.allclose(natural_implementer(np.eye(4), b).dense(), np.eye(b.size))

    @pytest.mark.parametrize("gamma", [0.6, 0.3j, -0.45 + 0.2j])
    def test_single_mode_relation_and_overlap(self, gamma):
        b = build_basis(1, 64)
        R = diagonalize(single_mode(gamma)).R
        assert implementation_residual(R, b) <= 1e-6
        u00, expected = vacuum_overlap(R, b)
        assert u00.real == pytest.approx(expected, abs=1e-6) and abs(u00.imag) < 1e-12

    def test_two_mode_relation(self):
        p = QuadraticProblem([[1.0, 0.2], [0.2, 1.5]], [[0.3, 0.1], [0.1, 0.2j]])
        R = diagonalize(p).R
        b = build_basis(2, 14)
        assert implementation_residual(R, b) <= 1e-6

    def test_group_property(self):
        b = build_basis(1, 64)
        r1 = diagonalize(single_mode(0.3)).R.data
        r2 = diagonalize(single_mode(0.2 - 0.1j)).R.data
        phase, res = implementer_group_check(r1, r2, b)
        assert res <= 1e-5 and abs(abs(phase) - 1) < 1e-12
        phase, res = implementer_group_check(np.eye(2), np.eye(2), b)
        assert phase == pytest.approx(1) and res == pytest.approx(0, abs=1e-14)

    def test_inverse_gives_identity_up_to_phase(self):
        b = build_basis(1, 64)
        r = diagonalize(single_mode(0.5)).R.data
        inv = np.diag([1, -1]) @ r.conj().T @ np.diag([1, -1])
        _, res = implementer_group_check(r, inv, b)
        assert res <= 1e-5

    def test_implementer_diagonalizes_hamiltonian(self):
        p = single_mode()
        b = build_basis(1, 96)
        U = natural_implementer(diagonalize(p).R, b).matrix
        H = quadratic_hamiltonian(p, b).matrix
        w = b.window(24)
        # U* H U restricted to low quanta is dΓ(h_dg) + E^n
        d = (U.conj().T @ H @ U).toarray()[np.ix_(w, w)]
        assert np.allclose(d, np.diag(-0.1 + 0.8 * np.arange(w.size)), atol=1e-8)

    def test_second_quantize_nondiagonal(self):
        b = build_basis(2, 4)
        theta = 0.3
        c = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
        G = second_quantize(c, b).dense()
        assert np.allclose(G.conj().T @ G, np.eye(b.size), atol=1e-10)
        # one-particle sector transforms like c
        one = b.window(1)[1:]
        assert np.allclose(G[np.ix_(one, one)], c[::-1, ::-1] if b.states[1][0] == 0 else c, atol=1e-10)


class TestReducedDensity:
    def test_vacuum(self):
        gamma, alpha = reduced_density_and_pairing(build_basis(2, 3).vacuum())
        assert np.allclose(gamma, 0) and np.allclose(alpha, 0)

    def test_number_state(self):
        b = build_basis(1, 4)
        amps = np.zeros(b.size)
        amps[2] = 1
        gamma, alpha = reduced_density_and_pairing(StateVector(b, amps))
        assert np.allclose(gamma, [[2]]) and np.allclose(alpha, [[0]])

    def test_ground_state_saturates_pairing_bound(self):
        _, psi = ground_energy(quadratic_hamiltonian(single_mode(), build_basis(1, 64)))
        gamma, alpha = reduced_density_and_pairing(psi)
        bound = alpha @ np.linalg.inv(np.eye(1) + gamma.conj()) @ alpha.conj()
        assert (gamma - bound).real.min() >= -1e-10
        assert pairing_positivity_margin(gamma, alpha) >= -1e-10


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_estimates_hold_on_random_states(seed):
    rng = np.random.default_rng(seed)
    p = random_problem(rng, 2)
    b = build_basis(2, 8)
    w = b.window(3)
    amps = np.zeros(b.size, dtype=complex)
    amps[w] = rng.normal(size=w.size) + 1j * rng.normal(size=w.size)
    rep = ntau_and_iuy_checks(p, StateVector(b, amps), seed=seed)
    assert rep.ntau_margins.min() >= -1e-9
    assert rep.iuy_margin >= -1e-9
    assert rep.pairing_margin >= -1e-9


def test_estimates_on_vacuum_are_trivial():
    b = build_basis(1, 8)
    rep = ntau_and_iuy_checks(single_mode(), b.vacuum())
    assert np.allclose(rep.ntau_margins, 0)
