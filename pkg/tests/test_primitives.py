import numpy as np
import pytest

import blockenc as be
from blockenc.circuits import Gate

from corpus import dft_matrix, shift_matrix


class TestIdentity:
    def test_toarray(self):
        assert np.array_equal(be.Identity(be.Subspace.from_dim(3)).toarray(),
                              np.eye(3, dtype=complex))

    def test_verify(self):
        assert be.Identity(dim=6).verify().passed

    def test_resources_from_dim_8(self):
        rep = be.Identity(be.Subspace.from_dim(8)).resources()
        assert rep.main_qubits == 3 and rep.gate_counts == {}


class TestIncrement:
    def test_two_qubit_golden_circuit(self):
        circ = be.Increment(2).circuit()
        assert circ.gates == (Gate("X", (1,), ((0, 1),)), Gate("X", (0,)))
        assert be.Increment(2).normalization == 1.0

    def test_cyclic_order(self):
        for n in range(1, 5):
            m = be.Increment(n).toarray()
            assert np.allclose(np.linalg.matrix_power(m, 1 << n), np.eye(1 << n))

    def test_matrix(self):
        assert np.array_equal(be.Increment(2).toarray(), shift_matrix(4))

    def test_verify_up_to_four(self):
        for n in range(1, 5):
            assert be.Increment(n).verify().passed


class TestConstantIntegerAddition:
    def test_zero_constant_is_identity(self):
        node = be.ConstantIntegerAddition(3, 0)
        assert np.array_equal(node.toarray(), np.eye(8, dtype=complex))
        assert node.circuit().gates == ()

    def test_plus_one_matches_increment(self):
        assert np.array_equal(be.ConstantIntegerAddition(2, 1).toarray(),
                              be.Increment(2).toarray())

    def test_negative_wraps(self):
        node = be.ConstantIntegerAddition(3, -3)
        out = node.compute(np.eye(8, dtype=complex)[:, 0])
        assert np.flatnonzero(out) == [5]

    def test_verify(self):
        for c in (-3, 2, 7):
            assert be.ConstantIntegerAddition(3, c).verify().passed


class TestIntegerAddition:
    def test_zero_source_sector_is_identity(self):
        node = be.IntegerAddition(2, 2)
        m = node.toarray()
        assert np.array_equal(m[:4, :4], np.eye(4))

    def test_one_plus_zero(self):
        node = be.IntegerAddition(1, 1)
        out = node.compute(np.eye(4, dtype=complex)[:, 2])  # |a=1>|b=0>
        assert np.flatnonzero(out) == [3]

    def test_brute_force_table(self):
        node = be.IntegerAddition(3, 4)
        m = node.toarray()
        for a in range(8):
            for b in range(16):
                src = (a << 4) + b
                dst = (a << 4) + ((b + a) % 16)
                assert m[dst, src] == 1
        assert np.flatnonzero(m[:, (3 << 4) + 5]) == [(3 << 4) + 8]

    def test_verify(self):
        assert be.IntegerAddition(2, 2).verify().passed


class TestQFT:
    def test_single_qubit_is_hadamard(self):
        want = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
        assert np.max(np.abs(be.QFT(1).toarray() - want)) < 1e-12

    def test_unitarity(self):
        for n in range(1, 5):
            m = be.QFT(n).toarray()
            assert np.max(np.abs(m.conj().T @ m - np.eye(1 << n))) < 1e-12

    def test_first_column_uniform(self):
        n = 3
        col = be.QFT(n).toarray()[:, 0]
        assert np.max(np.abs(col - 2 ** (-n / 2))) < 1e-12

    def test_matches_dft_matrix(self):
        for n in range(1, 4):
            assert np.max(np.abs(be.QFT(n).toarray() - dft_matrix(n))) < 1e-12
            assert be.QFT(n).verify().passed


class TestConstantVector:
    def test_forced_state_has_empty_circuit(self):
        cv = be.ConstantVector([1.0, 0.0])
        assert cv.circuit().gates == ()
        assert cv.normalization == 1.0

    def test_half_half(self):
        cv = be.ConstantVector([0.5, 0.5])
        assert abs(cv.normalization - 1 / np.sqrt(2)) < 1e-15
        state = cv.simulate(np.ones(1, dtype=complex)) / cv.normalization
        assert np.max(np.abs(state - 1 / np.sqrt(2))) < 1e-12

    def test_random_complex_simulation(self):
        rng = np.random.default_rng(8)
        v = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        cv = be.ConstantVector(v)
        assert np.max(np.abs(cv.simulate(np.ones(1, dtype=complex)) - v)) < 1e-10
        assert cv.verify().passed

    def test_non_power_of_two_padding(self):
        rng = np.random.default_rng(9)
        v = rng.standard_normal(5)
        cv = be.ConstantVector(v)
        assert cv.dim_out == 5 and cv.main_qubits == 3
        assert cv.verify().passed

    def test_zero_vector_rejected(self):
        with pytest.raises(ValueError):
            be.ConstantVector([0.0, 0.0])


class TestPermutation:
    def test_identity_table(self):
        assert np.array_equal(be.Permutation([0, 1, 2, 3]).toarray(), np.eye(4))

    def test_plus_one_mod_four(self):
        assert np.array_equal(be.Permutation([1, 2, 3, 0]).toarray(),
                              be.Increment(2).toarray())

    def test_random_eight(self):
        rng = np.random.default_rng(10)
        table = [int(t) for t in rng.permutation(8)]
        m = be.Permutation(table).toarray()
        for i, t in enumerate(table):
            assert m[t, i] == 1
        assert m.sum() == 8
        assert be.Permutation(table).verify().passed

    def test_non_bijective_rejected(self):
        with pytest.raises(ValueError):
            be.Permutation([0, 0, 1, 2])


class TestProjection:
    def test_full_is_identity(self):
        s = be.Subspace.from_dim(8)
        node = be.Projection(s, 8, 8)
        assert np.array_equal(node.toarray(), np.eye(8))

    def test_seven_by_seven(self):
        s = be.Subspace.from_dim(8)
        node = be.Projection(s, 7, 7)
        assert np.array_equal(node.toarray(), np.eye(7))
        assert node.circuit().gates == ()

    def test_tridiagonal_slice(self):
        shift = be.Increment(3)
        ident = be.Identity(dim=8)
        node = (2 * ident - shift.adjoint() - shift)[:-1, :-1]
        circulant = 2 * np.eye(8) - shift_matrix(8, 1) - shift_matrix(8, -1)
        assert np.max(np.abs(node.toarray() - circulant[:-1, :-1])) < 1e-12

    def test_projection_chain_composes(self):
        s = be.Subspace.from_dim(8)
        chained = be.Projection(s, 4, 6) @ be.Projection(s, 6, 8)
        direct = be.Projection(s, 4, 8)
        assert np.array_equal(chained.toarray(), direct.toarray())


class TestPrimitiveInvariants:
    def test_gammas(self):
        assert be.Increment(3).normalization == 1.0
        assert be.QFT(2).normalization == 1.0
        assert be.IntegerAddition(1, 2).normalization == 1.0
        v = np.array([1.0, 2.0, 2.0])
        assert be.ConstantVector(v).normalization == 3.0

    def test_increment_adjoint_is_minus_one_addition(self):
        for n in range(1, 4):
            assert np.array_equal(be.Increment(n).adjoint().toarray(),
                                  be.ConstantIntegerAddition(n, -1).toarray())

    def test_fourier_diagonalizes_cyclic_addition(self):
        for n in range(1, 4):
            q = be.QFT(n)
            node = q @ be.ConstantIntegerAddition(n, 2) @ q.adjoint()
            m = node.toarray()
            off = m - np.diag(np.diag(m))
            assert np.max(np.abs(off)) < 1e-10
