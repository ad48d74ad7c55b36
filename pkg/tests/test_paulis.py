"""Pauli algebra and state-vector primitives."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edgemem.model import chain_hamiltonian
from edgemem.paulis import (
    DOWN,
    PLUS,
    UP,
    PauliString,
    StateVector,
    WeightedPauliSum,
    apply_pauli,
    apply_sum,
    expectation,
    inner,
)

# Independent dense oracle: build matrices letter by letter, no reuse of the
# package's mask representation.
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_I = np.eye(2, dtype=complex)
_LETTER = {"I": _I, "X": _X, "Y": _Y, "Z": _Z}


def dense_word(letters: str) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for ch in letters:
        out = np.kron(out, _LETTER[ch])
    return out


def up_state(n: int) -> StateVector:
    return StateVector.computational(n, 0)


def random_state(n: int, rng) -> StateVector:
    amps = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
    return StateVector(n, amps / np.linalg.norm(amps))


def hermitian_word(n: int, x_mask: int, z_mask: int, sign: int) -> PauliString:
    phase = (1j if bin(x_mask & z_mask).count("1") % 2 else 1 + 0j) * sign
    return PauliString(n, x_mask, z_mask, phase)


class TestPauliAction:
    def test_x_flips_spin(self):
        out = apply_pauli(PauliString.x(1, 1), up_state(1))
        np.testing.assert_array_equal(out.amplitudes, [0, 1])

    def test_z_signs_down_spin(self):
        down = StateVector.computational(1, 1)
        out = apply_pauli(PauliString.z(1, 1), down)
        np.testing.assert_array_equal(out.amplitudes, [0, -1])

    def test_y_convention(self):
        # Y = i X Z, so Y|up> = i|down>
        out = apply_pauli(PauliString.y(1, 1), up_state(1))
        np.testing.assert_array_equal(out.amplitudes, [0, 1j])

    def test_site_one_is_most_significant_bit(self):
        v = apply_pauli(PauliString.x(3, 1), up_state(3))
        assert v.amplitudes[0b100] == 1.0

    def test_size_mismatch_raises(self):
        with pytest.raises(ValueError):
            apply_pauli(PauliString.x(2, 1), up_state(3))

    def test_matches_dense_on_random_words(self):
        rng = np.random.default_rng(11)
        for n in (1, 2, 3, 4):
            v = random_state(n, rng)
            for _ in range(20):
                x = int(rng.integers(0, 2 ** n))
                z = int(rng.integers(0, 2 ** n))
                p = PauliString(n, x, z, PauliString(n, x, z).phase)
                dense = p.to_dense() @ v.amplitudes
                np.testing.assert_allclose(
                    apply_pauli(p, v).amplitudes, dense, atol=1e-14)

    def test_to_dense_matches_letter_oracle(self):
        p = PauliString.from_sites(3, x=(1, 3), z=(2,))
        np.testing.assert_allclose(p.to_dense(), dense_word("XZX"), atol=0)
        q = PauliString.from_sites(2, y=(1,), x=(2,))
        np.testing.assert_allclose(q.to_dense(), dense_word("YX"), atol=0)


class TestComposition:
    def test_single_site_product_table(self):
        n = 1
        X, Y, Z = PauliString.x(n, 1), PauliString.y(n, 1), PauliString.z(n, 1)
        eye = PauliString.identity(n)
        assert X @ Y == PauliString(n, 0, 1, 1j)      # XY = iZ
        assert Y @ Z == PauliString(n, 1, 0, 1j)      # YZ = iX
        assert Z @ X == PauliString(n, 1, 1, 1j * 1j)  # ZX = iY = i(iXZ)
        assert Y @ X == PauliString(n, 0, 1, -1j)
        for p in (X, Y, Z):
            assert p @ p == eye

    def test_anticommutation(self):
        X, Y, Z = (PauliString.x(1, 1), PauliString.y(1, 1), PauliString.z(1, 1))
        for a, b in ((X, Y), (Y, Z), (X, Z)):
            assert not a.commutes_with(b)
            assert a.commutes_with(a)

    @given(st.integers(0, 15), st.integers(0, 15), st.integers(0, 15),
           st.integers(0, 15), st.integers(0, 15), st.integers(0, 15))
    @settings(max_examples=60, deadline=None)
    def test_composition_associative(self, x1, z1, x2, z2, x3, z3):
        n = 4
        a, b, c = (PauliString(n, x1, z1), PauliString(n, x2, z2),
                   PauliString(n, x3, z3))
        assert (a @ b) @ c == a @ (b @ c)

    @given(st.integers(0, 15), st.integers(0, 15), st.integers(0, 15),
           st.integers(0, 15))
    @settings(max_examples=60, deadline=None)
    def test_composition_matches_dense(self, x1, z1, x2, z2):
        n = 4
        a, b = PauliString(n, x1, z1), PauliString(n, x2, z2)
        np.testing.assert_allclose((a @ b).to_dense(), a.to_dense() @ b.to_dense(),
                                   atol=1e-14)

    @given(st.integers(1, 5), st.data())
    @settings(max_examples=60, deadline=None)
    def test_hermitian_word_is_involution(self, n, data):
        x = data.draw(st.integers(0, 2 ** n - 1))
        z = data.draw(st.integers(0, 2 ** n - 1))
        sign = data.draw(st.sampled_from((1, -1)))
        p = hermitian_word(n, x, z, sign)
        assert p.is_hermitian()
        assert p @ p == PauliString.identity(n)
        rng = np.random.default_rng(x * 37 + z)
        v = random_state(n, rng)
        twice = apply_pauli(p, apply_pauli(p, v))
        np.testing.assert_array_equal(twice.amplitudes, v.amplitudes)

    def test_adjoint(self):
        p = PauliString.from_sites(3, y=(1,), x=(2,))
        np.testing.assert_allclose(p.adjoint().to_dense(),
                                   p.to_dense().conj().T, atol=0)

    def test_from_sites_rejects_overlapping_letters(self):
        with pytest.raises(ValueError, match="both x and z"):
            PauliString.from_sites(2, x=(1,), z=(1,))
        with pytest.raises(ValueError, match="both x and z"):
            PauliString.from_sites(3, x=(1,), z=(1,), y=(2,))
        with pytest.raises(ValueError, match="more than one letter"):
            PauliString.from_sites(2, x=(1,), y=(1,))

    def test_from_sites_accepts_generators(self):
        p = PauliString.from_sites(3, x=(j for j in (1, 3)), z=(j for j in (2,)))
        assert p.x_sites() == (1, 3) and p.z_sites() == (2,)


class TestWeightedSum:
    def test_apply_single_diagonal_term(self):
        h = WeightedPauliSum(((1.0, PauliString.z(1, 1)),))
        np.testing.assert_array_equal(apply_sum(h, up_state(1)), [1, 0])

    def test_apply_is_linear_in_terms(self):
        h = WeightedPauliSum(((1.0, PauliString.x(1, 1)),
                              (1.0, PauliString.z(1, 1))))
        np.testing.assert_array_equal(apply_sum(h, up_state(1)), [1, 1])

    def test_cluster_eigenstate(self):
        # |+, up, +> is an eigenstate of the single cluster term with
        # eigenvalue -1; verified against an 8-dimensional dense multiply.
        h = chain_hamiltonian(3, [0.0], 0.0)
        v = StateVector.product([PLUS, UP, PLUS])
        out = apply_sum(h, v)
        dense = h.to_dense() @ v.amplitudes
        np.testing.assert_allclose(out, dense, atol=1e-14)
        np.testing.assert_allclose(out, -v.amplitudes, atol=1e-14)

    def test_duplicate_terms_merge(self):
        p = PauliString.x(2, 1)
        h = WeightedPauliSum(((0.5, p), (0.25, p)))
        assert len(h) == 1
        assert h.terms[0][0] == 0.75

    def test_sign_folds_into_coefficient(self):
        p = PauliString(2, 1, 0, -1)
        h = WeightedPauliSum(((2.0, p),))
        coeff, term = h.terms[0]
        assert coeff == -2.0 and term.phase == 1

    def test_rejects_non_hermitian_term(self):
        with pytest.raises(ValueError):
            WeightedPauliSum(((1.0, PauliString(1, 1, 1, 1 + 0j)),))

    def test_matches_dense_on_random_hamiltonians(self):
        rng = np.random.default_rng(5)
        for n in (2, 4, 6):
            for trial in range(5):
                terms = []
                for _ in range(8):
                    x = int(rng.integers(0, 2 ** n))
                    z = int(rng.integers(0, 2 ** n))
                    sign = int(rng.choice((1, -1)))
                    terms.append((float(rng.normal()), hermitian_word(n, x, z, sign)))
                h = WeightedPauliSum(tuple(terms))
                v = random_state(n, rng)
                dense = h.to_dense() @ v.amplitudes
                err = np.linalg.norm(apply_sum(h, v) - dense)
                scale = max(np.linalg.norm(dense), 1.0)
                assert err / scale <= 1e-12


class TestExpectationInner:
    def test_expectation_values(self):
        plus = StateVector(1, PLUS)
        assert expectation(PauliString.z(1, 1), up_state(1)) == 1.0
        assert expectation(PauliString.x(1, 1), plus) == pytest.approx(1.0)
        assert expectation(PauliString.z(1, 1), plus) == pytest.approx(0.0, abs=1e-15)

    def test_expectation_requires_hermitian(self):
        with pytest.raises(ValueError):
            expectation(PauliString(1, 1, 1, 1 + 0j), up_state(1))

    def test_expectation_bounded_for_words(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            n = int(rng.integers(1, 5))
            p = hermitian_word(n, int(rng.integers(0, 2 ** n)),
                               int(rng.integers(0, 2 ** n)), 1)
            val = expectation(p, random_state(n, rng))
            assert -1.0 - 1e-12 <= val <= 1.0 + 1e-12

    def test_inner(self):
        down = StateVector.computational(1, 1)
        plus = StateVector(1, PLUS)
        assert inner(up_state(1), up_state(1)) == 1.0
        assert inner(up_state(1), down) == 0.0
        assert inner(StateVector(1, PLUS), up_state(1)) == pytest.approx(1 / np.sqrt(2))
        assert inner(plus, down) == pytest.approx(1 / np.sqrt(2))


class TestStateVector:
    def test_product_state_ordering(self):
        v = StateVector.product([UP, DOWN])
        np.testing.assert_array_equal(v.amplitudes, [0, 1, 0, 0])

    def test_norm_check(self):
        v = StateVector(1, np.array([2.0, 0.0]))
        with pytest.raises(ValueError):
            v.require_normalized()

    def test_amplitudes_read_only(self):
        v = up_state(2)
        with pytest.raises(ValueError):
            v.amplitudes[0] = 5.0
