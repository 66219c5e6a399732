"""Encoding, permutation synthesis and reencoding tests."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from mqspace import (
    ConfigurationError,
    Encoding,
    SpinSystem,
    expm_hermitian,
    iz_sorted_encoding,
    permutation_matrix,
    random_operator,
    reencode,
    synthesize_permutation,
    total_z,
)


def test_encoding_validates_bijection():
    Encoding((0, 1, 2, 3))
    with pytest.raises(ConfigurationError):
        Encoding((0, 1, 1, 3))
    with pytest.raises(ConfigurationError):
        Encoding((0, 1, 2, 4))
    with pytest.raises(ConfigurationError):
        Encoding((0, -1, 2, 3))


def test_encoding_inverse_and_identity():
    enc = Encoding((2, 0, 3, 1))
    assert enc.inverse == (1, 3, 0, 2)
    assert enc.size == 4
    assert not enc.is_identity
    assert Encoding((0, 1, 2)).is_identity


def test_cycles_are_canonical():
    # index-to-position map of (2, 0, 3, 1) sends 0->1, 1->3, 2->0, 3->2
    enc = Encoding((2, 0, 3, 1))
    assert enc.cycles() == [(0, 1, 3, 2)]
    swap = Encoding((1, 0, 3, 2))
    assert swap.cycles() == [(0, 1), (2, 3)]
    assert Encoding((0, 1, 2, 3)).cycles() == []


def test_iz_sorted_encoding_three_spins_frozen():
    enc = iz_sorted_encoding(SpinSystem(3))
    assert list(enc.permutation) == oracles.IZ_SORTED_N3


@pytest.mark.parametrize("n", range(1, 9))
def test_iz_sorted_encoding_sorts_magnetization(n):
    system = SpinSystem(n)
    enc = iz_sorted_encoding(system)
    counts = [oracles.popcount(i) for i in enc.permutation]
    assert counts == sorted(counts)
    # stability: ties keep ascending computational order
    for a, b in zip(enc.permutation, enc.permutation[1:]):
        if oracles.popcount(a) == oracles.popcount(b):
            assert a < b


@pytest.mark.parametrize("n", range(1, 9))
def test_reencoded_total_z_is_non_increasing(n):
    system = SpinSystem(n)
    enc = iz_sorted_encoding(system)
    moved = reencode(total_z(system), enc)
    diag = np.real(np.diag(moved.entries))
    assert np.all(np.diff(diag) <= 0)


def test_permutation_matrix_action():
    system = SpinSystem(2)
    enc = Encoding((2, 0, 3, 1))
    p = permutation_matrix(enc, system).entries
    assert np.allclose(p @ p.conj().T, np.eye(4))
    for j in range(4):
        e = np.zeros(4)
        e[j] = 1.0
        image = p @ e
        assert image[enc.inverse[j]] == 1.0
        assert np.count_nonzero(image) == 1


def test_permutation_matrix_size_check():
    with pytest.raises(ConfigurationError):
        permutation_matrix(Encoding((0, 1)), SpinSystem(2))


def test_reencode_equals_matrix_conjugation():
    rng = np.random.default_rng(21)
    system = SpinSystem(3)
    q = random_operator(system, rng, hermitian=True)
    enc = iz_sorted_encoding(system)
    fast = reencode(q, enc)
    p = permutation_matrix(enc, system).entries
    assert np.array_equal(fast.entries, p @ q.entries @ p.conj().T)
    assert fast.hermitian_hint is True


def test_reencode_round_trip_through_inverse():
    rng = np.random.default_rng(22)
    system = SpinSystem(3)
    q = random_operator(system, rng)
    enc = iz_sorted_encoding(system)
    back = reencode(reencode(q, enc), Encoding(enc.inverse))
    assert np.array_equal(back.entries, q.entries)


def test_synthesis_reproduces_permutation_exactly():
    system = SpinSystem(3)
    enc = iz_sorted_encoding(system)
    steps = synthesize_permutation(enc, system)
    dim = system.dim
    product = np.eye(dim, dtype=complex)
    for gen, angle in steps:
        assert gen.hermitian_hint is True
        # rank-one reflection generator: exactly one eigenvalue 1
        assert np.linalg.matrix_rank(gen.entries) == 1
        product = product @ expm_hermitian(gen, angle).entries
    target = permutation_matrix(enc, system).entries
    assert np.allclose(product, target, atol=1e-12)
    assert np.max(np.abs(product.imag)) <= 1e-12


def test_synthesis_of_identity_is_empty():
    system = SpinSystem(2)
    assert synthesize_permutation(Encoding((0, 1, 2, 3)), system) == []


def test_synthesis_step_count_matches_cycle_structure():
    # a cycle of length L costs L - 1 transpositions
    system = SpinSystem(2)
    enc = Encoding((1, 2, 3, 0))
    steps = synthesize_permutation(enc, system)
    assert len(steps) == 3


@settings(max_examples=25, deadline=None)
@given(perm=st.permutations(list(range(8))))
def test_synthesis_handles_any_permutation(perm):
    system = SpinSystem(3)
    enc = Encoding(tuple(perm))
    product = np.eye(8, dtype=complex)
    for gen, angle in synthesize_permutation(enc, system):
        product = product @ expm_hermitian(gen, angle).entries
    target = permutation_matrix(enc, system).entries
    assert np.allclose(product, target, atol=1e-12)


def test_reencode_preserves_popcount_census():
    # reencoding relabels states, so the multiset of down-spin counts
    # on the diagonal support is permuted, never changed
    rng = np.random.default_rng(23)
    system = SpinSystem(3)
    q = random_operator(system, rng)
    enc = iz_sorted_encoding(system)
    moved = reencode(q, enc)
    assert sorted(np.abs(np.diag(q.entries))) == pytest.approx(
        sorted(np.abs(np.diag(moved.entries)))
    )
    assert moved.norm() == pytest.approx(q.norm())


@pytest.mark.parametrize("n", [10, 12])
def test_large_system_encoding_stays_cheap(n):
    system = SpinSystem(n)
    enc = iz_sorted_encoding(system)
    assert enc.size == 2**n
    counts = np.bitwise_count(np.array(enc.permutation, dtype=np.uint32))
    assert np.all(np.diff(counts.astype(int)) >= 0)
