"""Subspace taxonomy tests: dimensions, membership, blocks, closure."""

import math

import numpy as np
import pytest

import oracles
from mqspace import (
    ClosureReport,
    ConfigurationError,
    SpinSystem,
    SubspaceTag,
    ToleranceError,
    block_dimension,
    build_operator,
    decompose_zq,
    identity_operator,
    is_member,
    project,
    random_operator,
    selective_blocks,
    spin_operator,
    subspace_dims,
    support_mask,
    verify_closure,
    zq_offdiagonal_cells,
)
from mqspace.operators import BaseOperatorSpec

TAGS = list(SubspaceTag)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_dims_match_brute_force_census(n):
    # dual route: closed-form dimensions vs counting allowed elements
    dims = subspace_dims(n)
    for tag in TAGS:
        counted = int(oracles.pattern_mask(tag.value, n).sum())
        assert dims[tag] == counted, tag


def test_dims_n2_values():
    dims = subspace_dims(2)
    assert dims[SubspaceTag.LOMSO] == 4
    assert dims[SubspaceTag.ZERO_QUANTUM] == 6
    assert dims[SubspaceTag.EVEN_MQ] == 8
    assert dims[SubspaceTag.FULL] == 16


@pytest.mark.parametrize("n", range(2, 13))
def test_dims_form_strict_chain_from_two_spins(n):
    values = [subspace_dims(n)[t] for t in TAGS]
    assert values == sorted(values)
    assert len(set(values)) == 4


def test_single_spin_dims_collapse():
    # the three smaller subspaces coincide for one spin
    dims = subspace_dims(1)
    assert dims[SubspaceTag.LOMSO] == dims[SubspaceTag.ZERO_QUANTUM] == 2
    assert dims[SubspaceTag.EVEN_MQ] == 2
    assert dims[SubspaceTag.FULL] == 4


def test_dims_rejects_nonpositive():
    with pytest.raises(ConfigurationError):
        subspace_dims(0)


@pytest.mark.parametrize("n", range(1, 13))
def test_block_dimensions_are_binomials_and_sum_of_squares(n):
    dims = [block_dimension(n, k) for k in range(n + 1)]
    assert dims == [math.comb(n, k) for k in range(n + 1)]
    assert sum(d * d for d in dims) == subspace_dims(n)[SubspaceTag.ZERO_QUANTUM]


def test_block_dimension_range_check():
    with pytest.raises(ConfigurationError):
        block_dimension(3, -1)
    with pytest.raises(ConfigurationError):
        block_dimension(3, 4)


def test_n12_zero_quantum_fraction():
    dims = subspace_dims(12)
    ratio = dims[SubspaceTag.ZERO_QUANTUM] / dims[SubspaceTag.FULL]
    assert ratio == oracles.N12_BLOCK_RATIO


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_support_masks_match_oracle(n):
    system = SpinSystem(n)
    for tag in TAGS:
        assert np.array_equal(
            support_mask(tag, system), oracles.pattern_mask(tag.value, n)
        )


def test_support_mask_is_read_only():
    mask = support_mask(SubspaceTag.LOMSO, SpinSystem(2))
    with pytest.raises(ValueError):
        mask[0, 0] = False


def test_membership_of_named_operators():
    system = SpinSystem(2)
    iz = spin_operator(system, 1, "z")
    assert is_member(iz, SubspaceTag.LOMSO)
    ix = spin_operator(system, 1, "x")
    assert not is_member(ix, SubspaceTag.LOMSO)
    assert not is_member(ix, SubspaceTag.ZERO_QUANTUM)
    assert not is_member(ix, SubspaceTag.EVEN_MQ)
    assert is_member(ix, SubspaceTag.FULL)
    flip = build_operator(system, BaseOperatorSpec.from_label("I1+I2-", 2))
    assert is_member(flip, SubspaceTag.ZERO_QUANTUM)
    assert not is_member(flip, SubspaceTag.LOMSO)
    double = build_operator(system, BaseOperatorSpec.from_label("I1+I2+", 2))
    assert is_member(double, SubspaceTag.EVEN_MQ)
    assert not is_member(double, SubspaceTag.ZERO_QUANTUM)


def test_membership_report_fields():
    system = SpinSystem(2)
    ix = spin_operator(system, 1, "x")
    report = is_member(ix, SubspaceTag.LOMSO)
    assert report.tag is SubspaceTag.LOMSO
    assert not report.member
    assert report.residual == pytest.approx(ix.norm())
    assert report.tolerance == 1e-10
    # zero operator belongs everywhere
    zero = ix - ix
    for tag in TAGS:
        assert is_member(zero, tag)


def test_projection_splits_weight():
    rng = np.random.default_rng(2)
    system = SpinSystem(3)
    q = random_operator(system, rng)
    for tag in TAGS:
        inside = project(q, tag)
        assert is_member(inside, tag)
        outside_norm = is_member(q, tag).residual
        # Pythagoras over disjoint element sets
        assert inside.norm() ** 2 + outside_norm**2 == pytest.approx(q.norm() ** 2)
    assert np.array_equal(project(q, SubspaceTag.FULL).entries, q.entries)


def test_projection_keeps_hermitian_hint():
    rng = np.random.default_rng(3)
    h = random_operator(SpinSystem(2), rng, hermitian=True)
    assert project(h, SubspaceTag.ZERO_QUANTUM).hermitian_hint is True
    g = random_operator(SpinSystem(2), rng)
    assert project(g, SubspaceTag.ZERO_QUANTUM).hermitian_hint is None


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_selective_blocks_partition_the_basis(n):
    system = SpinSystem(n)
    blocks = selective_blocks(system)
    assert [b.k for b in blocks] == list(range(n + 1))
    seen = []
    for b in blocks:
        assert b.dimension == math.comb(n, b.k)
        for i in b.state_indices:
            assert oracles.popcount(i) == b.k
        assert list(b.state_indices) == sorted(b.state_indices)
        seen.extend(b.state_indices)
    assert sorted(seen) == list(range(2**n))


def test_decompose_zq_reassembles_exactly():
    rng = np.random.default_rng(4)
    system = SpinSystem(3)
    z = project(random_operator(system, rng, hermitian=True), SubspaceTag.ZERO_QUANTUM)
    parts = decompose_zq(z)
    assert [k for k, _ in parts] == [0, 1, 2, 3]
    total = sum(c.entries for _, c in parts)
    assert np.array_equal(total, z.entries)
    for _, c in parts:
        assert c.hermitian_hint is True
    # components live on disjoint index blocks, so they commute exactly
    for i, (_, a) in enumerate(parts):
        for _, b in parts[i + 1 :]:
            assert not (a.entries @ b.entries).any()
            assert not (b.entries @ a.entries).any()


def test_decompose_zq_rejects_non_members():
    rng = np.random.default_rng(5)
    q = random_operator(SpinSystem(2), rng)
    with pytest.raises(ToleranceError):
        decompose_zq(q)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_zq_offdiagonal_cells_are_labelled_matrix_units(n):
    system = SpinSystem(n)
    rows, cols, labels = zq_offdiagonal_cells(n)
    expected = subspace_dims(n)[SubspaceTag.ZERO_QUANTUM] - 2**n
    assert len(labels) == len(rows) == len(cols) == expected
    for i, j, label in zip(rows, cols, labels):
        assert i != j
        assert oracles.popcount(int(i)) == oracles.popcount(int(j))
        # dual route: the label must rebuild exactly the unit at (i, j)
        spec = BaseOperatorSpec.from_label(label, n)
        unit = build_operator(system, spec).entries
        ref = np.zeros((2**n, 2**n), dtype=complex)
        ref[i, j] = 1.0
        assert np.array_equal(unit, ref), label
        assert spec.shift_order == 0


def test_zq_offdiagonal_cell_labels_n2():
    rows, cols, labels = zq_offdiagonal_cells(2)
    cells = {(int(i), int(j)): lab for i, j, lab in zip(rows, cols, labels)}
    assert cells == {(1, 2): "I1+I2-", (2, 1): "I1-I2+"}


@pytest.mark.parametrize("tag", TAGS)
@pytest.mark.parametrize("n", [1, 2, 3])
def test_closure_holds_for_every_subspace(tag, n):
    report = verify_closure(tag, SpinSystem(n), trials=25, seed=1)
    assert isinstance(report, ClosureReport)
    assert report.passed
    assert report.identity_member
    assert report.checks == 75
    assert report.violations == []
    assert report.max_residual <= 1e-12


def test_closure_report_failure_path():
    # an impossible tolerance forces every check to be reported
    report = verify_closure(SubspaceTag.FULL, SpinSystem(2), trials=3, seed=0, tol=-1.0)
    assert not report.passed
    assert not report.identity_member
    assert "identity" in report.violations[0]
    assert len(report.violations) == 1 + 3 * 3
