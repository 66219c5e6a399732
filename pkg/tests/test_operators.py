"""Core operator tests: base operators, labels, expansions, orders."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from mqspace import (
    CARTESIAN,
    SHIFT,
    BaseOperatorSpec,
    ConfigurationError,
    Operator,
    SpinSystem,
    ToleranceError,
    build_operator,
    coherence_order_of_element,
    commutator,
    enumerate_basis,
    expand,
    hs_inner,
    identity_operator,
    max_spins,
    order_components,
    random_operator,
    spin_operator,
    total_z,
)
from mqspace.operators import reconstruct


def test_spin_system_validation():
    with pytest.raises(ConfigurationError):
        SpinSystem(0)
    with pytest.raises(ConfigurationError):
        SpinSystem(-2)
    with pytest.raises(ConfigurationError):
        SpinSystem(True)
    with pytest.raises(ConfigurationError):
        SpinSystem(max_spins() + 1)
    assert SpinSystem(3).dim == 8


def test_max_spins_env_override(monkeypatch):
    monkeypatch.setenv("MQSPACE_MAX_N", "2")
    assert max_spins() == 2
    with pytest.raises(ConfigurationError):
        SpinSystem(3)
    monkeypatch.delenv("MQSPACE_MAX_N")
    assert max_spins() == 12


def test_down_counts_and_magnetizations():
    system = SpinSystem(3)
    assert list(system.down_counts()) == [0, 1, 1, 2, 1, 2, 2, 3]
    mags = system.magnetizations()
    assert mags[0] == pytest.approx(1.5)
    assert mags[-1] == pytest.approx(-1.5)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_cartesian_base_operators_match_kron_oracle(n):
    system = SpinSystem(n)
    for spec in enumerate_basis(system, CARTESIAN):
        mine = build_operator(system, spec).entries
        ref = oracles.cartesian_base(spec.factors)
        assert np.array_equal(mine, ref), spec.label


@pytest.mark.parametrize("n", [1, 2, 3])
def test_shift_base_operators_match_kron_oracle(n):
    system = SpinSystem(n)
    for spec in enumerate_basis(system, SHIFT):
        mine = build_operator(system, spec).entries
        ref = oracles.shift_base(spec.factors)
        assert np.array_equal(mine, ref), spec.label


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_cartesian_base_operator_norms(n):
    # every base operator has squared Frobenius norm 2^(n-2)
    system = SpinSystem(n)
    for spec in enumerate_basis(system, CARTESIAN):
        op = build_operator(system, spec)
        assert op.norm() ** 2 == pytest.approx(2.0 ** (n - 2), rel=1e-12)


def test_shift_bases_are_matrix_units():
    system = SpinSystem(2)
    seen = set()
    for spec in enumerate_basis(system, SHIFT):
        m = build_operator(system, spec).entries
        positions = np.argwhere(m != 0)
        assert len(positions) == 1
        assert m[tuple(positions[0])] == 1.0
        seen.add(tuple(positions[0]))
    assert len(seen) == 16


def test_labels_of_known_operators():
    assert BaseOperatorSpec(CARTESIAN, ("e", "e")).label == "E/2"
    assert BaseOperatorSpec(CARTESIAN, ("z", "e", "e")).label == "I1z"
    assert BaseOperatorSpec(CARTESIAN, ("z", "z", "e")).label == "2I1zI2z"
    assert BaseOperatorSpec(CARTESIAN, ("z", "z", "z")).label == "4I1zI2zI3z"
    assert BaseOperatorSpec(CARTESIAN, ("x", "e", "y")).label == "2I1xI3y"
    assert BaseOperatorSpec(SHIFT, ("+", "-")).label == "I1+I2-"
    assert BaseOperatorSpec(SHIFT, ("a", "b")).label == "a1b2"
    assert BaseOperatorSpec(SHIFT, ("a", "+", "-")).label == "a1I2+I3-"


@pytest.mark.parametrize(
    "label",
    [
        "2I1z",          # q=1 must omit the prefactor
        "I1zI2z",        # q=2 needs prefactor 2
        "4I1zI2z",       # wrong power
        "2I2zI1z",       # spins must ascend
        "2I1zI1x",       # repeated spin
        "I9z",           # spin beyond system
        "a1",            # shift labels cover every spin
        "I1+I1-",        # repeated spin
        "b2a1",          # shift spins must ascend
        "E",             # not a label
        "",
    ],
)
def test_label_parse_rejections(label):
    with pytest.raises(ConfigurationError):
        BaseOperatorSpec.from_label(label, 2)


@given(
    factors=st.lists(st.sampled_from("exyz"), min_size=1, max_size=5),
)
def test_cartesian_label_round_trip(factors):
    spec = BaseOperatorSpec(CARTESIAN, tuple(factors))
    assert BaseOperatorSpec.from_label(spec.label, len(factors)) == spec


@given(
    factors=st.lists(st.sampled_from("ab+-"), min_size=1, max_size=5),
)
def test_shift_label_round_trip(factors):
    spec = BaseOperatorSpec(SHIFT, tuple(factors))
    assert BaseOperatorSpec.from_label(spec.label, len(factors)) == spec


def test_operator_requires_square_matching_dimension():
    system = SpinSystem(2)
    with pytest.raises(ConfigurationError):
        Operator(system, np.zeros((3, 3)))
    with pytest.raises(ConfigurationError):
        Operator(system, np.zeros((4, 3)))


def test_hermitian_hint_is_checked_at_construction():
    system = SpinSystem(1)
    bad = np.array([[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(ToleranceError):
        Operator(system, bad, True)
    op = Operator(system, bad)
    assert op.hermitian_hint is None
    assert op.hermiticity_defect() == pytest.approx(1.0)


def test_operator_entries_are_immutable():
    op = spin_operator(SpinSystem(1), 1, "z")
    with pytest.raises(ValueError):
        op.entries[0, 0] = 9.0


def test_operator_arithmetic_and_hint_propagation():
    system = SpinSystem(2)
    a = spin_operator(system, 1, "x")
    b = spin_operator(system, 2, "y")
    s = a + b
    assert s.hermitian_hint is True
    assert np.array_equal(s.entries, a.entries + b.entries)
    d = a - b
    assert d.hermitian_hint is True
    assert (2.0 * a).hermitian_hint is True
    assert (1j * a).hermitian_hint is None
    assert (a @ b).hermitian_hint is None
    assert np.array_equal((-a).entries, -a.entries)


def test_adjoint_trace_norm():
    rng = np.random.default_rng(0)
    q = random_operator(SpinSystem(2), rng)
    assert np.array_equal(q.adjoint().entries, q.entries.conj().T)
    assert q.trace() == pytest.approx(np.trace(q.entries))
    assert q.norm() == pytest.approx(np.linalg.norm(q.entries))


def test_hs_inner_and_commutator():
    rng = np.random.default_rng(1)
    system = SpinSystem(2)
    a = random_operator(system, rng)
    b = random_operator(system, rng)
    assert hs_inner(a, b) == pytest.approx(np.trace(a.entries.conj().T @ b.entries))
    c = commutator(a, b)
    assert np.allclose(c.entries, a.entries @ b.entries - b.entries @ a.entries)


def test_cross_system_operations_rejected():
    a = spin_operator(SpinSystem(1), 1, "z")
    b = spin_operator(SpinSystem(2), 1, "z")
    with pytest.raises(ConfigurationError):
        _ = a + b


def test_spin_operator_matches_oracle_and_validates():
    system = SpinSystem(3)
    for k in (1, 2, 3):
        for axis in "xyz":
            mine = spin_operator(system, k, axis).entries
            assert np.array_equal(mine, oracles.single_spin(3, k, axis))
    with pytest.raises(ConfigurationError):
        spin_operator(system, 0, "z")
    with pytest.raises(ConfigurationError):
        spin_operator(system, 4, "z")
    with pytest.raises(ConfigurationError):
        spin_operator(system, 1, "q")


def test_total_z_is_sum_of_longitudinal_operators():
    system = SpinSystem(3)
    ref = sum(oracles.single_spin(3, k, "z") for k in (1, 2, 3))
    assert np.array_equal(total_z(system).entries, ref)


def test_identity_operator():
    system = SpinSystem(2)
    assert np.array_equal(identity_operator(system).entries, np.eye(4))


def test_expand_flipflop_unit_frozen_coefficients():
    system = SpinSystem(2)
    unit = build_operator(system, BaseOperatorSpec.from_label("I1+I2-", 2))
    result = expand(unit, CARTESIAN)
    assert set(result.coefficients) == set(oracles.FLIPFLOP_UNIT_EXPANSION)
    for label, value in oracles.FLIPFLOP_UNIT_EXPANSION.items():
        assert result.coefficients[label] == pytest.approx(value, abs=1e-14)
    assert result.residual <= 1e-14


@pytest.mark.parametrize("kind", [CARTESIAN, SHIFT])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_expand_matches_inner_product_definition(kind, n):
    # dual route: the fast transform against the defining ratio
    # <B, q> / <B, B> computed base operator by base operator
    rng = np.random.default_rng(n)
    system = SpinSystem(n)
    q = random_operator(system, rng)
    result = expand(q, kind)
    for spec in enumerate_basis(system, kind):
        base = build_operator(system, spec)
        ref = hs_inner(base, q) / hs_inner(base, base)
        got = result.coefficients.get(spec.label, 0.0)
        assert got == pytest.approx(ref, abs=1e-12), spec.label


@pytest.mark.parametrize("kind", [CARTESIAN, SHIFT])
def test_expand_reconstruct_round_trip(kind):
    rng = np.random.default_rng(7)
    system = SpinSystem(3)
    q = random_operator(system, rng)
    result = expand(q, kind)
    back = reconstruct(system, result)
    assert np.allclose(back.entries, q.entries, atol=1e-12)
    assert result.residual <= 1e-12 * q.norm()


def test_expand_drops_exact_zeros():
    system = SpinSystem(2)
    q = spin_operator(system, 1, "z")
    result = expand(q, CARTESIAN)
    assert list(result.coefficients) == ["I1z"]
    assert result.coefficients["I1z"] == pytest.approx(1.0)


def test_coherence_order_of_element():
    system = SpinSystem(3)
    for row in range(8):
        for col in range(8):
            expected = oracles.element_order(row, col)
            assert coherence_order_of_element(system, row, col) == expected
    with pytest.raises(ConfigurationError):
        coherence_order_of_element(system, 0, 8)


def test_order_components_partition_the_operator():
    rng = np.random.default_rng(3)
    system = SpinSystem(3)
    q = random_operator(system, rng)
    parts = order_components(q)
    total = sum(p.entries for p in parts.values())
    assert np.array_equal(total, q.entries)
    for p, comp in parts.items():
        for row, col in np.argwhere(comp.entries != 0):
            assert oracles.element_order(row, col) == p


def test_order_components_of_diagonal_is_single_zero_order():
    system = SpinSystem(2)
    parts = order_components(spin_operator(system, 1, "z"))
    assert list(parts) == [0]


def test_shift_order_property():
    assert BaseOperatorSpec.from_label("I1+I2-", 2).shift_order == 0
    assert BaseOperatorSpec.from_label("I1+I2+", 2).shift_order == 2
    assert BaseOperatorSpec.from_label("a1I2-", 2).shift_order == -1
    assert BaseOperatorSpec.from_label("I1z", 2).shift_order is None


def test_random_operator_hermitian_flag():
    rng = np.random.default_rng(5)
    system = SpinSystem(2)
    h = random_operator(system, rng, hermitian=True)
    assert h.hermitian_hint is True
    assert np.allclose(h.entries, h.entries.conj().T)
    g = random_operator(system, rng)
    assert g.hermitian_hint is None
