import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ndcstar import samples
from ndcstar.algebra import AlgebraDescriptor, AlgebraElement, center_expectation, exp_element, is_positive, op_norm
from ndcstar.errors import DomainError, StructuralError
from ndcstar.group_action import (
    Action,
    FiniteGroup,
    GroupFunction,
    fixed_point_project,
    invariant_state,
    is_invariant,
    restrict_to_center,
    validate_action,
    validate_group,
)

from .helpers import flip_action

B11 = AlgebraDescriptor((1, 1))
B2 = AlgebraDescriptor((2,))


def test_z2_table_valid():
    assert validate_group([[0, 1], [1, 0]]).valid


def test_table_without_inverse_invalid():
    rep = validate_group([[0, 1], [0, 0]])
    assert not rep.valid
    assert any(v.startswith("inverse") or v.startswith("identity") for v in rep.violations)


def test_nonassociative_table_names_axiom():
    # a Latin square with identity 0 that is not associative
    table = [
        [0, 1, 2, 3, 4],
        [1, 0, 3, 4, 2],
        [2, 4, 0, 1, 3],
        [3, 2, 4, 0, 1],
        [4, 3, 1, 2, 0],
    ]
    rep = validate_group(table)
    assert not rep.valid
    assert any(v.startswith("associativity") for v in rep.violations)
    with pytest.raises(StructuralError, match="associativity"):
        FiniteGroup(table)


def test_symmetric_group_table_valid():
    S3 = FiniteGroup.symmetric(3)
    assert S3.order == 6 and validate_group(S3).valid
    for g in S3:
        assert S3.mul(g, S3.inv(g)) == S3.identity


def test_group_json_round_trip():
    K = samples.group("K4")
    assert FiniteGroup.from_json(K.to_json()) == K


def test_apply_identity_is_identity(systems, rng):
    for _, alpha in systems[::7]:
        x = samples.random_element(alpha.descriptor, rng)
        assert alpha.apply(alpha.group.identity, x).allclose(x, 1e-12)


def test_flip_swaps_summands():
    G = FiniteGroup.cyclic(2)
    alpha = flip_action(G, B11)
    x = AlgebraElement(B11, [2.0, 5.0])
    assert alpha.apply(1, x) == AlgebraElement(B11, [5.0, 2.0])
    assert validate_action(alpha).valid


def test_inner_conjugation_example():
    G = FiniteGroup.cyclic(2)
    u = np.diag([1.0, -1.0])
    alpha = Action(G, B2, [[0], [0]], [[np.eye(2)], [u]])
    out = alpha.apply(1, AlgebraElement(B2, [[[0, 1], [1, 0]]]))
    assert np.allclose(out.blocks[0], [[0, -1], [-1, 0]])


def test_trivial_action_valid():
    G = FiniteGroup.symmetric(3)
    alpha = Action.trivial(G, AlgebraDescriptor((2, 1)))
    assert validate_action(alpha).valid and alpha.is_trivial()


def test_random_unitaries_fail_homomorphism(rng):
    G = FiniteGroup.cyclic(3)
    d = AlgebraDescriptor((2,))
    units = [[np.eye(2)]] + [[samples.random_unitary(2, rng)] for _ in range(2)]
    rep = validate_action(Action(G, d, [[0]] * 3, units))
    assert not rep.valid
    assert any(v.startswith("homomorphism") for v in rep.violations)


def test_non_unitary_reported():
    G = FiniteGroup.cyclic(2)
    rep = validate_action(Action(G, B2, [[0], [0]], [[np.eye(2)], [2 * np.eye(2)]]))
    assert not rep.valid and rep.unitarity_residual == pytest.approx(3.0)


def test_block_permutation_must_respect_dims():
    G = FiniteGroup.cyclic(2)
    d = AlgebraDescriptor((2, 1))
    with pytest.raises(StructuralError):
        Action(G, d, [[0, 1], [1, 0]], [[np.eye(2), np.eye(1)]] * 2)


def test_fixed_point_examples(rng):
    G = FiniteGroup.cyclic(2)
    alpha = flip_action(G, B11)
    half = fixed_point_project(alpha, AlgebraElement(B11, [1.0, 0.0]))
    assert half.allclose(AlgebraElement(B11, [0.5, 0.5]), 1e-15)
    assert fixed_point_project(alpha, half).allclose(half, 1e-15)
    x = samples.random_element(B2, rng)
    assert fixed_point_project(Action.trivial(G, B2), x).allclose(x, 1e-14)


def test_central_action_examples(systems, rng):
    for _, alpha in systems[::5]:
        ca = restrict_to_center(alpha)
        z = samples.random_central(alpha.descriptor, rng)
        for g in alpha.group:
            assert ca(g, z).allclose(alpha.apply(g, z), 1e-14)
        assert ca.expectation_residual(samples.random_element(alpha.descriptor, rng)) <= 1e-12
    ca = restrict_to_center(Action.trivial(FiniteGroup.cyclic(3), B2))
    z = AlgebraElement.scalar(B2, 2.0)
    assert all(ca(g, z) == z for g in range(3))
    with pytest.raises(DomainError):
        ca(0, AlgebraElement.diag(B2, [1, 2]))


def test_invariant_state_examples(rng):
    G = FiniteGroup.cyclic(2)
    B1 = AlgebraDescriptor((1,))
    omega = invariant_state(Action.trivial(G, B1), [1.0])
    assert omega(AlgebraElement.unit(B1)) == 1.0
    flip = flip_action(G, B11)
    omega = invariant_state(flip, [0.5, 0.5])
    x = AlgebraElement(B11, [3.0, 1.0])
    assert omega(x) == pytest.approx(2.0) and omega(flip.apply(1, x)) == pytest.approx(2.0)
    alpha = samples.action(FiniteGroup.symmetric(3), B2, "inner", rng)
    tr = invariant_state(alpha, [1.0])
    y = samples.random_element(B2, rng)
    assert tr(y) == pytest.approx(np.trace(y.blocks[0]) / 2)
    assert all(tr(alpha.apply(g, y)) == pytest.approx(tr(y)) for g in alpha.group)
    with pytest.raises(DomainError):
        invariant_state(flip, [0.3, 0.7])


def test_group_function_json_round_trip(rng):
    G = FiniteGroup.cyclic(3)
    d = AlgebraDescriptor((2, 1))
    f = samples.random_function(G, d, rng)
    g = GroupFunction.from_json(G, d, f.to_json())
    assert np.array_equal(f.values, g.values)
    with pytest.raises(StructuralError):
        GroupFunction(G, d, f.values[:2])


# properties over every sample system


@settings(max_examples=30, deadline=None)
@given(idx=st.integers(0, 95), seed=st.integers(0, 2**32 - 1))
def test_action_properties(systems, idx, seed):
    rng = np.random.default_rng(seed)
    _, alpha = systems[idx]
    G, d = alpha.group, alpha.descriptor
    x = samples.random_element(d, rng)
    p = samples.random_positive(d, rng)
    h_ = samples.random_hermitian(d, rng)
    avg = fixed_point_project(alpha, x)
    assert is_invariant(alpha, avg, 1e-12)
    for g in G:
        gx = alpha.apply(g, x)
        assert abs(op_norm(gx) - op_norm(x)) <= 1e-12 * op_norm(x)
        assert is_positive(alpha.apply(g, p))
        assert exp_element(alpha.apply(g, h_)).allclose(alpha.apply(g, exp_element(h_)), 1e-10 * op_norm(exp_element(h_)))
        assert center_expectation(gx).allclose(alpha.apply(g, center_expectation(x)), 1e-12 * op_norm(x))
        for h in G:
            assert alpha.apply(g, alpha.apply(h, x)).allclose(alpha.apply(G.mul(g, h), x), 1e-12 * op_norm(x))


def test_all_sample_actions_valid(systems):
    for name, alpha in systems:
        assert validate_action(alpha).valid, name
