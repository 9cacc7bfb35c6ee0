import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ndcstar import samples
from ndcstar.algebra import AlgebraDescriptor, AlgebraElement, is_positive, op_norm, psd_verdict
from ndcstar.definiteness import (
    classical_nd,
    classical_pd,
    cone_add,
    cone_scale,
    conj_function,
    gen_pd_from_vector,
    is_alpha_nd_direct,
    is_alpha_nd_gamma,
    is_alpha_pd,
    lift_scalar,
    lower_bound_check,
    normalize,
    one_minus,
    pd_block_matrix,
    pointwise_product,
    quadratic_form,
    re_part,
    state_push,
    symmetry_residual,
)
from ndcstar.errors import DomainError, StructuralError
from ndcstar.group_action import Action, FiniteGroup, GroupFunction, fixed_point_project, invariant_state
from ndcstar.kernel_cocycle import gamma_kernel

from .helpers import scalar_fn

B1 = AlgebraDescriptor((1,))
G2 = FiniteGroup.cyclic(2)
TRIV = Action.trivial(G2, B1)

prop = settings(max_examples=30, deadline=None)
indices = st.integers(0, 95)
seeds = st.integers(0, 2**32 - 1)


def f2(*vals):
    return scalar_fn(G2, B1, vals)


def test_pd_block_matrix_examples(rng):
    M = pd_block_matrix(f2(1, 0.3), TRIV)
    assert np.allclose(M.entries[:, :, 0], [[1, 0.3], [0.3, 1]])
    d = AlgebraDescriptor((2, 1))
    G = FiniteGroup.cyclic(3)
    alpha = samples.action(G, d, "inner", rng)
    one = AlgebraElement.unit(d)
    delta = pd_block_matrix(GroupFunction.delta(G, one), alpha)
    assert np.allclose(delta.entries, np.eye(3)[:, :, None] * d.unit_packed())
    const = pd_block_matrix(GroupFunction.constant(G, one), alpha)
    assert np.allclose(const.entries, np.ones((3, 3))[:, :, None] * d.unit_packed())


def test_is_alpha_pd_examples():
    assert is_alpha_pd(f2(1, 0.5), TRIV).passed
    v = is_alpha_pd(f2(1, 2), TRIV)
    assert not v.passed and v.witness["eigenvalue"] == pytest.approx(-1.0)
    assert is_alpha_pd(GroupFunction.delta(G2, AlgebraElement.unit(B1)), TRIV).passed


@pytest.mark.parametrize("c", [0.0, 0.5, 3.0])
def test_nd_examples_pass(c):
    psi = f2(0, c)
    assert is_alpha_nd_direct(psi, TRIV).passed
    assert is_alpha_nd_gamma(psi, TRIV).passed
    assert np.allclose(gamma_kernel(psi, TRIV).matrix.entries[:, :, 0], [[0, 0], [0, 2 * c]])


def test_nd_negative_example_fails_with_witness():
    psi = f2(0, -1)
    v = is_alpha_nd_direct(psi, TRIV)
    assert not v.passed and v.min_eigenvalue == pytest.approx(-2.0)
    tup = v.witness["tuple"]
    q = quadratic_form(psi, TRIV, tup["elements"], tup["coefficients"])
    assert q.blocks[0][0, 0].real > 0
    assert not is_alpha_nd_gamma(psi, TRIV).passed


@pytest.mark.parametrize("t", [-2.0, 0.0, 1.5])
def test_constant_functions_are_nd(systems, t):
    for _, alpha in systems[::11]:
        psi = GroupFunction.constant(alpha.group, AlgebraElement.scalar(alpha.descriptor, t))
        assert is_alpha_nd_direct(psi, alpha).passed and is_alpha_nd_gamma(psi, alpha).passed


def test_asymmetric_function_fails_symmetry():
    psi = f2(0, 1j)
    v = is_alpha_nd_direct(psi, TRIV)
    assert not v.passed and v.details["symmetry_failed"]


def test_conj_examples():
    assert np.array_equal(conj_function(f2(1, 0.4)).values, f2(1, 0.4).values)
    G4 = FiniteGroup.cyclic(4)
    chi = lift_scalar(1j ** np.arange(4), G4, B1)
    bar = conj_function(chi)
    assert np.allclose(bar.values[:, 0], (-1j) ** np.arange(4))
    assert is_alpha_pd(bar, Action.trivial(G4, B1)).passed


def test_pointwise_product_examples(rng):
    phi = f2(1, 0.5)
    one = GroupFunction.constant(G2, AlgebraElement.unit(B1))
    assert np.array_equal(pointwise_product(phi, one).values, phi.values)
    sq = pointwise_product(phi, phi)
    assert np.allclose(sq.values[:, 0], [1, 0.25]) and is_alpha_pd(sq, TRIV).passed


def test_re_part_fixes_self_adjoint_values(rng):
    d = AlgebraDescriptor((2, 1))
    psi = GroupFunction(G2, d, [samples.random_hermitian(d, rng) for _ in range(2)])
    assert np.allclose(re_part(psi).values, psi.values)


def test_normalize_examples():
    psi = f2(0, 0.7)
    assert np.array_equal(normalize(psi, TRIV).values, psi.values)
    c = 1.25
    assert np.allclose(normalize(f2(3, 3 + c), TRIV).values[:, 0], [0, c])
    with pytest.raises(DomainError):
        normalize(f2(1j, 0), TRIV)


def test_normalize_needs_invariant_value_at_identity():
    d = AlgebraDescriptor((1, 1))
    perms = [[0, 1], [1, 0]]
    flip = Action(G2, d, perms, [[np.eye(1), np.eye(1)]] * 2)
    psi = GroupFunction(G2, d, [AlgebraElement(d, [1.0, 0.0]), AlgebraElement(d, [0.0, 0.0])])
    with pytest.raises(DomainError):
        normalize(psi, flip)


def test_one_minus_examples():
    one = GroupFunction.constant(G2, AlgebraElement.unit(B1))
    assert np.allclose(one_minus(one, TRIV).values, 0)
    psi = one_minus(f2(1, 0.5), TRIV)
    assert np.allclose(psi.values[:, 0], [0, 0.5]) and is_alpha_nd_gamma(psi, TRIV).passed
    with pytest.raises(DomainError):
        one_minus(f2(1, 2), TRIV)


def test_lift_scalar_examples(systems):
    for _, alpha in systems:
        G, d = alpha.group, alpha.descriptor
        assert not lift_scalar(np.zeros(G.order), G, d).values.any()
        if G.name.startswith("Z"):
            n = G.order
            ex = samples.classical_examples(n)
            assert is_alpha_nd_gamma(lift_scalar(ex["one_minus_cos"], G, d), alpha).passed
            chi = lift_scalar(ex["character_1"], G, d)
            if alpha.is_trivial():
                assert is_alpha_nd_gamma(one_minus(chi, alpha), alpha).passed
    with pytest.raises(StructuralError):
        lift_scalar([1, 2, 3], G2, B1)


def test_lower_bound_examples():
    assert lower_bound_check(f2(0, 2), TRIV).passed
    G = FiniteGroup.cyclic(3)
    d = AlgebraDescriptor((2,))
    psi = GroupFunction.constant(G, AlgebraElement.scalar(d, 0.8))
    assert lower_bound_check(psi, Action.trivial(G, d)).passed
    assert not lower_bound_check(f2(0, -1), TRIV).passed


def test_state_push_examples():
    G = FiniteGroup.cyclic(3)
    d = AlgebraDescriptor((2, 1))
    alpha = Action.trivial(G, d)
    omega = invariant_state(alpha, [0.25, 0.75])
    f = np.array([0.0, 1 + 2j, -3.0])
    assert np.allclose(state_push(lift_scalar(f, G, d), omega), f)
    assert not state_push(lift_scalar(np.zeros(3), G, d), omega).any()


def test_gen_pd_examples():
    G = FiniteGroup.cyclic(3)
    d = AlgebraDescriptor((2,))
    alpha = Action.trivial(G, d)
    one = AlgebraElement.unit(d)
    h = gen_pd_from_vector(GroupFunction.delta(G, one), alpha)
    assert np.allclose(h.values, GroupFunction.delta(G, one).values)
    xi = GroupFunction.constant(G, one / np.sqrt(3))
    assert np.allclose(gen_pd_from_vector(xi, alpha).values, GroupFunction.constant(G, one).values)


def test_cone_examples():
    psi = f2(0, 1)
    assert not cone_scale(psi, 0).values.any()
    with pytest.raises(DomainError):
        cone_scale(psi, -1)
    assert np.allclose(cone_add(psi, psi).values[:, 0], [0, 2])


def test_classical_oracles_match_lift(systems):
    for name in ("Z3", "Z4", "Z6"):
        G = samples.group(name)
        ex = samples.classical_examples(G.order)
        assert classical_nd(ex["one_minus_cos"], G).passed
        assert all(classical_pd(ex[f"character_{j}"], G).passed for j in range(G.order))
        assert not classical_pd(np.r_[1.0, 2.0 * np.ones(G.order - 1)], G).passed


# properties


@prop
@given(idx=indices, seed=seeds)
def test_direct_and_gamma_agree(systems, idx, seed):
    rng = np.random.default_rng(seed)
    _, alpha = systems[idx]
    for psi in (
        samples.random_nd_positive(alpha, rng),
        samples.random_nd0_one_minus(alpha, rng),
        samples.random_symmetric(alpha, rng),
    ):
        assert is_alpha_nd_direct(psi, alpha).passed == is_alpha_nd_gamma(psi, alpha).passed


@prop
@given(idx=indices, seed=seeds)
def test_pd_consequences(systems, idx, seed):
    rng = np.random.default_rng(seed)
    _, alpha = systems[idx]
    phi = samples.random_pd(alpha, rng, unit=False)
    v = is_alpha_pd(phi, alpha)
    assert v.passed
    assert symmetry_residual(phi, alpha) <= 1e-9 * max(phi.norm(), 1.0)
    assert is_positive(phi.at_identity())


@prop
@given(idx=indices, seed=seeds)
def test_central_pd_closed_under_conj_and_products(systems, idx, seed):
    rng = np.random.default_rng(seed)
    _, alpha = systems[idx]
    p1 = samples.random_pd(alpha, rng, central=True)
    p2 = samples.random_pd(alpha, rng, central=True)
    assert is_alpha_pd(conj_function(p1), alpha).passed
    assert is_alpha_pd(pointwise_product(p1, p2), alpha).passed
    assert is_alpha_pd(pointwise_product(conj_function(p1), p1), alpha).passed


@prop
@given(idx=indices, seed=seeds)
def test_one_minus_and_normalize(systems, idx, seed):
    rng = np.random.default_rng(seed)
    _, alpha = systems[idx]
    G, d = alpha.group, alpha.descriptor
    phi = samples.random_pd(alpha, rng)
    psi0 = one_minus(phi, alpha)
    assert is_alpha_nd_gamma(psi0, alpha).passed
    c = samples.random_central(d, rng, real=True)
    c = fixed_point_project(alpha, c)
    shifted = psi0 + GroupFunction.constant(G, c)
    back = normalize(shifted, alpha)
    assert np.abs(back.values - psi0.values).max() <= 1e-12 * max(psi0.norm(), op_norm(c), 1.0)
    assert is_alpha_nd_gamma(back, alpha).passed == is_alpha_nd_gamma(shifted, alpha).passed


@prop
@given(idx=indices, seed=seeds)
def test_central_nd_properties(systems, idx, seed):
    rng = np.random.default_rng(seed)
    _, alpha = systems[idx]
    psi = samples.random_central_nd0_positive(alpha, rng)
    assert is_alpha_nd_direct(psi, alpha).passed
    assert is_alpha_nd_direct(psi, alpha, central_coefficients=True, seed=seed % 1000).passed
    assert is_alpha_nd_gamma(re_part(psi), alpha).passed
    scale = max(psi.norm(), 1.0)
    assert all(psd_verdict(v.blocks, 1e-9, scale).passed for v in re_part(psi).elements())


@prop
@given(idx=indices, seed=seeds)
def test_lower_bound_and_state_push(systems, idx, seed):
    rng = np.random.default_rng(seed)
    _, alpha = systems[idx]
    psi = samples.random_nd0_one_minus(alpha, rng)
    assert lower_bound_check(psi, alpha).passed
    d = alpha.descriptor
    w = np.full(d.num_blocks, 1.0 / d.num_blocks)
    omega = invariant_state(alpha, w)
    f = state_push(psi, omega)
    assert classical_nd(f, alpha.group, 1e-8).passed


@prop
@given(idx=indices, seed=seeds)
def test_gen_pd_from_random_vector(systems, idx, seed):
    rng = np.random.default_rng(seed)
    _, alpha = systems[idx]
    xi = samples.random_vector(alpha, rng, unit=False)
    assert is_alpha_pd(gen_pd_from_vector(xi, alpha), alpha).passed


@prop
@given(idx=indices, seed=seeds, t=st.floats(0, 5))
def test_cone_closure(systems, idx, seed, t):
    rng = np.random.default_rng(seed)
    _, alpha = systems[idx]
    a = samples.random_nd_positive(alpha, rng)
    b = samples.random_nd0_one_minus(alpha, rng)
    assert is_alpha_nd_gamma(cone_add(a, b), alpha).passed
    assert is_alpha_nd_gamma(cone_scale(a, t), alpha).passed
    # a convergent sequence (1 + 1/k) b of ND functions has an ND limit
    seq = [cone_scale(b, 1 + 1 / k) for k in (1, 10, 100, 1000)]
    assert all(is_alpha_nd_gamma(s, alpha).passed for s in seq)
    assert seq[-1].distance(b) <= 1e-3 * max(b.norm(), 1.0)
    assert is_alpha_nd_gamma(b, alpha).passed
