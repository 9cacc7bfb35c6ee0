import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ndcstar import samples
from ndcstar.algebra import AlgebraDescriptor, AlgebraElement
from ndcstar.definiteness import pd_block_matrix
from ndcstar.errors import DomainError
from ndcstar.group_action import Action, FiniteGroup, GroupFunction
from ndcstar.schoenberg_semigroup import (
    build_crossed_product,
    exp_function,
    generator_check,
    multiplier,
    schoenberg_converse,
    schoenberg_forward,
    verify_cp_semigroup,
)

from .helpers import scalar_fn

B1 = AlgebraDescriptor((1,))
G2 = FiniteGroup.cyclic(2)
TRIV = Action.trivial(G2, B1)

prop = settings(max_examples=10, deadline=None)
indices = st.integers(0, 95)
seeds = st.integers(0, 2**32 - 1)


def zero_fn(alpha):
    return GroupFunction(alpha.group, alpha.descriptor, np.zeros_like(alpha.unitaries))


def test_exp_function_examples(systems, rng):
    _, alpha = systems[50]
    psi = samples.random_nd0_one_minus(alpha, rng)
    one = GroupFunction.constant(alpha.group, AlgebraElement.unit(alpha.descriptor))
    assert np.array_equal(exp_function(psi, 0.0).values, one.values)
    t, c = 0.4, 1.7
    assert np.allclose(exp_function(scalar_fn(G2, B1, [0, c]), t).values[:, 0], [1, np.exp(-t * c)])
    assert np.array_equal(exp_function(zero_fn(alpha), 2.0).values, one.values)
    with pytest.raises(DomainError):
        exp_function(psi, -1.0)


def test_forward_examples(systems):
    _, alpha = systems[77]
    rep = schoenberg_forward(zero_fn(alpha), alpha)
    assert rep.passed
    M = pd_block_matrix(exp_function(scalar_fn(G2, B1, [0, 1]), 1.0), TRIV)
    assert np.allclose(M.entries[:, :, 0], [[1, np.exp(-1)], [np.exp(-1), 1]])
    assert schoenberg_forward(scalar_fn(G2, B1, [0, 1]), TRIV, [1.0]).passed


def test_forward_preconditions(systems, rng):
    with pytest.raises(DomainError):
        schoenberg_forward(scalar_fn(G2, B1, [0, -1]), TRIV)
    for _, alpha in systems:
        if alpha.descriptor.block_dims == (2,):
            psi = samples.random_nd_positive(alpha, rng)
            if not psi.is_central_valued():
                with pytest.raises(DomainError, match="central"):
                    schoenberg_forward(psi, alpha)
                return
    pytest.fail("no non-central sample found")


def test_converse_examples(systems):
    rep = schoenberg_converse(scalar_fn(G2, B1, [0, -1]), TRIV)
    assert rep.passed and not rep.details["pd_on_grid"] and not rep.details["nd_direct"].passed
    _, alpha = systems[30]
    const = GroupFunction.constant(alpha.group, AlgebraElement.scalar(alpha.descriptor, 0.6))
    rep = schoenberg_converse(const, alpha)
    assert rep.passed and rep.details["pd_on_grid"] and rep.details["nd_direct"].passed
    assert rep.details["grid_relative"]


def test_crossed_product_trivial_group(rng):
    d = AlgebraDescriptor((2, 1))
    cp = build_crossed_product(Action.trivial(FiniteGroup.cyclic(1), d))
    x = samples.random_element(d, rng)
    dense = cp.pi(x)
    assert dense.shape == (3, 3)
    assert np.allclose(dense[:2, :2], x.blocks[0]) and np.allclose(dense[2, 2], x.blocks[1])
    assert cp.verify().passed


def test_crossed_product_z2_scalar():
    cp = build_crossed_product(TRIV)
    assert np.array_equal(cp.lam(1), [[0, 1], [1, 0]])
    assert np.array_equal(cp.lam(0), np.eye(2))
    assert cp.verify().passed


def test_crossed_product_covariance(systems):
    for _, alpha in systems[::9]:
        rep = build_crossed_product(alpha).verify()
        assert rep.passed, rep.to_dict()


def test_multiplier_examples(systems, rng):
    _, alpha = systems[46]
    psi = samples.random_central_nd0_positive(alpha, rng)
    G, d = alpha.group, alpha.descriptor
    n, p = G.order, d.packed_size
    M0 = multiplier(psi, 0.0, alpha)
    assert np.array_equal(M0.as_linear_map, np.eye(n * p))
    one = np.zeros((n, p), dtype=complex)
    one[G.identity] = d.unit_packed()
    assert np.array_equal(multiplier(psi, 0.7, alpha)(one), one)
    t, c = 0.3, 2.0
    M = multiplier(scalar_fn(G2, B1, [0, c]), t, TRIV)
    lam = np.array([[0.0], [1.0]], dtype=complex)
    assert np.allclose(M(lam), np.exp(-t * c) * lam)


def test_multiplier_preconditions(rng):
    with pytest.raises(DomainError):
        multiplier(scalar_fn(G2, B1, [0.5, 1]), 1.0, TRIV)
    with pytest.raises(DomainError):
        multiplier(scalar_fn(G2, B1, [0, -1]), 1.0, TRIV)
    with pytest.raises(DomainError):
        multiplier(scalar_fn(G2, B1, [0, 1]), -1.0, TRIV)


def test_cp_semigroup_zero_function(systems):
    _, alpha = systems[5]
    rep = verify_cp_semigroup(zero_fn(alpha), alpha)
    assert rep.passed
    assert all(r["choi_min_eigenvalue"] >= -1e-12 for r in rep.details["per_t"])
    assert generator_check(zero_fn(alpha), alpha).details["final_residual"] == 0.0


def test_cp_semigroup_z2_scalar_reduces_to_2x2():
    c = 1.5
    psi = scalar_fn(G2, B1, [0, c])
    rep = verify_cp_semigroup(psi, TRIV, [0.1, 1.0])
    assert rep.passed
    for r in rep.details["per_t"]:
        q = np.exp(-r["t"] * c)
        assert r["choi_min_eigenvalue"] == pytest.approx(min(0.0, 1 - q), abs=1e-12)
        assert r["choi_lambda_max"] == pytest.approx(1 + q)
        assert np.linalg.eigvalsh([[1, q], [q, 1]])[0] >= 0
    # negative c would make the Schur symbol indefinite; the precondition catches it first
    with pytest.raises(DomainError):
        verify_cp_semigroup(scalar_fn(G2, B1, [0, -c]), TRIV)


def test_generator_scalar():
    c = 1.2
    rep = generator_check(scalar_fn(G2, B1, [0, c]), TRIV)
    assert rep.passed
    t = rep.details["ts"][-1]
    assert rep.details["final_residual"] == pytest.approx(abs((1 - np.exp(-t * c)) / t - c), rel=1e-6)
    assert rep.details["rate"] == pytest.approx(1.0, abs=0.05)


@prop
@given(idx=indices, seed=seeds)
def test_forward_on_random_central_nd(systems, idx, seed):
    rng = np.random.default_rng(seed)
    _, alpha = systems[idx]
    psi = samples.random_nd_positive(alpha, rng, central=True)
    rep = schoenberg_forward(psi, alpha, [0.1, 1.0, 10.0])
    assert rep.passed, rep.to_dict()


@prop
@given(idx=indices, seed=seeds)
def test_semigroup_on_random_central_nd0(systems, idx, seed):
    rng = np.random.default_rng(seed)
    _, alpha = systems[idx]
    psi = samples.random_central_nd0_positive(alpha, rng)
    rep = verify_cp_semigroup(psi, alpha, [0.01, 1.0])
    assert rep.passed
    assert rep.details["semigroup_law_residual"] <= 1e-9
    assert generator_check(psi, alpha).passed
