"""Standard small systems and random generators for functions of each class.

Groups: Z2, Z3, Z4, Z6, S3 and the Klein group K4.  Actions come from unitary
(or projective) representations conjugated by a random unitary, optionally
combined with a block flip through a homomorphism onto Z2.
"""

from __future__ import annotations

import numpy as np
from scipy.stats import unitary_group

from .algebra import AlgebraDescriptor, AlgebraElement
from .definiteness import gen_pd_from_vector, lift_scalar, symmetrize
from .errors import StructuralError
from .group_action import Action, FiniteGroup, GroupFunction, fixed_point_project

GROUP_NAMES = ("Z2", "Z3", "Z4", "Z6", "S3", "K4")
ALGEBRAS = ((1,), (2,), (1, 1), (2, 1))
ACTION_KINDS = ("trivial", "inner", "flip", "flip_inner")

_PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
_PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def group(name: str) -> FiniteGroup:
    if name.startswith("Z") and name[1:].isdigit():
        return FiniteGroup.cyclic(int(name[1:]))
    if name == "S3":
        return FiniteGroup.symmetric(3)
    if name == "K4":
        K = FiniteGroup.direct_product(FiniteGroup.cyclic(2), FiniteGroup.cyclic(2))
        K.name = "K4"
        return K
    raise StructuralError(f"unknown sample group {name!r}")


def _sign(p) -> int:
    p = list(p)
    s = 1
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            if p[i] > p[j]:
                s = -s
    return s


def parity(G: FiniteGroup) -> np.ndarray | None:
    """A surjective homomorphism onto Z2 (as 0/1 per element), if the sample group has one."""
    if G.name.startswith("Z"):
        n = G.order
        return None if n % 2 else np.arange(n) % 2
    if G.name == "S3":
        return np.array([(1 - _sign(map(int, lab))) // 2 for lab in G.labels])
    if G.name == "K4":
        return np.arange(4) // 2
    return None


def representation(G: FiniteGroup, d: int) -> list[np.ndarray]:
    """Unitary (possibly projective) ``d``-dimensional representation of a sample group."""
    n = G.order
    if G.name.startswith("Z"):
        w = np.exp(2j * np.pi / n)
        return [np.diag([w ** (j * k) for j in range(1, d + 1)]) for k in range(n)]
    if G.name == "S3" and d <= 2:
        if d == 1:
            return [np.array([[_sign(map(int, lab))]], dtype=complex) for lab in G.labels]
        basis = np.array([[1, -1, 0], [1, 1, -2]], dtype=float)
        basis /= np.linalg.norm(basis, axis=1, keepdims=True)
        out = []
        for lab in G.labels:
            P = np.zeros((3, 3))
            for i, c in enumerate(lab):
                P[int(c), i] = 1.0
            out.append((basis @ P @ basis.T).astype(complex))
        return out
    if G.name == "K4" and d <= 2:
        if d == 1:
            return [np.array([[(-1.0) ** (g // 2)]], dtype=complex) for g in range(4)]
        return [np.eye(2, dtype=complex), _PAULI_Z, _PAULI_X, _PAULI_X @ _PAULI_Z]
    par = parity(G)
    chi = np.ones(n) if par is None else (-1.0) ** par
    return [np.diag(np.concatenate([[chi[g]], np.ones(d - 1)])).astype(complex) for g in range(n)]


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    if d == 1:
        return np.exp(2j * np.pi * rng.random()) * np.ones((1, 1), dtype=complex)
    return unitary_group.rvs(d, random_state=rng)


def action(G: FiniteGroup, descriptor: AlgebraDescriptor, kind: str, rng: np.random.Generator) -> Action:
    """``kind``: trivial, inner, flip (permute equal blocks by parity) or flip_inner."""
    if kind not in ACTION_KINDS:
        raise StructuralError(f"unknown action kind {kind!r}")
    if kind == "trivial":
        return Action.trivial(G, descriptor)
    dims = descriptor.block_dims
    m = len(dims)
    perms = np.tile(np.arange(m), (G.order, 1))
    par = parity(G)
    if kind.startswith("flip") and par is not None:
        swap = np.arange(m)
        seen = {}
        for k, d in enumerate(dims):
            if d in seen:
                j = seen.pop(d)
                swap[j], swap[k] = k, j
            else:
                seen[d] = k
        perms[par == 1] = swap
    inner = kind.endswith("inner")
    conj = {d: random_unitary(d, rng) for d in set(dims)}
    reps = {d: representation(G, d) for d in set(dims)}
    units = []
    for g in G:
        row = []
        for d in dims:
            if inner:
                W = conj[d]
                row.append(W @ reps[d][g] @ W.conj().T)
            else:
                row.append(np.eye(d, dtype=complex))
        units.append(row)
    return Action(G, descriptor, perms, units)


def sample_systems(seed: int = 0):
    """Every (group, algebra, action kind) combination, each with its own RNG stream."""
    rng = np.random.default_rng(seed)
    out = []
    for gname in GROUP_NAMES:
        G = group(gname)
        for dims in ALGEBRAS:
            desc = AlgebraDescriptor(dims)
            for kind in ACTION_KINDS:
                out.append((f"{gname}/{list(dims)}/{kind}", action(G, desc, kind, rng)))
    return out


# random elements


def random_element(descriptor: AlgebraDescriptor, rng: np.random.Generator, scale: float = 1.0) -> AlgebraElement:
    blocks = [scale * (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) for d in descriptor.block_dims]
    return AlgebraElement(descriptor, blocks)


def random_hermitian(descriptor: AlgebraDescriptor, rng: np.random.Generator, scale: float = 1.0) -> AlgebraElement:
    x = random_element(descriptor, rng, scale)
    return 0.5 * (x + x.adjoint())


def random_positive(descriptor: AlgebraDescriptor, rng: np.random.Generator, scale: float = 1.0) -> AlgebraElement:
    x = random_element(descriptor, rng, scale)
    return x.adjoint() * x


def random_central(descriptor: AlgebraDescriptor, rng: np.random.Generator, positive: bool = False, real: bool = False) -> AlgebraElement:
    m = descriptor.num_blocks
    if positive:
        z = rng.random(m) + 0.1
    elif real:
        z = rng.standard_normal(m)
    else:
        z = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    return AlgebraElement(descriptor, [z[k] * np.eye(d) for k, d in enumerate(descriptor.block_dims)])


def random_function(G: FiniteGroup, descriptor: AlgebraDescriptor, rng: np.random.Generator, central: bool = False) -> GroupFunction:
    if central:
        return GroupFunction(G, descriptor, [random_central(descriptor, rng) for _ in G])
    return GroupFunction(G, descriptor, [random_element(descriptor, rng) for _ in G])


def _inv_sqrt(x: AlgebraElement) -> AlgebraElement:
    blocks = []
    for b in x.blocks:
        w, v = np.linalg.eigh((b + b.conj().T) / 2)
        blocks.append((v / np.sqrt(w)) @ v.conj().T)
    return AlgebraElement(x.descriptor, blocks)


def random_vector(alpha: Action, rng: np.random.Generator, central: bool = False, unit: bool = True) -> GroupFunction:
    """``xi: G -> A``; with ``unit`` the sum of ``xi(s)^* xi(s)`` is ``1_A``."""
    G, d = alpha.group, alpha.descriptor
    xi = random_function(G, d, rng, central)
    if not unit:
        return xi
    q = AlgebraElement.zero(d)
    for v in xi.elements():
        q = q + v.adjoint() * v
    r = _inv_sqrt(q)
    return GroupFunction(G, d, [v * r for v in xi.elements()])


def random_pd(alpha: Action, rng: np.random.Generator, central: bool = False, unit: bool = True) -> GroupFunction:
    """Alpha-positive definite ``g -> <xi, alpha~_g xi>``; value ``1_A`` at ``e`` when ``unit``."""
    return gen_pd_from_vector(random_vector(alpha, rng, central, unit), alpha)


def scalar_nd0(G: FiniteGroup, rng: np.random.Generator) -> np.ndarray:
    """Real, non-negative, normalized classical negative definite function ``1 - Re <lambda_g v, v>``."""
    v = rng.standard_normal(G.order) + 1j * rng.standard_normal(G.order)
    v /= np.linalg.norm(v)
    # <lambda_g v, v> = sum_s v(g^{-1} s) conj(v(s))
    vals = np.array([np.vdot(v, v[G.cayley[G.inv(g)]]) for g in G])
    return 1.0 - vals.real


def random_nd_positive(alpha: Action, rng: np.random.Generator, terms: int = 2, central: bool = False) -> GroupFunction:
    """Normalized ``A^+``-valued alpha-negative definite ``sum_j f_j a_j``.

    ``f_j`` classical, normalized, non-negative and negative definite, ``a_j`` positive and alpha-invariant.
    """
    G, d = alpha.group, alpha.descriptor
    out = GroupFunction(G, d, np.zeros((G.order, d.packed_size), dtype=complex))
    for _ in range(terms):
        f = scalar_nd0(G, rng)
        a = random_central(d, rng, positive=True) if central else random_positive(d, rng)
        a = fixed_point_project(alpha, a)
        out = out + GroupFunction(G, d, f[:, None] * a.packed[None, :])
    return out


def random_nd0_one_minus(alpha: Action, rng: np.random.Generator, central: bool = False) -> GroupFunction:
    """``1 - h`` for a random alpha-positive definite ``h`` with ``h(e) = 1_A``."""
    h = random_pd(alpha, rng, central=central)
    return GroupFunction.constant(alpha.group, AlgebraElement.unit(alpha.descriptor)) - h


def random_central_nd0_positive(alpha: Action, rng: np.random.Generator) -> GroupFunction:
    """``1 - h^* h`` for central ``h``: normalized, alpha-negative definite and ``Z(A)^+``-valued."""
    h = random_pd(alpha, rng, central=True)
    hh = GroupFunction(h.group, h.descriptor, [v.adjoint() * v for v in h.elements()])
    return GroupFunction.constant(alpha.group, AlgebraElement.unit(alpha.descriptor)) - hh


def random_symmetric(alpha: Action, rng: np.random.Generator, central: bool = False) -> GroupFunction:
    """Random function symmetrized so that ``alpha_g(psi(g^{-1})) = psi(g)^*``; usually not negative definite."""
    return symmetrize(random_function(alpha.group, alpha.descriptor, rng, central), alpha)


def classical_examples(n: int) -> dict:
    """Textbook scalar functions on ``Z_n``: ``1 - cos(2 pi k / n)`` and the characters."""
    k = np.arange(n)
    out = {"one_minus_cos": 1 - np.cos(2 * np.pi * k / n)}
    for j in range(n):
        out[f"character_{j}"] = np.exp(2j * np.pi * j * k / n)
    return out


def lifted(f, G: FiniteGroup, descriptor: AlgebraDescriptor) -> GroupFunction:
    return lift_scalar(f, G, descriptor)
