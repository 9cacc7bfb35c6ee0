"""The gamma kernel and the Hilbert A-module built from a normalized negative definite function.

For finite ``G`` the module ``X_0 / N`` over ``C_c(G, A)`` is already complete,
so it is never materialised: a vector is a coefficient array ``x: G -> A``
standing for ``sum_g c(g) . x(g)`` and everything is computed from the Gram
matrix ``[gamma(g, h)]``.  Equalities of vectors are tested in the module
seminorm, ``||<d, d>||`` for the difference ``d``, never on raw coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _accel
from .algebra import (
    AlgebraElement,
    AMatrix,
    Tolerance,
    Verdict,
    as_tolerance,
    is_central,
    matrix_positivity,
    op_norm,
    psd_verdict,
)
from .definiteness import is_alpha_nd_gamma, twisted_entries
from .errors import DomainError, StructuralError
from .group_action import Action, GroupFunction


@dataclass(frozen=True)
class Kernel:
    """``gamma(g, h)`` on ``G x G``; ``half`` marks the factor 1/2 used for the module."""

    matrix: AMatrix
    half: bool = False

    def entry(self, g: int, h: int) -> AlgebraElement:
        return self.matrix.entry(g, h)

    def hermitian_residual(self) -> float:
        return (self.matrix - self.matrix.adjoint()).norm()


def gamma_kernel(psi: GroupFunction, alpha: Action, half: bool = False, tol: Tolerance | float | None = None) -> Kernel:
    """``gamma(g, h) = psi(g)^* + psi(h) - psi(e) - alpha_g(psi(g^{-1} h))``, halved on request."""
    tol = as_tolerance(tol)
    if psi.group != alpha.group or psi.descriptor != alpha.descriptor:
        raise StructuralError("function and action belong to different systems")
    e_val = psi.values[psi.group.identity]
    if half and op_norm(psi.at_identity()) > tol.threshold(max(psi.norm(), 1.0)):
        raise DomainError("the half-normalized kernel needs psi(e) = 0")
    adj = psi.adjoint().values
    ent = adj[:, None, :] + psi.values[None, :, :] - e_val[None, None, :] - twisted_entries(psi.values, alpha)
    if half:
        ent = 0.5 * ent
    return Kernel(AMatrix(psi.descriptor, ent), half)


def kernel_is_positive(K: Kernel, tol: Tolerance | float | None = None, scale: float | None = None) -> Verdict:
    return matrix_positivity(K.matrix, tol, scale)


class ModuleVector:
    """``sum_g c(g) . coeffs(g)`` in ``X_0 / N``, coefficients packed as ``(|G|, P)``."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: np.ndarray):
        coeffs = np.array(coeffs, dtype=complex)
        coeffs.setflags(write=False)
        self.coeffs = coeffs

    def __add__(self, other: "ModuleVector") -> "ModuleVector":
        return ModuleVector(self.coeffs + other.coeffs)

    def __sub__(self, other: "ModuleVector") -> "ModuleVector":
        return ModuleVector(self.coeffs - other.coeffs)

    def __neg__(self) -> "ModuleVector":
        return ModuleVector(-self.coeffs)

    def __rmul__(self, c):
        if np.isscalar(c):
            return ModuleVector(complex(c) * self.coeffs)
        return NotImplemented

    def right_mul(self, a: AlgebraElement) -> "ModuleVector":
        """The right module action ``x . a``."""
        d = a.descriptor
        n = self.coeffs.shape[0]
        return ModuleVector(_accel.block_matmul(self.coeffs, np.tile(a.packed, (n, 1)), d.dims_array, d.offsets_array))


@dataclass
class ModuleRep:
    """Gram-matrix realisation of the module ``X`` with cocycle ``c`` and action ``u``."""

    psi: GroupFunction
    alpha: Action
    gram: AMatrix
    quotient_rank: int
    tol: Tolerance

    @property
    def group(self):
        return self.psi.group

    @property
    def descriptor(self):
        return self.psi.descriptor

    def zero_vector(self) -> ModuleVector:
        return ModuleVector(np.zeros_like(self.psi.values))


def _numerical_rank(gram: AMatrix, tol: Tolerance) -> int:
    eigs = [np.linalg.eigvalsh((m + m.conj().T) / 2) for m in gram.flatten()]
    lam_max = max((float(w.max()) for w in eigs if w.size), default=0.0)
    if lam_max <= 0:
        return 0
    cut = tol.eps * lam_max
    return int(sum(int((w > cut).sum()) for w in eigs))


def build_module(psi: GroupFunction, alpha: Action, tol: Tolerance | float | None = None) -> ModuleRep:
    """Hilbert A-module, equivariant action and symmetric cocycle representing ``psi``.

    ``psi`` must be normalized, ``A^+``-valued and alpha-negative definite.
    """
    tol = as_tolerance(tol)
    scale = max(psi.norm(), 1.0)
    if op_norm(psi.at_identity()) > tol.threshold(scale):
        raise DomainError("build_module: psi is not normalized (psi(e) != 0)")
    for g in psi.group:
        if not psd_verdict(psi(g).blocks, tol, scale).passed:
            raise DomainError(f"build_module: psi({g}) is not positive")
    nd = is_alpha_nd_gamma(psi, alpha, tol)
    if not nd.passed:
        raise DomainError(f"build_module: psi is not alpha-negative definite (residual {nd.residual:.3g})")
    gram = gamma_kernel(psi, alpha, half=True, tol=tol).matrix
    return ModuleRep(psi, alpha, gram, _numerical_rank(gram, tol), tol)


# inner products


def _flat_columns(X: ModuleRep, coeffs: np.ndarray) -> list[np.ndarray]:
    """Per summand, the ``(N, |G| d, d)`` stacks representing a batch of vectors."""
    n = X.group.order
    lead = coeffs.shape[:-2]
    out = []
    for b in X.descriptor.blocks_of(coeffs):
        d = b.shape[-1]
        out.append(b.reshape(*lead, n * d, d))
    return out


def inner_batch(X: ModuleRep, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Row-wise ``<xs[r], ys[r]>`` for coefficient batches of shape ``(N, |G|, P)``."""
    gram = X.gram.flatten()
    fx, fy = _flat_columns(X, xs), _flat_columns(X, ys)
    blocks = [np.conj(np.swapaxes(a, -1, -2)) @ gm @ b for a, gm, b in zip(fx, gram, fy)]
    return X.descriptor.pack_blocks(blocks)


def gram_of(X: ModuleRep, xs: np.ndarray) -> np.ndarray:
    """All pairwise inner products ``<xs[r], xs[s]>`` as a packed ``(N, N, P)`` array."""
    N = xs.shape[0]
    n = X.group.order
    d = X.descriptor
    out = np.zeros((N, N, d.packed_size), dtype=complex)
    for k, (gm, fx) in enumerate(zip(X.gram.flatten(), _flat_columns(X, xs))):
        ds = d.block_dims[k]
        W = np.concatenate(list(fx), axis=1) if N else np.zeros((n * ds, 0))
        full = W.conj().T @ gm @ W
        out[:, :, d.block_slice(k)] = full.reshape(N, ds, N, ds).transpose(0, 2, 1, 3).reshape(N, N, ds * ds)
    return out


def module_inner(X: ModuleRep, x: ModuleVector, y: ModuleVector) -> AlgebraElement:
    """``sum_{g,h} x(g)^* gamma(g, h) y(h)``."""
    return AlgebraElement.from_packed(X.descriptor, inner_batch(X, x.coeffs[None], y.coeffs[None])[0])


def module_norm(X: ModuleRep, x: ModuleVector) -> float:
    return float(np.sqrt(max(op_norm(module_inner(X, x, x)), 0.0)))


def seminorm_distance(X: ModuleRep, x: ModuleVector, y: ModuleVector) -> float:
    """``||<d, d>||`` for ``d = x - y``."""
    d = x - y
    return op_norm(module_inner(X, d, d))


def cocycle(X: ModuleRep, g: int) -> ModuleVector:
    """``c(g) = delta_g (x) 1_A + N``."""
    coeffs = np.zeros_like(X.psi.values)
    coeffs[g] = X.descriptor.unit_packed()
    return ModuleVector(coeffs)


def _u_batch(X: ModuleRep, alpha: Action, g: int, coeffs: np.ndarray) -> np.ndarray:
    """``u_g`` on a batch ``(N, |G|, P)``: ``y(g k) += alpha_g(x(k))``, ``y(g) -= alpha_g(sum_k x(k))``."""
    N, n, p = coeffs.shape
    moved = alpha.apply_packed(np.full(N * n, g), coeffs.reshape(N * n, p)).reshape(N, n, p)
    out = np.zeros_like(coeffs)
    out[:, X.group.cayley[g], :] = moved
    out[:, g, :] -= moved.sum(axis=1)
    return out


def u_action(X: ModuleRep, alpha: Action, g: int, x: ModuleVector) -> ModuleVector:
    """``u_g(sum c(k) . a_k) = sum (c(g k) - c(g)) . alpha_g(a_k)``."""
    return ModuleVector(_u_batch(X, alpha, g, x.coeffs[None])[0])


def spanning_vectors(X: ModuleRep) -> np.ndarray:
    """``c(k) . E`` for every group element ``k`` and matrix unit ``E``; shape ``(|G| P, |G|, P)``."""
    n, p = X.group.order, X.descriptor.packed_size
    out = np.zeros((n * p, n, p), dtype=complex)
    for k in range(n):
        for q in range(p):
            out[k * p + q, k, q] = 1.0
    return out


@dataclass
class ModuleReport:
    residuals: dict
    limit: float
    quotient_rank: int
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def __bool__(self):
        return self.passed

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "limit": self.limit,
            "quotient_rank": self.quotient_rank,
            "residuals": {k: float(v) for k, v in self.residuals.items()},
            "checks": {k: bool(v) for k, v in self.checks.items()},
        }


def _max_norm(packed: np.ndarray, X: ModuleRep) -> float:
    """Largest operator norm over a packed batch of elements."""
    flat = packed.reshape(-1, X.descriptor.packed_size)
    if flat.shape[0] == 0:
        return 0.0
    return max(float(np.linalg.norm(b, 2, axis=(-2, -1)).max()) for b in X.descriptor.blocks_of(flat))


def _self_inner(X: ModuleRep, ds: np.ndarray) -> float:
    """``max ||<d, d>||`` over a batch of coefficient arrays."""
    return _max_norm(inner_batch(X, ds, ds), X)


def verify_module(X: ModuleRep, psi: GroupFunction | None = None, alpha: Action | None = None, tol: Tolerance | float | None = None) -> ModuleReport:
    """Check every structural identity of ``(X, u, c)`` in the module seminorm."""
    psi = X.psi if psi is None else psi
    alpha = X.alpha if alpha is None else alpha
    tol = X.tol if tol is None else as_tolerance(tol)
    G, d = X.group, X.descriptor
    n, p = G.order, d.packed_size
    cs = np.stack([cocycle(X, g).coeffs for g in G])
    cgram = gram_of(X, cs)
    res = {}

    res["reconstruction"] = _max_norm(cgram[np.arange(n), np.arange(n)] - psi.values, X)
    res["symmetry"] = _max_norm(cgram - cgram.transpose(1, 0, 2), X)

    # 2 <c(g), c(h)> = psi(g) + psi(h) - alpha_g(psi(g^{-1} h))
    uniq = psi.values[:, None, :] + psi.values[None, :, :] - twisted_entries(psi.values, alpha)
    res["uniqueness_identity"] = _max_norm(2 * cgram - uniq, X)

    # c(gh) = c(g) + u_g(c(h))
    coc = []
    for g in G:
        ucs = _u_batch(X, alpha, g, cs)
        coc.append(cs[G.cayley[g]] - cs[g][None] - ucs)
    res["cocycle_identity"] = _self_inner(X, np.concatenate(coc))
    res["c_e_zero"] = _self_inner(X, cs[G.identity][None])

    span = spanning_vectors(X)
    base = gram_of(X, span)
    N = span.shape[0]
    eq, law, bim, iso = 0.0, [], [], 0.0
    units = np.eye(p, dtype=complex)
    for g in G:
        ug = _u_batch(X, alpha, g, span)
        moved_gram = gram_of(X, ug)
        target = alpha.apply_packed(np.full(N * N, g), base.reshape(N * N, p)).reshape(N, N, p)
        eq = max(eq, _max_norm(moved_gram - target, X))
        iso = max(iso, _isometry_gap(X, moved_gram, base))
        for h in G:
            law.append(_u_batch(X, alpha, g, _u_batch(X, alpha, h, span)) - _u_batch(X, alpha, G.mul(g, h), span))
        # u_g(x . a) = (u_g x) . alpha_g(a) for x = c(k) . E and a a matrix unit
        ag = alpha.apply_packed(np.full(p, g), units)
        for q in range(p):
            xa = _right_mul_batch(X, span, units[q])
            bim.append(_u_batch(X, alpha, g, xa) - _right_mul_batch(X, ug, ag[q]))
    res["equivariance"] = eq
    res["group_law"] = _self_inner(X, np.concatenate(law))
    res["bimodule"] = _self_inner(X, np.concatenate(bim))
    res["isometry"] = iso

    scale = max(psi.norm(), 1.0)
    limit = tol.threshold(scale)
    checks = {k: v <= limit for k, v in res.items()}
    if psi.is_central_valued(tol):
        cent = all(is_central(AlgebraElement.from_packed(d, cgram[i, j]), tol, scale) for i in range(n) for j in range(n))
        checks["central_cocycle"] = cent
    return ModuleReport(res, limit, X.quotient_rank, checks)


def _isometry_gap(X: ModuleRep, moved_gram: np.ndarray, base: np.ndarray) -> float:
    N = base.shape[0]
    idx = np.arange(N)
    a = np.array([op_norm(AlgebraElement.from_packed(X.descriptor, v)) for v in moved_gram[idx, idx]])
    b = np.array([op_norm(AlgebraElement.from_packed(X.descriptor, v)) for v in base[idx, idx]])
    return float(np.abs(np.sqrt(np.maximum(a, 0)) - np.sqrt(np.maximum(b, 0))).max(initial=0.0))


def _right_mul_batch(X: ModuleRep, coeffs: np.ndarray, a: np.ndarray) -> np.ndarray:
    d = X.descriptor
    shape = coeffs.shape
    flat = coeffs.reshape(-1, d.packed_size)
    out = _accel.block_matmul(flat, np.tile(a, (flat.shape[0], 1)), d.dims_array, d.offsets_array)
    return out.reshape(shape)


def is_u_symmetric(X: ModuleRep, alpha: Action, x: ModuleVector, tol: Tolerance | float | None = None) -> tuple[bool, float]:
    """``<x, u_g x>`` self-adjoint for every ``g``; returns (verdict, residual)."""
    tol = as_tolerance(tol)
    worst = 0.0
    for g in X.group:
        v = module_inner(X, x, u_action(X, alpha, g, x))
        worst = max(worst, op_norm(v - v.adjoint()))
    scale = max(op_norm(module_inner(X, x, x)), X.psi.norm(), 1.0)
    return worst <= tol.threshold(scale), worst


def coboundary(alpha: Action, X: ModuleRep, x: ModuleVector, tol: Tolerance | float | None = None) -> GroupFunction:
    """``g -> <u_g x - x, u_g x - x>`` for a u-symmetric vector ``x``."""
    ok, res = is_u_symmetric(X, alpha, x, tol)
    if not ok:
        raise DomainError(f"coboundary: x is not u-symmetric (residual {res:.3g})")
    n = X.group.order
    diffs = np.stack([_u_batch(X, alpha, g, x.coeffs[None])[0] - x.coeffs for g in X.group])
    vals = inner_batch(X, diffs, diffs)
    return GroupFunction(X.group, X.descriptor, vals.reshape(n, -1))
