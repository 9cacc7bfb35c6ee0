"""Exponentials of central negative definite functions, the regular covariant
representation and the semigroup of completely positive multipliers.

For finite ``G`` the full and reduced crossed products coincide, so one
regular representation on ``l2(G) (x) C^D`` serves both.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from . import _accel
from .algebra import (
    AlgebraElement,
    AMatrix,
    Tolerance,
    as_tolerance,
    exp_element,
    matrix_positivity,
    op_norm,
    psd_verdict,
    schur_exp,
    schur_product,
)
from .definiteness import (
    is_alpha_nd_direct,
    is_alpha_nd_gamma,
    is_alpha_pd,
    pd_block_matrix,
    sum_zero_basis,
    symmetry_residual,
)
from .errors import DomainError, StructuralError
from .group_action import Action, GroupFunction
from .kernel_cocycle import gamma_kernel
from .report import Report

DEFAULT_T_GRID = (0.001, 0.01, 0.1, 1.0, 10.0)


def exp_function(psi: GroupFunction, t: float) -> GroupFunction:
    """``g -> exp(-t psi(g))``."""
    if t < 0:
        raise DomainError(f"exp_function needs t >= 0, got {t}")
    return GroupFunction(psi.group, psi.descriptor, [exp_element(-float(t) * v) for v in psi.elements()])


def _require_central(psi: GroupFunction, tol: Tolerance, what: str):
    if not psi.is_central_valued(tol):
        raise DomainError(f"{what}: psi must be central-valued")


def schoenberg_forward(psi: GroupFunction, alpha: Action, t_grid: Sequence[float] = DEFAULT_T_GRID, tol: Tolerance | float | None = None) -> Report:
    """Positive definiteness of ``exp(-t psi)`` over the grid, with the Schur factorisation replayed.

    ``[alpha_{g_i}(exp(-t psi(g_i^{-1} g_j)))] = [b_i^* exp(t gamma(g_i, g_j)) b_j]`` with
    ``b_i = exp(t psi(e) / 2 - t psi(g_i))``.
    """
    tol = as_tolerance(tol)
    _require_central(psi, tol, "schoenberg_forward")
    nd = is_alpha_nd_gamma(psi, alpha, tol)
    if not nd.passed:
        raise DomainError(f"schoenberg_forward: psi is not alpha-negative definite (residual {nd.residual:.3g})")
    gamma = gamma_kernel(psi, alpha).matrix
    e_val = psi.at_identity()
    n = psi.group.order
    per_t = []
    for t in t_grid:
        phi = exp_function(psi, t)
        pd = is_alpha_pd(phi, alpha, tol)
        M = pd_block_matrix(phi, alpha)
        E = schur_exp(float(t) * gamma)
        b = [exp_element(0.5 * t * e_val - t * v) for v in psi.elements()]
        B = AMatrix.from_elements([[b[i].adjoint() * b[j] for j in range(n)] for i in range(n)])
        prod = schur_product(B, E, tol, require_central=True)
        scale = max(M.norm(), 1.0)
        per_t.append({
            "t": float(t),
            "pd": pd,
            "factorization_residual": (prod - M).norm() / scale,
            "exp_gamma_pd": matrix_positivity(E, tol).passed,
            "rank_one_pd": matrix_positivity(B, tol).passed,
        })
    ok = all(r["pd"].passed and r["factorization_residual"] <= tol.eps and r["exp_gamma_pd"] and r["rank_one_pd"] for r in per_t)
    return Report("schoenberg_forward", ok, {"nd_gamma": nd, "per_t": per_t})


def schoenberg_converse(psi: GroupFunction, alpha: Action, t_grid: Sequence[float] = DEFAULT_T_GRID, tol: Tolerance | float | None = None) -> Report:
    """If ``exp(-t psi)`` is positive definite on the grid then ``psi`` must be negative definite.

    The verdict is grid-relative.  The derivative at ``0`` is tracked on the
    sub-grid ``t <= 0.1`` through ``V^* M_t V / t`` on sum-zero tuples.
    """
    tol = as_tolerance(tol)
    ts = sorted(float(t) for t in t_grid)
    n = psi.group.order
    V = sum_zero_basis(n)
    per_t = []
    for t in ts:
        phi = exp_function(psi, t)
        pd = is_alpha_pd(phi, alpha, tol)
        entry = {"t": t, "pd": pd, "symmetry_residual": symmetry_residual(phi, alpha)}
        if 0 < t <= 0.1 and n > 1:
            C = pd_block_matrix(phi, alpha).compress(V)
            entry["derivative_min_eigenvalue"] = min(float(np.linalg.eigvalsh((m + m.conj().T) / 2)[0]) for m in C.flatten()) / t
        per_t.append(entry)
    pd_all = all(r["pd"].passed for r in per_t)
    nd = is_alpha_nd_direct(psi, alpha, tol)
    small = [t for t in ts if 0 < t <= 0.1]
    sym_psi = symmetry_residual(psi, alpha)
    sym_ok = sym_psi <= tol.threshold(max(psi.norm(), 1.0))
    consistent = (not pd_all) or (nd.passed and sym_ok)
    return Report("schoenberg_converse", consistent, {
        "grid_relative": True,
        "derivative_subgrid": small,
        "derivative_subgrid_sufficient": len(small) >= 2,
        "pd_on_grid": pd_all,
        "nd_direct": nd,
        "agreement": pd_all == nd.passed,
        "symmetry_residual": sym_psi,
        "per_t": per_t,
    })


# regular covariant representation


def _dense(x_blocks: Sequence[np.ndarray]) -> np.ndarray:
    return scipy.linalg.block_diag(*x_blocks).astype(complex)


@dataclass(frozen=True)
class CrossedProductRep:
    """``(pi(a) xi)(h) = alpha_{h^{-1}}(a) xi(h)`` and ``(lambda_g xi)(h) = xi(g^{-1} h)`` on ``l2(G) (x) C^D``."""

    action: Action

    @property
    def group(self):
        return self.action.group

    @property
    def descriptor(self):
        return self.action.descriptor

    @property
    def dimension(self) -> int:
        return self.group.order * self.descriptor.total_dim

    def pi(self, a: AlgebraElement) -> np.ndarray:
        G = self.group
        moved = self.action.apply_packed(G.inverses, np.tile(a.packed, (G.order, 1)))
        return scipy.linalg.block_diag(*[_dense(self.descriptor.blocks_of(moved[h])) for h in G])

    def lam(self, g: int) -> np.ndarray:
        G = self.group
        P = np.zeros((G.order, G.order))
        P[G.cayley[g], np.arange(G.order)] = 1.0
        return np.kron(P, np.eye(self.descriptor.total_dim)).astype(complex)

    def regular(self, F: GroupFunction) -> np.ndarray:
        """``Lambda(F) = sum_g pi(F(g)) lambda_g`` as a dense matrix."""
        return sum(self.pi(F(g)) @ self.lam(g) for g in self.group)

    def summand_form(self, coeffs: np.ndarray) -> list[np.ndarray]:
        """``Lambda(F)`` in ``(+)_s M_{|G| d_s}``: block ``(h, k)`` is ``alpha_{h^{-1}}(F(h k^{-1}))``."""
        G, d = self.group, self.descriptor
        n = G.order
        hh, kk = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        src = G.cayley[hh, G.inverses[kk]].ravel()
        ent = self.action.apply_packed(G.inverses[hh.ravel()], coeffs[src]).reshape(n, n, -1)
        return AMatrix(d, ent).flatten()

    def coefficients_of(self, mats: Sequence[np.ndarray]) -> np.ndarray:
        """Inverse of ``summand_form`` on its image: ``F(g)`` is block ``(e, g^{-1})``."""
        G, d = self.group, self.descriptor
        e = G.identity
        blocks = []
        for s, m in enumerate(mats):
            ds = d.block_dims[s]
            row = m[e * ds:(e + 1) * ds].reshape(ds, G.order, ds).transpose(1, 0, 2)
            blocks.append(row[G.inverses])
        return d.pack_blocks(blocks)

    def _dense_to_summands(self, X: np.ndarray) -> tuple[list[np.ndarray], float]:
        """Split a dense operator into summand matrices; also return the off-summand mass."""
        G, d = self.group, self.descriptor
        n, D = G.order, d.total_dim
        X4 = X.reshape(n, D, n, D)
        out, mask = [], np.zeros((D, D), dtype=bool)
        starts = np.cumsum((0,) + d.block_dims)
        for s, ds in enumerate(d.block_dims):
            o = starts[s]
            mask[o:o + ds, o:o + ds] = True
            out.append(X4[:, o:o + ds, :, o:o + ds].reshape(n * ds, n * ds))
        off = float(np.abs(X4 * ~mask[None, :, None, :]).max(initial=0.0))
        return out, off

    def verify(self, tol: Tolerance | float | None = None) -> Report:
        """``pi`` is a *-homomorphism, ``lambda`` a unitary representation, and the pair is covariant."""
        tol = as_tolerance(tol)
        G, d, al = self.group, self.descriptor, self.action
        units = d.matrix_units()
        pis = [self.pi(u) for u in units]
        lams = [self.lam(g) for g in G]
        hom = 0.0
        for i, a in enumerate(units):
            hom = max(hom, float(np.abs(self.pi(a.adjoint()) - pis[i].conj().T).max()))
            for j, b in enumerate(units):
                hom = max(hom, float(np.abs(self.pi(a * b) - pis[i] @ pis[j]).max()))
        rep = max(float(np.abs(lams[g] @ lams[h] - lams[G.mul(g, h)]).max()) for g in G for h in G)
        uni = max(float(np.abs(L @ L.conj().T - np.eye(self.dimension)).max()) for L in lams)
        cov = 0.0
        for g in G:
            for i, a in enumerate(units):
                cov = max(cov, float(np.abs(lams[g] @ pis[i] @ lams[g].conj().T - self.pi(al.apply(g, a))).max()))
        # the summand picture agrees with the regular representation
        span = np.eye(G.order * d.packed_size, dtype=complex).reshape(-1, G.order, d.packed_size)
        picture = 0.0
        for c in span:
            F = GroupFunction(G, d, c)
            dense_parts, off = self._dense_to_summands(self.regular(F))
            mats = self.summand_form(c)
            picture = max(picture, off, *(float(np.abs(x - y).max()) for x, y in zip(dense_parts, mats)))
            picture = max(picture, float(np.abs(self.coefficients_of(mats) - c).max()))
        res = {"homomorphism": hom, "representation": rep, "unitary": uni, "covariance": cov, "summand_picture": picture}
        limit = tol.threshold(1.0)
        return Report("crossed_product", all(v <= limit for v in res.values()), {"residuals": res, "limit": limit})


def build_crossed_product(alpha: Action) -> CrossedProductRep:
    return CrossedProductRep(alpha)


# multipliers


def _left_mul_matrix(psi_desc, z: np.ndarray) -> np.ndarray:
    """Matrix of ``x -> z x`` on packed coordinates."""
    p = psi_desc.packed_size
    basis = np.eye(p, dtype=complex)
    out = _accel.block_matmul(np.tile(z, (p, 1)), basis, psi_desc.dims_array, psi_desc.offsets_array)
    return out.T


@dataclass(frozen=True)
class MultiplierMap:
    """``F -> exp(-t psi) F`` on ``C_c(G, A)``, coefficients ordered ``(g, packed index)``."""

    psi: GroupFunction
    t: float
    factors: np.ndarray  # packed exp(-t psi(g)), shape (|G|, P)

    @property
    def as_linear_map(self) -> np.ndarray:
        d = self.psi.descriptor
        return scipy.linalg.block_diag(*[_left_mul_matrix(d, z) for z in self.factors])

    def __call__(self, coeffs: np.ndarray) -> np.ndarray:
        """Apply to coefficient arrays of shape ``(..., |G|, P)``."""
        d = self.psi.descriptor
        coeffs = np.asarray(coeffs, dtype=complex)
        flat = coeffs.reshape(-1, coeffs.shape[-1])
        reps = flat.shape[0] // self.factors.shape[0]
        out = _accel.block_matmul(np.tile(self.factors, (reps, 1)), flat, d.dims_array, d.offsets_array)
        return out.reshape(coeffs.shape)

    def schur_symbol(self, alpha: Action) -> list[np.ndarray]:
        """Scalar matrices ``c_s(h, k) = [alpha_{h^{-1}}(exp(-t psi(h k^{-1})))]_s``."""
        G, d = alpha.group, alpha.descriptor
        n = G.order
        hh, kk = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        moved = alpha.apply_packed(G.inverses[hh.ravel()], self.factors[G.cayley[hh, G.inverses[kk]].ravel()])
        out = []
        for s in range(d.num_blocks):
            blk = d.blocks_of(moved)[s]
            out.append(blk[:, 0, 0].reshape(n, n))
        return out


def _check_multiplier_pre(psi: GroupFunction, alpha: Action, tol: Tolerance) -> GroupFunction:
    _require_central(psi, tol, "multiplier")
    scale = max(psi.norm(), 1.0)
    if op_norm(psi.at_identity()) > tol.threshold(scale):
        raise DomainError("multiplier: psi is not normalized")
    nd = is_alpha_nd_gamma(psi, alpha, tol)
    if not nd.passed:
        raise DomainError(f"multiplier: psi is not alpha-negative definite (residual {nd.residual:.3g})")
    vals = np.array(psi.values)
    vals[psi.group.identity] = 0.0
    return GroupFunction(psi.group, psi.descriptor, vals)


def multiplier(psi: GroupFunction, t: float, alpha: Action | None = None, tol: Tolerance | float | None = None, checked: bool = False) -> MultiplierMap:
    """``M_t``; ``psi(e)`` within tolerance of zero is snapped to exactly zero so ``M_t(1) = 1`` holds exactly."""
    tol = as_tolerance(tol)
    if t < 0:
        raise DomainError(f"multiplier needs t >= 0, got {t}")
    if not checked:
        if alpha is None:
            raise StructuralError("multiplier needs the action to check its preconditions")
        psi = _check_multiplier_pre(psi, alpha, tol)
    return MultiplierMap(psi, float(t), exp_function(psi, t).values)


def _choi(C: np.ndarray, d: int) -> np.ndarray:
    """Choi matrix ``sum E_pq (x) Phi(E_pq)`` of the Schur multiplier with symbol ``C (x) J_d``."""
    Ct = np.kron(C, np.ones((d, d)))
    N = Ct.shape[0]
    units = np.eye(N * N, dtype=complex).reshape(N * N, N, N)
    images = units * Ct[None]
    return images.reshape(N, N, N, N).transpose(0, 2, 1, 3).reshape(N * N, N * N)


def verify_cp_semigroup(psi: GroupFunction, alpha: Action, t_grid: Sequence[float] = DEFAULT_T_GRID, tol: Tolerance | float | None = None, choi: bool = True) -> Report:
    """Complete positivity (Choi), unitality, the semigroup law and compatibility with the regular picture."""
    tol = as_tolerance(tol)
    psi0 = _check_multiplier_pre(psi, alpha, tol)
    G, d = alpha.group, alpha.descriptor
    n, p = G.order, d.packed_size
    cp = build_crossed_product(alpha)
    one = np.zeros((n, p), dtype=complex)
    one[G.identity] = d.unit_packed()
    span = np.eye(n * p, dtype=complex).reshape(-1, n, p)
    maps = {float(t): multiplier(psi0, t, checked=True) for t in t_grid}
    ident = multiplier(psi0, 0.0, checked=True)
    per_t = []
    for t, M in maps.items():
        entry = {"t": t, "unital": bool(np.array_equal(M(one), one))}
        if choi:
            mins, lmax = [], 0.0
            for s, C in enumerate(M.schur_symbol(alpha)):
                w = np.linalg.eigvalsh(_choi(C, d.block_dims[s]))
                mins.append(float(w[0]))
                lmax = max(lmax, float(np.abs(w).max()))
            entry["choi_min_eigenvalue"] = min(mins)
            entry["choi_lambda_max"] = lmax
            entry["choi_positive"] = min(mins) >= -max(tol.eps, 1e-8) * lmax
        # Schur-symbol extension agrees with Lambda(M_t F) on the spanning set
        comp = 0.0
        symbol = M.schur_symbol(alpha)
        for c in span:
            lhs = [np.kron(C, np.ones((ds, ds))) * m for C, ds, m in zip(symbol, d.block_dims, cp.summand_form(c))]
            rhs = cp.summand_form(M(c))
            comp = max(comp, max(float(np.abs(x - y).max()) for x, y in zip(lhs, rhs)))
        entry["compatibility_residual"] = comp
        per_t.append(entry)
    law = 0.0
    for t, Mt in maps.items():
        for s, Ms in maps.items():
            Mts = multiplier(psi0, t + s, checked=True)
            law = max(law, float(np.linalg.norm(Mt.as_linear_map @ Ms.as_linear_map - Mts.as_linear_map, 2)))
    id_res = float(np.abs(ident.as_linear_map - np.eye(n * p)).max())
    cpv = cp.verify(tol)
    limit = tol.threshold(1.0)
    ok = (
        all(r["unital"] and r.get("choi_positive", True) and r["compatibility_residual"] <= limit for r in per_t)
        and law <= limit
        and id_res == 0.0
        and cpv.passed
    )
    return Report("cp_semigroup", ok, {
        "per_t": per_t,
        "semigroup_law_residual": law,
        "identity_at_zero_residual": id_res,
        "crossed_product": cpv,
        "identification": "full and reduced crossed products coincide for finite groups",
    })


def generator_check(psi: GroupFunction, alpha: Action, tol: Tolerance | float | None = None, ts: Sequence[float] = (1e-1, 1e-2, 1e-3, 1e-4)) -> Report:
    """``(F - M_t F) / t -> psi F`` on spanning ``F``; reports the observed convergence order."""
    tol = as_tolerance(tol)
    psi0 = _check_multiplier_pre(psi, alpha, tol)
    G, d = alpha.group, alpha.descriptor
    n, p = G.order, d.packed_size
    span = np.eye(n * p, dtype=complex).reshape(-1, n, p)
    psiF = _accel.block_matmul(np.tile(psi0.values, (span.shape[0], 1)), span.reshape(-1, p), d.dims_array, d.offsets_array).reshape(span.shape)
    residuals = []
    for t in ts:
        M = multiplier(psi0, t, checked=True)
        diff = (span - M(span)) / t - psiF
        residuals.append(max(op_norm(AlgebraElement.from_packed(d, v)) for v in diff.reshape(-1, p)))
    logs = [(np.log(t), np.log(r)) for t, r in zip(ts, residuals) if r > 0]
    rate = float(np.polyfit(*zip(*logs), 1)[0]) if len(logs) >= 2 else None
    f_norm = 1.0
    bound = 1e-3 * psi0.norm() * f_norm
    final = residuals[-1]
    ok = final <= bound if bound > 0 else final == 0.0
    return Report("generator", bool(ok), {"ts": list(ts), "residuals": residuals, "rate": rate, "bound": bound, "final_residual": final})
