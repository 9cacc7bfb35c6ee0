"""Spectral lower function and the two constructions linking central positive
definite families with proper negative definite functions.

For finite groups properness is vacuous, so everything is reported relative
to an explicit exhaustion chain ("windowed").
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .algebra import (
    AlgebraElement,
    Tolerance,
    as_tolerance,
    op_norm,
    psd_verdict,
)
from .definiteness import is_alpha_nd_gamma, is_alpha_pd, one_minus, pointwise_product
from .errors import DomainError, StructuralError
from .group_action import Action, FiniteGroup, GroupFunction
from .report import Report
from .schoenberg_semigroup import DEFAULT_T_GRID, exp_function


@dataclass(frozen=True)
class ExhaustionChain:
    """Increasing finite subsets ``K_1 <= K_2 <= ... <= G`` ending in ``G``."""

    group: FiniteGroup
    subsets: tuple[frozenset, ...]

    def __post_init__(self):
        if not self.subsets:
            raise StructuralError("an exhaustion chain needs at least one set")
        everything = frozenset(range(self.group.order))
        for k, s in enumerate(self.subsets):
            if not s <= everything:
                raise StructuralError(f"chain set {k} contains indices outside the group")
            if k and not self.subsets[k - 1] <= s:
                raise StructuralError(f"chain set {k} does not contain set {k - 1}")
        if self.subsets[-1] != everything:
            raise StructuralError("the last chain set must be the whole group")

    @classmethod
    def from_lists(cls, group: FiniteGroup, subsets: Sequence[Sequence[int]]) -> "ExhaustionChain":
        return cls(group, tuple(frozenset(int(g) for g in s) for s in subsets))

    def __len__(self):
        return len(self.subsets)

    def complement(self, k: int) -> list[int]:
        return sorted(set(range(self.group.order)) - self.subsets[k])

    def to_json(self) -> list:
        return [sorted(s) for s in self.subsets]


@dataclass(frozen=True)
class PDFamily:
    """Central-valued alpha-positive definite functions with value ``1_A`` at ``e``."""

    alpha: Action
    functions: tuple[GroupFunction, ...]

    def __len__(self):
        return len(self.functions)

    def __iter__(self):
        return iter(self.functions)


def _check_family_member(h: GroupFunction, alpha: Action, tol: Tolerance, index: int):
    if not h.is_central_valued(tol):
        raise DomainError(f"family member {index} is not central-valued")
    one = AlgebraElement.unit(h.descriptor)
    if op_norm(h.at_identity() - one) > tol.threshold(max(h.norm(), 1.0)):
        raise DomainError(f"family member {index} does not take the value 1 at the identity")
    pd = is_alpha_pd(h, alpha, tol)
    if not pd.passed:
        raise DomainError(f"family member {index} is not alpha-positive definite (residual {pd.residual:.3g})")


def pd_family(alpha: Action, functions: Sequence[GroupFunction], tol: Tolerance | float | None = None) -> PDFamily:
    tol = as_tolerance(tol)
    for j, h in enumerate(functions):
        _check_family_member(h, alpha, tol, j)
    return PDFamily(alpha, tuple(functions))


def spectral_lower(psi: GroupFunction, tol: Tolerance | float | None = None) -> np.ndarray:
    """``l(g) = min sp(psi(g))``."""
    tol = as_tolerance(tol)
    limit = tol.threshold(max(psi.norm(), 1.0))
    out = np.empty(psi.group.order)
    for g, v in enumerate(psi.elements()):
        if op_norm(v - v.adjoint()) > limit:
            raise DomainError(f"spectral_lower: psi({g}) is not self-adjoint")
        out[g] = min(float(np.linalg.eigvalsh((b + b.conj().T) / 2)[0]) for b in v.blocks)
    return out


def _spectral_max(v: AlgebraElement) -> float:
    return max(float(np.linalg.eigvalsh((b + b.conj().T) / 2)[-1]) for b in v.blocks)


def squared_modulus(h: GroupFunction, alpha: Action, tol: Tolerance | float | None = None) -> GroupFunction:
    """``g -> h(g)^* h(g)`` for central positive definite ``h``."""
    tol = as_tolerance(tol)
    if not h.is_central_valued(tol):
        raise DomainError("squared_modulus: h is not central-valued")
    pd = is_alpha_pd(h, alpha, tol)
    if not pd.passed:
        raise DomainError(f"squared_modulus: h is not alpha-positive definite (residual {pd.residual:.3g})")
    return pointwise_product(h.adjoint(), h)


def _z_plus(psi: GroupFunction, tol: Tolerance) -> bool:
    scale = max(psi.norm(), 1.0)
    return psi.is_central_valued(tol) and all(psd_verdict(v.blocks, tol, scale).passed for v in psi.elements())


def haagerup_to_nd(family: PDFamily, chain: ExhaustionChain, tol: Tolerance | float | None = None, terms: int | None = None) -> tuple[GroupFunction, Report]:
    """``psi_N = sum_{j <= N} (1 - phi_j)`` with ``phi_j = h_j^* h_j``, plus the growth bound off ``G_n``."""
    tol = as_tolerance(tol)
    alpha = family.alpha
    G, d = alpha.group, alpha.descriptor
    N = len(family) if terms is None else int(terms)
    if not 0 <= N <= len(family):
        raise DomainError(f"cannot take {N} terms of a family of {len(family)}")
    for j, h in enumerate(family.functions[:N]):
        _check_family_member(h, alpha, tol, j)
    phis = [squared_modulus(h, alpha, tol) for h in family.functions[:N]]
    psi = GroupFunction(G, d, np.zeros((G.order, d.packed_size), dtype=complex))
    terms_nd = []
    for phi in phis:
        term = one_minus(phi, alpha, tol)
        terms_nd.append(is_alpha_nd_gamma(term, alpha, tol).passed)
        psi = psi + term

    ell = spectral_lower(psi, tol) if N else np.zeros(G.order)
    # F_j: where phi_j(g) < 1/2 fails; G_n: union of F_1..F_n
    F = [sorted(g for g in G if not _spectral_max(phi(g)) < 0.5) for phi in phis]
    growth = []
    covered: set[int] = set()
    ok_growth = True
    for n in range(1, N + 1):
        covered |= set(F[n - 1])
        outside = [g for g in G if g not in covered]
        margin = min((float(ell[g]) - n / 2 for g in outside), default=None)
        holds = bool(margin is None or margin >= 0)
        ok_growth &= holds
        growth.append({"n": n, "G_n": sorted(covered), "outside": outside, "min_margin": margin, "holds": holds})

    # which summands meet ||1 - phi_j|| <= 2^-j on which chain sets
    dyadic = []
    for j, phi in enumerate(phis, start=1):
        dev = [op_norm(AlgebraElement.unit(d) - phi(g)) for g in G]
        dyadic.append({
            "j": j,
            "chain_sets": [k for k, K in enumerate(chain.subsets) if max((dev[g] for g in K), default=0.0) <= 2.0 ** -j],
        })

    nd = is_alpha_nd_gamma(psi, alpha, tol)
    normalized = op_norm(psi.at_identity()) <= tol.threshold(max(psi.norm(), 1.0))
    zplus = _z_plus(psi, tol)
    passed = nd.passed and normalized and zplus and all(terms_nd) and ok_growth
    return psi, Report("haagerup_to_nd", passed, {
        "windowed": True,
        "terms": N,
        "nd_gamma": nd,
        "normalized": normalized,
        "center_positive_values": zplus,
        "summands_nd": terms_nd,
        "spectral_lower": ell,
        "F": F,
        "growth": growth,
        "dyadic_bound": dyadic,
    })


def nd_to_haagerup(psi: GroupFunction, alpha: Action, t_grid: Sequence[float] = DEFAULT_T_GRID, tol: Tolerance | float | None = None) -> tuple[PDFamily, Report]:
    """The family ``exp(-t psi)`` over the grid, with norm profile and pointwise convergence at ``t -> 0``."""
    tol = as_tolerance(tol)
    scale = max(psi.norm(), 1.0)
    if not psi.is_central_valued(tol):
        raise DomainError("nd_to_haagerup: psi is not central-valued")
    if op_norm(psi.at_identity()) > tol.threshold(scale):
        raise DomainError("nd_to_haagerup: psi is not normalized")
    if not _z_plus(psi, tol):
        raise DomainError("nd_to_haagerup: psi does not take values in Z(A)^+")
    nd = is_alpha_nd_gamma(psi, alpha, tol)
    if not nd.passed:
        raise DomainError(f"nd_to_haagerup: psi is not alpha-negative definite (residual {nd.residual:.3g})")
    vals = np.array(psi.values)
    vals[psi.group.identity] = 0.0
    psi = GroupFunction(psi.group, psi.descriptor, vals)

    ts = sorted(float(t) for t in t_grid)
    ell = spectral_lower(psi, tol)
    one = AlgebraElement.unit(psi.descriptor)
    members, per_t = [], []
    norms = np.empty((len(ts), psi.group.order))
    for i, t in enumerate(ts):
        h = exp_function(psi, t)
        members.append(h)
        norms[i] = [op_norm(v) for v in h.elements()]
        per_t.append({
            "t": t,
            "pd": is_alpha_pd(h, alpha, tol),
            "central": h.is_central_valued(tol),
            "unit_at_identity": bool(np.array_equal(h.values[psi.group.identity], one.packed)),
            "norm_profile_residual": float(np.abs(norms[i] - np.exp(-t * ell)).max()),
            "distance_to_one": max(op_norm(v - one) for v in h.elements()),
        })
    dist = [r["distance_to_one"] for r in per_t]
    converging = all(a <= b for a, b in zip(dist, dist[1:])) and dist[0] <= ts[0] * psi.norm() + tol.threshold(1.0)
    monotone = bool(np.all(np.diff(norms, axis=0) <= tol.threshold(1.0)))
    passed = (
        all(r["pd"].passed and r["central"] and r["unit_at_identity"] and r["norm_profile_residual"] <= 1e-10 for r in per_t)
        and converging
        and monotone
    )
    return PDFamily(alpha, tuple(members)), Report("nd_to_haagerup", passed, {
        "windowed": True,
        "nd_gamma": nd,
        "spectral_lower": ell,
        "per_t": per_t,
        "pointwise_convergence": converging,
        "monotone_decay": monotone,
    })


def c0_window_report(f: GroupFunction, chain: ExhaustionChain) -> Report:
    """``max_{g not in K_n} ||f(g)||`` for each chain set; a decreasing profile stands in for vanishing at infinity."""
    norms = [op_norm(v) for v in f.elements()]
    profile = []
    for k in range(len(chain)):
        outside = chain.complement(k)
        profile.append({"n": k, "outside": outside, "max_norm": max((norms[g] for g in outside), default=None)})
    vals = [p["max_norm"] for p in profile if p["max_norm"] is not None]
    decreasing = all(a >= b for a, b in zip(vals, vals[1:]))
    return Report("c0_window", decreasing, {"windowed": True, "profile": profile, "non_increasing": decreasing})
