"""Finite groups given by Cayley tables, actions ``G -> Aut(A)``, and functions ``G -> A``.

Every automorphism of ``M_{d_1} + ... + M_{d_m}`` moves block ``k`` to a block
``pi(k)`` of equal size and conjugates it by a unitary, so an action is stored as
one permutation and one packed tuple of unitaries per group element.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import _accel
from .algebra import (
    AlgebraDescriptor,
    AlgebraElement,
    Tolerance,
    as_tolerance,
    center_expectation,
    is_central,
    op_norm,
)
from .errors import DomainError, StructuralError


@dataclass
class GroupReport:
    valid: bool
    violations: list[str] = field(default_factory=list)

    def __bool__(self):
        return self.valid

    def to_dict(self) -> dict:
        return {"valid": self.valid, "violations": list(self.violations)}


def validate_group(table, identity: int | None = None) -> GroupReport:
    """Exact check of the group axioms on a Cayley table.

    Accepts a :class:`FiniteGroup` or a raw ``n x n`` table of indices.
    """
    if isinstance(table, FiniteGroup):
        table, identity = table.cayley, table.identity
    try:
        t = np.asarray(table, dtype=np.int64)
    except (TypeError, ValueError):
        return GroupReport(False, ["table: not a rectangular integer array"])
    violations = []
    if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] == 0:
        return GroupReport(False, [f"table: expected a non-empty square table, got shape {t.shape}"])
    n = t.shape[0]
    if t.min() < 0 or t.max() >= n:
        return GroupReport(False, ["closure: entries must be element indices in [0, n)"])
    idx = np.arange(n)
    candidates = [e for e in range(n) if np.array_equal(t[e], idx) and np.array_equal(t[:, e], idx)]
    if identity is None:
        if not candidates:
            violations.append("identity: no two-sided identity element")
            identity = 0
        else:
            identity = candidates[0]
    elif identity not in candidates:
        violations.append(f"identity: element {identity} is not a two-sided identity")
    # t[t[a,b], c] == t[a, t[b,c]] for all a, b, c
    left = t[t[:, :, None], idx[None, None, :]]
    right = t[idx[:, None, None], t[None, :, :]]
    bad = np.argwhere(left != right)
    if bad.size:
        a, b, c = bad[0]
        violations.append(f"associativity: ({a}*{b})*{c} != {a}*({b}*{c}) ({len(bad)} failing triples)")
    for g in range(n):
        if not np.any((t[g] == identity) & (t[:, g] == identity)):
            violations.append(f"inverse: element {g} has no two-sided inverse")
    return GroupReport(not violations, violations)


class FiniteGroup:
    """A finite group on the indices ``0 .. n-1`` with an explicit Cayley table."""

    def __init__(self, cayley, identity: int | None = None, labels: Sequence[str] | None = None, name: str = "G"):
        t = np.array(cayley, dtype=np.int64)
        report = validate_group(t, identity)
        if not report.valid:
            raise StructuralError("invalid group table: " + "; ".join(report.violations))
        n = t.shape[0]
        if identity is None:
            identity = next(e for e in range(n) if np.array_equal(t[e], np.arange(n)))
        t.setflags(write=False)
        self.cayley = t
        self.identity = int(identity)
        inv = np.array([int(np.flatnonzero(t[g] == self.identity)[0]) for g in range(n)], dtype=np.int64)
        inv.setflags(write=False)
        self.inverses = inv
        self.labels = list(labels) if labels is not None else [str(i) for i in range(n)]
        if len(self.labels) != n:
            raise StructuralError(f"{len(self.labels)} labels for a group of order {n}")
        self.name = name

    @property
    def order(self) -> int:
        return self.cayley.shape[0]

    def __len__(self):
        return self.order

    def __iter__(self):
        return iter(range(self.order))

    def mul(self, g: int, h: int) -> int:
        return int(self.cayley[g, h])

    def inv(self, g: int) -> int:
        return int(self.inverses[g])

    def __eq__(self, other):
        if not isinstance(other, FiniteGroup):
            return NotImplemented
        return self.identity == other.identity and np.array_equal(self.cayley, other.cayley)

    __hash__ = None

    def __repr__(self):
        return f"FiniteGroup({self.name}, order={self.order})"

    # standard constructions

    @classmethod
    def cyclic(cls, n: int) -> "FiniteGroup":
        idx = np.arange(n)
        return cls((idx[:, None] + idx[None, :]) % n, 0, [f"{k}" for k in range(n)], name=f"Z{n}")

    @classmethod
    def from_permutations(cls, perms: Sequence[Sequence[int]], name: str = "G") -> "FiniteGroup":
        """Group of permutations under composition ``(p*q)(i) = p(q(i))``."""
        perms = [tuple(p) for p in perms]
        index = {p: i for i, p in enumerate(perms)}
        n = len(perms)
        table = np.empty((n, n), dtype=np.int64)
        for i, p in enumerate(perms):
            for j, q in enumerate(perms):
                comp = tuple(p[q[k]] for k in range(len(q)))
                if comp not in index:
                    raise StructuralError("permutation set is not closed under composition")
                table[i, j] = index[comp]
        ident = tuple(range(len(perms[0])))
        return cls(table, index[ident], ["".join(map(str, p)) for p in perms], name=name)

    @classmethod
    def symmetric(cls, k: int) -> "FiniteGroup":
        return cls.from_permutations(list(itertools.permutations(range(k))), name=f"S{k}")

    @classmethod
    def direct_product(cls, G: "FiniteGroup", H: "FiniteGroup") -> "FiniteGroup":
        n, m = G.order, H.order
        table = np.empty((n * m, n * m), dtype=np.int64)
        for a in range(n):
            for b in range(m):
                for c in range(n):
                    for d in range(m):
                        table[a * m + b, c * m + d] = G.cayley[a, c] * m + H.cayley[b, d]
        labels = [f"({G.labels[a]},{H.labels[b]})" for a in range(n) for b in range(m)]
        return cls(table, G.identity * m + H.identity, labels, name=f"{G.name}x{H.name}")

    def to_json(self) -> dict:
        return {"name": self.name, "cayley": self.cayley.tolist(), "identity": self.identity, "labels": self.labels}

    @classmethod
    def from_json(cls, data: dict) -> "FiniteGroup":
        return cls(data["cayley"], data.get("identity"), data.get("labels"), data.get("name", "G"))


@dataclass
class ActionReport:
    valid: bool
    unitarity_residual: float
    identity_residual: float
    homomorphism_residual: float
    violations: list[str] = field(default_factory=list)

    def __bool__(self):
        return self.valid

    def to_dict(self) -> dict:
        return {
            "valid": self.valid,
            "unitarity_residual": self.unitarity_residual,
            "identity_residual": self.identity_residual,
            "homomorphism_residual": self.homomorphism_residual,
            "violations": list(self.violations),
        }


class Action:
    """``alpha_g(a)_{perm[g, k]} = U[g, k] a_k U[g, k]^*``.

    ``unitaries`` is either a packed ``(|G|, P)`` array (block ``k`` holds
    ``U[g, k]``) or a nested list ``unitaries[g][k]`` of matrices.
    """

    def __init__(self, group: FiniteGroup, descriptor: AlgebraDescriptor, perms, unitaries):
        n, m = group.order, descriptor.num_blocks
        perms = np.array(perms, dtype=np.int64)
        if perms.shape != (n, m):
            raise StructuralError(f"block permutations must have shape {(n, m)}, got {perms.shape}")
        for g in range(n):
            if sorted(perms[g].tolist()) != list(range(m)):
                raise StructuralError(f"perm for element {g} is not a permutation of the blocks")
            for k in range(m):
                if descriptor.block_dims[perms[g, k]] != descriptor.block_dims[k]:
                    raise StructuralError(f"element {g} moves block {k} onto a block of different size")
        if isinstance(unitaries, np.ndarray) and unitaries.ndim == 2:
            packed = np.array(unitaries, dtype=complex)
        else:
            if len(unitaries) != n:
                raise StructuralError(f"expected unitaries for {n} group elements, got {len(unitaries)}")
            packed = np.array([AlgebraElement(descriptor, us).packed for us in unitaries])
        if packed.shape != (n, descriptor.packed_size):
            raise StructuralError(f"packed unitaries must have shape {(n, descriptor.packed_size)}")
        perms.setflags(write=False)
        packed.setflags(write=False)
        self.group = group
        self.descriptor = descriptor
        self.perms = perms
        self.unitaries = packed

    @classmethod
    def trivial(cls, group: FiniteGroup, descriptor: AlgebraDescriptor) -> "Action":
        perms = np.tile(np.arange(descriptor.num_blocks), (group.order, 1))
        return cls(group, descriptor, perms, np.tile(descriptor.unit_packed(), (group.order, 1)))

    @classmethod
    def from_function(
        cls,
        group: FiniteGroup,
        descriptor: AlgebraDescriptor,
        data: Callable[[int], tuple[Sequence[int], Sequence[np.ndarray]]],
    ) -> "Action":
        perms, units = zip(*(data(g) for g in group))
        return cls(group, descriptor, list(perms), [list(u) for u in units])

    def apply(self, g: int, x: AlgebraElement) -> AlgebraElement:
        if x.descriptor != self.descriptor:
            raise StructuralError(f"action on {self.descriptor.block_dims} applied to element of {x.descriptor.block_dims}")
        return AlgebraElement.from_packed(self.descriptor, self.apply_packed(np.array([g]), x.packed[None])[0])

    def __call__(self, g: int, x: AlgebraElement) -> AlgebraElement:
        return self.apply(g, x)

    def apply_packed(self, gs: np.ndarray, xs: np.ndarray) -> np.ndarray:
        """Row-wise ``alpha_{gs[r]}(xs[r])`` on a packed batch."""
        gs = np.asarray(gs, dtype=np.int64)
        d = self.descriptor
        return _accel.conjugate_permute(xs, self.perms[gs], self.unitaries[gs], d.dims_array, d.offsets_array)

    def is_trivial(self, tol: Tolerance | float | None = None) -> bool:
        units = np.eye(self.descriptor.packed_size, dtype=complex)
        n = self.group.order
        imgs = self.apply_packed(np.repeat(np.arange(n), len(units)), np.tile(units, (n, 1)))
        return float(np.abs(imgs - np.tile(units, (n, 1))).max()) <= as_tolerance(tol).threshold(1.0)

    def to_json(self) -> dict:
        elems = []
        for g in self.group:
            us = AlgebraElement.from_packed(self.descriptor, self.unitaries[g]).to_json()
            elems.append({"perm": self.perms[g].tolist(), "unitaries": us})
        return {"type": "explicit", "elements": elems}

    @classmethod
    def from_json(cls, group: FiniteGroup, descriptor: AlgebraDescriptor, data: dict) -> "Action":
        kind = data.get("type", "explicit")
        if kind == "trivial":
            return cls.trivial(group, descriptor)
        if kind != "explicit":
            raise StructuralError(f"unknown action type {kind!r}")
        elems = data["elements"]
        if len(elems) != group.order:
            raise StructuralError(f"action lists {len(elems)} elements, group has order {group.order}")
        perms = [e.get("perm", list(range(descriptor.num_blocks))) for e in elems]
        unitaries = [AlgebraElement.from_json(descriptor, e["unitaries"]).packed for e in elems]
        return cls(group, descriptor, perms, np.array(unitaries))


def validate_action(alpha: Action, tol: Tolerance | float | None = None) -> ActionReport:
    """Unitarity, ``alpha_e = id`` and ``alpha_g alpha_h = alpha_gh`` on all matrix units."""
    tol = as_tolerance(tol)
    G, d = alpha.group, alpha.descriptor
    n, p = G.order, d.packed_size
    unit_res = 0.0
    for g in G:
        for b in d.blocks_of(alpha.unitaries[g]):
            unit_res = max(unit_res, float(np.abs(b.conj().T @ b - np.eye(b.shape[0])).max()))
    units = np.eye(p, dtype=complex)
    id_imgs = alpha.apply_packed(np.full(p, G.identity), units)
    id_res = float(np.abs(id_imgs - units).max())
    # alpha_g(alpha_h(E)) vs alpha_gh(E) for every (g, h, E)
    gg, hh, ee = np.meshgrid(np.arange(n), np.arange(n), np.arange(p), indexing="ij")
    gg, hh, ee = gg.ravel(), hh.ravel(), ee.ravel()
    inner = alpha.apply_packed(hh, units[ee])
    lhs = alpha.apply_packed(gg, inner)
    rhs = alpha.apply_packed(G.cayley[gg, hh], units[ee])
    hom_res = float(np.abs(lhs - rhs).max()) if len(gg) else 0.0
    limit = tol.threshold(1.0)
    violations = []
    if unit_res > limit:
        violations.append(f"unitarity: residual {unit_res:.3g} exceeds {limit:.3g}")
    if id_res > limit:
        violations.append(f"identity: alpha_e differs from id by {id_res:.3g}")
    if hom_res > limit:
        violations.append(f"homomorphism: alpha_g alpha_h - alpha_gh residual {hom_res:.3g}")
    return ActionReport(not violations, unit_res, id_res, hom_res, violations)


def fixed_point_project(alpha: Action, x: AlgebraElement) -> AlgebraElement:
    """Average ``(1/|G|) sum_g alpha_g(x)``, the projection onto ``A^alpha``."""
    n = alpha.group.order
    imgs = alpha.apply_packed(np.arange(n), np.tile(x.packed, (n, 1)))
    return AlgebraElement.from_packed(alpha.descriptor, imgs.mean(axis=0))


def is_invariant(alpha: Action, x: AlgebraElement, tol: Tolerance | float | None = None) -> bool:
    tol = as_tolerance(tol)
    n = alpha.group.order
    imgs = alpha.apply_packed(np.arange(n), np.tile(x.packed, (n, 1)))
    dev = max(op_norm(AlgebraElement.from_packed(alpha.descriptor, r - x.packed)) for r in imgs)
    return dev <= tol.threshold(op_norm(x))


class CentralAction:
    """The restriction ``alpha'`` of an action to the centre ``Z(A)``."""

    def __init__(self, alpha: Action, tol: Tolerance | float | None = None):
        self.alpha = alpha
        self.tol = as_tolerance(tol)
        self.group = alpha.group
        self.descriptor = alpha.descriptor

    def apply(self, g: int, x: AlgebraElement) -> AlgebraElement:
        if not is_central(x, self.tol):
            raise DomainError("alpha' is only defined on central elements")
        return self.alpha.apply(g, x)

    __call__ = apply

    def expectation_residual(self, x: AlgebraElement) -> float:
        """``max_g || E(alpha_g(x)) - alpha'_g(E(x)) ||``."""
        ex = center_expectation(x)
        return max(
            op_norm(center_expectation(self.alpha.apply(g, x)) - self.alpha.apply(g, ex)) for g in self.group
        )


def restrict_to_center(alpha: Action, tol: Tolerance | float | None = None) -> CentralAction:
    return CentralAction(alpha, tol)


class State:
    """``omega(x) = sum_k w_k tr(x_k) / d_k``."""

    def __init__(self, descriptor: AlgebraDescriptor, weights: Sequence[float]):
        self.descriptor = descriptor
        self.weights = np.asarray(weights, dtype=float)

    def __call__(self, x: AlgebraElement) -> complex:
        return complex(sum(w * np.trace(b) / b.shape[0] for w, b in zip(self.weights, x.blocks)))


def invariant_state(alpha: Action, weights: Sequence[float], tol: Tolerance | float | None = None) -> State:
    tol = as_tolerance(tol)
    w = np.asarray(weights, dtype=float)
    d = alpha.descriptor
    if w.shape != (d.num_blocks,):
        raise StructuralError(f"need one weight per block ({d.num_blocks}), got {w.shape}")
    if (w < 0).any():
        raise DomainError("state weights must be non-negative")
    if abs(w.sum() - 1.0) > tol.threshold(1.0):
        raise DomainError(f"state weights must sum to 1, got {w.sum()}")
    for g in alpha.group:
        if np.abs(w[alpha.perms[g]] - w).max() > tol.threshold(1.0):
            raise DomainError(f"weights are not constant on the block orbit of element {g}")
    return State(d, w)


class GroupFunction:
    """A function ``G -> A`` held as a packed ``(|G|, P)`` array."""

    __slots__ = ("group", "descriptor", "values")

    def __init__(self, group: FiniteGroup, descriptor: AlgebraDescriptor, values):
        if isinstance(values, np.ndarray) and values.ndim == 2:
            arr = np.array(values, dtype=complex)
        else:
            values = list(values)
            for v in values:
                if v.descriptor != descriptor:
                    raise StructuralError("function value over the wrong algebra")
            arr = np.array([v.packed for v in values], dtype=complex).reshape(len(values), descriptor.packed_size)
        if arr.shape != (group.order, descriptor.packed_size):
            raise StructuralError(f"a function on a group of order {group.order} needs {group.order} values, got {arr.shape[0]}")
        arr.setflags(write=False)
        self.group = group
        self.descriptor = descriptor
        self.values = arr

    @classmethod
    def constant(cls, group: FiniteGroup, x: AlgebraElement) -> "GroupFunction":
        return cls(group, x.descriptor, np.tile(x.packed, (group.order, 1)))

    @classmethod
    def delta(cls, group: FiniteGroup, x: AlgebraElement, at: int | None = None) -> "GroupFunction":
        at = group.identity if at is None else at
        vals = np.zeros((group.order, x.descriptor.packed_size), dtype=complex)
        vals[at] = x.packed
        return cls(group, x.descriptor, vals)

    @classmethod
    def from_callable(cls, group: FiniteGroup, descriptor: AlgebraDescriptor, f: Callable[[int], AlgebraElement]) -> "GroupFunction":
        return cls(group, descriptor, [f(g) for g in group])

    def __call__(self, g: int) -> AlgebraElement:
        return AlgebraElement.from_packed(self.descriptor, self.values[g])

    def __getitem__(self, g: int) -> AlgebraElement:
        return self(g)

    def __len__(self):
        return self.group.order

    def elements(self) -> list[AlgebraElement]:
        return [self(g) for g in self.group]

    def at_identity(self) -> AlgebraElement:
        return self(self.group.identity)

    def _check(self, other: "GroupFunction"):
        if self.descriptor != other.descriptor or self.group != other.group:
            raise StructuralError("group functions live on different systems")

    def _wrap(self, values) -> "GroupFunction":
        return GroupFunction(self.group, self.descriptor, values)

    def __add__(self, other: "GroupFunction") -> "GroupFunction":
        self._check(other)
        return self._wrap(self.values + other.values)

    def __sub__(self, other: "GroupFunction") -> "GroupFunction":
        self._check(other)
        return self._wrap(self.values - other.values)

    def __neg__(self) -> "GroupFunction":
        return self._wrap(-self.values)

    def __mul__(self, c):
        if np.isscalar(c):
            return self._wrap(complex(c) * self.values)
        return NotImplemented

    __rmul__ = __mul__

    def adjoint(self) -> "GroupFunction":
        """``g -> f(g)^*``."""
        blocks = self.descriptor.blocks_of(self.values)
        return self._wrap(self.descriptor.pack_blocks([b.conj().swapaxes(-1, -2) for b in blocks]))

    def norm(self) -> float:
        """``max_g ||f(g)||``."""
        return max(op_norm(v) for v in self.elements())

    def is_central_valued(self, tol: Tolerance | float | None = None) -> bool:
        scale = self.norm()
        return all(is_central(v, tol, scale) for v in self.elements())

    def distance(self, other: "GroupFunction") -> float:
        return (self - other).norm()

    def __repr__(self):
        return f"GroupFunction({self.group.name}, {self.descriptor.block_dims})"

    def to_json(self) -> dict:
        return {"values": [v.to_json() for v in self.elements()]}

    @classmethod
    def from_json(cls, group: FiniteGroup, descriptor: AlgebraDescriptor, data) -> "GroupFunction":
        vals = data["values"] if isinstance(data, dict) else data
        if len(vals) != group.order:
            raise StructuralError(f"function has {len(vals)} values, group has order {group.order}")
        return cls(group, descriptor, [AlgebraElement.from_json(descriptor, v) for v in vals])
