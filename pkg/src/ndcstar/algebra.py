"""Finite-dimensional C*-algebras ``A = M_{d_1}(C) + ... + M_{d_m}(C)``.

Elements are stored packed (row-major blocks concatenated) so that batches of
elements are plain ``(N, P)`` complex arrays.  Matrices over ``A`` are realised
summand-wise through the isomorphism ``M_n(A) = M_{n d_1}(C) + ... + M_{n d_m}(C)``,
which makes positivity a single Hermitian eigenproblem per summand.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterable, Sequence

import numpy as np
import scipy.linalg

from . import _accel
from .errors import DomainError, StructuralError

__all__ = [
    "Tolerance",
    "as_tolerance",
    "AlgebraDescriptor",
    "AlgebraElement",
    "AMatrix",
    "Verdict",
    "psd_verdict",
    "unit",
    "zero",
    "add",
    "sub",
    "scalar_mul",
    "mul",
    "adjoint",
    "is_self_adjoint",
    "is_positive",
    "matrix_is_positive",
    "matrix_positivity",
    "spectral_min",
    "op_norm",
    "exp_element",
    "is_central",
    "center_expectation",
    "schur_product",
    "schur_exp",
    "transpose_adjoint",
]


@dataclass(frozen=True)
class Tolerance:
    """Numerical tolerance; with ``relative`` the threshold is ``eps * scale``."""

    eps: float = 1e-9
    relative: bool = True

    def __post_init__(self):
        if not self.eps >= 0:
            raise ValueError(f"tolerance must be non-negative, got {self.eps}")

    def threshold(self, scale: float) -> float:
        return self.eps * scale if self.relative else self.eps


def as_tolerance(tol: Tolerance | float | None) -> Tolerance:
    if tol is None:
        return Tolerance()
    if isinstance(tol, Tolerance):
        return tol
    return Tolerance(float(tol))


@dataclass(frozen=True)
class AlgebraDescriptor:
    block_dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.block_dims)
        if not dims:
            raise StructuralError("an algebra needs at least one block")
        if any(d < 1 for d in dims):
            raise StructuralError(f"block dimensions must be positive, got {dims}")
        object.__setattr__(self, "block_dims", dims)

    @property
    def num_blocks(self) -> int:
        return len(self.block_dims)

    @cached_property
    def total_dim(self) -> int:
        return sum(self.block_dims)

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        out, acc = [], 0
        for d in self.block_dims:
            out.append(acc)
            acc += d * d
        return tuple(out)

    @cached_property
    def packed_size(self) -> int:
        return sum(d * d for d in self.block_dims)

    @property
    def is_commutative(self) -> bool:
        return all(d == 1 for d in self.block_dims)

    @cached_property
    def dims_array(self) -> np.ndarray:
        return np.asarray(self.block_dims, dtype=np.int64)

    @cached_property
    def offsets_array(self) -> np.ndarray:
        return np.asarray(self.offsets, dtype=np.int64)

    def block_slice(self, k: int) -> slice:
        d = self.block_dims[k]
        return slice(self.offsets[k], self.offsets[k] + d * d)

    def unit_packed(self) -> np.ndarray:
        return np.concatenate([np.eye(d, dtype=complex).ravel() for d in self.block_dims])

    def blocks_of(self, packed: np.ndarray) -> list[np.ndarray]:
        """Split a packed ``(..., P)`` array into ``(..., d, d)`` block views."""
        lead = packed.shape[:-1]
        return [packed[..., self.block_slice(k)].reshape(*lead, d, d) for k, d in enumerate(self.block_dims)]

    def pack_blocks(self, blocks: Sequence[np.ndarray]) -> np.ndarray:
        lead = np.shape(blocks[0])[:-2]
        return np.concatenate([np.asarray(b, dtype=complex).reshape(*lead, -1) for b in blocks], axis=-1)

    def matrix_units(self) -> list["AlgebraElement"]:
        """The basis ``{E^(k)_{ab}}`` of matrix units, one per packed coordinate."""
        eye = np.eye(self.packed_size, dtype=complex)
        return [AlgebraElement.from_packed(self, row) for row in eye]

    def to_json(self) -> dict:
        return {"blocks": list(self.block_dims)}

    @classmethod
    def from_json(cls, data: Any) -> "AlgebraDescriptor":
        if isinstance(data, dict):
            data = data["blocks"]
        return cls(tuple(data))


def _check_same(x: "AlgebraElement", y: "AlgebraElement"):
    if x.descriptor != y.descriptor:
        raise StructuralError(
            f"descriptor mismatch: {x.descriptor.block_dims} vs {y.descriptor.block_dims}"
        )


class AlgebraElement:
    """Immutable element of ``A``, held as a packed complex vector."""

    __slots__ = ("descriptor", "_packed")

    def __init__(self, descriptor: AlgebraDescriptor, blocks: Sequence[Any]):
        if len(blocks) != descriptor.num_blocks:
            raise StructuralError(
                f"expected {descriptor.num_blocks} blocks for {descriptor.block_dims}, got {len(blocks)}"
            )
        parts = []
        for d, b in zip(descriptor.block_dims, blocks):
            arr = np.asarray(b, dtype=complex)
            if arr.ndim == 0 and d == 1:
                arr = arr.reshape(1, 1)
            if arr.shape != (d, d):
                raise StructuralError(f"block of shape {arr.shape} does not fit dimension {d}")
            parts.append(arr.ravel())
        packed = np.concatenate(parts)
        packed.setflags(write=False)
        self.descriptor = descriptor
        self._packed = packed

    @classmethod
    def from_packed(cls, descriptor: AlgebraDescriptor, packed: np.ndarray) -> "AlgebraElement":
        arr = np.array(packed, dtype=complex).reshape(-1)
        if arr.shape[0] != descriptor.packed_size:
            raise StructuralError(f"packed length {arr.shape[0]} != {descriptor.packed_size}")
        arr.setflags(write=False)
        obj = cls.__new__(cls)
        obj.descriptor = descriptor
        obj._packed = arr
        return obj

    @classmethod
    def unit(cls, descriptor: AlgebraDescriptor) -> "AlgebraElement":
        return cls.from_packed(descriptor, descriptor.unit_packed())

    @classmethod
    def zero(cls, descriptor: AlgebraDescriptor) -> "AlgebraElement":
        return cls.from_packed(descriptor, np.zeros(descriptor.packed_size, dtype=complex))

    @classmethod
    def scalar(cls, descriptor: AlgebraDescriptor, c: complex) -> "AlgebraElement":
        return cls.from_packed(descriptor, c * descriptor.unit_packed())

    @classmethod
    def diag(cls, descriptor: AlgebraDescriptor, *entries: Sequence[complex]) -> "AlgebraElement":
        """Block-diagonal element; one entry sequence per block."""
        return cls(descriptor, [np.diag(np.asarray(e, dtype=complex)) for e in entries])

    @property
    def packed(self) -> np.ndarray:
        return self._packed

    @property
    def blocks(self) -> list[np.ndarray]:
        return self.descriptor.blocks_of(self._packed)

    # arithmetic

    def _wrap(self, packed):
        return AlgebraElement.from_packed(self.descriptor, packed)

    def __add__(self, other):
        if isinstance(other, AlgebraElement):
            _check_same(self, other)
            return self._wrap(self._packed + other._packed)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, AlgebraElement):
            _check_same(self, other)
            return self._wrap(self._packed - other._packed)
        return NotImplemented

    def __neg__(self):
        return self._wrap(-self._packed)

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            _check_same(self, other)
            d = self.descriptor
            return self._wrap(_accel.block_matmul(self._packed[None], other._packed[None], d.dims_array, d.offsets_array)[0])
        if np.isscalar(other):
            return self._wrap(self._packed * complex(other))
        return NotImplemented

    def __rmul__(self, other):
        if np.isscalar(other):
            return self._wrap(self._packed * complex(other))
        return NotImplemented

    def __truediv__(self, other):
        if np.isscalar(other):
            return self._wrap(self._packed / complex(other))
        return NotImplemented

    def adjoint(self) -> "AlgebraElement":
        d = self.descriptor
        blocks = d.blocks_of(self._packed)
        return self._wrap(d.pack_blocks([b.conj().T for b in blocks]))

    @property
    def H(self) -> "AlgebraElement":
        return self.adjoint()

    def real_part(self) -> "AlgebraElement":
        return (self + self.adjoint()) * 0.5

    def norm(self) -> float:
        return op_norm(self)

    def allclose(self, other: "AlgebraElement", atol: float = 1e-9) -> bool:
        _check_same(self, other)
        return op_norm(self - other) <= atol

    def __eq__(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return self.descriptor == other.descriptor and np.array_equal(self._packed, other._packed)

    __hash__ = None

    def __repr__(self):
        body = ", ".join(np.array2string(b, precision=4, suppress_small=True) for b in self.blocks)
        return f"AlgebraElement({self.descriptor.block_dims}, [{body}])"

    def to_json(self) -> list:
        return [[[[float(z.real), float(z.imag)] for z in row] for row in b] for b in self.blocks]

    @classmethod
    def from_json(cls, descriptor: AlgebraDescriptor, data: Any) -> "AlgebraElement":
        if descriptor.is_commutative and isinstance(data, (int, float)):
            data = [data] * descriptor.num_blocks
        blocks = []
        for d, b in zip(descriptor.block_dims, data):
            if d == 1 and not isinstance(b, list):
                b = [[b]]
            elif d == 1 and isinstance(b, list) and len(b) == 2 and not isinstance(b[0], list):
                b = [[b]]
            blocks.append(np.array([[_complex_from_json(z) for z in row] for row in b], dtype=complex))
        return cls(descriptor, blocks)


def _complex_from_json(z: Any) -> complex:
    if isinstance(z, (list, tuple)):
        if len(z) != 2:
            raise StructuralError(f"complex scalar must be [re, im], got {z!r}")
        return complex(float(z[0]), float(z[1]))
    return complex(z)


# ring operations as functions


def unit(descriptor: AlgebraDescriptor) -> AlgebraElement:
    return AlgebraElement.unit(descriptor)


def zero(descriptor: AlgebraDescriptor) -> AlgebraElement:
    return AlgebraElement.zero(descriptor)


def add(x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    return x + y


def sub(x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    return x - y


def scalar_mul(c: complex, x: AlgebraElement) -> AlgebraElement:
    return c * x


def mul(x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    return x * y


def adjoint(x: AlgebraElement) -> AlgebraElement:
    return x.adjoint()


# spectra and norms


def op_norm(x: AlgebraElement) -> float:
    return max(float(np.linalg.norm(b, 2)) for b in x.blocks)


def _sa_residual(x: AlgebraElement) -> float:
    return max(float(np.linalg.norm(b - b.conj().T, 2)) for b in x.blocks)


def is_self_adjoint(x: AlgebraElement, tol: Tolerance | float | None = None) -> bool:
    tol = as_tolerance(tol)
    return _sa_residual(x) <= tol.threshold(op_norm(x))


def is_positive(x: AlgebraElement, tol: Tolerance | float | None = None) -> bool:
    return psd_verdict(x.blocks, tol).passed


def spectral_min(x: AlgebraElement, tol: Tolerance | float | None = None) -> float:
    """Smallest eigenvalue over all blocks of a self-adjoint element."""
    tol = as_tolerance(tol)
    if not is_self_adjoint(x, tol):
        raise DomainError(f"spectral_min needs a self-adjoint element (residual {_sa_residual(x):.3g})")
    return min(float(np.linalg.eigvalsh((b + b.conj().T) / 2)[0]) for b in x.blocks)


def spectral_max(x: AlgebraElement, tol: Tolerance | float | None = None) -> float:
    return -spectral_min(-x, tol)


# positivity verdicts


@dataclass
class Verdict:
    """Outcome of a positivity-type check.

    ``residual`` is the worst violation (negative eigenvalue or lack of
    self-adjointness) divided by ``scale`` when the tolerance is relative;
    ``passed`` iff ``residual <= eps``.  A pass with a slightly negative
    minimum eigenvalue is flagged ``borderline``.
    """

    passed: bool
    residual: float
    min_eigenvalue: float = 0.0
    scale: float = 1.0
    witness: dict | None = None
    borderline: bool = False
    details: dict = field(default_factory=dict)

    def __bool__(self):
        return self.passed

    def to_dict(self) -> dict:
        out = {
            "passed": bool(self.passed),
            "residual": float(self.residual),
            "min_eigenvalue": float(self.min_eigenvalue),
            "scale": float(self.scale),
            "borderline": bool(self.borderline),
        }
        if self.witness is not None:
            out["witness"] = _jsonable(self.witness)
        if self.details:
            out["details"] = _jsonable(self.details)
        return out


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if hasattr(obj, "to_dict"):
        return _jsonable(obj.to_dict())
    if isinstance(obj, AlgebraElement):
        return obj.to_json()
    return obj


def psd_verdict(
    mats: Iterable[np.ndarray],
    tol: Tolerance | float | None = None,
    scale: float | None = None,
) -> Verdict:
    """Positive-semidefiniteness of a direct sum of square complex matrices.

    Each summand is symmetrised before the eigen-solve; the asymmetry enters
    the residual.  ``scale`` defaults to the largest spectral norm.
    """
    tol = as_tolerance(tol)
    mats = [np.asarray(m, dtype=complex) for m in mats]
    herm_res = 0.0
    norm = 0.0
    worst = (np.inf, -1, None)
    for k, m in enumerate(mats):
        if m.size == 0:
            continue
        herm_res = max(herm_res, float(np.abs(m - m.conj().T).max()))
        w, v = np.linalg.eigh((m + m.conj().T) / 2)
        norm = max(norm, float(np.abs(w).max()))
        if w[0] < worst[0]:
            worst = (float(w[0]), k, v[:, 0])
    if scale is None:
        scale = norm
    scale = float(scale)
    min_eig = worst[0] if np.isfinite(worst[0]) else 0.0
    violation = max(0.0, -min_eig, herm_res)
    base = scale if tol.relative else 1.0
    if base > 0:
        residual = violation / base
    else:
        residual = 0.0 if violation == 0.0 else np.inf
    passed = residual <= tol.eps
    witness = None
    if not passed and worst[1] >= 0:
        witness = {"summand": worst[1], "eigenvalue": min_eig, "vector": worst[2], "hermitian_residual": herm_res}
    return Verdict(
        passed=bool(passed),
        residual=float(residual),
        min_eigenvalue=float(min_eig),
        scale=scale,
        witness=witness,
        borderline=bool(passed and min_eig < 0),
    )


# functional calculus


_NORMAL_RTOL = 64 * np.finfo(float).eps


def _block_exp(b: np.ndarray) -> np.ndarray:
    d = b.shape[0]
    if not b.any():
        return np.eye(d, dtype=complex)
    if np.array_equal(b, b[0, 0] * np.eye(d)):
        return cmath.exp(b[0, 0]) * np.eye(d, dtype=complex)
    norm = float(np.linalg.norm(b, 2))
    if np.abs(b - b.conj().T).max() <= _NORMAL_RTOL * norm:
        w, v = np.linalg.eigh((b + b.conj().T) / 2)
        return (v * np.exp(w)) @ v.conj().T
    comm = b @ b.conj().T - b.conj().T @ b
    if np.abs(comm).max() <= _NORMAL_RTOL * norm * norm:
        t, z = scipy.linalg.schur(b, output="complex")
        return (z * np.exp(np.diag(t))) @ z.conj().T
    return scipy.linalg.expm(b)


def exp_element(x: AlgebraElement) -> AlgebraElement:
    """Blockwise exponential: eigendecomposition for normal blocks, Pade otherwise."""
    d = x.descriptor
    return AlgebraElement.from_packed(d, d.pack_blocks([_block_exp(b) for b in x.blocks]))


# centre


def center_expectation(x: AlgebraElement) -> AlgebraElement:
    """Trace-preserving conditional expectation onto ``Z(A)``."""
    d = x.descriptor
    blocks = [np.trace(b) / b.shape[0] * np.eye(b.shape[0], dtype=complex) for b in x.blocks]
    return AlgebraElement.from_packed(d, d.pack_blocks(blocks))


def is_central(x: AlgebraElement, tol: Tolerance | float | None = None, scale: float | None = None) -> bool:
    tol = as_tolerance(tol)
    dev = op_norm(x - center_expectation(x))
    return dev <= tol.threshold(op_norm(x) if scale is None else scale)


# matrices over A


class AMatrix:
    """An ``n x n`` matrix over ``A`` stored as a packed ``(n, n, P)`` array."""

    __slots__ = ("descriptor", "entries")

    def __init__(self, descriptor: AlgebraDescriptor, entries: np.ndarray):
        entries = np.array(entries, dtype=complex)
        if entries.ndim != 3 or entries.shape[0] != entries.shape[1] or entries.shape[2] != descriptor.packed_size:
            raise StructuralError(f"entries of shape {entries.shape} do not form a square matrix over {descriptor.block_dims}")
        entries.setflags(write=False)
        self.descriptor = descriptor
        self.entries = entries

    @classmethod
    def from_elements(cls, rows: Sequence[Sequence[AlgebraElement]]) -> "AMatrix":
        desc = rows[0][0].descriptor
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise StructuralError("AMatrix rows must form a square array")
        for r in rows:
            for e in r:
                if e.descriptor != desc:
                    raise StructuralError("all entries of an AMatrix must share one descriptor")
        return cls(desc, np.array([[e.packed for e in r] for r in rows]))

    @classmethod
    def from_scalar(cls, descriptor: AlgebraDescriptor, m: np.ndarray) -> "AMatrix":
        """``m (x) 1_A`` for a complex ``n x n`` matrix ``m``."""
        m = np.asarray(m, dtype=complex)
        return cls(descriptor, m[:, :, None] * descriptor.unit_packed()[None, None, :])

    @classmethod
    def from_flat(cls, descriptor: AlgebraDescriptor, n: int, mats: Sequence[np.ndarray]) -> "AMatrix":
        entries = np.zeros((n, n, descriptor.packed_size), dtype=complex)
        for k, d in enumerate(descriptor.block_dims):
            blk = np.asarray(mats[k]).reshape(n, d, n, d).transpose(0, 2, 1, 3)
            entries[:, :, descriptor.block_slice(k)] = blk.reshape(n, n, d * d)
        return cls(descriptor, entries)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def entry(self, i: int, j: int) -> AlgebraElement:
        return AlgebraElement.from_packed(self.descriptor, self.entries[i, j])

    def flatten(self) -> list[np.ndarray]:
        """Summand-wise realisation as complex ``(n d_k) x (n d_k)`` matrices."""
        n = self.n
        out = []
        for k, d in enumerate(self.descriptor.block_dims):
            blk = self.entries[:, :, self.descriptor.block_slice(k)].reshape(n, n, d, d)
            out.append(blk.transpose(0, 2, 1, 3).reshape(n * d, n * d))
        return out

    def _check(self, other: "AMatrix"):
        if self.descriptor != other.descriptor or self.n != other.n:
            raise StructuralError(
                f"AMatrix mismatch: n={self.n} over {self.descriptor.block_dims} vs n={other.n} over {other.descriptor.block_dims}"
            )

    def __add__(self, other: "AMatrix") -> "AMatrix":
        self._check(other)
        return AMatrix(self.descriptor, self.entries + other.entries)

    def __sub__(self, other: "AMatrix") -> "AMatrix":
        self._check(other)
        return AMatrix(self.descriptor, self.entries - other.entries)

    def __neg__(self) -> "AMatrix":
        return AMatrix(self.descriptor, -self.entries)

    def __rmul__(self, c):
        if np.isscalar(c):
            return AMatrix(self.descriptor, complex(c) * self.entries)
        return NotImplemented

    def __matmul__(self, other: "AMatrix") -> "AMatrix":
        self._check(other)
        return AMatrix.from_flat(self.descriptor, self.n, [a @ b for a, b in zip(self.flatten(), other.flatten())])

    def adjoint(self) -> "AMatrix":
        return AMatrix.from_flat(self.descriptor, self.n, [m.conj().T for m in self.flatten()])

    def compress(self, v: np.ndarray) -> "AMatrix":
        """``(v (x) 1)^* M (v (x) 1)`` for a complex ``n x m`` matrix ``v``."""
        v = np.asarray(v, dtype=complex)
        return AMatrix(self.descriptor, np.einsum("ia,jb,ijp->abp", v.conj(), v, self.entries))

    def norm(self) -> float:
        return max((float(np.linalg.norm(m, 2)) for m in self.flatten()), default=0.0)


def matrix_positivity(M: AMatrix, tol: Tolerance | float | None = None, scale: float | None = None) -> Verdict:
    return psd_verdict(M.flatten(), tol, scale)


def matrix_is_positive(M: AMatrix, tol: Tolerance | float | None = None) -> bool:
    return matrix_positivity(M, tol).passed


def _entrywise_product(M: AMatrix, N: AMatrix) -> np.ndarray:
    n, p = M.n, M.descriptor.packed_size
    d = M.descriptor
    prod = _accel.block_matmul(M.entries.reshape(n * n, p), N.entries.reshape(n * n, p), d.dims_array, d.offsets_array)
    return prod.reshape(n, n, p)


def schur_product(M: AMatrix, N: AMatrix, tol: Tolerance | float | None = None, require_central: bool = False) -> AMatrix:
    """Entrywise product ``[M_ij N_ij]``.

    With ``require_central`` the entries of ``N`` are checked to lie in ``Z(A)``,
    the hypothesis under which positivity is preserved.
    """
    M._check(N)
    if require_central:
        scale = N.norm()
        for i in range(N.n):
            for j in range(N.n):
                if not is_central(N.entry(i, j), tol, scale):
                    raise DomainError(f"Schur factor entry ({i}, {j}) is not central")
    return AMatrix(M.descriptor, _entrywise_product(M, N))


def schur_exp(M: AMatrix) -> AMatrix:
    """Entrywise exponential ``[exp(M_ij)]``."""
    d = M.descriptor
    n = M.n
    out = np.empty_like(M.entries)
    for i in range(n):
        for j in range(n):
            out[i, j] = exp_element(M.entry(i, j)).packed
    return AMatrix(d, out)


def transpose_adjoint(M: AMatrix) -> AMatrix:
    """Entrywise adjoint ``[M_ij^*]`` without transposing the indices."""
    d = M.descriptor
    n = M.n
    blocks = d.blocks_of(M.entries)
    adj = d.pack_blocks([b.conj().swapaxes(-1, -2) for b in blocks])
    return AMatrix(d, adj.reshape(n, n, -1))
