"""Dense finite-dimensional state and operator algebra.

Everything here is immutable once built: arrays are copied on the way in and
marked read-only. Dimensions are small (the constructions of interest use
N = 2 or 3, and at most N = 16 is supported), so storage is dense.
"""
from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .exceptions import ValidationError

MAX_DIM = 16
NORM_TOL = 1e-12
NORM_REJECT = 1e-6
ORTHO_TOL = 1e-10
UNITARY_TOL = 1e-8


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def _as_complex(data, field: str, ndim: int) -> np.ndarray:
    try:
        array = np.array(data, dtype=complex)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"not convertible to complex numbers ({exc})", field) from None
    if array.ndim != ndim:
        raise ValidationError(f"expected a {ndim}-d array, got shape {array.shape}", field)
    if not np.all(np.isfinite(array)):
        raise ValidationError("contains NaN or Inf", field)
    return array


class StateVector:
    """Unit-norm complex vector.

    Inputs whose norm is within 1e-6 of one are renormalized; anything
    further off is treated as a mistake and rejected.
    """

    __slots__ = ("data",)

    def __init__(self, components, field: str = "state"):
        data = _as_complex(components, field, 1)
        if not 1 <= data.size <= MAX_DIM:
            raise ValidationError(f"dimension must be in [1, {MAX_DIM}], got {data.size}", field)
        norm = np.linalg.norm(data)
        if abs(norm - 1.0) > NORM_REJECT:
            raise ValidationError(f"norm is {norm:.12g}, expected 1", field)
        if abs(norm - 1.0) > 0.0:
            data = data / norm
        self.data = _frozen(data)

    @property
    def dim(self) -> int:
        return self.data.size

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)

    def __repr__(self):
        return f"StateVector({np.array2string(self.data, precision=6)})"

    def __eq__(self, other):
        return isinstance(other, StateVector) and np.array_equal(self.data, other.data)

    __hash__ = None

    @classmethod
    def basis_state(cls, dim: int, k: int) -> "StateVector":
        if not 0 <= k < dim:
            raise ValidationError(f"index {k} out of range for dimension {dim}")
        e = np.zeros(dim, dtype=complex)
        e[k] = 1.0
        return cls(e)


class UnitaryMatrix:
    """Square complex matrix with ``U^dagger U = 1`` to within 1e-8 entrywise."""

    __slots__ = ("data",)

    def __init__(self, entries, field: str = "unitary"):
        data = _as_complex(entries, field, 2)
        n, m = data.shape
        if n != m:
            raise ValidationError(f"matrix must be square, got shape {data.shape}", field)
        if not 1 <= n <= MAX_DIM:
            raise ValidationError(f"dimension must be in [1, {MAX_DIM}], got {n}", field)
        defect = np.max(np.abs(data.conj().T @ data - np.eye(n)))
        if defect > UNITARY_TOL:
            raise ValidationError(f"not unitary (max |U^dag U - 1| = {defect:.3g})", field)
        self.data = _frozen(data)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @classmethod
    def identity(cls, dim: int) -> "UnitaryMatrix":
        return cls(np.eye(dim))

    def __matmul__(self, other):
        if isinstance(other, UnitaryMatrix):
            _check_dims(self.dim, other.dim)
            return UnitaryMatrix(self.data @ other.data)
        if isinstance(other, StateVector):
            return apply(self, other)
        return NotImplemented

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)

    def __repr__(self):
        return f"UnitaryMatrix(dim={self.dim})"


class Basis:
    """Orthonormal basis, stored as the columns of a unitary matrix."""

    __slots__ = ("vectors", "matrix")

    def __init__(self, vectors: Sequence, field: str = "basis"):
        if isinstance(vectors, Basis):
            vectors = vectors.vectors
        states = []
        for k, v in enumerate(vectors):
            states.append(v if isinstance(v, StateVector) else StateVector(v, f"{field}[{k}]"))
        if not states:
            raise ValidationError("empty basis", field)
        dim = states[0].dim
        if len(states) != dim or any(s.dim != dim for s in states):
            raise ValidationError(
                f"need {dim} vectors of dimension {dim}, got {[s.dim for s in states]}", field
            )
        matrix = np.column_stack([s.data for s in states])
        gram = matrix.conj().T @ matrix
        defect = np.max(np.abs(gram - np.eye(dim)))
        if defect > ORTHO_TOL:
            raise ValidationError(f"vectors are not orthonormal (max Gram defect {defect:.3g})", field)
        self.vectors = tuple(states)
        self.matrix = _frozen(matrix)

    @classmethod
    def computational(cls, dim: int) -> "Basis":
        return cls(np.eye(dim, dtype=complex).T)

    @classmethod
    def from_columns(cls, matrix, field: str = "basis") -> "Basis":
        matrix = _as_complex(matrix, field, 2)
        return cls(list(matrix.T), field)

    @property
    def dim(self) -> int:
        return len(self.vectors)

    def __len__(self):
        return len(self.vectors)

    def __getitem__(self, k) -> StateVector:
        return self.vectors[k]

    def __iter__(self):
        return iter(self.vectors)

    def coefficients(self, s: StateVector) -> np.ndarray:
        """Return ``<b_k|s>`` for every basis vector."""
        _check_dims(self.dim, s.dim)
        return self.matrix.conj().T @ s.data

    def __repr__(self):
        return f"Basis(dim={self.dim})"


class Observable:
    """Hermitian operator given by its eigenbasis and real eigenvalues."""

    __slots__ = ("basis", "eigenvalues")

    def __init__(self, basis: Basis, eigenvalues, field: str = "eigenvalues"):
        if not isinstance(basis, Basis):
            basis = Basis(basis)
        try:
            values = np.array(eigenvalues, dtype=float)
        except (TypeError, ValueError):
            raise ValidationError("eigenvalues must be real numbers", field) from None
        if values.shape != (basis.dim,):
            raise ValidationError(
                f"expected {basis.dim} eigenvalues, got shape {values.shape}", field
            )
        if not np.all(np.isfinite(values)):
            raise ValidationError("eigenvalues must be finite", field)
        self.basis = basis
        self.eigenvalues = _frozen(values)

    @property
    def dim(self) -> int:
        return self.basis.dim

    @property
    def matrix(self) -> np.ndarray:
        b = self.basis.matrix
        return (b * self.eigenvalues) @ b.conj().T

    def scaled(self, factor: float) -> "Observable":
        return Observable(self.basis, factor * self.eigenvalues)

    def __add__(self, other: "Observable") -> "Observable":
        if other.basis is not self.basis and not np.allclose(
            other.basis.matrix, self.basis.matrix, atol=ORTHO_TOL
        ):
            raise ValidationError("observables are diagonal in different bases")
        return Observable(self.basis, self.eigenvalues + other.eigenvalues)

    def __repr__(self):
        return f"Observable(eigenvalues={self.eigenvalues.tolist()})"


def _check_dims(a: int, b: int) -> None:
    if a != b:
        raise ValidationError(f"dimension mismatch: {a} != {b}")


def inner(a: StateVector, b: StateVector) -> complex:
    """``<a|b>``, conjugate-linear in the first argument."""
    _check_dims(a.dim, b.dim)
    return complex(np.vdot(a.data, b.data))


def apply(u: UnitaryMatrix, s: StateVector) -> StateVector:
    _check_dims(u.dim, s.dim)
    return StateVector(u.data @ s.data)


def projector_observable(basis: Basis, j: int | Iterable[int]) -> Observable:
    """Projector onto one basis vector, or onto the span of several.

    ``projector_observable(b, (0, 1))`` is the union projector
    ``|b_0><b_0| + |b_1><b_1|``.
    """
    indices = [j] if np.isscalar(j) else list(j)
    values = np.zeros(basis.dim)
    for k in indices:
        if not 0 <= int(k) < basis.dim:
            raise ValidationError(f"projector index {k} out of range for dimension {basis.dim}")
        values[int(k)] = 1.0
    return Observable(basis, values)


def identity_observable(basis: Basis) -> Observable:
    return Observable(basis, np.ones(basis.dim))


def impulsive_kick(v: Observable) -> UnitaryMatrix:
    """Exact propagator ``exp(-i V)`` of a delta-function perturbation ``V``."""
    b = v.basis.matrix
    return UnitaryMatrix((b * np.exp(-1j * v.eigenvalues)) @ b.conj().T)
