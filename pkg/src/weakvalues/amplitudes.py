"""Two- and three-step transition amplitudes of a pre/post-selected system."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .exceptions import ValidationError
from .qcore import Basis, StateVector, UnitaryMatrix


@dataclass(frozen=True)
class MeasurementChain:
    """Prepare ``initial``, evolve with ``u1``, pass the intermediate basis,
    evolve with ``u21``, detect in ``final_basis``.

    Omitted evolutions default to the identity.
    """

    initial: StateVector
    mid_basis: Basis
    final_basis: Basis
    u1: UnitaryMatrix | None = None
    u21: UnitaryMatrix | None = None

    def __post_init__(self):
        n = self.initial.dim
        if self.u1 is None:
            object.__setattr__(self, "u1", UnitaryMatrix.identity(n))
        if self.u21 is None:
            object.__setattr__(self, "u21", UnitaryMatrix.identity(n))
        for name in ("mid_basis", "final_basis", "u1", "u21"):
            dim = getattr(self, name).dim
            if dim != n:
                raise ValidationError(f"dimension {dim} does not match initial state ({n})", name)

    @property
    def dim(self) -> int:
        return self.initial.dim

    def with_mid_basis(self, basis: Basis) -> "MeasurementChain":
        if basis is self.mid_basis:
            return self
        return MeasurementChain(self.initial, basis, self.final_basis, self.u1, self.u21)


class PathAmplitudeTable:
    """``entries[i, j]`` is the amplitude of the route ``F_i <- b_j <- I``."""

    def __init__(self, entries):
        entries = np.array(entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValidationError(f"path table must be square, got shape {entries.shape}")
        if not np.all(np.isfinite(entries)):
            raise ValidationError("path table has non-finite entries")
        entries.setflags(write=False)
        self.entries = entries

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __getitem__(self, idx):
        return self.entries[idx]

    def row(self, i: int) -> np.ndarray:
        _check_index(i, self.dim)
        return self.entries[i]

    @cached_property
    def row_sums(self) -> np.ndarray:
        return self.entries.sum(axis=1)

    def __repr__(self):
        return f"PathAmplitudeTable({np.array2string(self.entries, precision=6)})"


def _check_index(i, n):
    if not 0 <= i < n:
        raise ValidationError(f"final-state index {i} out of range for dimension {n}")


def two_step_amplitude(chain: MeasurementChain, i: int) -> complex:
    """``<F_i| U21 U1 |I>``, the amplitude with no intermediate measurement."""
    _check_index(i, chain.dim)
    evolved = chain.u21.data @ (chain.u1.data @ chain.initial.data)
    return complex(np.vdot(chain.final_basis[i].data, evolved))


def path_table(chain: MeasurementChain, basis: Basis | None = None) -> PathAmplitudeTable:
    """Tabulate ``<F_i|U21|b_j><b_j|U1|I>`` for all ``i, j``.

    ``basis`` overrides the chain's intermediate basis, e.g. with the
    eigenbasis of the observable actually coupled to the pointer.
    """
    mid = chain.mid_basis if basis is None else basis
    if mid.dim != chain.dim:
        raise ValidationError(f"basis dimension {mid.dim} does not match chain ({chain.dim})")
    arrive = mid.matrix.conj().T @ (chain.u1.data @ chain.initial.data)
    leave = chain.final_basis.matrix.conj().T @ chain.u21.data @ mid.matrix
    return PathAmplitudeTable(leave * arrive[np.newaxis, :])


def interference_contrast(table: PathAmplitudeTable, i: int) -> tuple[float, float]:
    """Detection probability of ``F_i`` with paths interfering and with paths resolved.

    The first value is the wide-pointer (Δf → ∞) limit ``|Σ_j A_ij|^2``, the
    second the sharp-pointer (Δf → 0) limit ``Σ_j |A_ij|^2``.
    """
    row = table.row(i)
    return float(abs(row.sum()) ** 2), float(np.sum(np.abs(row) ** 2))
