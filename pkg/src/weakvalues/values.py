"""Closed-form conditional values: ABL means, weak values, linear response."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .amplitudes import MeasurementChain, PathAmplitudeTable, _check_index, path_table
from .exceptions import DarkStateError, ValidationError
from .qcore import Observable, impulsive_kick

DIVERGENCE_RTOL = 1e-10
DARK_PROBABILITY = 1e-12


@dataclass(frozen=True)
class WeakValueResult:
    value: complex
    denominator_magnitude: float
    diverged: bool

    @property
    def real(self) -> float:
        return self.value.real

    @property
    def imag(self) -> float:
        return self.value.imag


@dataclass(frozen=True)
class AblResult:
    value: float
    postselection_probability: float


@dataclass(frozen=True)
class ResponseResult:
    p0: float
    delta_p_exact: float
    first_order_prediction: float

    @property
    def residual(self) -> float:
        return self.delta_p_exact - self.first_order_prediction


def _eigenvalues(eigenvalues, n):
    values = np.asarray(eigenvalues, dtype=float)
    if values.shape != (n,):
        raise ValidationError(f"expected {n} eigenvalues, got shape {values.shape}")
    return values


def abl_value(table: PathAmplitudeTable, eigenvalues, i: int) -> AblResult:
    """Mean of an accurately measured observable in the ``F_i`` sub-ensemble.

    Every route is resolved, so route probabilities ``|A_ij|^2`` simply add.
    Raises :class:`DarkStateError` when no route reaches ``F_i``.
    """
    values = _eigenvalues(eigenvalues, table.dim)
    weights = np.abs(table.row(i)) ** 2
    total = float(weights.sum())
    if total <= DARK_PROBABILITY:
        raise DarkStateError(f"final state {i} has resolved-path probability {total:.3g}")
    value = float(np.dot(values, weights) / total)
    # rounding can push the weighted mean a hair outside the spectrum
    value = min(max(value, float(values.min())), float(values.max()))
    return AblResult(value, total)


def weak_value(table: PathAmplitudeTable, eigenvalues, i: int) -> WeakValueResult:
    """``Σ_j B_j A_ij / Σ_j A_ij``.

    A vanishing denominator (below 1e-10 of ``Σ_j |A_ij|``) is reported with
    ``diverged=True`` and a NaN value instead of raising, so that strength or
    angle sweeps can run straight through dark states.
    """
    values = _eigenvalues(eigenvalues, table.dim)
    row = table.row(i)
    denominator = complex(row.sum())
    magnitude = abs(denominator)
    if magnitude <= DIVERGENCE_RTOL * float(np.sum(np.abs(row))):
        return WeakValueResult(complex(np.nan, np.nan), magnitude, True)
    return WeakValueResult(complex(np.dot(values, row) / denominator), magnitude, False)


def projector_weak_values(table: PathAmplitudeTable, i: int) -> list[WeakValueResult]:
    """Weak values of every single-path projector: ``A_ij / Σ_k A_ik``."""
    n = table.dim
    return [weak_value(table, np.eye(n)[j], i) for j in range(n)]


def linear_response(chain: MeasurementChain, v: Observable, i: int) -> ResponseResult:
    """Change in the detection probability of ``F_i`` caused by an impulsive kick.

    The exact change comes from inserting ``exp(-iV)`` between the two
    evolutions; the first-order prediction is ``2 P0 Im<V>_W`` with the weak
    value taken over paths through the eigenbasis of ``V``.
    """
    _check_index(i, chain.dim)
    final = chain.final_basis[i].data
    before = chain.u1.data @ chain.initial.data
    a0 = np.vdot(final, chain.u21.data @ before)
    a = np.vdot(final, chain.u21.data @ (impulsive_kick(v).data @ before))
    p0 = float(abs(a0) ** 2)
    if p0 <= DARK_PROBABILITY:
        raise DarkStateError(f"unperturbed detection probability of final state {i} is {p0:.3g}")
    wv = weak_value(path_table(chain, v.basis), v.eigenvalues, i)
    return ResponseResult(
        p0=p0,
        delta_p_exact=float(abs(a) ** 2) - p0,
        first_order_prediction=2.0 * p0 * wv.value.imag,
    )
