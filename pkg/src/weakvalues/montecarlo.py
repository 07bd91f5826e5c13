"""Trial-by-trial sampling from a joint distribution and the estimators built on it."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from .exceptions import GridError, ValidationError
from .pointer import NORM_DEFECT_LIMIT, JointDistribution

CHUNK = 1 << 20


class TrialRecord(NamedTuple):
    final_index: int
    reading: float


@dataclass(frozen=True, eq=False)
class Trials:
    """Outcomes of ``K`` independent trials, stored column-wise."""

    final_index: np.ndarray
    reading: np.ndarray
    n_final: int
    seed: int

    def __len__(self):
        return self.final_index.size

    def __iter__(self) -> Iterator[TrialRecord]:
        for i, f in zip(self.final_index.tolist(), self.reading.tolist()):
            yield TrialRecord(i, f)

    def __eq__(self, other):
        return (isinstance(other, Trials) and self.n_final == other.n_final
                and np.array_equal(self.final_index, other.final_index)
                and np.array_equal(self.reading, other.reading))

    __hash__ = None

    @classmethod
    def from_records(cls, records, n_final: int, seed: int = 0) -> "Trials":
        records = list(records)
        idx = np.array([r[0] for r in records], dtype=np.int64)
        f = np.array([r[1] for r in records], dtype=float)
        if idx.size and (idx.min() < 0 or idx.max() >= n_final):
            raise ValidationError(f"final_index outside [0, {n_final})", "final_index")
        return cls(idx, f, n_final, seed)

    def to_csv(self, path) -> None:
        """Write ``trial,final_index,reading`` rows, one per trial."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["trial", "final_index", "reading"])
            for k, (i, f) in enumerate(zip(self.final_index.tolist(), self.reading.tolist())):
                w.writerow([k, i, repr(f)])


def _generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def sample_trials(jd: JointDistribution, trials: int, seed: int) -> Trials:
    """Draw ``trials`` i.i.d. ``(final_index, reading)`` pairs from ``jd``.

    The density is treated as piecewise linear between grid nodes, so the
    flattened cell masses give the discrete CDF and the reading inside a cell
    follows from inverting the linear density exactly. The sampler therefore
    targets the tabulated density itself and nothing else.
    """
    if not isinstance(trials, (int, np.integer)) or trials < 1:
        raise ValidationError(f"need at least one trial, got {trials!r}", "trials")
    if jd.norm_defect > NORM_DEFECT_LIMIT:
        raise GridError(f"distribution normalization defect {jd.norm_defect:.3g} is too large")
    dens = np.asarray(jd.density)
    n, m = dens.shape
    h = jd.grid.step
    left, right = dens[:, :-1], dens[:, 1:]
    cell_mass = (0.5 * h * (left + right)).ravel()
    cdf = np.cumsum(cell_mass)
    cdf /= cdf[-1]
    p0, p1 = left.ravel(), right.ravel()
    f0 = jd.grid.f_min

    rng = _generator(seed)
    out_i = np.empty(trials, dtype=np.int64)
    out_f = np.empty(trials, dtype=float)
    for start in range(0, trials, CHUNK):
        stop = min(start + CHUNK, trials)
        u = rng.random((2, stop - start))
        cell = np.minimum(np.searchsorted(cdf, u[0], side="right"), cdf.size - 1)
        a, b = p0[cell], p1[cell]
        total = a + b
        root = np.sqrt(np.maximum(a * a + (b - a) * u[1] * total, 0.0))
        denom = a + root
        t = np.divide(u[1] * total, denom, out=u[1].copy(), where=denom > 0)
        i, k = np.divmod(cell, m - 1)
        out_i[start:stop] = i
        out_f[start:stop] = f0 + (k + np.clip(t, 0.0, 1.0)) * h
    return Trials(out_i, out_f, n, int(seed))


@dataclass(frozen=True)
class FinalStats:
    """Per-final-state summary.

    ``mean`` is the counting estimate of the ABL mean in the strong regime
    and the mean pointer reading in the weak regime; ``unconditional_mean``
    divides the summed readings by all trials instead.
    """

    count: int
    frequency: float
    frequency_stderr: float
    mean: float
    mean_stderr: float
    unconditional_mean: float
    unconditional_stderr: float
    class_counts: tuple | None = None


@dataclass(frozen=True)
class McEstimate:
    trials: int
    regime: str
    seed: int
    per_final: tuple

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "regime": self.regime,
            "seed": self.seed,
            "per_final": [
                {k: (list(v) if isinstance(v, tuple) else v) for k, v in vars(s).items()}
                for s in self.per_final
            ],
        }


def _mean_and_stderr(x: np.ndarray) -> tuple[float, float]:
    if x.size == 0:
        return float("nan"), float("nan")
    mean = float(x.mean())
    if x.size < 2:
        return mean, float("nan")
    return mean, float(x.std(ddof=1) / np.sqrt(x.size))


def classify(readings, eigenvalues, beta: float = 1.0) -> np.ndarray:
    """Index of the nearest shifted eigenvalue; ties go to the lower eigenvalue."""
    shifts = beta * np.asarray(eigenvalues, dtype=float)
    order = np.argsort(shifts, kind="stable")
    sorted_shifts = shifts[order]
    readings = np.asarray(readings, dtype=float)
    mids = 0.5 * (sorted_shifts[1:] + sorted_shifts[:-1])
    # a reading exactly on a midpoint lands in the lower bin
    return order[np.searchsorted(mids, readings, side="left")]


def estimate(records: Trials, eigenvalues, regime: str, beta: float = 1.0) -> McEstimate:
    """Summarize trials per final state.

    ``regime="strong"`` classifies each reading to the nearest ``βB_j`` and
    averages the classified eigenvalues (the counting estimator).
    ``regime="weak"`` averages the readings themselves. Both report
    ``Σ f / K`` over trials ending in each final state.
    """
    if regime not in ("strong", "weak"):
        raise ValidationError(f"regime must be 'strong' or 'weak', got {regime!r}", "regime")
    if not isinstance(records, Trials):
        raise ValidationError("expected a Trials collection", "records")
    k_total = len(records)
    if k_total == 0:
        raise ValidationError("no trials to estimate from", "records")
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    idx, f = records.final_index, records.reading
    labels = classify(f, eigenvalues, beta) if regime == "strong" else None
    stats = []
    for i in range(records.n_final):
        mask = idx == i
        count = int(mask.sum())
        freq = count / k_total
        freq_se = float(np.sqrt(freq * (1.0 - freq) / k_total))
        class_counts = None
        if regime == "strong":
            cls = labels[mask]
            class_counts = tuple(int(c) for c in np.bincount(cls, minlength=eigenvalues.size))
            mean, mean_se = _mean_and_stderr(eigenvalues[cls])
        else:
            mean, mean_se = _mean_and_stderr(f[mask])
        unc, unc_se = _mean_and_stderr(np.where(mask, f, 0.0))
        stats.append(FinalStats(count, freq, freq_se, mean, mean_se, unc, unc_se, class_counts))
    return McEstimate(k_total, regime, records.seed, tuple(stats))
