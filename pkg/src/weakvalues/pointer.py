"""von Neumann pointer of arbitrary accuracy coupled to a pre/post-selected system.

The pointer starts in a real profile ``G(f)`` of width ``Δf`` and is shifted
by ``β B_j`` along route ``j``, so the composite amplitude for detecting
``F_i`` with reading ``f`` is ``Σ_j G(f - β B_j) A_ij``. All integrals over
the reading use composite Simpson on a uniform grid.

A sharp pointer (``Δf`` small against the eigenvalue gaps) resolves the
routes and reproduces the ABL mean; a broad pointer leaves the interference
intact and its conditional mean tends to ``β Re<B>_W``. Neither limit is
taken symbolically; they are reached by choosing ``Δf``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import CubicSpline

from .amplitudes import MeasurementChain, PathAmplitudeTable, _check_index, path_table
from .exceptions import DarkStateError, GridError, ValidationError
from .qcore import Observable, StateVector, UnitaryMatrix
from .values import DARK_PROBABILITY

MIN_POINTS = 513
POINTS_PER_WIDTH = 40
PADDING = 10.0
MAX_POINTS = 4_000_001
NORM_DEFECT_LIMIT = 1e-6
PROFILE_TOL = 1e-10


class PointerProfile:
    """Initial pointer wavefunction ``G(f)``.

    Use :meth:`gaussian` for the default profile, whose square is a normal
    density of standard deviation ``width``, or :meth:`from_samples` for a
    tabulated real profile. Custom profiles must satisfy ``∫G² = 1`` and
    ``∫fG² = 0``; they are checked when built.
    """

    def __init__(self, kind, width, coupling=1.0, *, samples=None, momentum=None):
        if kind not in ("gaussian", "custom"):
            raise ValidationError(f"unknown profile kind {kind!r}", "kind")
        if not (np.isfinite(width) and width > 0):
            raise ValidationError(f"must be a positive number, got {width!r}", "delta_f")
        if not (np.isfinite(coupling) and coupling > 0):
            raise ValidationError(f"must be a positive number, got {coupling!r}", "beta")
        self.kind = kind
        self.width = float(width)
        self.coupling = float(coupling)
        self._spline = None
        self._support = (-math.inf, math.inf)
        self._momentum = None
        if kind == "custom":
            self._init_samples(samples)
            if momentum is not None:
                self._init_momentum(momentum)

    @classmethod
    def gaussian(cls, width: float, coupling: float = 1.0) -> "PointerProfile":
        return cls("gaussian", width, coupling)

    @classmethod
    def from_samples(cls, f, g, width, coupling=1.0, momentum=None) -> "PointerProfile":
        """Tabulated profile.

        Parameters
        ----------
        f, g : array_like
            Increasing sample positions and real profile values. The profile
            is taken to vanish outside ``[f[0], f[-1]]``.
        width : float
            Declared characteristic width, used to size quadrature grids.
        momentum : tuple of array_like, optional
            ``(lam, g_tilde)`` samples of the momentum-space profile. Needed
            only for :func:`momentum_mean_reading`; ``|g_tilde|^2`` is
            renormalized to unit mass.
        """
        return cls("custom", width, coupling, samples=(f, g), momentum=momentum)

    def _init_samples(self, samples):
        if samples is None:
            raise ValidationError("custom profile needs samples", "samples")
        f, g = (np.asarray(a, dtype=float) for a in samples)
        if f.ndim != 1 or f.shape != g.shape or f.size < 5:
            raise ValidationError("need matching 1-d arrays with at least 5 samples", "samples")
        if not (np.all(np.isfinite(f)) and np.all(np.isfinite(g))):
            raise ValidationError("samples must be finite", "samples")
        if np.any(np.diff(f) <= 0):
            raise ValidationError("sample positions must be strictly increasing", "samples")
        norm = simpson(g**2, x=f)
        mean = simpson(f * g**2, x=f)
        if abs(norm - 1.0) > PROFILE_TOL:
            raise ValidationError(f"∫G² = {norm:.15g}, expected 1", "samples")
        if abs(mean) > PROFILE_TOL * max(1.0, self.width):
            raise ValidationError(f"∫fG² = {mean:.3g}, expected 0", "samples")
        self._spline = CubicSpline(f, g)
        self._support = (float(f[0]), float(f[-1]))

    def _init_momentum(self, momentum):
        lam, gt = momentum
        lam = np.asarray(lam, dtype=float)
        weight = np.abs(np.asarray(gt, dtype=complex)) ** 2
        if lam.ndim != 1 or lam.shape != weight.shape or lam.size < MIN_POINTS:
            raise ValidationError(
                f"need matching 1-d arrays with at least {MIN_POINTS} samples", "momentum"
            )
        if np.any(np.diff(lam) <= 0):
            raise ValidationError("momentum samples must be strictly increasing", "momentum")
        mass = simpson(weight, x=lam)
        if not mass > 0:
            raise ValidationError("momentum profile has zero mass", "momentum")
        self._momentum = (lam, CubicSpline(lam, weight / mass))

    def amplitude(self, f) -> np.ndarray:
        """``G(f)`` evaluated elementwise."""
        f = np.asarray(f, dtype=float)
        if self.kind == "gaussian":
            s = self.width
            return (2.0 * math.pi * s * s) ** -0.25 * np.exp(-(f * f) / (4.0 * s * s))
        lo, hi = self._support
        out = self._spline(np.clip(f, lo, hi))
        return np.where((f < lo) | (f > hi), 0.0, out)

    @property
    def support_halfwidth(self) -> float:
        """Half-width of the interval that must be padded around each shift."""
        pad = PADDING * self.width
        if self.kind == "custom":
            pad = max(pad, abs(self._support[0]), abs(self._support[1]))
        return pad

    @property
    def has_momentum(self) -> bool:
        return self.kind == "gaussian" or self._momentum is not None

    @property
    def momentum_width(self) -> float:
        """Standard deviation of the momentum distribution, ``sqrt(∫λ²|G̃|²)``."""
        return math.sqrt(self.momentum_second_moment)

    @property
    def momentum_second_moment(self) -> float:
        """``∫ λ² |G̃(λ)|² dλ``; equal to ``1/(4Δf²)`` for the Gaussian."""
        if self.kind == "gaussian":
            return 1.0 / (4.0 * self.width**2)
        lam, w = self._require_momentum()
        return float(simpson(lam**2 * w(lam), x=lam))

    def momentum_weight(self, lam) -> np.ndarray:
        """Normalized momentum density ``|G̃(λ)|²``."""
        lam = np.asarray(lam, dtype=float)
        if self.kind == "gaussian":
            s2 = self.momentum_second_moment
            return np.exp(-(lam * lam) / (2.0 * s2)) / math.sqrt(2.0 * math.pi * s2)
        grid, w = self._require_momentum()
        inside = (lam >= grid[0]) & (lam <= grid[-1])
        return np.where(inside, np.maximum(w(np.clip(lam, grid[0], grid[-1])), 0.0), 0.0)

    def momentum_range(self) -> tuple[float, float]:
        if self.kind == "gaussian":
            half = 12.0 * self.momentum_width
            return -half, half
        lam, _ = self._require_momentum()
        return float(lam[0]), float(lam[-1])

    def _require_momentum(self):
        if self._momentum is None:
            raise ValidationError(
                "custom profile was built without momentum-space samples", "momentum"
            )
        return self._momentum

    def with_width(self, width: float) -> "PointerProfile":
        if self.kind != "gaussian":
            raise ValidationError("only Gaussian profiles can be re-widthed", "kind")
        return PointerProfile.gaussian(width, self.coupling)

    def __repr__(self):
        return f"PointerProfile({self.kind!r}, width={self.width:g}, coupling={self.coupling:g})"


@dataclass(frozen=True)
class QuadratureGrid:
    f_min: float
    f_max: float
    points: int

    def __post_init__(self):
        if self.points < MIN_POINTS or self.points % 2 == 0:
            raise ValidationError(
                f"need an odd number of points >= {MIN_POINTS}, got {self.points}", "grid_points"
            )
        if not (np.isfinite(self.f_min) and np.isfinite(self.f_max) and self.f_max > self.f_min):
            raise ValidationError(f"bad grid span [{self.f_min}, {self.f_max}]", "grid_span")

    @classmethod
    def covering(cls, shifts, profile: PointerProfile, points=None, padding=PADDING):
        """Smallest grid that pads every shift by ``padding`` widths.

        Without an explicit ``points`` the spacing is set to ``Δf/40``
        (with at least 513 points), which keeps the normalization defect
        far below 1e-8 for Gaussian profiles at any width.
        """
        if padding < PADDING:
            raise ValidationError(f"padding must be at least {PADDING} widths", "grid_span")
        shifts = np.asarray(shifts, dtype=float)
        pad = max(padding * profile.width, profile.support_halfwidth)
        lo, hi = float(shifts.min()) - pad, float(shifts.max()) + pad
        if points is None:
            n = int(math.ceil((hi - lo) / profile.width * POINTS_PER_WIDTH)) + 1
            n = max(n, MIN_POINTS)
            n += 1 - n % 2
            if n > MAX_POINTS:
                raise GridError(
                    f"resolving width {profile.width:g} over span {hi - lo:g} needs {n} points "
                    f"(limit {MAX_POINTS})"
                )
            points = n
        return cls(lo, hi, int(points))

    def covers(self, shifts, width, padding=PADDING) -> bool:
        shifts = np.asarray(shifts, dtype=float)
        slack = 1e-12 * max(1.0, abs(self.f_min), abs(self.f_max))
        return (
            self.f_min <= shifts.min() - padding * width + slack
            and self.f_max >= shifts.max() + padding * width - slack
        )

    @property
    def f(self) -> np.ndarray:
        return np.linspace(self.f_min, self.f_max, self.points)

    @property
    def step(self) -> float:
        return (self.f_max - self.f_min) / (self.points - 1)

    def integrate(self, values, axis=-1):
        return simpson(values, dx=self.step, axis=axis)


def composite_amplitude(table: PathAmplitudeTable, eigenvalues, profile: PointerProfile, i, f):
    """``Σ_j G(f - β B_j) A_ij``, vectorized over ``f``."""
    row = table.row(i)
    shifts = profile.coupling * np.asarray(eigenvalues, dtype=float)
    f = np.asarray(f, dtype=float)
    g = profile.amplitude(f[..., np.newaxis] - shifts)
    return g @ row


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Gridded joint density ``P(F_i, f)`` of final state and pointer reading."""

    chain: MeasurementChain
    observable: Observable
    profile: PointerProfile
    grid: QuadratureGrid
    table: PathAmplitudeTable
    density: np.ndarray = field(repr=False)
    norm_defect: float

    @property
    def dim(self) -> int:
        return self.density.shape[0]

    @property
    def f(self) -> np.ndarray:
        return self.grid.f

    @property
    def shifts(self) -> np.ndarray:
        return self.profile.coupling * self.observable.eigenvalues

    def postselection_probabilities(self) -> np.ndarray:
        """``∫P(F_i, f) df`` for every final state."""
        return self.grid.integrate(self.density, axis=1)

    def postselection_probability(self, i: int) -> float:
        _check_index(i, self.dim)
        return float(self.grid.integrate(self.density[i]))

    def marginal(self) -> np.ndarray:
        """Reading density with the final detection ignored."""
        return self.density.sum(axis=0)

    def evaluate(self, f) -> np.ndarray:
        """Exact density at arbitrary readings, shape ``(N, len(f))``."""
        ev = self.observable.eigenvalues
        return np.stack(
            [np.abs(composite_amplitude(self.table, ev, self.profile, i, f)) ** 2 for i in range(self.dim)]
        )

    def mass_near(self, i: int, center: float, halfwidth: float) -> float:
        """Probability of ``F_i`` with the reading inside ``center ± halfwidth``.

        Integrated on a fresh local grid rather than the global one, so the
        window edges are exact.
        """
        f = np.linspace(center - halfwidth, center + halfwidth, 2001)
        return float(simpson(self.evaluate(f)[i], x=f))


def joint_distribution(chain, observable, profile, grid=None, *, check=True):
    """Tabulate ``|Σ_j G(f - βB_j) A_ij|²`` on a quadrature grid.

    The intermediate routes run through the eigenbasis of ``observable``.
    When ``grid`` is omitted one is sized automatically; a supplied grid must
    pad every shifted eigenvalue by ten widths. With ``check`` on, a total
    mass off by more than 1e-6 raises :class:`GridError`.
    """
    if observable.dim != chain.dim:
        raise ValidationError(
            f"observable dimension {observable.dim} does not match chain ({chain.dim})", "observable"
        )
    shifts = profile.coupling * observable.eigenvalues
    if grid is None:
        grid = QuadratureGrid.covering(shifts, profile)
    elif not grid.covers(shifts, profile.width):
        raise GridError(
            f"grid [{grid.f_min:g}, {grid.f_max:g}] does not pad shifts "
            f"[{shifts.min():g}, {shifts.max():g}] by {PADDING:g} widths of {profile.width:g}"
        )
    table = path_table(chain, observable.basis)
    f = grid.f
    g = profile.amplitude(f[:, np.newaxis] - shifts)  # (points, N)
    density = np.abs(g @ table.entries.T).T ** 2
    total = float(grid.integrate(density, axis=1).sum())
    defect = abs(total - 1.0)
    if check and defect > NORM_DEFECT_LIMIT:
        raise GridError(
            f"normalization defect {defect:.3g} exceeds {NORM_DEFECT_LIMIT:g} "
            f"(points={grid.points}, step={grid.step:.3g}, width={profile.width:g}); refine the grid"
        )
    density.setflags(write=False)
    return JointDistribution(chain, observable, profile, grid, table, density, defect)


def conditional_mean_reading(jd: JointDistribution, i: int) -> float:
    """Mean reading in the sub-ensemble that ends in ``F_i``."""
    p = jd.postselection_probability(i)
    if p <= DARK_PROBABILITY:
        raise DarkStateError(f"final state {i} has post-selection probability {p:.3g}")
    return float(jd.grid.integrate(jd.f * jd.density[i]) / p)


def unconditional_mean_reading(jd: JointDistribution, i: int) -> float:
    """``∫ f P(F_i, f) df``, i.e. normalized by all trials, not by the ``F_i`` count."""
    _check_index(i, jd.dim)
    return float(jd.grid.integrate(jd.f * jd.density[i]))


def momentum_grid(eigenvalues, profile: PointerProfile, points=None) -> np.ndarray:
    lo, hi = profile.momentum_range()
    if points is None:
        spread = profile.coupling * float(np.ptp(np.asarray(eigenvalues, dtype=float)))
        h = profile.momentum_width / POINTS_PER_WIDTH
        if spread > 0:
            h = min(h, 2.0 * math.pi / (20.0 * spread))
        points = max(MIN_POINTS, int(math.ceil((hi - lo) / h)) + 1)
        points += 1 - points % 2
        if points > MAX_POINTS:
            raise GridError(f"momentum grid would need {points} points (limit {MAX_POINTS})")
    return np.linspace(lo, hi, points)


def momentum_mean_reading(chain, observable, profile, i, points=None) -> float:
    """Mean pointer momentum in the sub-ensemble ending in ``F_i``.

    In momentum space the composite amplitude is
    ``G̃(λ) Σ_j A_ij exp(-iλβB_j)``, with ``<f|λ> = exp(iλf)``. For a broad
    pointer the result tends to ``2 β ∫λ²|G̃|² dλ · Im<B>_W``.
    """
    if not profile.has_momentum:
        raise ValidationError("profile has no momentum representation", "momentum")
    table = path_table(chain, observable.basis)
    row = table.row(i)
    shifts = profile.coupling * observable.eigenvalues
    lam = momentum_grid(observable.eigenvalues, profile, points)
    phases = np.exp(-1j * lam[:, np.newaxis] * shifts)
    weight = profile.momentum_weight(lam) * np.abs(phases @ row) ** 2
    p = float(simpson(weight, x=lam))
    if p <= DARK_PROBABILITY:
        raise DarkStateError(f"final state {i} has post-selection probability {p:.3g}")
    return float(simpson(lam * weight, x=lam) / p)


@dataclass(frozen=True, eq=False)
class TwoStepDistribution:
    """Reading density for a single measurement diagonal in the final basis."""

    grid: QuadratureGrid
    density: np.ndarray = field(repr=False)
    probabilities: np.ndarray
    shifts: np.ndarray

    def mean_reading(self) -> float:
        mass = self.grid.integrate(self.density)
        return float(self.grid.integrate(self.grid.f * self.density) / mass)


def two_step_distribution(initial: StateVector, u: UnitaryMatrix | None, observable: Observable,
                          profile: PointerProfile, grid=None) -> TwoStepDistribution:
    """``P(f) = Σ_i G(f - βB_i)² |<F_i|U|I>|²`` with ``F_i`` the eigenbasis of ``observable``.

    There is nothing to interfere here, so the mean reading is the plain
    average ``β Σ_i B_i P_i`` whatever the pointer width.
    """
    if u is None:
        u = UnitaryMatrix.identity(initial.dim)
    if not initial.dim == u.dim == observable.dim:
        raise ValidationError("initial state, evolution and observable dimensions differ")
    amps = observable.basis.matrix.conj().T @ (u.data @ initial.data)
    probs = np.abs(amps) ** 2
    shifts = profile.coupling * observable.eigenvalues
    if grid is None:
        grid = QuadratureGrid.covering(shifts, profile)
    g2 = profile.amplitude(grid.f[:, np.newaxis] - shifts) ** 2
    density = g2 @ probs
    density.setflags(write=False)
    return TwoStepDistribution(grid, density, probs, shifts)
