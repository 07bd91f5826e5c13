"""Named measurement scenarios and the JSON scenario file format.

Spinor convention for a direction ``(θ, φ)`` on the Bloch sphere::

    |n+> = (cos θ/2, e^{iφ} sin θ/2)
    |n-> = (sin θ/2, -e^{iφ} cos θ/2)

The phase of ``|n->`` is fixed so that, for an initial ``|z+>``, the two-step
amplitudes are exactly ``(cos θ'/2, sin θ'/2)`` with no leftover phase.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .amplitudes import MeasurementChain, path_table
from .exceptions import ValidationError
from .qcore import (
    Basis,
    Observable,
    StateVector,
    UnitaryMatrix,
    identity_observable,
    projector_observable,
)
from .values import weak_value

SCHEMA_VERSION = 1
# θ = θ' = π is 0/0 for the spin weak value; evaluate just inside instead
SPIN_LIMIT_OFFSET = 1e-8


@dataclass(frozen=True)
class Scenario:
    name: str
    chain: MeasurementChain
    observables: dict = field(default_factory=dict)
    notes: tuple = ()

    def observable(self, name: str) -> Observable:
        try:
            return self.observables[name]
        except KeyError:
            known = ", ".join(sorted(self.observables))
            raise ValidationError(f"unknown observable {name!r} (known: {known})", "observable") from None


def spinor_pair(cos_half: float, sin_half: float, phi: float) -> tuple[np.ndarray, np.ndarray]:
    """``|n+>, |n->`` from ``cos θ/2``, ``sin θ/2`` and the azimuth."""
    phase = complex(math.cos(phi), math.sin(phi))
    plus = np.array([cos_half, phase * sin_half], dtype=complex)
    minus = np.array([sin_half, -phase * cos_half], dtype=complex)
    return plus, minus


def spin_basis(theta: float, phi: float) -> Basis:
    return Basis(spinor_pair(math.cos(theta / 2), math.sin(theta / 2), phi))


@dataclass(frozen=True)
class SpinScenarioParams:
    """Angles of the intermediate (``theta``, ``phi``) and final
    (``theta_prime``, ``phi_prime``) measurement axes.

    ``epsilon`` is an alternative to ``theta_prime`` for final axes close to
    ``-z``: it sets ``theta_prime = π - epsilon`` and keeps the small
    ``cos θ'/2 = sin ε/2`` at full relative precision.
    """

    theta: float
    theta_prime: float | None = None
    phi: float = 0.0
    phi_prime: float = 0.0
    epsilon: float | None = None

    def __post_init__(self):
        if self.epsilon is not None:
            if not (math.isfinite(self.epsilon) and 0.0 <= self.epsilon <= math.pi):
                raise ValidationError(f"must lie in [0, π], got {self.epsilon!r}", "epsilon")
            tp = math.pi - self.epsilon
            if self.theta_prime is not None and abs(self.theta_prime - tp) > 1e-12:
                raise ValidationError("give theta_prime or epsilon, not both", "epsilon")
            object.__setattr__(self, "theta_prime", tp)
        if self.theta_prime is None:
            raise ValidationError("theta_prime (or epsilon) is required", "theta_prime")
        for name in ("theta", "theta_prime", "phi", "phi_prime"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError("must be finite", name)
        for name in ("theta", "theta_prime"):
            if not 0.0 <= getattr(self, name) <= math.pi:
                raise ValidationError(f"must lie in [0, π], got {getattr(self, name)!r}", name)

    def final_half_angles(self) -> tuple[float, float]:
        if self.epsilon is not None:
            return math.sin(self.epsilon / 2), math.cos(self.epsilon / 2)
        return math.cos(self.theta_prime / 2), math.sin(self.theta_prime / 2)


def build_spin_scenario(p: SpinScenarioParams) -> MeasurementChain:
    """Spin-1/2 prepared in ``|z+>``, measured along ``n`` then along ``n'``."""
    mid = spin_basis(p.theta, p.phi)
    final = Basis(spinor_pair(*p.final_half_angles(), p.phi_prime))
    return MeasurementChain(StateVector([1.0, 0.0]), mid, final)


def spin_scenario(params: SpinScenarioParams) -> Scenario:
    chain = build_spin_scenario(params)
    b = chain.mid_basis
    observables = {
        "pi_1": projector_observable(b, 0),
        "pi_2": projector_observable(b, 1),
        "sigma_n": Observable(b, [1.0, -1.0]),
        "identity": identity_observable(b),
    }
    return Scenario("spin", chain, observables)


@dataclass(frozen=True)
class ThreePathParams:
    a: complex = 1.0 / 3.0
    a_prime: complex = 1.0 / 3.0

    def __post_init__(self):
        for name in ("a", "a_prime"):
            v = complex(getattr(self, name))
            if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                raise ValidationError("must be finite", name)
            object.__setattr__(self, name, v)
        if 2 * abs(self.a) ** 2 + abs(self.a_prime) ** 2 <= 0:
            raise ValidationError("2|A|² + |A'|² must be positive", "a")


_THREE_PATH_FINAL = np.array(
    [
        [1.0, 1.0, 1.0],
        [1.0, -1.0, 0.0],
        [1.0, 1.0, -2.0],
    ]
) / np.sqrt([[3.0], [2.0], [6.0]])


def build_three_path(p: ThreePathParams) -> MeasurementChain:
    """Three routes reaching ``F_1`` with amplitudes proportional to ``(A, -A, A')``.

    The intermediate basis is computational, the initial state is
    ``(A, -A, A')`` normalized, and ``F_1 = (1, 1, 1)/√3``.
    """
    initial = np.array([p.a, -p.a, p.a_prime], dtype=complex)
    initial /= np.linalg.norm(initial)
    return MeasurementChain(StateVector(initial), Basis.computational(3), Basis(list(_THREE_PATH_FINAL)))


def three_path_scenario(params: ThreePathParams) -> Scenario:
    chain = build_three_path(params)
    b = chain.mid_basis
    observables = {
        "pi_1": projector_observable(b, 0),
        "pi_2": projector_observable(b, 1),
        "pi_3": projector_observable(b, 2),
        "pi_1_union_2": projector_observable(b, (0, 1)),
        "identity": identity_observable(b),
    }
    return Scenario("three-path", chain, observables)


def identity_two_level(theta: float = math.pi / 2) -> Scenario:
    """Baseline with no interference: the intermediate and final bases coincide.

    Each final state is reached by exactly one route, so every weak value
    equals the corresponding ABL value.
    """
    if not 0.0 < theta < math.pi:
        raise ValidationError("must lie strictly inside (0, π) so both outcomes occur", "theta")
    b = Basis.computational(2)
    chain = MeasurementChain(StateVector([math.cos(theta / 2), math.sin(theta / 2)]), b, b)
    observables = {
        "pi_1": projector_observable(b, 0),
        "pi_2": projector_observable(b, 1),
        "sigma_z": Observable(b, [1.0, -1.0]),
        "identity": identity_observable(b),
    }
    return Scenario("identity-two-level", chain, observables)


def tune_amplification(target: float, theta: float = math.pi / 2, phi: float = 0.0,
                       lo: float = 1e-9, hi: float = 1.0, max_iter: int = 200) -> SpinScenarioParams:
    """Find the ε that makes ``<π_1>_W`` equal ``target`` near the dark final state.

    Bisection on ``ε = π - θ'`` with ``φ' = φ`` (all amplitudes real). The
    weak value decreases monotonically in ε on the bracket, so ``lo`` must
    overshoot and ``hi`` undershoot the target.
    """

    def value(eps):
        chain = build_spin_scenario(SpinScenarioParams(theta, phi=phi, phi_prime=phi, epsilon=eps))
        return weak_value(path_table(chain), [1.0, 0.0], 0).value.real

    f_lo, f_hi = value(lo) - target, value(hi) - target
    if not (f_lo > 0 > f_hi):
        raise ValidationError(f"target {target!r} is not bracketed by ε in [{lo}, {hi}]", "target")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if value(mid) > target:
            lo = mid
        else:
            hi = mid
    eps = lo if abs(value(lo) - target) <= abs(value(hi) - target) else hi
    return SpinScenarioParams(theta, phi=phi, phi_prime=phi, epsilon=eps)


def builtin_scenario(name: str, params: dict | None = None) -> Scenario:
    """Build ``spin``, ``three-path`` or ``identity-two-level`` from keyword params."""
    params = dict(params or {})
    try:
        if name == "spin":
            notes = ()
            theta, theta_prime = params.get("theta"), params.get("theta_prime")
            if theta is None:
                raise ValidationError("spin scenario needs theta", "params.theta")
            if (theta_prime is not None and params.get("epsilon") is None
                    and abs(theta - math.pi) < 1e-15 and abs(theta_prime - math.pi) < 1e-15):
                params["theta"] = params["theta_prime"] = math.pi - SPIN_LIMIT_OFFSET
                notes = (f"theta=theta_prime=pi is 0/0; evaluated at pi-{SPIN_LIMIT_OFFSET:g}",)
            sc = spin_scenario(SpinScenarioParams(**params))
            return Scenario(sc.name, sc.chain, sc.observables, notes)
        if name == "three-path":
            return three_path_scenario(ThreePathParams(**params))
        if name == "identity-two-level":
            return identity_two_level(**params)
    except TypeError as exc:
        raise ValidationError(str(exc), "params") from None
    raise ValidationError(f"unknown built-in scenario {name!r}", "scenario")


def _complex_pair(x, field):
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(x)
    if (isinstance(x, (list, tuple)) and len(x) == 2
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x)):
        return complex(x[0], x[1])
    raise ValidationError(f"expected a complex number [re, im], got {x!r}", field)


def _complex_vector(xs, field, dim):
    if not isinstance(xs, list) or len(xs) != dim:
        raise ValidationError(f"expected a list of {dim} complex numbers", field)
    return np.array([_complex_pair(x, f"{field}[{k}]") for k, x in enumerate(xs)], dtype=complex)


def _encode_vector(v):
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex)]


def scenario_to_dict(scenario: Scenario) -> dict:
    chain = scenario.chain
    return {
        "schema": SCHEMA_VERSION,
        "name": scenario.name,
        "dim": chain.dim,
        "initial": _encode_vector(chain.initial.data),
        "u1": [_encode_vector(r) for r in chain.u1.data],
        "u21": [_encode_vector(r) for r in chain.u21.data],
        "mid_basis": [_encode_vector(v.data) for v in chain.mid_basis],
        "final_basis": [_encode_vector(v.data) for v in chain.final_basis],
        "observables": {k: o.eigenvalues.tolist() for k, o in scenario.observables.items()},
    }


def save_scenario(scenario: Scenario, path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(scenario), indent=2) + "\n")


def scenario_from_dict(doc: dict, name: str = "file") -> Scenario:
    """Validate a parsed scenario document; errors name the offending key."""
    if not isinstance(doc, dict):
        raise ValidationError("top level must be an object", "$")
    if doc.get("schema") != SCHEMA_VERSION:
        raise ValidationError(f"unsupported schema {doc.get('schema')!r}, expected {SCHEMA_VERSION}", "schema")
    dim = doc.get("dim")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise ValidationError(f"must be a positive integer, got {dim!r}", "dim")
    for key in ("initial", "mid_basis", "final_basis", "observables"):
        if key not in doc:
            raise ValidationError("missing required key", key)

    initial = StateVector(_complex_vector(doc["initial"], "initial", dim), "initial")

    def basis(key):
        cols = doc[key]
        if not isinstance(cols, list) or len(cols) != dim:
            raise ValidationError(f"expected {dim} columns", key)
        return Basis([StateVector(_complex_vector(c, f"{key}[{k}]", dim), f"{key}[{k}]")
                      for k, c in enumerate(cols)], key)

    def unitary(key):
        if doc.get(key) is None:
            return None
        rows = doc[key]
        if not isinstance(rows, list) or len(rows) != dim:
            raise ValidationError(f"expected {dim} rows", key)
        return UnitaryMatrix(np.array([_complex_vector(r, f"{key}[{k}]", dim)
                                       for k, r in enumerate(rows)]), key)

    mid = basis("mid_basis")
    chain = MeasurementChain(initial, mid, basis("final_basis"), unitary("u1"), unitary("u21"))
    obs_doc = doc["observables"]
    if not isinstance(obs_doc, dict) or not obs_doc:
        raise ValidationError("expected a non-empty object of eigenvalue lists", "observables")
    observables = {}
    for key, values in obs_doc.items():
        fld = f"observables.{key}"
        if not isinstance(values, list) or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool) for v in values):
            raise ValidationError("expected a list of real numbers", fld)
        observables[key] = Observable(mid, values, fld)
    return Scenario(str(doc.get("name", name)), chain, observables)


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}", "scenario") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON at line {exc.lineno}: {exc.msg}", "scenario") from None
    return scenario_from_dict(doc, path.stem)
