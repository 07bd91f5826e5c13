"""Pre/post-selected measurements with von Neumann pointers of any accuracy.

Exact joint outcome distributions, ABL means, complex weak values and the
crossover between them as the pointer width is varied.
"""
from .amplitudes import (
    MeasurementChain,
    PathAmplitudeTable,
    interference_contrast,
    path_table,
    two_step_amplitude,
)
from .exceptions import DarkStateError, GridError, ValidationError
from .montecarlo import McEstimate, TrialRecord, Trials, estimate, sample_trials
from .pointer import (
    JointDistribution,
    PointerProfile,
    QuadratureGrid,
    composite_amplitude,
    conditional_mean_reading,
    joint_distribution,
    momentum_mean_reading,
    two_step_distribution,
    unconditional_mean_reading,
)
from .qcore import (
    Basis,
    Observable,
    StateVector,
    UnitaryMatrix,
    apply,
    identity_observable,
    impulsive_kick,
    inner,
    projector_observable,
)
from .scenarios import (
    Scenario,
    SpinScenarioParams,
    ThreePathParams,
    build_spin_scenario,
    build_three_path,
    builtin_scenario,
    load_scenario,
    save_scenario,
    tune_amplification,
)
from .values import (
    AblResult,
    ResponseResult,
    WeakValueResult,
    abl_value,
    linear_response,
    projector_weak_values,
    weak_value,
)

__version__ = "0.1.0"
