"""Appliance-level load disaggregation under differential-privacy noise.

Decodes on/off appliance states from aggregate meter readings via sparse
switch recovery, injects ε-DP noise (Laplace or staircase) into the
readings, evaluates closed-form accuracy bounds for the one-shot,
multi-shot, and hierarchical decoders, and ships a Monte Carlo sweep
harness comparing empirical accuracy against those bounds.
"""

from .bounds import (
    BoundEntry,
    BoundReport,
    c_of_p,
    hierarchical_bounds,
    lower_bound_one_shot,
    multi_shot_bounds,
    one_shot_bounds,
    rip_constant,
    upper_bound_one_shot,
)
from .dataio import (
    ApplianceTrace,
    SynthConfig,
    aggregate,
    binarize,
    estimate_powers,
    estimate_u_max,
    sparsity,
    synthesize,
)
from .errors import DataError, EstimationError, InfeasibleError
from .hierarchy import Hierarchy, decompose, good_hierarchy_check, hierarchical_infer
from .inference import (
    InferenceResult,
    accuracy_multi_shot,
    accuracy_one_shot,
    k_delta,
    multi_shot_infer,
    one_shot_infer,
)
from .kernels import BACKEND as KERNEL_BACKEND
from .mechanisms import (
    NoiseSample,
    StaircaseDraw,
    inject_noise,
    laplace_pdf,
    laplace_sample,
    sensitivity,
    staircase_sample,
)
from .model import (
    AppliancePowerVector,
    DpConfig,
    Mechanism,
    MeterSeries,
    SensitivityParams,
    StateMatrix,
    StateVector,
    SwitchVector,
    apply_switch,
    hadamard,
)
from .solver import (
    L1Solution,
    check_power_concentration,
    check_sparsity,
    round_probabilistic,
    solve_l1_boxed,
)
from .sweep import SweepConfig, SweepRow, run_sweep

__version__ = "0.1.0"
