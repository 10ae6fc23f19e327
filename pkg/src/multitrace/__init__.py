"""Multivariate trace estimation with constant-depth circuits, simulated classically.

The estimator prepares a GHZ control register with mid-circuit measurements and
parity feedback, applies a two-layer controlled cyclic shift to ``m`` registers
and reads the controls in the X basis.  Exact oracles, polynomial functionals,
Schatten distances and a 2D grid schedule are included.

Qubit 0 is the least significant bit of every amplitude index.
"""

from .circuit import (
    CNOT,
    CSWAP,
    H,
    X,
    ConditionalX,
    Measure,
    Operation,
    QuantumCircuit,
    Reset,
    Sdg,
    append_moment,
    parse_circuit,
    quantum_depth,
    simulate,
)
from .cyclic_shift import adjoin_order, apply_permutation_matrix, build_controlled_shift, decompose_cycle
from .errors import MultitraceError, SimulationError, ValidationError
from .estimator import (
    EstimationRequest,
    TraceEstimate,
    build_estimation_circuit,
    estimate_trace,
    hoeffding_shots,
    run_shot_parity,
    theoretical_variance,
)
from .functionals import (
    SeriesSpec,
    binomial_coeffs,
    bivariate_trace,
    check_data_processing,
    estimate_poly_trace,
    exp_coeffs,
    k_alpha,
    log1p_coeffs,
    q_alpha,
    schatten_distance,
)
from .ghz import build_method1, build_method2, verify_ghz
from .grid import build_grid_estimation, layout, render_schedule, schedule
from .linalg import (
    DensityMatrix,
    random_density_matrix,
    spectral_decompose,
    validate_density_matrix,
)
from .oracle import control_distribution, multivariate_trace, permutation_trace
from .rng import RngStream
from .statevector import (
    StateVector,
    apply_conditional_x,
    apply_gate,
    measure_qubit,
    reset_qubit,
)

__version__ = "0.1.0"
