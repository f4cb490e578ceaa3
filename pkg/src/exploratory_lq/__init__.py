"""Entropy-regularized exploratory linear-quadratic control laboratory.

Closed-form solvers for the regularized and classical LQ problems,
Euler-Maruyama simulation of the exploratory dynamics, exact-path and
moment oracles, and Monte Carlo value estimation that cross-validates
every closed form.
"""

from .closed_form import (
    ClassicalSolution,
    QuadraticValue,
    SweepPoint,
    classical_solution,
    exploration_cost,
    exploration_cost_decomposition,
    exploratory_solution,
    hjb_residual,
    k0_residual,
    k1_residual,
    k2_residual,
    lambda_sweep,
    policy_from_value,
    riccati_roots,
    softmax_density,
    solution_record,
    solve_k0,
    solve_k1,
    solve_k2,
    value_gap,
)
from .errors import (
    ConfigError,
    DegenerateLinearTermError,
    ExploratoryLqError,
    GridMismatchError,
    ModelValidationError,
    NoConcaveRootError,
    NonIntegrableDensityError,
    NumericalError,
    SimulationDivergedError,
    UnsupportedRegimeError,
)
from .model import (
    AffineGaussianPolicy,
    DerivedCoeffs,
    LqModel,
    Violation,
    assumption_bound,
    check_model,
    derived_coeffs,
    validate,
)
from .moments import (
    MomentCurves,
    admissibility_decay,
    classify_case,
    decay_exponent_from_riccati,
    discounted_second_moment,
    integrate_moment_ode,
    mean_curve,
    moment_curves,
    second_moment_curve,
)
from .policy_eval import (
    ValueEstimate,
    integrand_coefficients,
    mc_exploration_cost,
    mc_value,
    running_integrand,
    truncation_bound,
)
from .sde import (
    BrownianPath,
    DossSaussmanTransform,
    PathGrid,
    TrajectoryBatch,
    doss_saussman_path,
    endpoint_rms_error,
    exact_batch,
    exact_path_c0,
    exact_path_d0,
    simulate_classical,
    simulate_exploratory,
    strong_error,
)

__version__ = "0.1.0"
