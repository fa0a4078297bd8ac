"""Gradient-free optimization of nonsmooth convex and saddle problems over a
simulated federated architecture: smoothing-based gradient estimators, resource
planning, and deterministic distributed runners.
"""
from .estimators import (
    GradientSample,
    OperatorSample,
    SmoothingConfig,
    batch_grad,
    mc_smoothed_value,
    one_point_grad,
    saddle_operator_estimate,
    second_moment_estimate,
    two_point_grad,
    worst_case_bias_probe,
)
from .fedsim import (
    FedTopology,
    InfeasibleStartError,
    SmpState,
    StepPolicy,
    Trace,
    TraceRow,
    aggregate_round,
    product_simplex_radius,
    run_local_average_loop,
    run_minibatch_acc_sgd,
    run_minibatch_smp,
    run_single_machine_acc_sgd,
    run_single_machine_smp,
    smp_query_point,
    smp_step,
    smp_step_size,
)
from .planner import (
    ConfigurationError,
    FedPlan,
    ProblemConstants,
    grad_lipschitz,
    kappa,
    max_noise,
    plan,
    second_moment_ceiling,
    sigma_sq_bound,
    smoothing_gamma,
)
from .problems import (
    DomainError,
    NoiseModel,
    SaddleProblem,
    StochasticProblem,
    ZerothOrderOracle,
    brute_force_min,
    exact_gap,
    make_bilinear_game,
    make_simplex_test_problem,
    noisy_value,
    problem_from_json,
    problem_to_json,
)
from .vecspace import (
    DenseVector,
    FeasibleSet,
    Geometry,
    RngStream,
    as_vector,
    feasible_center,
    norm,
    project,
    prox_step,
    sample_ball,
    sample_sphere,
    sign_vector,
)

__version__ = "0.1.0"
