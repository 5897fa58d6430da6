"""Exact Lipschitz constants of kernel feature maps.

Closed-form constants for random-neuron and shift-invariant kernels,
independent numerical oracles, and Monte-Carlo experiments on finite
random feature maps.
"""

from .analytic import (
    LipschitzReport,
    diagonal_curvature_oracle,
    hessian_lipschitz_oracle,
    nu_function,
    rnn_lipschitz,
    shift_invariant_lipschitz,
    upper_bound_cor31,
    variance_decomposition_check,
    wiener_divergence,
    wiener_kernel_truncated,
)
from .features import (
    RandomFeatureMap,
    build_feature_map,
    default_grid_1d,
    empirical_kernel,
    empirical_lipschitz,
    jacobian,
)
from .kernels import (
    ACTIVATIONS,
    Activation,
    BiasDistribution,
    ShiftInvariantKernel,
    WeightDistribution,
    gaussian_kernel,
    identity,
    kappa_eval,
    laplace_kernel,
    matern_kernel,
    relu,
    sample_weights,
    scaled_cosine,
    second_moment_status,
    tanh_activation,
)
from .experiments import (
    QuantileSweepConfig,
    SweepRow,
    kernel_convergence_sweep,
    quantile_sweep,
    write_sweep_csv,
)

__version__ = "0.1.0"
