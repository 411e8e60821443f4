"""Sonin kernel pairs, general fractional operators, and verification tools."""

from .errors import (
    AbscissaViolation,
    CoefficientConditionViolated,
    GridTooCoarse,
    MissingDerivative,
    NonConvergence,
    ParameterDomain,
    PoleError,
    PrecisionLoss,
    RadiusExceeded,
    SoninError,
    TailBoundExceeded,
    ZeroLeadingCoefficient,
)
from .series import (
    PowerSeries,
    SeriesPairCoefficients,
    cauchy_product,
    coeffs_binomial,
    coeffs_exp,
    coeffs_exp_binomial,
    gamma_scaled,
    identity_series,
    reciprocal_series,
    solve_sonin_triangular,
    sonin_system_residuals,
)
from .special import (
    SeriesEvalConfig,
    default_config,
    gamma_fn,
    horn_phi3,
    horn_xi2,
    kummer_1f1,
    ln_gamma,
    mittag_leffler2,
    phi3_general,
    pochhammer,
    prabhakar,
    wright,
    xi2_general,
)
from .catalog import (
    KernelSide,
    KernelSpec,
    KernelTerm,
    SampledFunction,
    SoninPair,
    eval_kernel,
    from_series_pair,
    make_kummer_pair,
    make_ml_sum_pair,
    make_phi3_pair,
    make_power_pair,
    make_prabhakar_pair,
    make_tempered_pair,
    make_wright_pair,
    make_xi2_pair,
    pair_from_spec,
)
from .engine import (
    GridFunction,
    JacobiRule,
    beta_mass,
    convolution_power,
    convolution_series_pair,
    convolve_grid_functions,
    convolve_pair_at,
    convolve_pair_direct,
    five_point_derivative,
    gauss_jacobi_rule,
    gfd_apply,
    gfd_regularized_apply,
    gfi_apply,
    make_sqrt_grid,
)
from .verify import (
    LaplaceCheckConfig,
    VerificationReport,
    check_inverse_laplace_horn,
    check_laplace_pair,
    check_left_inverse,
    check_sonin,
    check_sonin_grid,
    check_sonin_sides,
    laplace_transform_numeric,
)

__version__ = "0.1.0"
