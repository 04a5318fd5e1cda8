"""Stable positive moments of one-side correlated Gram matrices and Laguerre density fits."""

__version__ = "0.1.0"

from .baseline import (  # noqa: E402
    VandermondeSystem,
    baseline_cdf,
    baseline_moment,
    baseline_pdf,
    build_vandermonde,
)
from .density import (  # noqa: E402
    DensityEvaluation,
    DensityModel,
    approx_cdf,
    approx_pdf,
    evaluate_density,
    expected_functional,
    fit_density,
    laguerre_eval,
)
from .exceptions import (  # noqa: E402
    DegenerateMomentsError,
    GramMomentsError,
    InstabilityWarning,
    MissingMomentError,
    MomentOverflowError,
    QuadratureError,
    SampleFormatError,
    SingularMatrixError,
    SpectrumError,
)
from .montecarlo import (  # noqa: E402
    EmpiricalSample,
    empirical_cdf,
    empirical_moment,
    ks_distance,
    load_sample,
    sample_eigenvalues,
    save_sample,
)
from .special import gamma_ratio_rising, log_gamma, regularized_lower_gamma  # noqa: E402
from .spectrum import (  # noqa: E402
    EnsembleConfig,
    Spectrum,
    exponential_spectrum,
    load_spectrum,
    validate_ensemble,
)
from .stable import (  # noqa: E402
    AlphaVector,
    MomentTable,
    MonicCoefficients,
    QuotientCoefficients,
    alpha_vector,
    monic_coefficients,
    solve_quotient,
    stable_moment,
    stable_moments_upto,
)
