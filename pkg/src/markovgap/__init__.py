"""L_p spectral gaps of Markov maps on finite-dimensional tracial algebras.

Markov maps (unital, completely positive, trace preserving) act on direct
sums of weighted matrix blocks. The package estimates ``c_p``, the norm of a
map on mean-zero elements of L_p, brackets it with closed-form transfer
bounds from the exact L_2 gap, checks the supporting operator inequalities
and compares Σ-norms of subalgebra pairs with L_p norms.
"""
from .algebra import (
    AlgebraElement,
    TracialAlgebra,
    commutative_algebra,
    dual_exponent,
    duality_map,
    embed_2x2,
    inner_product,
    matrix_algebra,
    mazur_map,
    schatten_norm,
    signed_power,
    trace,
)
from .bounds import (
    BoundReport,
    asymptotic_slope,
    check_ando,
    check_mazur_holder,
    check_pbig,
    check_psmall,
    check_pto2,
    forward_bound,
    reverse_bound,
)
from .channels import (
    MarkovMap,
    adjoint,
    apply,
    build_channel,
    choi_matrix,
    compose,
    depolarizing,
    kraus_channel,
    random_unitary_channel,
    schur_multiplier,
    stochastic_kernel,
    validate_markov,
)
from .estimators import FixedPointProjector, SigmaNormEquivalence, SpectralGapEstimator
from .exceptions import (
    ConfigError,
    DomainError,
    NumericalInstabilityError,
    StructureError,
    UnsupportedChannelError,
)
from .gap import GapEstimate, gap_l2, gap_lp, gap_lp_oracle
from .sigma import SigmaInstance, corollary_sweep, equivalence_ratio, sigma_norm
from .structure import (
    DilationCertificate,
    Subalgebra,
    build_dilation,
    conditional_expectation,
    fixed_point_algebra,
    intersection,
    verify_factorization,
)

__version__ = "0.1.0"
