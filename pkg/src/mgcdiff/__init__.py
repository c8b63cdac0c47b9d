"""Diffusion geometry of measure-based Gaussian correlation kernels.

Closed-form kernels, stationary densities and diffusion distances under a
Gaussian-mixture measure, an explicit Taylor feature embedding with certified
truncation bounds, and quadrature oracles for validation.
"""
from .bounds import (
    TruncationBudget,
    bound_eta,
    bound_gb1,
    bound_gb2,
    certify_pair_error,
    lagrange_remainder,
    select_truncation,
    trp_assemble,
    worst_case_norms,
)
from .errors import (
    BoundViolationError,
    DegenerateComponentError,
    DimensionCapError,
    MgcError,
    NegligibleMassError,
    NotPositiveDefiniteError,
    NumericalError,
    TiedCovarianceRequired,
    TruncationNotFound,
    ValidationError,
)
from .features import (
    FeatureEmbedding,
    FeatureVector,
    embed,
    embed_batch,
    embedded_distance,
    embedding_dim,
    taylor_feature_map,
)
from .gaussian import GaussianParams, gaussian_correlation, gaussian_logpdf, gaussian_pdf, gaussian_product
from .gmm import GmmModel, gmm_density, gmm_fit_em, gmm_load, gmm_sample, gmm_store
from .kernel import (
    MgcContext,
    context_new,
    diffusion_distance,
    inner_product_w,
    pairwise_diffusion_distances,
    stationary_density,
    transition,
)
from .trp import TrpProblem, TrpSolution, check_kkt, trp_solve

__version__ = "0.1.0"
