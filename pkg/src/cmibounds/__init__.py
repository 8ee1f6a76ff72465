"""Information-theoretic generalization bounds on partitioned leave-m-out supersamples."""

from .bernoulli_exact import (
    BernoulliInstance,
    InfoKind,
    bernoulli_bound,
    dis_info_quantity,
    info_quantity,
    true_gen_error,
)
from .bound_catalog import (
    BoundKind,
    BoundValue,
    assemble,
    assemble_disintegrated,
    coefficient,
    coefficient_C,
    js_population_bound,
    lambda_optimize,
)
from .gaussian_mc import (
    GaussianInstance,
    McConfig,
    finite_w_bound,
    gaussian_imi_closed,
    general_bound_mc,
)
from .info_measures import (
    InfoQuantity,
    binary_entropy,
    d_gamma,
    d_js,
    d_js_inverse,
    d_kl_binary,
)
from .oracle import TinyInstance, enumerate_joint, info_query, theorem12_check
from .supersample import (
    MembershipDraw,
    PartitionConfig,
    cv_error,
    divisor_set,
    sample_membership,
)

__all__ = [
    "BernoulliInstance",
    "BoundKind",
    "BoundValue",
    "GaussianInstance",
    "InfoKind",
    "InfoQuantity",
    "McConfig",
    "MembershipDraw",
    "PartitionConfig",
    "TinyInstance",
    "assemble",
    "assemble_disintegrated",
    "bernoulli_bound",
    "binary_entropy",
    "coefficient",
    "coefficient_C",
    "cv_error",
    "d_gamma",
    "d_js",
    "d_js_inverse",
    "d_kl_binary",
    "dis_info_quantity",
    "divisor_set",
    "enumerate_joint",
    "finite_w_bound",
    "gaussian_imi_closed",
    "general_bound_mc",
    "info_quantity",
    "info_query",
    "js_population_bound",
    "lambda_optimize",
    "sample_membership",
    "theorem12_check",
    "true_gen_error",
]
