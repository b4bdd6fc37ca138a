"""Colour palette transfer by L2 registration of Gaussian-mixture colour
models, with a smooth parametric colour-space warp that can be stored,
interpolated, and applied in parallel."""

from .colors import (
    LAB,
    RGB,
    ImageBuffer,
    from_working,
    lab_to_rgb,
    load_image,
    rgb_to_lab,
    save_image,
    to_working,
)
from .clustering import (
    ClusterModel,
    CorrespondenceSet,
    downsample_for_clustering,
    kmeans,
    sample_correspondences,
)
from .gmm import IsotropicGmm, PairedGmms, cross_term, entropy_term, gaussian_scalar_product
from .warp import (
    ControlGrid,
    RbfKind,
    WarpParameters,
    basis_vector,
    eval_warp,
    identity_warp,
    interpolate,
    load_warp,
    pack_theta,
    rbf_eval,
    save_warp,
    unpack_theta,
)
from .estimator import (
    MODE_CORR,
    MODE_NOCORR,
    CostBreakdown,
    EstimationConfig,
    cost,
    cost_gradient,
    default_parameters,
    estimate_theta,
    roughness,
)
from .recolor import MixMask, apply, apply_dissolve, apply_mixed, load_mask, recolor_image
from .metrics import MetricReport, psnr, report, ssim

__version__ = "0.1.0"
