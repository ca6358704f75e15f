"""Bayesian estimation of star-shaped boundaries in noisy images.

Typical use::

    from bayesbd import FitConfig, gibbs_binary, summarize
    chain = gibbs_binary(obs, FitConfig(nrun=4000, nburn=1000, sampler="slice"))
    summary = summarize(chain)          # posterior mean + 95% uniform band
"""
from .geometry import (PolarPoint, ReferencePoint, circle_boundary, ellipse_boundary, inside,
                       rect_to_polar, sampled_curve, triangle_boundary)
from .imageio import load_image, read_fit, read_observation, render_svg, write_fit, write_observation
from .kernel import (BoundaryCoefficients, basis, bessel_i_scaled, boundary_eval, eigenvalues,
                     kernel_value)
from .metrics import dsm_error, hausdorff_error, lebesgue_error
from .model import PolarObservation, mle_init, observation_from_xy
from .posterior import PosteriorSummary, membership_export, summarize
from .sampler import (FitConfig, Hyper, fit_chain, gibbs_binary, gibbs_gaussian, mh_univariate,
                      slice_univariate)
from .simulate import DesignSpec, gen_binary, gen_gaussian, sample_locations

__version__ = "0.1.0"
