"""Density estimation and Gaussian envelope certification for Wiener
functionals: coupling-weight sampling via smoothing-semigroup and
Clark-Ocone representations, nonparametric density reconstruction, and
certified Gaussian lower/upper envelopes, for additive Gaussian
functionals and SDEs driven by fractional Brownian motion."""

__version__ = "0.1.0"

from .density import (BoundCertificate, DensityEstimate, check_envelope,
                      exponential_density, gaussian_envelopes,
                      indicator_density, kde_density, nourdin_viens_density,
                      sandwich_envelopes)
from .engine import (FunctionalSamples, HElement, MehlerConfig, NestedConfig,
                     additive_samples, clark_ocone_coupling, coupling_additive,
                     coupling_sde, correction_additive, h_inner,
                     mehler_smoothed_density, sde_correction_bound, sde_samples)
from .gaussian_process import (CovarianceModel, PathSet, brownian_covariance,
                               custom_covariance, fbm_covariance,
                               fbm_covariance_model, sample_paths,
                               sigma_T_squared)
from .models import (AdditiveFunctionalModel, FbmSdeModel,
                     LinearFunctionalModel, make_preset, malliavin_profile,
                     sde_model_from_coeffs, solve_sde)
from .quadrature import (QuadratureRule, TimeGrid, jacobi_singular_integral,
                         laguerre_expectation, trapezoid, uniform_grid)
from .volterra import VolterraKernel, c_H_constant, fbm_from_bm

__all__ = [name for name in dir() if not name.startswith("_")]
