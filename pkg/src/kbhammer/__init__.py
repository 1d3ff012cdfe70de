"""Kernel-based identification of Hammerstein systems.

The linear block's impulse response gets a stable-spline Gaussian prior;
the static nonlinearity, noise variance and kernel decay are fitted by
maximizing the marginal likelihood with EM.
"""

__version__ = "0.1.0"

from .baseline import BilinearEstimate, baseline_fit
from .datagen import ExperimentConfig, SystemSpec, random_polynomial, random_system, simulate
from .em import EmConfig, EmTrace, HammersteinEstimate, em_fit
from .errors import DatasetError, DimensionError, KBHError, NumericalError, ParameterDomainError
from .kernel import StableSplineKernel, build_kernel
from .metrics import FitReport, align_scale, fit_f, fit_g, normalize
from .nonlinearity import BasisSet, PolynomialBasis, apply_nonlinearity, build_regressor, polynomial_basis
from .posterior import HyperParameters, PosteriorMoments, marginal_neg_loglik, posterior_moments
from .structured import SignalRecord, ToeplitzSpec

__all__ = [
    "BasisSet", "BilinearEstimate", "DatasetError", "DimensionError", "EmConfig", "EmTrace",
    "ExperimentConfig", "FitReport", "HammersteinEstimate", "HyperParameters", "KBHError",
    "NumericalError", "ParameterDomainError", "PolynomialBasis", "PosteriorMoments",
    "SignalRecord", "StableSplineKernel", "SystemSpec", "ToeplitzSpec", "align_scale",
    "apply_nonlinearity", "baseline_fit", "build_kernel", "build_regressor", "em_fit", "fit_f",
    "fit_g", "marginal_neg_loglik", "normalize", "polynomial_basis", "posterior_moments", "random_polynomial",
    "random_system", "simulate",
]
