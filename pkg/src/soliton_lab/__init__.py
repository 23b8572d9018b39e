"""Numerical toolkit for radial conformally flat metrics and gradient rho-Einstein solitons."""

__version__ = "0.1.0"

from .errors import *  # noqa: E402,F401,F403
from .jet import Jet2, lift_const, lift_var  # noqa: E402
from .geometry import RadialProfile, Signature, scalar_curvature  # noqa: E402
from .families import ZeroCurvatureFamily, cylinder_profile, kazdan_negative_profile  # noqa: E402
from .soliton import SolitonParams, classify, lambda_profile, rigidity_scan  # noqa: E402
from .completeness import CompletenessCertificate, certify  # noqa: E402

__all__ = [
    "__version__",
    "Jet2",
    "lift_const",
    "lift_var",
    "RadialProfile",
    "Signature",
    "scalar_curvature",
    "ZeroCurvatureFamily",
    "cylinder_profile",
    "kazdan_negative_profile",
    "SolitonParams",
    "classify",
    "lambda_profile",
    "rigidity_scan",
    "CompletenessCertificate",
    "certify",
]
