"""Convergence rates to the normal law in terms of truncated pseudomoments."""

from .bounds import (
    BoundReport,
    constants,
    corollary1_bound,
    remark1_bound,
    theorem1_bound,
    theorem2_bound,
)
from .dist_core import DensityPiece, DistributionSpec, cdf, cf, pdf, validate
from .example_dist import ExampleParams, build_example, solve_theta
from .inversion import EmpiricalReport, GridConfig, empirical_report, sup_cdf_distance, sup_pdf_distance
from .pseudomoments import PseudomomentReport, report

__all__ = [
    "BoundReport",
    "DensityPiece",
    "DistributionSpec",
    "EmpiricalReport",
    "ExampleParams",
    "GridConfig",
    "PseudomomentReport",
    "build_example",
    "cdf",
    "cf",
    "constants",
    "corollary1_bound",
    "empirical_report",
    "pdf",
    "remark1_bound",
    "report",
    "solve_theta",
    "sup_cdf_distance",
    "sup_pdf_distance",
    "theorem1_bound",
    "theorem2_bound",
    "validate",
]
__version__ = "0.1.0"
