"""Sample-based Schrodinger bridge sampler (C++ core)."""

from ._core import (
    DriftEvaluator,
    IoError,
    NumericFailure,
    ParseError,
    ReferenceSde,
    __version__,
    eight_gaussian_centers,
    energy_distance,
    make_eight_gaussians,
    make_moons,
    mode_coverage,
    sample,
    sigma_profile,
    w2_entropic,
    w2_exact,
    w2_subsampled,
)

__all__ = [
    "DriftEvaluator",
    "IoError",
    "NumericFailure",
    "ParseError",
    "ReferenceSde",
    "__version__",
    "eight_gaussian_centers",
    "energy_distance",
    "make_eight_gaussians",
    "make_moons",
    "mode_coverage",
    "sample",
    "sigma_profile",
    "w2_entropic",
    "w2_exact",
    "w2_subsampled",
]
