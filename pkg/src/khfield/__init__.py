"""Transient exterior acoustic fields from sampled sphere-surface data.

Surface pressure (and its normal derivative) sampled on a Lebedev grid
is propagated to exterior field points through precomputed advanced-time
matrices: spherical-harmonic interpolation supplies ring integrals in a
rotated frame, Lagrange stencils place each contribution on the output
time grid, and the whole pipeline collapses to a handful of matrix
products per snapshot.
"""

from .geometry import FieldPoint, RotatedFrame, SurfaceFrame, rotated_frame
from .harmonics import (
    AnalysisMatrix,
    BandLimit,
    build_analysis_matrix,
    eval_vector,
    interpolation_weights,
)
from .operator import (
    PropagationOperator,
    assemble,
    kernel_matrices,
    load_operator,
    operator_bytes,
    operator_from_bytes,
    save_operator,
)
from .oracle import (
    GaussianCosine,
    PointSource,
    RampedCosine,
    SourceEnsemble,
    direct_field,
    direct_series,
    random_ensemble,
    surface_data,
)
from .propagate import (
    FieldSeries,
    StreamingAccumulator,
    SurfaceSnapshot,
    error_metric,
    run,
    step,
)
from .quadrature import (
    AzimuthGrid,
    ElevationRule,
    LebedevRule,
    azimuth_grid,
    gauss_legendre_elevation,
    lebedev_rule,
    lebedev_sizes,
    rule_for_band,
)
from .timeweights import (
    DelayBinning,
    StencilWeights,
    bin_delay,
    lagrange_weights,
    scatter_weights,
)

__version__ = "0.1.0"

__all__ = [
    "AnalysisMatrix",
    "AzimuthGrid",
    "BandLimit",
    "DelayBinning",
    "ElevationRule",
    "FieldPoint",
    "FieldSeries",
    "GaussianCosine",
    "LebedevRule",
    "PointSource",
    "PropagationOperator",
    "RampedCosine",
    "RotatedFrame",
    "SourceEnsemble",
    "StencilWeights",
    "StreamingAccumulator",
    "SurfaceFrame",
    "SurfaceSnapshot",
    "assemble",
    "azimuth_grid",
    "bin_delay",
    "build_analysis_matrix",
    "direct_field",
    "direct_series",
    "error_metric",
    "eval_vector",
    "gauss_legendre_elevation",
    "interpolation_weights",
    "kernel_matrices",
    "lagrange_weights",
    "lebedev_rule",
    "lebedev_sizes",
    "load_operator",
    "operator_bytes",
    "operator_from_bytes",
    "random_ensemble",
    "rotated_frame",
    "rule_for_band",
    "run",
    "save_operator",
    "scatter_weights",
    "step",
    "surface_data",
    "__version__",
]
