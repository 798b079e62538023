"""Horizontal curves in step-2 Carnot groups.

Exact group arithmetic, horizontal lifting with closed-form signed
areas, frame normalization, C1 horizontal interpolation on gaps, a
Lusin-type smoothing pipeline for sampled horizontal curves, and
pushforward along graded homomorphisms onto general step-2 groups.
"""

from .group import (
    FreeGroupPoint,
    GeneralGroupPoint,
    HorizontalityCheck,
    Step2Structure,
    TangentVector,
    dL,
    general_horizontality_residual,
    general_identity,
    general_inverse,
    general_product,
    horizontal_field,
    horizontality_residual,
    inverse,
    is_horizontal,
    left_translate,
    pair_antisym,
    pair_index,
    product,
    vertical_dim,
    vertical_pairs,
)
from .quadrature import QuadratureError, adaptive_simpson
from .segments import (
    CircleLoopSegment,
    ConstantSegment,
    CosineBumpSegment,
    CubicSegment,
    LinearSegment,
    PetalLoopSegment,
    Segment,
    TransformedSegment,
)
from .curves import (
    CurveCheck,
    HorizontalCurve,
    PlanarCurve,
    SampledCurve,
    estimate_derivatives,
    horizontal_lift,
    is_horizontal_curve,
    sample_horizontal_curve,
    signed_area,
)

__version__ = "0.1.0"
