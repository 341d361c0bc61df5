"""Fourier-Bessel analysis on the positive orthant.

Transforms, generalized translation and convolution, scale-dilated
L2-multiplier operators, and numerical certificates for the associated
uncertainty inequalities.
"""

__version__ = "0.1.0"

from .bessel import normalized_bessel, normalized_bessel_reference, tensor_bessel
from .grids import (
    Alpha,
    AxisGrid,
    Box,
    Field,
    ScaleField,
    ScaleGrid,
    TensorGrid,
    build_axis_grid,
    integrate,
    integrate_scale,
    measure_of_set,
    norm,
    omega_norm,
)

__all__ = [
    "__version__",
    "normalized_bessel",
    "normalized_bessel_reference",
    "tensor_bessel",
    "Alpha",
    "AxisGrid",
    "Box",
    "Field",
    "ScaleField",
    "ScaleGrid",
    "TensorGrid",
    "build_axis_grid",
    "integrate",
    "integrate_scale",
    "measure_of_set",
    "norm",
    "omega_norm",
]
