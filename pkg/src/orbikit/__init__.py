"""Numerical Monge-Ampere on flat torus-quotient orbifolds, plus exact
Calabi-Yau orbifold combinatorics (elliptic signatures, weighted-projective
symmetry groups, reflexive-polytope mirror duality)."""

from .quotient import (
    GroupElement,
    OrbifoldError,
    OrbifoldSignature,
    PeriodData,
    QuotientTorusOrbifold,
    SpectralField,
    act,
    build_orbifold,
    constant_field,
    coordinate_grids,
    field_from_samples,
    fixed_point_data,
    integrate,
    project_invariant,
)
from .spectral import (
    complex_hessian,
    grad_sq,
    green_kernel_column,
    green_solve,
    laplacian,
    laplacian_wrt,
    poincare_constant,
    poincare_lambda,
    random_band_limited,
    sobolev_probe,
)
from .presets import orbifold_preset, orbifold_from_json

__version__ = "0.1.0"
