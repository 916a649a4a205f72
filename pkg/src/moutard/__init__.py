"""Moutard-type transformations of the axially symmetric Schrodinger equation.

The library works on sampled complex fields over an annular (r, theta) grid:

* :mod:`moutard.grid`: grids, fields, fourth-order differences, the
  Schrodinger operator and interior norms;
* :mod:`moutard.special`: Legendre polynomials and half-integer Bessel
  functions (numpy only);
* :mod:`moutard.transform`: single and twofold transformations, one-forms and
  their path integration;
* :mod:`moutard.catalog`: closed-form potentials and solutions;
* :mod:`moutard.verify`: residual ladders, pipeline checks and field I/O.
"""
from .catalog import ClosedForm, FamilySpec, f_closed, pair, potential, seeds, solution
from .errors import (
    ConstraintError,
    DomainBoundsError,
    EmptyMaskError,
    GridMismatchError,
    GridSizeError,
    InexactFormError,
    MoutardError,
    NearZeroError,
    NonFiniteValueError,
    SpecialFunctionDomainError,
    UnknownFamilyError,
)
from .grid import (
    AnnularGrid,
    InteriorMask,
    Norms,
    ScalarField,
    apply_schrodinger,
    constant,
    coordinates,
    differentiate,
    divide,
    make_grid,
    norms,
    sample,
)
from .special import (
    bessel_half_j,
    bessel_half_y,
    legendre_p,
    seed_bessel_solution,
    spherical_jn,
    spherical_yn,
)
from .transform import (
    OneForm,
    PathIntegrationPlan,
    integrate_both_paths,
    integrate_one_form,
    pair_one_form,
    single_potential,
    solution_one_form,
    transform_solution,
    twofold_potential,
    twofold_solutions,
)
from .verify import ResidualReport, RunConfig, emit_fields, read_fields, run_transform, run_verify

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
