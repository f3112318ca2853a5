"""Generalized Besov-type and Triebel-Lizorkin-type norms on periodic grids."""

from .errors import (
    ArgumentError,
    BesovkitError,
    ConstructionError,
    DecompositionError,
    DomainError,
    PreconditionError,
    RangeError,
)
from .lattice import DyadicCube, FieldSequence, SampledField, TorusGrid, read_ffld, write_ffld
from .phi import PhiSpec, catalog, check_epsilon_condition, check_gp_membership, check_integral_condition
from .analysis import ResolutionOfUnity, blocks, build_resolution, hl_maximal, lift, lp_block, peetre_maximal
from .spaces import (
    CoefficientSequence,
    NormResult,
    SpaceParams,
    besov_norm,
    lambda_star,
    lp_phi_norm,
    seq_b_norm,
    seq_f_norm,
    space_norm,
    tl_norm,
)
from .atoms import AtomSpec, analyze_calderon, calderon_pair, decompose_atomic, make_atom, synthesize, validate_atom

__version__ = "0.1.0"
