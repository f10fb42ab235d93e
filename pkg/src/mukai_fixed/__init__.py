"""mukai-fixed: fixed loci of finite symplectic group actions on moduli of sheaves on surfaces."""

__version__ = "0.1.0"

from mukai_fixed.exceptions import (
    EnumerationError,
    GroupActionError,
    LatticeError,
    MukaiFixedError,
    ProblemFileError,
    SeriesError,
    StabilityError,
    ValidationError,
    VerificationError,
)
from mukai_fixed.group_action import Frameshape, GroupAction, Isometry
from mukai_fixed.lattice import Lattice, Sublattice
from mukai_fixed.moduli import EquivalenceData, FixedLocusReport
from mukai_fixed.problem import ProblemFile, load_fixture, load_problem
from mukai_fixed.runner import RunReport, TaskResult

__all__ = [
    "Lattice",
    "Sublattice",
    "Isometry",
    "GroupAction",
    "Frameshape",
    "EquivalenceData",
    "FixedLocusReport",
    "ProblemFile",
    "RunReport",
    "TaskResult",
    "load_fixture",
    "load_problem",
    "MukaiFixedError",
    "ValidationError",
    "ProblemFileError",
    "LatticeError",
    "GroupActionError",
    "SeriesError",
    "EnumerationError",
    "StabilityError",
    "VerificationError",
]
