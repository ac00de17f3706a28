"""Energy-conserving SAV integrating-factor schemes for the 2-D cubic nonlinear Schrödinger wave equation."""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    GridMismatch,
    NonFinite,
    ReprMismatch,
    SavifError,
    SingularStageSystem,
    SolveDegenerate,
)
from .spectral import Field, Grid2D, Repr, make_grid
from .sav_core import ProblemParams, SavState, discrete_energy, init_state
from .experiments import Integrator, ManufacturedSolution

__all__ = [
    "ConfigError", "GridMismatch", "NonFinite", "ReprMismatch", "SavifError",
    "SingularStageSystem", "SolveDegenerate", "Field", "Grid2D", "Repr", "make_grid",
    "ProblemParams", "SavState", "discrete_energy", "init_state",
    "Integrator", "ManufacturedSolution", "__version__",
]
