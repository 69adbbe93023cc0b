"""LOD splitting with a fitted finite-volume scheme for the Hull-White PDE."""

from .analysis import Region, convergence_rate, grid_norms, run_convergence_study
from .bs1d import BoundaryProfiles, Bs1dProblem, make_boundary_profiles, solve_bs1d
from .lod2d import Field2D, LodConfig, LodScheme, Problem, SolveRecord, SolverError, solve
from .mesh import Axis, Grid2D, SinhOrigin, SinhStrike, Uniform, build_axis
from .model import (
    Butterfly,
    BullishSpread,
    CashOrNothing,
    DomainBox,
    MarketParams,
    Ramp,
    TableLookup,
    evaluate_payoff,
    manufactured_case,
    natural_boundary_y0,
)
from .tridiag import TridiagonalSystem, check_m_matrix, thomas_solve

__version__ = "0.1.0"
