"""Hyperbolic curvature flow of closed planar curves by finite differences."""

from .config import PRESETS, RunConfig, get_preset, load_config
from .diagnostics import ConvergenceRow, DiagnosticsRecord, convergence_table, record_step
from .errors import (
    BeyondExtinction,
    BlowUpDetected,
    ConfigError,
    DegenerateSegment,
    ExtinctBefore,
    FlowError,
    HairpinSingularity,
    NotDiagonallyDominant,
    SingularSystem,
    StepSizeUnderflow,
)
from .grid import CurveGeometry, backward_difference, compute_geometry, norm_0h, norm_1h
from .model import (
    Circle,
    Dumbbell,
    Ellipse,
    FlowParams,
    PerturbedCircle,
    ReferenceFlow,
    circle_radius_exact_v0,
    circle_radius_ode,
    reference_solution,
)
from .runner import RunResult, run_flow
from .solver import SolverState, init_states, integrate_semidiscrete, step
from .tridiag import CyclicTridiagonalSystem, solve_cyclic_tridiagonal

__all__ = [name for name in dir() if not name.startswith("_")]
