"""maxheat: 2-D time-domain microwave heating with a nonlocal thermal coupling.

The electromagnetic energy integrated over the whole domain drives the
heat equation, and the temperature feeds back through the conductivity
damping the fields.  The package provides the staggered-grid leapfrog
Maxwell solver, the backward Euler heat solver, monolithic and Picard
coupled drivers, independent reference solutions, and a command line
front end (``maxheat``).
"""

__version__ = "0.1.0"

from .coupled import (
    CoupledConfig,
    CoupledRunResult,
    GronwallBound,
    PicardReport,
    ProbeResult,
    continuity_probe,
    gronwall_bound,
    picard_T,
    picard_run,
    run_coupled,
    run_monolithic,
)
from .domain import Domain, build_domain, integrate_faces, integrate_nodal
from .errors import ConfigError, MaxheatError, NonConvergenceError, NumericsError
from .heat_solver import HeatStepParams, heat_step, laplacian_apply, solve_heat_trajectory
from .materials import (
    AffineClampedConductivity,
    ConductivityModel,
    ConstantConductivity,
    PhysicalConstants,
    SourceG,
    TabulatedConductivity,
    sigma_field,
    validate_bounds,
)
from .maxwell_solver import (
    MaxwellStepParams,
    MaxwellRunResult,
    cfl_limit,
    check_cfl,
    dominant_frequency,
    maxwell_step,
    resolve_time_step,
    run_linear,
)
from .state import (
    EnergyTrajectory,
    FieldState,
    ThetaField,
    curl_B,
    curl_D,
    staggered_energy,
    total_energy,
)

__all__ = [
    "__version__",
    "AffineClampedConductivity", "ConductivityModel", "ConfigError",
    "ConstantConductivity", "CoupledConfig", "CoupledRunResult", "Domain",
    "EnergyTrajectory", "FieldState", "GronwallBound", "HeatStepParams",
    "MaxheatError", "MaxwellRunResult", "MaxwellStepParams",
    "NonConvergenceError", "NumericsError", "PhysicalConstants",
    "PicardReport", "ProbeResult", "SourceG", "TabulatedConductivity",
    "ThetaField", "build_domain", "cfl_limit", "check_cfl",
    "continuity_probe", "curl_B", "curl_D", "dominant_frequency",
    "gronwall_bound", "heat_step", "integrate_faces", "integrate_nodal",
    "laplacian_apply", "maxwell_step", "picard_T", "picard_run",
    "resolve_time_step", "run_coupled", "run_linear", "run_monolithic",
    "sigma_field", "solve_heat_trajectory", "staggered_energy",
    "total_energy", "validate_bounds",
]
