"""Atom-number state preparation by sudden 1D trap reduction.

Bound-state spectra of smooth traps (finite differences, Sturm bisection
plus inverse iteration) and the full counting statistics of the atoms that
remain after an abrupt reduction of the trap, for strongly repulsive 1D
bosons or spin-polarized free fermions.  Units: hbar^2/2m = 1.
"""

from ._backend import BACKEND, HAVE_COMPILED
from .counting import (
    CountingStatistics,
    KernelMatrix,
    OverlapMatrix,
    characteristic_function,
    cumulants,
    fock_condition,
    kernel_matrix,
    mean_number,
    number_distribution,
    overlap_matrix,
    poisson_binomial_oracle,
    variance_number,
)
from .exceptions import (
    ConfigError,
    ConvergenceError,
    FockprepError,
    GridMismatchError,
    NumericsError,
)
from .experiments import (
    OccupationSpec,
    ReductionScenario,
    ScenarioResult,
    SweepResult,
    SweepRow,
    capacity_vs_smoothness,
    recipe,
    run_scenario,
    solve_temperature,
    sweep_width_ratio,
    temperature_sweep,
)
from .occupations import (
    OccupationState,
    density_profile,
    ground_state_occupation,
    thermal_occupation,
    tonks_ratio,
)
from .solver import (
    BoundSpectrum,
    GridPolicy,
    TridiagonalHamiltonian,
    auto_grid,
    calibrate_family_depth,
    capacity,
    common_grid,
    discretize,
    resolution_shift,
    solve_bound_states,
    solve_trap,
    solve_trap_pinned,
)
from .traps import (
    Grid,
    TrapShape,
    TrapSpec,
    dimensionless_depth,
    energy_unit,
    evaluate_potential,
    family_member,
)

__version__ = "0.1.0"
