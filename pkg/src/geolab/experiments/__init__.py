"""Simulation driver, initial conditions, budgets, rate fits and epsilon sweeps."""

from geolab.experiments.budget import EnergyBudget, energy_budget
from geolab.experiments.fitting import FitError, RateFit, fit_rate
from geolab.experiments.initial_conditions import INITIAL_CONDITIONS, build_initial_state
from geolab.experiments.simulation import Trajectory, build_solver, run_from_config, run_simulation
from geolab.experiments.studies import (
    hydrostatic_limit_study,
    relaxation_limit_study,
    sweep_from_preset,
)

__all__ = [
    "INITIAL_CONDITIONS",
    "EnergyBudget",
    "FitError",
    "RateFit",
    "Trajectory",
    "build_initial_state",
    "build_solver",
    "energy_budget",
    "fit_rate",
    "hydrostatic_limit_study",
    "relaxation_limit_study",
    "run_from_config",
    "run_simulation",
    "sweep_from_preset",
]
