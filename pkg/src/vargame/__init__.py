"""Reactive-power compensation game with prospect-theoretic framing."""

from vargame.power import (
    CustomerSpec,
    FPSettings,
    Reference,
    Scenario,
    ValidationReport,
    validate_scenario,
    var_compensation,
    var_required,
)
from vargame.game import UtilityTables, build_tables, expected_utility, pt_frame
from vargame.fp import EquilibriumResult, run_fp
from vargame.oracle import enumerate_pure_ne, solve_2x2_mixed, verify_epsilon_ne

__version__ = "0.1.0"

__all__ = [
    "CustomerSpec",
    "EquilibriumResult",
    "FPSettings",
    "Reference",
    "Scenario",
    "UtilityTables",
    "ValidationReport",
    "build_tables",
    "enumerate_pure_ne",
    "expected_utility",
    "pt_frame",
    "run_fp",
    "solve_2x2_mixed",
    "validate_scenario",
    "var_compensation",
    "var_required",
    "verify_epsilon_ne",
]
