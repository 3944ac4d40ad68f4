"""Optimal guessing strategies in a three-card quantum guessing game.

Alice holds one of three non-orthogonal qubit cards and Bob the other two;
both try to name Alice's card. The package evaluates Alice's single-qubit
strategies, Bob's card-by-card and joint measurements, and checks every
closed form against exact enumeration and seeded simulation.
"""

from .alice import AliceStrategy, optimize_alice
from .bob_collective import CoefficientSet, GuessChoice, optimize_collective, optimize_full_frame, success_combined
from .bob_separate import SequentialProtocol, enumerate_sequential, paper_formulas
from .engine import SimulationConfig, StrategySpec, exact_success, simulate
from .tolerances import TOL

__all__ = [
    "AliceStrategy",
    "CoefficientSet",
    "GuessChoice",
    "SequentialProtocol",
    "SimulationConfig",
    "StrategySpec",
    "TOL",
    "enumerate_sequential",
    "exact_success",
    "optimize_alice",
    "optimize_collective",
    "optimize_full_frame",
    "paper_formulas",
    "simulate",
    "success_combined",
]
