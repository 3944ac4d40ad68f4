"""Alice's single-card measurement, posteriors, guessing strategies and their optimization.

Alice measures along ``(cos a, sin a)`` with ``-pi/6 <= a <= pi/6``; the Z3
symmetry of the card ensemble makes every other direction redundant. She
always guesses card 1 on spin-up. On spin-down the three strategies guess card
3, card 2, or one of the two uniformly at random.
"""

from __future__ import annotations

import enum
import math
from typing import NamedTuple

import numpy as np

from .game import rho_A
from .linalg import Ket, projector
from .report import StrategyReport

ALPHA_MIN = -math.pi / 6
ALPHA_MAX = math.pi / 6
_SLACK = 1e-12

UP, DOWN = "up", "down"
OUTCOMES = (UP, DOWN)


class AngleError(ValueError):
    pass


class AliceStrategy(enum.IntEnum):
    FIRST = 1  # spin-down -> card 3
    SECOND = 2  # spin-down -> card 2
    THIRD = 3  # spin-down -> card 2 or 3 at random

    @classmethod
    def parse(cls, value) -> "AliceStrategy":
        if isinstance(value, cls):
            return value
        try:
            return cls(int(value))
        except (TypeError, ValueError):
            raise ValueError(f"unknown Alice strategy {value!r}; expected 1, 2 or 3") from None


_DOWN_GUESS = {
    AliceStrategy.FIRST: np.array([0.0, 0.0, 1.0]),
    AliceStrategy.SECOND: np.array([0.0, 1.0, 0.0]),
    AliceStrategy.THIRD: np.array([0.0, 0.5, 0.5]),
}
_UP_GUESS = np.array([1.0, 0.0, 0.0])


def check_angle(alpha):
    a = np.asarray(alpha, dtype=float)
    if np.any(~np.isfinite(a)) or np.any(a < ALPHA_MIN - _SLACK) or np.any(a > ALPHA_MAX + _SLACK):
        raise AngleError(f"alpha must lie in [-pi/6, pi/6], got {alpha!r}")
    return alpha


def measurement_kets(alpha: float) -> tuple[Ket, Ket]:
    """Spin-up and spin-down directions of Alice's Stern-Gerlach measurement."""
    check_angle(alpha)
    c, s = math.cos(alpha), math.sin(alpha)
    return Ket([c, s]), Ket([-s, c])


def outcome_probs(alpha: float) -> tuple[float, float]:
    up, _ = measurement_kets(alpha)
    p_up = float(np.real(np.trace(projector(up).entries @ rho_A().entries)))
    return p_up, 1.0 - p_up


def posterior(alpha, outcome: str) -> np.ndarray:
    """P(card i | outcome) for i = 1, 2, 3 (last axis), from the closed-form table."""
    check_angle(alpha)
    t = np.asarray(alpha, dtype=float)
    shifts = (0.0, -math.pi / 3, math.pi / 3)
    if outcome == UP:
        rows = [np.cos(t + d) ** 2 for d in shifts]
    elif outcome == DOWN:
        rows = [np.sin(t + d) ** 2 for d in shifts]
    else:
        raise ValueError(f"outcome must be 'up' or 'down', got {outcome!r}")
    return (2.0 / 3.0) * np.stack(rows, axis=-1)


def guess_distribution(strategy: AliceStrategy, outcome: str) -> np.ndarray:
    """Probability of guessing each card given the measurement outcome."""
    strategy = AliceStrategy.parse(strategy)
    if outcome == UP:
        return _UP_GUESS.copy()
    if outcome == DOWN:
        return _DOWN_GUESS[strategy].copy()
    raise ValueError(f"outcome must be 'up' or 'down', got {outcome!r}")


def strategy_domain(strategy: AliceStrategy) -> tuple[float, float]:
    """Closed interval hull of the angles a strategy is defined on.

    Strategy 1 excludes 0 and strategy 2 excludes 0; strategy 3 is the point 0.
    """
    strategy = AliceStrategy.parse(strategy)
    if strategy is AliceStrategy.FIRST:
        return 0.0, ALPHA_MAX
    if strategy is AliceStrategy.SECOND:
        return ALPHA_MIN, 0.0
    return 0.0, 0.0


def in_domain(alpha: float, strategy: AliceStrategy) -> bool:
    strategy = AliceStrategy.parse(strategy)
    if strategy is AliceStrategy.FIRST:
        return 0.0 < alpha <= ALPHA_MAX + _SLACK
    if strategy is AliceStrategy.SECOND:
        return ALPHA_MIN - _SLACK <= alpha < 0.0
    return alpha == 0.0


def success_probability(alpha, strategy: AliceStrategy):
    check_angle(alpha)
    strategy = AliceStrategy.parse(strategy)
    a = np.asarray(alpha, dtype=float)
    third = math.pi / 3
    if strategy is AliceStrategy.FIRST:
        p = (np.cos(a) ** 2 + np.sin(a + third) ** 2) / 3
    elif strategy is AliceStrategy.SECOND:
        p = (np.cos(a) ** 2 + np.sin(a - third) ** 2) / 3
    else:
        p = (np.cos(a) ** 2 + 0.5 * (np.sin(a + third) ** 2 + np.sin(a - third) ** 2)) / 3
    return float(p) if p.ndim == 0 else p


def evaluate(alpha: float, strategy: AliceStrategy) -> StrategyReport:
    strategy = AliceStrategy.parse(strategy)
    return StrategyReport(
        probability=success_probability(alpha, strategy),
        method="closed-form",
        parameters={"alpha": float(alpha), "strategy": int(strategy)},
        diagnostics={"in_domain": in_domain(alpha, strategy)},
    )


def _binary_entropy(p):
    p = np.clip(np.asarray(p, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -(np.where(p > 0, p * np.log2(p), 0.0) + np.where(p < 1, (1 - p) * np.log2(1 - p), 0.0))
    return h


def shannon_entropy(alpha, strategy: AliceStrategy = AliceStrategy.FIRST):
    """Entropy (bits) of the success/failure variable, averaged over outcomes."""
    strategy = AliceStrategy.parse(strategy)
    total = 0.0
    for r, p_r in zip(OUTCOMES, (0.5, 0.5)):
        p_success = posterior(alpha, r) @ guess_distribution(strategy, r)
        total = total + p_r * _binary_entropy(p_success)
    return float(total) if np.ndim(total) == 0 else total


def _grid(strategy: AliceStrategy, step: float) -> np.ndarray:
    lo, hi = strategy_domain(strategy)
    if hi == lo:
        return np.array([lo])
    n = int(math.ceil((hi - lo) / step))
    grid = np.linspace(lo, hi, n + 1)
    if strategy is AliceStrategy.FIRST:
        grid = grid[1:]
    elif strategy is AliceStrategy.SECOND:
        grid = grid[:-1]
    return grid


def entropy_argmin(strategy: AliceStrategy = AliceStrategy.FIRST, grid_step: float = 1e-5) -> float:
    """Grid minimizer of ``shannon_entropy`` over the strategy's angle domain."""
    if grid_step <= 0:
        raise ValueError("grid_step must be positive")
    grid = _grid(AliceStrategy.parse(strategy), grid_step)
    return float(grid[np.argmin(shannon_entropy(grid, strategy))])


class AliceOptimum(NamedTuple):
    alpha: float
    probability: float


_INV_PHI = (math.sqrt(5) - 1) / 2


def golden_section_max(f, lo: float, hi: float, tol: float) -> float:
    """Maximizer of a unimodal ``f`` on [lo, hi] to within ``tol``."""
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return (a + b) / 2


def optimize_alice(
    strategy: AliceStrategy = AliceStrategy.FIRST,
    grid_step: float = 1e-3,
    refine_tol: float = 1e-10,
) -> AliceOptimum:
    """Dense grid over the strategy's domain, then golden-section refinement around the best node."""
    if grid_step <= 0 or refine_tol <= 0:
        raise ValueError("grid_step and refine_tol must be positive")
    strategy = AliceStrategy.parse(strategy)
    grid = _grid(strategy, grid_step)
    if grid.size == 0:
        raise ValueError(f"empty angle domain for strategy {int(strategy)}")
    values = success_probability(grid, strategy)
    values = np.atleast_1d(values)
    i = int(np.argmax(values))
    best_alpha, best_p = float(grid[i]), float(values[i])
    if grid.size > 1:
        lo = float(grid[max(i - 1, 0)])
        hi = float(grid[min(i + 1, grid.size - 1)])
        a = golden_section_max(lambda x: success_probability(x, strategy), lo, hi, refine_tol)
        p = success_probability(a, strategy)
        if p >= best_p:
            best_alpha, best_p = a, p
    return AliceOptimum(best_alpha, best_p)
