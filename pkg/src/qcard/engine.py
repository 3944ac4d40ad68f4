"""Exact enumeration and seeded Monte Carlo play of the game for any actor's strategy.

Every strategy is reduced to a branch table: for each of the six deals, a list
of measurement records with their Born probabilities and the guess
distribution applied on that record. Exact evaluation credits randomized
guesses fractionally; simulation samples them.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any

import numpy as np

from . import alice as alice_mod
from . import bob_collective, bob_separate
from .game import all_deals, card_states, pair_ket
from .linalg import Ket, inner


class Actor(enum.Enum):
    ALICE = "alice"
    BOB_SEPARATE = "bob-separate"
    BOB_COLLECTIVE = "bob-collective"


@dataclass(frozen=True)
class StrategySpec:
    actor: Actor
    parameters: Any

    @classmethod
    def alice(cls, alpha: float = math.pi / 12, strategy=alice_mod.AliceStrategy.FIRST) -> "StrategySpec":
        alice_mod.check_angle(alpha)
        return cls(Actor.ALICE, (float(alpha), alice_mod.AliceStrategy.parse(strategy)))

    @classmethod
    def bob_separate(cls, protocol: bob_separate.SequentialProtocol | None = None) -> "StrategySpec":
        return cls(Actor.BOB_SEPARATE, protocol or bob_separate.SequentialProtocol())

    @classmethod
    def bob_collective(
        cls,
        coefficients: bob_collective.CoefficientSet | None = None,
        choice=bob_collective.GuessChoice.III,
    ) -> "StrategySpec":
        coefficients = coefficients or bob_collective.optimal_coefficients()
        return cls(Actor.BOB_COLLECTIVE, bob_collective.build_basis(coefficients, bob_collective.GuessChoice.parse(choice)))

    @classmethod
    def collective_basis(cls, basis: bob_collective.CollectiveBasis) -> "StrategySpec":
        return cls(Actor.BOB_COLLECTIVE, basis)

    @classmethod
    def uniform(cls) -> "StrategySpec":
        """Bob ignores his cards and names a uniformly random label."""
        frame = np.eye(4)
        guess = np.full((4, 3), 1.0 / 3.0)
        return cls(Actor.BOB_COLLECTIVE, bob_collective.CollectiveBasis(tuple(Ket(r) for r in frame), guess))


@dataclass(frozen=True, eq=False)
class BranchTable:
    """``probs[d, k]`` Born probability of record ``k`` on deal ``d``; ``guesses[d, k]`` its guess distribution."""

    probs: np.ndarray
    guesses: np.ndarray
    alice: np.ndarray


def _alice_branches(params, deal) -> list[tuple[float, np.ndarray]]:
    alpha, strategy = params
    up, down = alice_mod.measurement_kets(alpha)
    psi = card_states()[deal.alice]
    return [
        (abs(inner(up, psi)) ** 2, alice_mod.guess_distribution(strategy, alice_mod.UP)),
        (abs(inner(down, psi)) ** 2, alice_mod.guess_distribution(strategy, alice_mod.DOWN)),
    ]


def _collective_branches(basis: bob_collective.CollectiveBasis, deal) -> list[tuple[float, np.ndarray]]:
    pair = pair_ket(*deal.bob)
    return [(abs(inner(phi, pair)) ** 2, np.asarray(g, dtype=float)) for phi, g in zip(basis.phi, basis.guess_map)]


def branch_table(spec: StrategySpec) -> BranchTable:
    if spec.actor is Actor.ALICE:
        rows = [_alice_branches(spec.parameters, d) for d in all_deals()]
    elif spec.actor is Actor.BOB_SEPARATE:
        rows = [spec.parameters.branches(*d.bob) for d in all_deals()]
    elif spec.actor is Actor.BOB_COLLECTIVE:
        rows = [_collective_branches(spec.parameters, d) for d in all_deals()]
    else:
        raise ValueError(f"unknown actor {spec.actor!r}")
    width = max(len(r) for r in rows)
    probs = np.zeros((6, width))
    guesses = np.zeros((6, width, 3))
    guesses[:, :, :] = 1.0 / 3.0
    for d, row in enumerate(rows):
        for k, (p, g) in enumerate(row):
            probs[d, k] = p
            guesses[d, k] = g
    if np.any(probs < -1e-12) or np.max(np.abs(probs.sum(axis=1) - 1.0)) > 1e-9:
        raise ValueError("branch probabilities do not form a distribution on every deal")
    if np.max(np.abs(guesses.sum(axis=2) - 1.0)) > 1e-12:
        raise ValueError("guess rules must be probability distributions over the three cards")
    alice = np.array([d.alice - 1 for d in all_deals()])
    return BranchTable(np.clip(probs, 0.0, None), guesses, alice)


def exact_success(spec: StrategySpec) -> float:
    table = branch_table(spec)
    credit = table.guesses[np.arange(6), :, table.alice]
    deal_p = np.array([float(d.probability) for d in all_deals()])
    return float(deal_p @ np.sum(table.probs * credit, axis=1))


@dataclass(frozen=True)
class SimulationConfig:
    trials: int
    seed: int = 0
    shards: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if not 1 <= self.shards <= self.trials:
            raise ValueError("shards must lie between 1 and trials")


@dataclass(frozen=True)
class SimulationReport:
    estimate: float
    std_error: float
    trials: int
    successes: int
    exact_reference: float | None = None
    z_score: float | None = None


def shard_sizes(trials: int, shards: int) -> list[int]:
    base, extra = divmod(trials, shards)
    return [base + (1 if i < extra else 0) for i in range(shards)]


def shard_generator(seed: int, shard: int) -> np.random.Generator:
    """Independent Philox stream for one shard, keyed by (seed, shard index)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(shard,))))


def _run_shard(table: BranchTable, n: int, rng: np.random.Generator) -> int:
    deals = rng.integers(0, 6, size=n)
    u = rng.random(n)
    v = rng.random(n)
    cum = np.cumsum(table.probs, axis=1)
    width = cum.shape[1]
    branch = np.minimum((u[:, None] >= cum[deals]).sum(axis=1), width - 1)
    gcum = np.cumsum(table.guesses[deals, branch], axis=1)
    guess = np.minimum((v[:, None] >= gcum).sum(axis=1), 2)
    return int(np.count_nonzero(guess == table.alice[deals]))


def simulate(spec: StrategySpec, config: SimulationConfig, exact_reference: float | None = None) -> SimulationReport:
    """Play ``config.trials`` independent games; output depends only on (spec, config)."""
    table = branch_table(spec)
    sizes = shard_sizes(config.trials, config.shards)
    gens = [shard_generator(config.seed, i) for i in range(config.shards)]
    if config.shards == 1:
        counts = [_run_shard(table, sizes[0], gens[0])]
    else:
        with ThreadPoolExecutor() as pool:
            counts = list(pool.map(_run_shard, [table] * config.shards, sizes, gens))
    successes = sum(counts)
    estimate = successes / config.trials
    std_error = math.sqrt(estimate * (1.0 - estimate) / config.trials)
    if exact_reference is None:
        exact_reference = exact_success(spec)
    z = (estimate - exact_reference) / std_error if std_error > 0 else None
    return SimulationReport(estimate, std_error, config.trials, successes, exact_reference, z)
