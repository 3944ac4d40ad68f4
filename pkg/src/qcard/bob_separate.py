"""Bob measures his two cards one at a time.

The first card is measured like Alice's (strategy 1 at pi/12 by default). The
second card goes through the optimal two-state discriminator for the pair of
labels not guessed first. Alice's card is inferred as the remaining label.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from . import alice
from .game import LABELS, all_deals, card_states, check_label, infer_alice
from .linalg import Ket, inner
from .report import StrategyReport

SQRT3 = math.sqrt(3.0)

P1 = (2 + SQRT3) / 6
P2 = (2 + SQRT3) / 4
P12 = (7 + 4 * SQRT3) / 24
P21 = (4 - SQRT3) / 24
P_SEPARATE = (11 + 3 * SQRT3) / 24

UNIFORM3 = np.full(3, 1.0 / 3.0)


def _delta(label: int) -> np.ndarray:
    v = np.zeros(3)
    v[check_label(label) - 1] = 1.0
    return v


def helstrom_pair(u: Ket, v: Ket, prior_u: float = 0.5) -> float:
    """Optimal probability of correctly telling ``u`` from ``v`` in one shot."""
    if not (u.is_normalized and v.is_normalized):
        raise ValueError("helstrom_pair requires normalized states")
    if u.dim != 2 or v.dim != 2:
        raise ValueError("helstrom_pair is defined for single-qubit states")
    if not 0.0 <= prior_u <= 1.0:
        raise ValueError(f"prior must lie in [0, 1], got {prior_u}")
    # 1 - |<u|v>|^2 equals |det[u v]|^2 for qubits; using the determinant avoids
    # cancellation when the states nearly coincide.
    a, b = u.amplitudes, v.amplitudes
    cross2 = abs(a[0] * b[1] - a[1] * b[0]) ** 2
    q = prior_u * (1.0 - prior_u)
    disc = (2.0 * prior_u - 1.0) ** 2 + 4.0 * q * cross2
    return (1.0 + math.sqrt(disc)) / 2.0


def helstrom_measurement(u: Ket, v: Ket, prior_u: float = 0.5) -> tuple[Ket, Ket]:
    """Projective pair (toward ``u``, toward ``v``) attaining the two-state optimum.

    Eigenvectors of ``prior_u |u><u| - (1 - prior_u) |v><v|``: the positive
    one signals ``u``.
    """
    d = prior_u * np.outer(u.amplitudes, u.amplitudes.conj()) - (1 - prior_u) * np.outer(
        v.amplitudes, v.amplitudes.conj()
    )
    _, vecs = np.linalg.eigh(d)
    return Ket(vecs[:, 1]), Ket(vecs[:, 0])


@dataclass(frozen=True)
class FirstStage:
    """How Bob's first card is turned into a guess of its label.

    ``kind`` is ``"measure"`` (projective measurement at ``alpha`` with
    ``up_guess``/``down_guess``), ``"random"`` (uniform label) or
    ``"oracle"`` (the true label, a classical cheat used for cross-checks).
    """

    kind: str = "measure"
    alpha: float = math.pi / 12
    up_guess: int = 1
    down_guess: int = 3

    def __post_init__(self):
        if self.kind not in ("measure", "random", "oracle"):
            raise ValueError(f"unknown first-stage kind {self.kind!r}")
        if self.kind == "measure":
            alice.check_angle(self.alpha)
            check_label(self.up_guess)
            check_label(self.down_guess)

    def branches(self, card: int) -> list[tuple[float, np.ndarray]]:
        """(Born probability, guess distribution) for each outcome on ``card``."""
        if self.kind == "random":
            return [(1.0, UNIFORM3.copy())]
        if self.kind == "oracle":
            return [(1.0, _delta(card))]
        up, down = alice.measurement_kets(self.alpha)
        psi = card_states()[card]
        return [
            (abs(inner(up, psi)) ** 2, _delta(self.up_guess)),
            (abs(inner(down, psi)) ** 2, _delta(self.down_guess)),
        ]


@dataclass(frozen=True)
class SecondStage:
    """``"helstrom"`` discriminates the two labels other than the first guess; ``"random"`` guesses uniformly."""

    kind: str = "helstrom"

    def __post_init__(self):
        if self.kind not in ("helstrom", "random"):
            raise ValueError(f"unknown second-stage kind {self.kind!r}")

    def branches(self, card: int, first_guess: int) -> list[tuple[float, np.ndarray]]:
        if self.kind == "random":
            return [(1.0, UNIFORM3.copy())]
        x, y = [lab for lab in LABELS if lab != first_guess]
        cards = card_states()
        to_x, to_y = helstrom_measurement(cards[x], cards[y])
        psi = cards[card]
        return [
            (abs(inner(to_x, psi)) ** 2, _delta(x)),
            (abs(inner(to_y, psi)) ** 2, _delta(y)),
        ]


def final_guess(first_guess: int, second_guess: int) -> np.ndarray:
    """Distribution of Bob's answer for Alice's card.

    Colliding guesses fall back to a uniform choice between the other two labels.
    """
    if first_guess == second_guess:
        v = np.full(3, 0.5)
        v[first_guess - 1] = 0.0
        return v
    return _delta(infer_alice(first_guess, second_guess))


@dataclass(frozen=True)
class SequentialProtocol:
    first: FirstStage = field(default_factory=FirstStage)
    second: SecondStage = field(default_factory=SecondStage)

    def branches(self, bob_first: int, bob_second: int) -> list[tuple[float, np.ndarray]]:
        """Flattened (probability, answer distribution) table over both measurements' outcomes."""
        out = []
        for p1, g1_dist in self.first.branches(bob_first):
            for g1 in _support(g1_dist):
                w1 = p1 * g1_dist[g1 - 1]
                for p2, g2_dist in self.second.branches(bob_second, g1):
                    answer = sum(g2_dist[g2 - 1] * final_guess(g1, g2) for g2 in _support(g2_dist))
                    out.append((w1 * p2, answer))
        return out


def _support(dist: np.ndarray) -> Iterator[int]:
    return (lab for lab in LABELS if dist[lab - 1] > 0.0)


def enumerate_sequential(protocol: SequentialProtocol | None = None) -> float:
    """Exact success probability by summing every deal and every measurement outcome.

    Born probabilities are taken per deal for the actual first and second
    cards, so nothing is assumed about independence between the two stages.
    """
    protocol = protocol or SequentialProtocol()
    total = 0.0
    for deal in all_deals():
        for p1, g1_dist in protocol.first.branches(deal.bob_first):
            for g1 in LABELS:
                w1 = float(deal.probability) * p1 * g1_dist[g1 - 1]
                if w1 == 0.0:
                    continue
                for p2, g2_dist in protocol.second.branches(deal.bob_second, g1):
                    for g2 in LABELS:
                        w2 = w1 * p2 * g2_dist[g2 - 1]
                        if w2 == 0.0:
                            continue
                        total += w2 * final_guess(g1, g2)[deal.alice - 1]
    return total


@dataclass(frozen=True)
class SeparateReport:
    p1: float
    p2: float
    p12: float
    p21: float
    p_sep: float
    enumeration_p_sep: float | None = None

    @property
    def discrepancy(self) -> float | None:
        if self.enumeration_p_sep is None:
            return None
        return self.enumeration_p_sep - self.p_sep


def paper_formulas() -> SeparateReport:
    """Closed-form stage probabilities for the one-card-at-a-time strategy."""
    p1 = alice.success_probability(math.pi / 12, alice.AliceStrategy.FIRST)
    p2 = helstrom_pair(card_states()[2], card_states()[3], 0.5)
    p12 = p1 * p2
    p21 = (1 - p1) * 0.5 * 0.5
    return SeparateReport(p1=p1, p2=p2, p12=p12, p21=p21, p_sep=p12 + p21)


def separate_report(protocol: SequentialProtocol | None = None) -> SeparateReport:
    formulas = paper_formulas()
    return SeparateReport(
        p1=formulas.p1,
        p2=formulas.p2,
        p12=formulas.p12,
        p21=formulas.p21,
        p_sep=formulas.p_sep,
        enumeration_p_sep=enumerate_sequential(protocol),
    )


def evaluate(protocol: SequentialProtocol | None = None) -> StrategyReport:
    protocol = protocol or SequentialProtocol()
    report = separate_report(protocol)
    return StrategyReport(
        probability=report.enumeration_p_sep,
        method="enumeration",
        parameters={"first": protocol.first.kind, "alpha": protocol.first.alpha, "second": protocol.second.kind},
        diagnostics={"closed_form": report.p_sep, "discrepancy": report.discrepancy},
    )


def optimize_first_angle(grid_step: float = 1e-3, tol: float = 1e-10) -> tuple[float, float]:
    """Best first-stage angle for strategy-1 guessing with a discriminating second stage."""

    def value(a: float) -> float:
        return enumerate_sequential(SequentialProtocol(FirstStage(alpha=a)))

    grid = np.arange(grid_step, alice.ALPHA_MAX + 1e-15, grid_step)
    values = np.array([value(a) for a in grid])
    i = int(np.argmax(values))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    a = alice.golden_section_max(value, float(lo), float(hi), tol)
    return (a, value(a)) if value(a) >= values[i] else (float(grid[i]), float(values[i]))
