"""The three-card ensemble, the six deals and the associated density operators."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations

import numpy as np

from .linalg import Ket, Operator, kron, partial_trace, projector, tensor

LABELS = (1, 2, 3)
SQRT3 = np.sqrt(3.0)


def check_label(label: int) -> int:
    if label not in LABELS:
        raise ValueError(f"card label must be one of {LABELS}, got {label!r}")
    return int(label)


@dataclass(frozen=True, eq=False)
class CardTriple:
    states: tuple[Ket, Ket, Ket]

    def __getitem__(self, label: int) -> Ket:
        """Card state by 1-based label."""
        return self.states[check_label(label) - 1]

    def __iter__(self):
        return iter(self.states)

    def matrix(self) -> np.ndarray:
        """Real 3x2 array whose row ``i - 1`` is card ``i``."""
        return np.array([s.real() for s in self.states])


@dataclass(frozen=True, order=True)
class Deal:
    alice: int
    bob_first: int
    bob_second: int
    probability: Fraction = Fraction(1, 6)

    def __post_init__(self):
        labels = (self.alice, self.bob_first, self.bob_second)
        if sorted(labels) != list(LABELS):
            raise ValueError(f"deal labels must be a permutation of {LABELS}, got {labels}")

    @property
    def bob(self) -> tuple[int, int]:
        return (self.bob_first, self.bob_second)


@lru_cache(maxsize=None)
def card_states() -> CardTriple:
    return CardTriple(
        (
            Ket([1.0, 0.0]),
            Ket([0.5, SQRT3 / 2]),
            Ket([-0.5, SQRT3 / 2]),
        )
    )


@lru_cache(maxsize=None)
def all_deals() -> tuple[Deal, ...]:
    """All six ordered deals, sorted by (alice, bob_first)."""
    return tuple(sorted(Deal(a, b1, b2) for a, b1, b2 in permutations(LABELS)))


def pair_ket(first: int, second: int) -> Ket:
    """Bob's two-card state |psi_first psi_second>."""
    cards = card_states()
    return tensor(cards[first], cards[second])


def deal_kets() -> np.ndarray:
    """Real 6x4 array of Bob's pair states, one row per deal in ``all_deals()`` order."""
    return np.array([pair_ket(*d.bob).real() for d in all_deals()])


def alice_indices() -> np.ndarray:
    """Zero-based Alice label for each deal in ``all_deals()`` order."""
    return np.array([d.alice - 1 for d in all_deals()])


@lru_cache(maxsize=None)
def composite_rho() -> Operator:
    """Alice ⊗ Bob density operator (Alice's card is the first tensor factor)."""
    cards = card_states()
    total = np.zeros((8, 8), dtype=complex)
    for d in all_deals():
        term = kron(projector(cards[d.alice]), projector(pair_ket(*d.bob)))
        total += float(d.probability) * term.entries
    return Operator(total)


@lru_cache(maxsize=None)
def rho_A() -> Operator:
    return partial_trace(composite_rho(), "first", (2, 4))


@lru_cache(maxsize=None)
def rho_B() -> Operator:
    return partial_trace(composite_rho(), "second", (2, 4))


def infer_alice(first: int, second: int) -> int:
    """The label held by neither of Bob's cards."""
    first, second = check_label(first), check_label(second)
    if first == second:
        raise ValueError(f"Bob's cards must differ, got ({first}, {second})")
    return 6 - first - second


def y_rotation(angle: float) -> np.ndarray:
    """Real 2x2 rotation acting on amplitudes.

    A Bloch-sphere rotation by ``2 * angle`` about Y; ``y_rotation(pi / 3)``
    carries card 1 to card 2, card 2 to card 3 and card 3 to minus card 1.
    """
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])
