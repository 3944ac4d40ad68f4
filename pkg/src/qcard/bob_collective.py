"""Bob measures his two cards jointly in an orthonormal basis of the 4-dimensional pair space.

Three basis vectors are built from coefficient vectors ``a``, ``b``, ``c`` in
fixed auxiliary bases attached to the pairs A = (1,2), B = (2,3) and C = (3,1);
the fourth is the orthogonal complement. Outcomes 1, 2, 3 guess Alice's card
as 3, 1, 2 respectively; outcome 4 follows one of three guess choices.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize

from .game import alice_indices, all_deals, deal_kets, pair_ket
from .linalg import Ket, gram_residual, orthogonal_complement
from .report import StrategyReport
from .tolerances import TOL

SQRT2 = math.sqrt(2.0)
P_COMBINED = (3 + SQRT2) / 6
OPTIMAL_FIRST = (4 + SQRT2) / math.sqrt(30)
OPTIMAL_FOURTH = (2 - SQRT2) / math.sqrt(15)

# (first card, second card, missing card) for the pairs behind phi_1, phi_2, phi_3.
ROLES = ((1, 2, 3), (2, 3, 1), (3, 1, 2))
OUTCOME_GUESS = (3, 1, 2)


class ConstraintError(ValueError):
    """Basis vectors built from a coefficient set are not mutually orthogonal."""

    def __init__(self, pair: tuple[int, int], residual: float):
        i, j = pair
        super().__init__(f"<phi_{i}|phi_{j}> = {residual:.3e} violates orthogonality")
        self.pair = pair
        self.residual = residual


class GuessChoice(enum.Enum):
    I = "I"  # guess card 3
    II = "II"  # card 3 or card 1 at random
    III = "III"  # any card at random

    @classmethod
    def parse(cls, value) -> "GuessChoice":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise ValueError(f"unknown guess choice {value!r}; expected I, II or III") from None

    def distribution(self) -> np.ndarray:
        """Guess probabilities over cards 1, 2, 3 on the fourth outcome."""
        return {
            GuessChoice.I: np.array([0.0, 0.0, 1.0]),
            GuessChoice.II: np.array([0.5, 0.0, 0.5]),
            GuessChoice.III: np.full(3, 1.0 / 3.0),
        }[self]


def guess_matrix(choice: GuessChoice) -> np.ndarray:
    """4x3 guess distribution, one row per measurement outcome."""
    g = np.zeros((4, 3))
    for k, label in enumerate(OUTCOME_GUESS):
        g[k, label - 1] = 1.0
    g[3] = GuessChoice.parse(choice).distribution()
    return g


@dataclass(frozen=True, eq=False)
class AuxBases:
    A_basis: tuple[Ket, ...]
    B_basis: tuple[Ket, ...]
    C_basis: tuple[Ket, ...]

    def __iter__(self):
        return iter((self.A_basis, self.B_basis, self.C_basis))

    def matrices(self) -> np.ndarray:
        """Real array of shape (3, 4, 4): ``[role, i]`` is the i-th auxiliary vector."""
        return np.array([[v.real() for v in basis] for basis in self])


def _aux_basis(i: int, j: int, l: int) -> tuple[Ket, ...]:
    x, x_swap = pair_ket(i, j).amplitudes, pair_ket(j, i).amplitudes
    ii, jj, ll = (pair_ket(n, n).amplitudes for n in (i, j, l))
    return (
        Ket(math.sqrt(2 / 5) * (x + x_swap)),
        Ket(math.sqrt(2 / 3) * (x - x_swap)),
        Ket(math.sqrt(2 / 3) * (ii - jj)),
        Ket(math.sqrt(2 / 5) / 3 * (ii + jj + 4 * ll)),
    )


@lru_cache(maxsize=None)
def aux_bases() -> AuxBases:
    return AuxBases(*(_aux_basis(*role) for role in ROLES))


@lru_cache(maxsize=None)
def _aux() -> np.ndarray:
    m = aux_bases().matrices()
    m.setflags(write=False)
    return m


@lru_cache(maxsize=None)
def _deals() -> tuple[np.ndarray, np.ndarray]:
    d = deal_kets()
    d.setflags(write=False)
    return d, alice_indices()


@dataclass(frozen=True, eq=False)
class CoefficientSet:
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        for name in ("a", "b", "c"):
            v = np.array(getattr(self, name), dtype=float)
            if v.shape != (4,):
                raise ValueError(f"coefficient vector {name} must have four entries")
            norm2 = float(v @ v)
            if abs(norm2 - 1.0) > TOL.coefficient_input:
                raise ValueError(f"coefficient vector {name} has squared norm {norm2:.9f}, expected 1")
            v = v / math.sqrt(norm2)
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @classmethod
    def from_matrix(cls, m) -> "CoefficientSet":
        m = np.asarray(m, dtype=float)
        return cls(m[0], m[1], m[2])

    def matrix(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c])

    def canonical(self) -> "CoefficientSet":
        """Sign of each vector fixed so its first non-negligible entry is positive."""
        rows = []
        for v in self.matrix():
            nz = np.flatnonzero(np.abs(v) > 1e-12)
            rows.append(-v if nz.size and v[nz[0]] < 0 else v)
        return CoefficientSet.from_matrix(rows)

    def as_dict(self) -> dict[str, list[float]]:
        return {"a": self.a.tolist(), "b": self.b.tolist(), "c": self.c.tolist()}


def optimal_coefficients() -> CoefficientSet:
    x, y = OPTIMAL_FIRST, OPTIMAL_FOURTH
    return CoefficientSet([x, 0, 0, y], [x, 0, 0, y], [x, 0, 0, -y])


def coefficients_of(frame) -> CoefficientSet:
    """Coordinates of the first three rows of ``frame`` in the auxiliary bases."""
    f = np.asarray(frame, dtype=float)
    return CoefficientSet.from_matrix(np.einsum("kij,kj->ki", _aux(), f[:3]))


def random_coefficients(rng: np.random.Generator) -> CoefficientSet:
    """Coefficients of a random real orthonormal triple."""
    q, r = np.linalg.qr(rng.normal(size=(4, 4)))
    q = q * np.sign(np.diag(r))
    return coefficients_of(q.T)


@dataclass(frozen=True, eq=False)
class CollectiveBasis:
    phi: tuple[Ket, Ket, Ket, Ket]
    guess_map: np.ndarray
    cross_residual: float = 0.0

    def frame(self) -> np.ndarray:
        """Real 4x4 array with row k equal to phi_{k+1}."""
        return np.array([p.real() for p in self.phi])

    @property
    def gram_residual(self) -> float:
        return gram_residual(self.phi)


def _triple(coeffs: CoefficientSet) -> np.ndarray:
    return np.einsum("ki,kij->kj", coeffs.matrix(), _aux())


def _cross(triple: np.ndarray) -> tuple[tuple[int, int], float]:
    g = triple @ triple.T
    worst, pair = 0.0, (1, 2)
    for i in range(3):
        for j in range(i + 1, 3):
            if abs(g[i, j]) > worst:
                worst, pair = abs(g[i, j]), (i + 1, j + 1)
    return pair, worst


def _nearest_orthonormal(m: np.ndarray) -> np.ndarray:
    u, _, vt = np.linalg.svd(m, full_matrices=False)
    return u @ vt


def build_basis(coeffs: CoefficientSet, choice: GuessChoice = GuessChoice.III) -> CollectiveBasis:
    triple = _triple(coeffs)
    pair, residual = _cross(triple)
    if residual > TOL.cross_orthogonality:
        raise ConstraintError(pair, residual)
    if residual > 0.0:
        triple = _nearest_orthonormal(triple)
    kets = [Ket(v) for v in triple]
    (fourth,) = orthogonal_complement(kets)
    return CollectiveBasis(
        phi=(kets[0], kets[1], kets[2], Ket(fourth.real())),
        guess_map=guess_matrix(choice),
        cross_residual=residual,
    )


def frame_success(frame, guess_map) -> float:
    """(1/6) sum over deals and outcomes of Born probability times guess correctness."""
    d, alice = _deals()
    born = (d @ np.asarray(frame, dtype=float).T) ** 2
    credit = np.asarray(guess_map)[:, alice].T
    return float(np.sum(born * credit) / 6.0)


def success_combined(coeffs: CoefficientSet, choice: GuessChoice = GuessChoice.III) -> float:
    basis = build_basis(coeffs, choice)
    return frame_success(basis.frame(), basis.guess_map)


def success_polynomial(coeffs: CoefficientSet) -> float:
    """Closed-form success for guess choice III in terms of the coefficients."""
    a, b, c = coeffs.a, coeffs.b, coeffs.c
    return (
        1 / 3
        + (2 / 15) * (a[0] ** 2 + b[0] ** 2 + c[0] ** 2)
        - (1 / 12) * (a[2] ** 2 + b[2] ** 2 + c[2] ** 2)
        - (1 / 20) * (a[3] ** 2 + b[3] ** 2 + c[3] ** 2)
        + (1 / 30) * (a[0] * a[3] + b[0] * b[3] - c[0] * c[3])
    )


def evaluate(coeffs: CoefficientSet, choice: GuessChoice = GuessChoice.III) -> StrategyReport:
    choice = GuessChoice.parse(choice)
    basis = build_basis(coeffs, choice)
    value = frame_success(basis.frame(), basis.guess_map)
    diagnostics = {"gram_residual": basis.gram_residual, "cross_residual": basis.cross_residual}
    if choice is GuessChoice.III:
        poly = success_polynomial(coeffs)
        diagnostics.update(polynomial=poly, polynomial_deviation=poly - value)
    return StrategyReport(
        probability=value,
        method="enumeration",
        parameters={"choice": choice.value, **coeffs.as_dict()},
        diagnostics=diagnostics,
    )


def best_guess_success(frame) -> tuple[float, np.ndarray]:
    """Success with the posterior-maximizing guess on every outcome, and that guess map."""
    d, alice = _deals()
    born = (d @ np.asarray(frame, dtype=float).T) ** 2
    weight = np.zeros((born.shape[1], 3))
    np.add.at(weight.T, alice, born)
    guess = np.zeros_like(weight)
    guess[np.arange(len(weight)), np.argmax(weight, axis=1)] = 1.0
    return float(weight.max(axis=1).sum() / 6.0), guess


_PLANES = tuple((i, j) for i in range(4) for j in range(i + 1, 4))


def givens_frame(angles) -> np.ndarray:
    """Orthogonal 4x4 matrix from six planar rotation angles; its rows are the frame."""
    q = np.eye(4)
    for (i, j), t in zip(_PLANES, angles):
        c, s = math.cos(t), math.sin(t)
        # Rotate rows i and j of the transpose in place.
        q[[i, j]] = [c * q[i] + s * q[j], c * q[j] - s * q[i]]
    return q


def _restart_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


@dataclass(frozen=True)
class CollectiveOptimum:
    coefficients: CoefficientSet
    probability: float
    choice: GuessChoice
    restarts: int
    failed: int
    restart_values: tuple[float, ...] = field(default=(), repr=False)

    def __iter__(self):
        return iter((self.coefficients, self.probability))


_PENALTY = 50.0


@lru_cache(maxsize=None)
def _penalty_tables() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    d, _ = _deals()
    aux = _aux()
    overlaps = np.einsum("dj,kij->dki", d, aux)  # <deal|X_i> for role k
    cross = np.array([aux[0] @ aux[1].T, aux[0] @ aux[2].T, aux[1] @ aux[2].T])
    return overlaps, cross, np.array([1.0, 1.0, 1.0])


def _penalized_objective(x: np.ndarray, credit: np.ndarray) -> float:
    overlaps, cross, _ = _penalty_tables()
    raw = x.reshape(3, 4)
    coeffs = raw / np.sqrt((raw * raw).sum(axis=1))[:, None]
    born = np.einsum("dki,ki->dk", overlaps, coeffs) ** 2
    # Fourth-outcome probability by completeness: 1 - sum over the first three.
    born4 = 1.0 - born.sum(axis=1)
    value = ((born * credit[:, :3]).sum() + born4 @ credit[:, 3]) / 6.0
    g01 = coeffs[0] @ cross[0] @ coeffs[1]
    g02 = coeffs[0] @ cross[1] @ coeffs[2]
    g12 = coeffs[1] @ cross[2] @ coeffs[2]
    return -value + _PENALTY * (g01 * g01 + g02 * g02 + g12 * g12)


def _refine_frame(frame: np.ndarray, objective) -> np.ndarray:
    """Local quasi-Newton search over orthogonal rotations of ``frame`` (always feasible)."""

    def f(theta):
        return -objective(givens_frame(theta) @ frame)

    res = minimize(f, np.zeros(6), method="BFGS", options={"gtol": 1e-10, "maxiter": 200})
    if res.fun > f(np.zeros(6)):
        return frame
    return givens_frame(res.x) @ frame


def optimize_collective(
    choice: GuessChoice = GuessChoice.III,
    restarts: int = 100,
    seed: int = 0,
) -> CollectiveOptimum:
    """Multi-restart search over coefficient sets for one guess choice.

    Each restart runs Nelder-Mead on three unnormalized coefficient vectors
    with a quadratic penalty on cross-orthogonality, projects the triple to
    the nearest orthonormal one, and finishes with a feasible local
    refinement in rotation coordinates.
    """
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    choice = GuessChoice.parse(choice)
    guess = guess_matrix(choice)
    credit = guess[:, _deals()[1]].T

    def objective(frame):
        return frame_success(frame, guess)

    best: tuple[float, CoefficientSet] | None = None
    values: list[float] = []
    failed = 0
    for r in range(restarts):
        rng = _restart_rng(seed, r)
        x0 = rng.normal(size=12)
        res = minimize(
            _penalized_objective,
            x0,
            args=(credit,),
            method="Nelder-Mead",
            options={"xatol": 1e-6, "fatol": 1e-11, "maxfev": 1500, "adaptive": True},
        )
        raw = res.x.reshape(3, 4)
        if not np.all(np.isfinite(raw)) or np.any(np.linalg.norm(raw, axis=1) == 0):
            failed += 1
            continue
        coeffs = raw / np.linalg.norm(raw, axis=1, keepdims=True)
        triple = _nearest_orthonormal(np.einsum("ki,kij->kj", coeffs, _aux()))
        frame = np.vstack([triple, orthogonal_complement([Ket(v) for v in triple])[0].real()])
        frame = _refine_frame(frame, objective)
        try:
            cs = coefficients_of(frame).canonical()
            value = success_combined(cs, choice)
        except (ValueError, ConstraintError):
            failed += 1
            continue
        values.append(value)
        if best is None or value > best[0]:
            best = (value, cs)
    if best is None:
        raise RuntimeError("every restart failed")
    return CollectiveOptimum(best[1], best[0], choice, restarts, failed, tuple(values))


@dataclass(frozen=True)
class FullFrameOptimum:
    frame: np.ndarray
    probability: float
    guess_map: np.ndarray
    restarts: int
    restart_values: tuple[float, ...] = field(default=(), repr=False)

    def __iter__(self):
        return iter((self.frame, self.probability))

    def basis(self) -> CollectiveBasis:
        return CollectiveBasis(tuple(Ket(r) for r in self.frame), self.guess_map)


def optimize_full_frame(restarts: int = 50, seed: int = 0) -> FullFrameOptimum:
    """Search every real orthonormal 4-frame, guessing the most likely card on each outcome."""
    if restarts < 1:
        raise ValueError("restarts must be at least 1")

    def objective(frame):
        return best_guess_success(frame)[0]

    best: tuple[float, np.ndarray] | None = None
    values = []
    for r in range(restarts):
        rng = _restart_rng(seed, r)
        res = minimize(
            lambda t: -objective(givens_frame(t)),
            rng.uniform(-math.pi, math.pi, size=6),
            method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": 1e-14, "maxfev": 6000, "adaptive": True},
        )
        frame = _refine_frame(givens_frame(res.x), objective)
        value = objective(frame)
        values.append(value)
        if best is None or value > best[0]:
            best = (value, frame)
    value, frame = best
    _, guess = best_guess_success(frame)
    return FullFrameOptimum(frame, value, guess, restarts, tuple(values))


def deal_labels() -> list[str]:
    """Names of Bob's pair states in deal order (A = 12, A' = 21, ...)."""
    names = {(1, 2): "A", (2, 1): "A'", (2, 3): "B", (3, 2): "B'", (3, 1): "C", (1, 3): "C'"}
    return [names[d.bob] for d in all_deals()]
