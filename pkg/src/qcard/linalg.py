"""Small dense complex linear algebra for the 2-, 4- and 8-dimensional spaces of the game.

Tensor products are first-factor-major: the amplitude of ``u ⊗ v`` at index
``i * v.dim + j`` is ``u[i] * v[j]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .tolerances import TOL

SUPPORTED_DIMS = (2, 4, 8)


class DimensionError(ValueError):
    """Operands have incompatible or unsupported dimensions."""


class DegeneracyError(ValueError):
    """A vector set is linearly dependent within tolerance."""

    def __init__(self, index: int, residual: float):
        super().__init__(f"vector {index} is linearly dependent on its predecessors (residual norm {residual:.3e})")
        self.index = index
        self.residual = residual


def _frozen(values, dtype=complex) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Ket:
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _frozen(self.amplitudes)
        if amps.ndim != 1 or amps.shape[0] not in SUPPORTED_DIMS:
            raise DimensionError(f"ket dimension must be one of {SUPPORTED_DIMS}, got shape {amps.shape}")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @property
    def is_normalized(self) -> bool:
        return abs(self.norm**2 - 1.0) < TOL.normalized

    def __getitem__(self, i: int) -> complex:
        return self.amplitudes[i]

    def __len__(self) -> int:
        return self.dim

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.amplitudes, dtype=dtype)

    def __neg__(self) -> "Ket":
        return Ket(-self.amplitudes)

    def scaled(self, factor: complex) -> "Ket":
        return Ket(factor * self.amplitudes)

    def normalized(self) -> "Ket":
        n = self.norm
        if n == 0.0:
            raise DegeneracyError(0, 0.0)
        return Ket(self.amplitudes / n)

    def real(self) -> np.ndarray:
        """Real part of the amplitudes; raises if any imaginary part is significant."""
        if np.max(np.abs(self.amplitudes.imag), initial=0.0) > TOL.normalized:
            raise ValueError("ket has non-negligible imaginary amplitudes")
        return self.amplitudes.real.copy()


@dataclass(frozen=True, eq=False)
class Operator:
    entries: np.ndarray

    def __post_init__(self):
        m = _frozen(self.entries)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"operator must be square, got shape {m.shape}")
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)

    def __add__(self, other: "Operator") -> "Operator":
        _check_same(self.dim, other.dim)
        return Operator(self.entries + other.entries)

    def __mul__(self, scalar: complex) -> "Operator":
        return Operator(scalar * self.entries)

    __rmul__ = __mul__

    def __matmul__(self, other: "Operator") -> "Operator":
        _check_same(self.dim, other.dim)
        return Operator(self.entries @ other.entries)

    def expectation(self, v: Ket) -> complex:
        """<v|M|v>."""
        _check_same(self.dim, v.dim)
        return complex(np.vdot(v.amplitudes, self.entries @ v.amplitudes))

    def allclose(self, other, atol: float = TOL.hermitian) -> bool:
        return bool(np.allclose(self.entries, np.asarray(other), rtol=0.0, atol=atol))


def _check_same(d1: int, d2: int) -> None:
    if d1 != d2:
        raise DimensionError(f"dimension mismatch: {d1} vs {d2}")


def ket(*amplitudes) -> Ket:
    if len(amplitudes) == 1 and np.ndim(amplitudes[0]) == 1:
        return Ket(amplitudes[0])
    return Ket(amplitudes)


def inner(u: Ket, v: Ket) -> complex:
    """<u|v>, conjugate-linear in ``u``."""
    _check_same(u.dim, v.dim)
    return complex(np.vdot(u.amplitudes, v.amplitudes))


def tensor(u: Ket, v: Ket) -> Ket:
    if u.dim * v.dim not in SUPPORTED_DIMS:
        raise DimensionError(f"tensor product of dims {u.dim} and {v.dim} exceeds supported dimensions")
    return Ket(np.kron(u.amplitudes, v.amplitudes))


def outer(u: Ket, v: Ket) -> Operator:
    """|u><v|."""
    _check_same(u.dim, v.dim)
    return Operator(np.outer(u.amplitudes, v.amplitudes.conj()))


def projector(v: Ket) -> Operator:
    return outer(v, v)


def kron(a: Operator, b: Operator) -> Operator:
    if a.dim * b.dim not in SUPPORTED_DIMS:
        raise DimensionError(f"tensor product of dims {a.dim} and {b.dim} exceeds supported dimensions")
    return Operator(np.kron(a.entries, b.entries))


def trace(m: Operator) -> complex:
    return complex(np.trace(m.entries))


def identity(dim: int) -> Operator:
    return Operator(np.eye(dim))


def partial_trace(m: Operator, keep: str, dims: tuple[int, int]) -> Operator:
    """Reduced operator on the ``first`` or ``second`` tensor factor of ``m``."""
    d1, d2 = dims
    if d1 < 1 or d2 < 1 or m.dim != d1 * d2:
        raise DimensionError(f"operator of dim {m.dim} is not a {d1}x{d2} composite")
    t = m.entries.reshape(d1, d2, d1, d2)
    if keep == "first":
        return Operator(np.einsum("ijkj->ik", t))
    if keep == "second":
        return Operator(np.einsum("ijil->jl", t))
    raise ValueError(f"keep must be 'first' or 'second', got {keep!r}")


def canonical_phase(v: np.ndarray, tie_tol: float = 1e-12) -> np.ndarray:
    """Rescale so the first coordinate of largest magnitude is real and positive."""
    mags = np.abs(v)
    top = mags.max()
    if top == 0.0:
        return v
    i = int(np.argmax(mags >= top - tie_tol))
    return v * (np.conj(v[i]) / mags[i])


def gram_schmidt(vs: Sequence[Ket], tol: float = TOL.independence) -> list[Ket]:
    """Orthonormalize ``vs`` in order; each output has canonical phase.

    Uses two passes of modified Gram-Schmidt per vector. Raises
    DegeneracyError naming the first vector that lies in the span of the
    preceding ones.
    """
    if not vs:
        return []
    dim = vs[0].dim
    out: list[np.ndarray] = []
    for idx, v in enumerate(vs):
        _check_same(dim, v.dim)
        w = np.array(v.amplitudes, dtype=complex)
        scale = max(np.linalg.norm(w), 1.0)
        for _ in range(2):
            for q in out:
                w = w - np.vdot(q, w) * q
        residual = float(np.linalg.norm(w))
        if residual < tol * scale:
            raise DegeneracyError(idx, residual)
        out.append(canonical_phase(w / residual))
    return [Ket(q) for q in out]


def orthogonal_complement(vs: Sequence[Ket], tol: float = TOL.independence) -> list[Ket]:
    """Orthonormal basis of the complement of span(vs), with canonical phases.

    The standard basis vector with the largest residual after projection is
    adjoined at each step, so the result is deterministic.
    """
    found = gram_schmidt(vs, tol)
    dim = vs[0].dim
    extra: list[Ket] = []
    while len(found) < dim:
        q = np.array([f.amplitudes for f in found])
        residual = np.eye(dim) - q.T @ q.conj()
        norms = np.linalg.norm(residual, axis=0)
        j = int(np.argmax(norms >= norms.max() - 1e-12))
        new = gram_schmidt(found + [Ket(np.eye(dim)[:, j])], tol)[-1]
        found.append(new)
        extra.append(new)
    return extra


def gram_residual(vs: Iterable[Ket]) -> float:
    """Largest entry of |G - I| for the Gram matrix of ``vs``."""
    m = np.array([v.amplitudes for v in vs])
    g = m.conj() @ m.T
    return float(np.max(np.abs(g - np.eye(len(m)))))


@dataclass(frozen=True)
class DensityCheck:
    ok: bool
    hermiticity: float
    trace_error: float
    min_eigenvalue: float
    worst: str = field(default="")

    def __bool__(self) -> bool:
        return self.ok


def is_density(m: Operator, tol: float = TOL.psd) -> DensityCheck:
    """Hermitian, unit-trace and positive semidefinite within ``tol``.

    Returns a truthy/falsy DensityCheck whose ``worst`` names the largest
    violation.
    """
    a = m.entries
    herm = float(np.max(np.abs(a - a.conj().T)))
    tr_err = float(abs(np.trace(a) - 1.0))
    min_eig = float(np.linalg.eigvalsh((a + a.conj().T) / 2).min())
    violations = {
        "hermiticity": herm - tol,
        "trace": tr_err - tol,
        "psd": -min_eig - tol,
    }
    name, excess = max(violations.items(), key=lambda kv: kv[1])
    ok = excess <= 0.0
    return DensityCheck(ok, herm, tr_err, min_eig, "" if ok else name)
