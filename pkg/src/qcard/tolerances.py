"""Numerical tolerances shared by the library, the CLI report and the tests."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    normalized: float = 1e-12
    hermitian: float = 1e-12
    trace: float = 1e-12
    psd: float = 1e-10
    independence: float = 1e-10
    orthonormal: float = 1e-10
    coefficient_input: float = 1e-6
    coefficient_norm: float = 1e-9
    basis_gram: float = 1e-9
    cross_orthogonality: float = 1e-6
    closed_form: float = 1e-10
    alice_angle: float = 1e-6
    alice_probability: float = 1e-9
    entropy_argmin: float = 1e-4
    entropy_grid: float = 1e-5
    separate_window: float = 0.02
    collective_value: float = 1e-9
    optimum: float = 1e-6
    z_score: float = 5.0


TOL = Tolerances()
