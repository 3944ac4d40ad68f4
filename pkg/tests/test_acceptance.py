"""End-to-end acceptance suite. Each test records one PASS/FAIL line."""

import math
import time

import numpy as np
import pytest

from qcard import alice, bob_collective as bc, bob_separate as bs
from qcard.alice import AliceStrategy
from qcard.bob_collective import GuessChoice
from qcard.engine import SimulationConfig, StrategySpec, exact_success, simulate
from qcard.game import composite_rho, rho_A
from qcard.linalg import gram_residual, is_density
from qcard.tolerances import TOL

P_ALICE = (2 + math.sqrt(3)) / 6
P_SEP = (11 + 3 * math.sqrt(3)) / 24
P_COMBINED = (3 + math.sqrt(2)) / 6
EPS = 4 * np.finfo(float).eps


def test_01_alice_optimum(acceptance):
    t0 = time.perf_counter()
    a, p = alice.optimize_alice(AliceStrategy.FIRST)
    dt = time.perf_counter() - t0
    da, dp = a - math.pi / 12, p - P_ALICE
    ok = abs(da) < TOL.alice_angle and abs(dp) < TOL.alice_probability and dt < 1.0
    assert acceptance(1, ok, f"alpha-pi/12={da:.2e} P-P*={dp:.2e} t={dt:.2f}s")


def test_02_alice_mirror(acceptance):
    a, p = alice.optimize_alice(AliceStrategy.SECOND)
    da, dp = a + math.pi / 12, p - P_ALICE
    ok = abs(da) < TOL.alice_angle and abs(dp) < TOL.alice_probability
    assert acceptance(2, ok, f"alpha+pi/12={da:.2e} P-P*={dp:.2e}")


def test_03_entropy_argmin(acceptance):
    t0 = time.perf_counter()
    a = alice.entropy_argmin(AliceStrategy.FIRST, 1e-5)
    dt = time.perf_counter() - t0
    d = a - math.pi / 12
    ok = abs(d) < TOL.entropy_argmin and dt < 5.0
    assert acceptance(3, ok, f"argmin-pi/12={d:.2e} t={dt:.2f}s")


def test_04_bob_separate(acceptance):
    f = bs.paper_formulas()
    exact = {
        "p12": (7 + 4 * math.sqrt(3)) / 24,
        "p21": (4 - math.sqrt(3)) / 24,
        "p_sep": P_SEP,
    }
    worst = max(abs(getattr(f, k) - v) for k, v in exact.items())
    enum = bs.enumerate_sequential()
    diff = enum - P_SEP
    ok = worst <= EPS and abs(diff) <= TOL.separate_window
    assert acceptance(4, ok, f"formula err={worst:.1e} enumeration={enum:.15f} signed diff={diff:+.3e}")


def test_05_bob_collective_value(acceptance):
    coeffs = bc.optimal_coefficients()
    enum = bc.success_combined(coeffs)
    poly = bc.success_polynomial(coeffs)
    res = bc.build_basis(coeffs).gram_residual
    ok = abs(enum - P_COMBINED) < TOL.collective_value and abs(poly - P_COMBINED) < TOL.collective_value and res < TOL.basis_gram
    assert acceptance(5, ok, f"enum diff={enum - P_COMBINED:.1e} poly diff={poly - P_COMBINED:.1e} gram={res:.1e}")


@pytest.mark.slow
def test_06_collective_optimization(acceptance):
    t0 = time.perf_counter()
    optima = {c: bc.optimize_collective(c, restarts=100, seed=2024).probability for c in GuessChoice}
    dt = time.perf_counter() - t0
    values = list(optima.values())
    spread = max(values) - min(values)
    ok = min(values) >= P_COMBINED - TOL.optimum and spread < TOL.optimum and dt < 60.0
    shown = " ".join(f"{c.value}={v - P_COMBINED:+.1e}" for c, v in optima.items())
    assert acceptance(6, ok, f"{shown} spread={spread:.1e} t={dt:.1f}s")


@pytest.mark.slow
def test_07_full_frame(acceptance):
    t0 = time.perf_counter()
    opt = bc.optimize_full_frame(restarts=50, seed=2024)
    dt = time.perf_counter() - t0
    ok = opt.probability >= P_COMBINED - TOL.optimum and dt < 120.0
    assert acceptance(7, ok, f"p*-P={opt.probability - P_COMBINED:+.1e} t={dt:.1f}s")


def test_08_dominance(acceptance):
    p_a = alice.optimize_alice(AliceStrategy.FIRST).probability
    p_s = bs.separate_report().p_sep
    p_c = bc.success_combined(bc.optimal_coefficients())
    ok = p_a < p_s < p_c
    assert acceptance(8, ok, f"{p_a:.6f} < {p_s:.6f} < {p_c:.6f}")


def test_09_oracle_equivalence(acceptance):
    rng = np.random.default_rng(9)
    worst = 0.0
    for a in rng.uniform(alice.ALPHA_MIN, alice.ALPHA_MAX, 100):
        for strategy in AliceStrategy:
            closed = alice.success_probability(float(a), strategy)
            worst = max(worst, abs(closed - exact_success(StrategySpec.alice(float(a), strategy))))
    for _ in range(100):
        coeffs = bc.random_coefficients(rng)
        worst = max(worst, abs(bc.success_polynomial(coeffs) - exact_success(StrategySpec.bob_collective(coeffs))))
    assert acceptance(9, worst < 1e-10, f"max deviation={worst:.1e}")


@pytest.mark.slow
def test_10_simulation(acceptance):
    specs = {"alice": StrategySpec.alice(), "collective": StrategySpec.bob_collective()}
    inside = {}
    for name, spec in specs.items():
        exact = exact_success(spec)
        inside[name] = sum(
            abs(simulate(spec, SimulationConfig(10**6, seed), exact).z_score) < TOL.z_score for seed in range(20)
        )
    cfg = SimulationConfig(10**6, 12345, 4)
    identical = all(simulate(s, cfg) == simulate(s, cfg) for s in specs.values())
    ok = all(v >= 19 for v in inside.values()) and identical
    assert acceptance(10, ok, f"within 5 SE: alice {inside['alice']}/20 collective {inside['collective']}/20 rerun identical={identical}")


def test_11_structural(acceptance):
    density = is_density(composite_rho())
    ra = float(np.max(np.abs(rho_A().entries - np.eye(2) / 2)))
    aux = max(gram_residual(b) for b in bc.aux_bases())
    ok = bool(density) and ra < 1e-12 and aux < TOL.orthonormal
    assert acceptance(11, ok, f"density={bool(density)} rho_A err={ra:.1e} aux gram={aux:.1e}")
