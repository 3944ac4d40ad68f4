import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcard.game import card_states, composite_rho, rho_B
from qcard.linalg import (
    DegeneracyError,
    DimensionError,
    Ket,
    Operator,
    gram_residual,
    gram_schmidt,
    inner,
    is_density,
    orthogonal_complement,
    outer,
    partial_trace,
    projector,
    tensor,
    trace,
)

finite = st.floats(-1.0, 1.0, allow_nan=False, allow_infinity=False)


def qubit(values):
    v = np.array(values[:2]) + 1j * np.array(values[2:])
    n = np.linalg.norm(v)
    return Ket(v / n) if n > 1e-3 else Ket([1.0, 0.0])


qubits = st.lists(finite, min_size=4, max_size=4).map(qubit)


@pytest.fixture
def psi():
    return card_states()


def test_inner_examples(psi):
    assert inner(psi[1], psi[1]) == pytest.approx(1.0, abs=1e-15)
    # (1/2)(-1/2) + (sqrt3/2)(sqrt3/2)
    assert inner(psi[2], psi[3]) == pytest.approx(0.5, abs=1e-15)
    assert inner(psi[1], psi[3]) == pytest.approx(-0.5, abs=1e-15)


def test_inner_conjugates_first_argument():
    u = Ket([1j, 0.0])
    v = Ket([1.0, 0.0])
    assert inner(u, v) == pytest.approx(-1j)


def test_inner_dimension_mismatch():
    with pytest.raises(DimensionError):
        inner(Ket([1, 0]), Ket([1, 0, 0, 0]))


def test_tensor_examples(psi):
    t11 = tensor(psi[1], psi[1])
    assert t11[0] == 1.0
    assert inner(tensor(psi[1], psi[2]), tensor(psi[2], psi[1])) == pytest.approx(0.25, abs=1e-15)
    assert tensor(psi[2], psi[3]).norm == pytest.approx(1.0, abs=1e-15)


def test_tensor_ordering_is_first_factor_major():
    u, v = Ket([1.0, 2.0]), Ket([3.0, 5.0])
    assert np.allclose(tensor(u, v).amplitudes, [3, 5, 6, 10])


def test_tensor_rejects_dimension_16():
    four = Ket([1, 0, 0, 0])
    with pytest.raises(DimensionError):
        tensor(four, four)


def test_ket_rejects_unsupported_dimension():
    with pytest.raises(DimensionError):
        Ket([1.0, 0.0, 0.0])


def test_outer_examples(psi):
    assert np.allclose(outer(psi[1], psi[1]).entries, np.diag([1.0, 0.0]))
    assert trace(projector(psi[3])) == pytest.approx(1.0)
    assert outer(psi[2], psi[2]).entries[0, 0] == pytest.approx(0.25)


def test_partial_trace_of_composite_rho():
    assert np.allclose(partial_trace(composite_rho(), "first", (2, 4)).entries, np.eye(2) / 2, atol=1e-12)


def test_partial_trace_of_product_projector(psi):
    p = projector(tensor(psi[1], psi[2]))
    assert np.allclose(partial_trace(p, "second", (2, 2)).entries, projector(psi[2]).entries, atol=1e-12)
    assert trace(partial_trace(p, "first", (2, 2))) == pytest.approx(1.0, abs=1e-12)


def test_partial_trace_bad_dims():
    with pytest.raises(DimensionError):
        partial_trace(composite_rho(), "first", (2, 2))
    with pytest.raises(ValueError):
        partial_trace(composite_rho(), "middle", (2, 4))


def test_gram_schmidt_forced_example():
    out = gram_schmidt([Ket([1.0, 0.0]), Ket([1.0, 1.0]).scaled(1 / math.sqrt(2))])
    assert np.allclose(out[0].amplitudes, [1, 0])
    assert np.allclose(out[1].amplitudes, [0, 1])


def test_gram_schmidt_keeps_orthonormal_input_up_to_phase():
    vs = [Ket([0.0, -1.0, 0.0, 0.0]), Ket([1.0, 0.0, 0.0, 0.0])]
    out = gram_schmidt(vs)
    for v, w in zip(vs, out):
        assert abs(abs(inner(v, w)) - 1.0) < 1e-12


def test_gram_schmidt_sign_convention():
    (v,) = gram_schmidt([Ket([0.1, -0.9, 0.3, 0.0])])
    i = int(np.argmax(np.abs(v.amplitudes)))
    assert v[i].real > 0 and abs(v[i].imag) < 1e-15


def test_gram_schmidt_names_dependent_vector():
    vs = [Ket([1.0, 0.0, 0.0, 0.0]), Ket([0.0, 1.0, 0.0, 0.0]), Ket([1.0, 1.0, 0.0, 0.0])]
    with pytest.raises(DegeneracyError) as info:
        gram_schmidt(vs)
    assert info.value.index == 2


def test_gram_schmidt_identity_on_random_inputs():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(1000):
        dim = int(rng.choice([2, 4, 8]))
        k = int(rng.integers(1, dim + 1))
        m = rng.normal(size=(k, dim)) + 1j * rng.normal(size=(k, dim))
        out = gram_schmidt([Ket(r) for r in m])
        worst = max(worst, gram_residual(out))
    assert worst < 1e-10


def test_orthogonal_complement_completes_basis():
    rng = np.random.default_rng(3)
    q, _ = np.linalg.qr(rng.normal(size=(4, 4)))
    (fourth,) = orthogonal_complement([Ket(c) for c in q.T[:3]])
    assert gram_residual([Ket(c) for c in q.T[:3]] + [fourth]) < 1e-10


def test_is_density_examples():
    assert is_density(composite_rho())
    assert is_density(rho_B())
    bad = is_density(Operator(np.diag([1.0001, -0.0001])))
    assert not bad
    assert bad.worst == "psd"
    assert bad.min_eigenvalue == pytest.approx(-1e-4)


def test_is_density_reports_trace_and_hermiticity():
    assert is_density(Operator(np.eye(2))).worst == "trace"
    assert is_density(Operator([[0.5, 0.3], [0.0, 0.5]])).worst == "hermiticity"


@given(qubits, qubits, qubits, qubits)
def test_tensor_overlap_factorizes(u, v, x, y):
    lhs = inner(tensor(u, v), tensor(x, y))
    assert abs(lhs - inner(u, x) * inner(v, y)) < 1e-12


@given(qubits, qubits)
def test_partial_trace_of_product_returns_factor(u, v):
    p = projector(tensor(u, v))
    assert np.allclose(partial_trace(p, "first", (2, 2)).entries, projector(u).entries, atol=1e-12)
    assert np.allclose(partial_trace(p, "second", (2, 2)).entries, projector(v).entries, atol=1e-12)


@settings(max_examples=200)
@given(st.lists(st.tuples(qubits, qubits, st.floats(0.01, 1.0)), min_size=1, max_size=5))
def test_convex_mixtures_of_projectors_are_densities(terms):
    weights = np.array([w for _, _, w in terms])
    weights = weights / weights.sum()
    m = sum(w * projector(tensor(u, v)).entries for (u, v, _), w in zip(terms, weights))
    assert is_density(Operator(m), 1e-10)
