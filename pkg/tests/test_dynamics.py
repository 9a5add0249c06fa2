import io
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from asymplectic.catalog import (
    benchmark_n3,
    coupling_n4,
    coupling_n5,
    pendulum_hamiltonian,
    pendulum_system,
)
from asymplectic.dynamics import (
    SystemDefinition,
    VectorFieldSpec,
    divergence,
    energy_drift,
    hamiltonian_vector_field,
    integrate,
    is_strongly_hamiltonian,
)
from asymplectic.errors import DomainExitError
from asymplectic.fourier import FourierSeries, spectrum
from asymplectic.poly import ActionPolynomial
from asymplectic.structure import StructureMatrixField, c_tensor, kernel_at


def test_system_definition_validates():
    sys5 = pendulum_system()
    assert sys5.n == 5
    omега = sys5.frequency_map()
    assert omега[3] == ActionPolynomial.variable(5, 3)
    assert omега[4] == ActionPolynomial.constant(5, 1)
    assert sys5.hamiltonian() == pendulum_hamiltonian()


def test_hvf_linear_hamiltonian():
    n = 3
    A = StructureMatrixField(n, {(0, 1): ActionPolynomial.variable(n, 2)})
    g = FourierSeries.from_polynomial(ActionPolynomial.variable(n, 0))
    field = hamiltonian_vector_field(g, A)
    assert all(comp.is_zero for comp in field.action)
    assert field.angle[0] == FourierSeries.from_polynomial(
        ActionPolynomial.constant(n, 1)
    )
    assert field.angle[1].is_zero and field.angle[2].is_zero


def test_hvf_sine_zero_structure():
    n = 2
    A = StructureMatrixField.zero(n)
    g = FourierSeries.sine(n, (1, 0))
    field = hamiltonian_vector_field(g, A)
    assert field.action[0] == -FourierSeries.cosine(n, (1, 0))
    assert field.action[1].is_zero
    assert all(comp.is_zero for comp in field.angle)


def test_hvf_with_structure_term():
    # g = sin alpha1 on the n=4 coupled structure: the structure pushes the
    # second angle at rate -a4 cos alpha1
    A = coupling_n4()
    g = FourierSeries.sine(4, (1, 0, 0, 0))
    field = hamiltonian_vector_field(g, A)
    assert field.action[0] == -FourierSeries.cosine(4, (1, 0, 0, 0))
    a4 = ActionPolynomial.variable(4, 3)
    assert field.angle[1] == FourierSeries.cosine(4, (1, 0, 0, 0)) * (-a4)
    assert field.angle[0].is_zero and field.angle[2].is_zero and field.angle[3].is_zero


def test_field_numeric_eval_matches_series():
    sys3 = benchmark_n3(Fraction(1, 100))
    field = sys3.vector_field()
    rng = np.random.default_rng(3)
    for _ in range(5):
        a = rng.uniform(0.5, 1.5, 3)
        alpha = rng.uniform(0, 2 * np.pi, 3)
        fast = field(np.concatenate([a, alpha]))
        from asymplectic.fourier import evaluate

        slow = np.array(
            [evaluate(c, a, alpha) for c in field.action]
            + [evaluate(c, a, alpha) for c in field.angle]
        )
        assert np.allclose(fast, slow, atol=1e-14)


def test_strongly_hamiltonian_angle_independent():
    C = c_tensor(coupling_n5())
    g = FourierSeries.from_polynomial(ActionPolynomial.variable(5, 0) ** 3)
    assert is_strongly_hamiltonian(g, C).verdict


def test_strongly_hamiltonian_pendulum():
    C = c_tensor(coupling_n5())
    assert is_strongly_hamiltonian(pendulum_hamiltonian(), C).verdict


def test_strongly_hamiltonian_witness():
    # cos alpha1 on the n=5 structure: witness (i,j) = (2,3) 1-based, nu = e1,
    # offending polynomial a1/2
    C = c_tensor(coupling_n5())
    g = FourierSeries.cosine(5, (1, 0, 0, 0, 0))
    verdict = is_strongly_hamiltonian(g, C)
    assert not verdict.verdict
    a1_half = ActionPolynomial.variable(5, 0) * Fraction(1, 2)
    zero = ActionPolynomial.zero(5)
    hits = [
        w
        for w in verdict.witnesses
        if (w.i, w.j) == (1, 2) and w.nu == (1, 0, 0, 0, 0)
    ]
    assert len(hits) == 1
    assert hits[0].offending == (a1_half, zero)


def test_verdict_invariant_consistency():
    verdict = is_strongly_hamiltonian(
        FourierSeries.cosine(5, (1, 0, 0, 0, 0)), c_tensor(coupling_n5())
    )
    assert bool(verdict) == verdict.verdict == (len(verdict.witnesses) == 0)


@st.composite
def n5_series(draw, angle_block):
    """Random series supported on the given angle indices (0-based)."""
    n = 5
    out = FourierSeries.zero(n)
    for _ in range(draw(st.integers(min_value=1, max_value=3))):
        nu = [0] * n
        for idx in angle_block:
            nu[idx] = draw(st.integers(min_value=-2, max_value=2))
        expo = tuple(draw(st.integers(min_value=0, max_value=2)) for _ in range(n))
        c = Fraction(draw(st.integers(min_value=-5, max_value=5)), draw(st.integers(min_value=1, max_value=3)))
        coeff = ActionPolynomial(n, {expo: c})
        out = out + (
            FourierSeries.cosine(n, nu, coeff)
            if draw(st.booleans())
            else FourierSeries.sine(n, nu, coeff)
        )
    return out


@given(n5_series(angle_block=(3, 4)))
def test_classifier_accepts_kernel_supported_series(g):
    C = c_tensor(coupling_n5())
    assert is_strongly_hamiltonian(g, C).verdict


@given(n5_series(angle_block=(0, 1, 2)))
def test_classifier_rejects_offkernel_series(g):
    C = c_tensor(coupling_n5())
    # only series with an actual dependence on alpha1..alpha3 violate
    if any(any(v != 0 for v in nu[:3]) for nu in g.support()):
        assert not is_strongly_hamiltonian(g, C).verdict


@given(n5_series(angle_block=(3, 4)))
def test_spectrum_inside_kernel_lattice(g):
    # cross-module consistency: spectrum at random points sits inside ker C(a)
    C = c_tensor(coupling_n5())
    rng = np.random.default_rng(11)
    if not is_strongly_hamiltonian(g, C).verdict:
        return
    for _ in range(5):
        a = rng.uniform(0.3, 2.0, 5)
        basis = kernel_at(C, a)
        proj = basis @ basis.T
        for nu in spectrum(g, a, tol=1e-12):
            v = np.array(nu, float)
            assert np.linalg.norm(proj @ v - v) < 1e-9


def test_n3_rigidity():
    # any strongly Hamiltonian function on a structure with C != 0 everywhere
    # dense is angle-independent when n = 3
    n = 3
    A = StructureMatrixField(n, {(0, 1): ActionPolynomial.variable(n, 2)})
    C = c_tensor(A)
    g = FourierSeries.cosine(n, (1, 0, 0)) + FourierSeries.from_polynomial(
        ActionPolynomial.variable(n, 1)
    )
    verdict = is_strongly_hamiltonian(g, C)
    assert not verdict.verdict
    g2 = FourierSeries.from_polynomial(ActionPolynomial.variable(n, 1))
    assert is_strongly_hamiltonian(g2, C).verdict
    assert g2.max_order() == 0


def test_divergence_of_hamiltonian_fields_vanishes():
    A = coupling_n4()
    g = FourierSeries.sine(4, (1, 1, 0, 0))
    field = hamiltonian_vector_field(g, A)
    assert divergence(field).is_zero


def test_divergence_negative_control():
    n = 2
    field = VectorFieldSpec(
        n=n,
        action=(
            FourierSeries.from_polynomial(ActionPolynomial.variable(n, 0)),
            FourierSeries.zero(n),
        ),
        angle=(FourierSeries.zero(n), FourierSeries.zero(n)),
    )
    assert divergence(field) == FourierSeries.from_polynomial(
        ActionPolynomial.constant(n, 1)
    )


@given(n5_series(angle_block=(0, 2, 4)))
@settings(max_examples=20)
def test_divergence_property(g):
    field = hamiltonian_vector_field(g, coupling_n5())
    assert divergence(field).is_zero


# -- integration ----------------------------------------------------------


def test_integrate_unperturbed_flow():
    sys3 = benchmark_n3(0)
    field = sys3.vector_field()
    a0 = np.array([1.0, 0.7, 1.3])
    alpha0 = np.array([0.3, 5.9, 2.0])
    rec = integrate(field, (a0, alpha0), 50.0, sample_count=11)
    assert np.allclose(rec.actions, a0, atol=1e-12)
    expected = np.mod(alpha0 + np.outer(rec.times, a0), 2 * np.pi)
    assert np.allclose(rec.angles, expected, atol=1e-9)


def test_integrate_roundtrip():
    sys3 = benchmark_n3(Fraction(1, 100))
    field = sys3.vector_field()
    x0 = np.array([1.0, 0.8, 1.2, 0.1, 0.2, 0.3])
    fwd = integrate(field, x0, 25.0, sample_count=5)
    end = fwd.state(-1)
    # lift the angles back: state() reduces mod 2 pi, which is fine for reuse
    back = integrate(field, end, -25.0, sample_count=5)
    x_back = back.state(0)  # backward records are stored time-ascending
    assert np.allclose(x_back[:3], x0[:3], atol=1e-9)
    assert np.allclose(
        np.mod(x_back[3:] - x0[3:] + np.pi, 2 * np.pi) - np.pi, 0.0, atol=1e-8
    )


def test_integrate_against_scipy_reference():
    from scipy.integrate import solve_ivp

    sys3 = benchmark_n3(Fraction(1, 50))
    field = sys3.vector_field()
    x0 = np.array([1.1, 0.6, 0.9, 1.0, 2.0, 3.0])

    def rhs(_t, y):
        return field(y)

    ref = solve_ivp(rhs, (0, 20.0), x0, method="DOP853", rtol=1e-12, atol=1e-14)
    rec = integrate(field, x0, 20.0, sample_count=3)
    got = rec.state(-1)
    want = ref.y[:, -1]
    want[3:] = np.mod(want[3:], 2 * np.pi)
    assert np.allclose(got, want, atol=1e-8)


def test_energy_conservation_short():
    sys3 = benchmark_n3(Fraction(1, 1000))
    field = sys3.vector_field()
    rec = integrate(field, ([1.0, 0.8, 1.2], [0.1, 0.2, 0.3]), 200.0, sample_count=201)
    assert energy_drift(rec) < 1e-10


def test_energy_drift_definition():
    rec_energy = np.array([1.0, 1.0 + 1e-9])
    import dataclasses

    from asymplectic.dynamics import IntegratorStats, TrajectoryRecord

    rec = TrajectoryRecord(
        times=np.array([0.0, 1.0]),
        actions=np.zeros((2, 1)),
        angles=np.zeros((2, 1)),
        energies=rec_energy,
        stats=IntegratorStats(1, 0, 13, 1e-10, 1e-12),
    )
    assert energy_drift(rec) == pytest.approx(1e-9)
    const = dataclasses.replace(rec, energies=np.array([2.5, 2.5]))
    assert energy_drift(const) == 0.0


def test_domain_exit_raises():
    n = 2
    # adot_1 = 1: leaves the box quickly
    field = VectorFieldSpec(
        n=n,
        action=(
            FourierSeries.from_polynomial(ActionPolynomial.constant(n, 1)),
            FourierSeries.zero(n),
        ),
        angle=(FourierSeries.zero(n), FourierSeries.zero(n)),
        domain=tuple(((Fraction(-1), Fraction(1)),) * n),
    )
    with pytest.raises(DomainExitError) as err:
        integrate(field, np.zeros(4), 10.0, sample_count=5)
    assert err.value.t_exit == pytest.approx(1.0, abs=1e-6)


def test_trajectory_csv_format():
    sys3 = benchmark_n3(Fraction(1, 100))
    rec = integrate(sys3.vector_field(), ([1.0, 0.8, 1.2], [0.0, 0.0, 0.0]), 1.0, sample_count=3)
    buf = io.StringIO()
    rec.to_csv(buf)
    lines = buf.getvalue().strip().splitlines()
    assert lines[0] == "t,a1,a2,a3,alpha1,alpha2,alpha3,energy"
    assert len(lines) == 4
    first = lines[1].split(",")
    assert float(first[0]) == 0.0
    assert float(first[1]) == pytest.approx(1.0)
