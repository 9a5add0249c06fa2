from fractions import Fraction

import numpy as np
import pytest

from asymplectic.catalog import coupling_n5, pendulum_system, single_wave_n3
from asymplectic.dynamics import hamiltonian_vector_field, integrate, is_strongly_hamiltonian
from asymplectic.errors import ZeroDivisorError
from asymplectic.fourier import FourierSeries, evaluate, project, truncate
from asymplectic.normalform import (
    NormalFormResult,
    check_strong_preservation,
    frequency_ball,
    homological_residual_sup,
    lie_transform_field,
    resonance_set,
    solve_homological,
)
from asymplectic.poly import ActionPolynomial
from asymplectic.ratfun import RationalCoeff, RationalFourier, action_bracket
from asymplectic.structure import StructureMatrixField, c_tensor


def test_frequency_ball_counts():
    # |nu|_1 <= N ball sizes: n=2: 1 + 2*N*(N+1)
    for N in (1, 2, 3):
        count = sum(1 for _ in frequency_ball(2, N))
        assert count == 1 + 2 * N * (N + 1)
    assert (0, 0, 0) in set(frequency_ball(3, 1))


# -- rational coefficients ----------------------------------------------------


def test_rational_coeff_simplifies_exact_division():
    n = 2
    a1 = ActionPolynomial.variable(n, 0)
    c = RationalCoeff(a1 * a1, ActionPolynomial.zero(n), a1)
    assert c.is_polynomial
    assert c.num_re == a1


def test_rational_coeff_derivative_quotient_rule():
    n = 1
    a = ActionPolynomial.variable(n, 0)
    one = ActionPolynomial.constant(n, 1)
    c = RationalCoeff(one, ActionPolynomial.zero(n), a)  # 1/a
    d = c.derivative(0)  # -1/a^2
    assert d == RationalCoeff(-one, ActionPolynomial.zero(n), a * a)
    v = d.value([2.0])
    assert v.real == pytest.approx(-0.25)


def test_action_bracket_matches_polynomial_path():
    from asymplectic.fourier import bracket_aa

    n = 3
    k = ActionPolynomial.variable(n, 0) ** 2 * Fraction(1, 2)
    g = FourierSeries.sine(n, (1, 0, 0)) + FourierSeries.cosine(
        n, (1, -1, 0), ActionPolynomial.variable(n, 1)
    )
    A = StructureMatrixField(n, {(0, 1): ActionPolynomial.variable(n, 2)})
    viaratio = action_bracket(k.gradient(), RationalFourier.from_fourier(g))
    viaseries = bracket_aa(FourierSeries.from_polynomial(k), g, A)
    assert viaratio.is_polynomial
    assert viaratio.to_fourier() == viaseries


# -- resonance sets -----------------------------------------------------------


def test_resonance_set_nonresonant():
    lam = resonance_set((1.0, np.sqrt(2), np.sqrt(3)), 10, 1e-6)
    assert lam.members == frozenset({(0, 0, 0)})
    assert lam.min_divisor > 1e-6


def test_resonance_set_exact_zero_delta():
    lam = resonance_set((1, 1, 0), 2, 0.0)
    assert (1, -1, 0) in lam.members
    assert (0, 0, 1) in lam.members
    assert (1, 0, 0) not in lam.members


def test_resonance_set_large_delta_takes_all():
    lam = resonance_set((1, 2), 3, 100.0)
    assert lam.members == frozenset(frequency_ball(2, 3))
    assert lam.min_divisor == np.inf


def test_resonance_set_exact_rational_path():
    lam = resonance_set((Fraction(1), Fraction(1, 3)), 4, 0.0)
    assert (1, -3) in lam.members
    assert (-1, 3) in lam.members


# -- homological solve ----------------------------------------------------------


def test_solve_supported_in_lambda_gives_zero_generator():
    n = 2
    k = ActionPolynomial.variable(n, 0)
    f = FourierSeries.cosine(n, (1, 0))
    lam = resonance_set((1.0, 0.0), 2, 0.5)  # contains e1? |omega.e1| = 1 > 0.5: no
    lam_all = resonance_set((1.0, 0.0), 2, 10.0)
    out = solve_homological(k, f, lam_all, 2, (1, 1))
    assert out.chi.is_zero
    assert out.resonant == truncate(f, 2)


def test_solve_single_wave_exact():
    # k = a1, f = cos alpha1, mean-only resonance set: chi = -sin alpha1, g = 0
    n = 2
    k = ActionPolynomial.variable(n, 0)
    f = FourierSeries.cosine(n, (1, 0))
    lam = resonance_set((1.0, 0.0), 1, 1e-9)
    out = solve_homological(k, f, lam, 1, (Fraction(1), Fraction(1)))
    assert out.exact_division
    assert out.chi == -FourierSeries.sine(n, (1, 0))
    assert out.resonant.is_zero
    assert out.residual_sup < 1e-13
    # back-substitution oracle: {k, chi} + f - g == 0 exactly
    A = StructureMatrixField.zero(n)
    from asymplectic.fourier import bracket_aa

    res = bracket_aa(FourierSeries.from_polynomial(k), out.chi, A) + f - out.resonant
    assert res.is_zero


def test_solve_exact_resonance_raises():
    n = 2
    k = (
        ActionPolynomial.variable(n, 0) ** 2 + ActionPolynomial.variable(n, 1) ** 2
    ) * Fraction(1, 2)
    f = FourierSeries.cosine(n, (1, -1))
    lam = resonance_set((1.0, 1.0 + 1e-8), 2, 0.0)  # essentially empty
    with pytest.raises(ZeroDivisorError):
        solve_homological(k, f, lam, 2, (1, 1))


def test_solve_rational_generator():
    # k = |a|^2/2: divisor a1 does not divide 1/2, generator is rational
    sys3 = single_wave_n3()
    a_star = (Fraction(1), Fraction(7, 9), Fraction(5, 7))
    lam = resonance_set(tuple(a_star), 2, 1e-6)
    out = solve_homological(sys3.k, sys3.f, lam, 2, a_star)
    assert not out.exact_division
    c = out.chi_exact.coefficient((1, 0, 0))
    a1 = ActionPolynomial.variable(3, 0)
    assert c.den == a1
    assert c.num_im == ActionPolynomial.constant(3, Fraction(1, 2))
    # frozen representative divides by a1(a*) = 1
    re, im = out.chi.coefficient((1, 0, 0))
    assert im == ActionPolynomial.constant(3, Fraction(1, 2))
    # exact residual vanishes structurally
    res = action_bracket(sys3.k.gradient(), out.chi_exact) + RationalFourier.from_fourier(
        truncate(sys3.f, 2) - out.resonant
    )
    assert res.is_zero
    assert out.residual_sup < 1e-13


def test_residual_sup_on_grid():
    sys3 = single_wave_n3()
    a_star = (Fraction(1), Fraction(7, 9), Fraction(5, 7))
    lam = resonance_set(tuple(a_star), 2, 1e-6)
    out = solve_homological(sys3.k, sys3.f, lam, 2, a_star)
    sup = homological_residual_sup(
        sys3.k, out.chi_exact, truncate(sys3.f, 2), out.resonant, a_star,
        samples=2000, seed=1,
    )
    assert sup < 1e-12


# -- Lie transform ----------------------------------------------------------------


def test_zero_generator_transform_is_identity():
    sys3 = single_wave_n3(Fraction(1, 1000))
    lam = resonance_set((1.0, 0.77, 0.71), 1, 10.0)  # everything resonant
    out = solve_homological(sys3.k, sys3.f, lam, 1, (1, Fraction(77, 100), Fraction(71, 100)))
    assert out.chi.is_zero
    field = lie_transform_field(sys3, out)
    full = sys3.vector_field()
    rng = np.random.default_rng(2)
    for _ in range(4):
        x = np.concatenate([rng.uniform(0.8, 1.2, 3), rng.uniform(0, 2 * np.pi, 3)])
        assert np.allclose(field(x), full(x), atol=1e-11)


@pytest.fixture(scope="module")
def nf_single_wave():
    sys3 = single_wave_n3(Fraction(1, 1000))
    a_star = (Fraction(1), Fraction(7, 9), Fraction(5, 7))
    lam = resonance_set(tuple(a_star), 1, 1e-6)
    out = solve_homological(sys3.k, sys3.f, lam, 1, a_star)
    return sys3, out


def test_transform_continuity_in_epsilon(nf_single_wave):
    # the transformed field approaches the raw field as eps -> 0
    sys3, out = nf_single_wave
    x = np.array([1.0, 7 / 9, 5 / 7, 0.4, 1.1, 2.3])
    sups = []
    for eps in (1e-2, 5e-3, 2.5e-3):
        sys_eps = sys3.with_epsilon(Fraction(eps).limit_denominator(10**8))
        field = lie_transform_field(sys_eps, out)
        sups.append(np.max(np.abs(field(x) - sys_eps.vector_field()(x))))
    assert sups[0] > sups[1] > sups[2]
    # halving eps roughly halves the difference (O(eps))
    assert sups[1] / sups[0] == pytest.approx(0.5, abs=0.2)
    assert sups[2] / sups[1] == pytest.approx(0.5, abs=0.2)


def test_transformed_action_rate_is_second_order(nf_single_wave):
    sys3, out = nf_single_wave
    rng = np.random.default_rng(3)
    states = [
        np.concatenate([rng.uniform(0.9, 1.1, 3), rng.uniform(0, 2 * np.pi, 3)])
        for _ in range(6)
    ]
    eps_grid = [1e-3, 1e-4, 1e-5]
    raw_rates = []
    new_rates = []
    for eps in eps_grid:
        sys_eps = sys3.with_epsilon(Fraction(eps).limit_denominator(10**10))
        field = lie_transform_field(sys_eps, out)
        full = sys_eps.vector_field()
        raw_rates.append(max(np.linalg.norm(full(x)[:3]) for x in states))
        new_rates.append(max(field.action_rate(x) for x in states))
    raw_slope = np.polyfit(np.log(eps_grid), np.log(raw_rates), 1)[0]
    new_slope = np.polyfit(np.log(eps_grid), np.log(new_rates), 1)[0]
    assert raw_slope == pytest.approx(1.0, abs=0.05)
    assert new_slope == pytest.approx(2.0, abs=0.1)


def test_conjugacy_of_flows(nf_single_wave):
    # the transformed flow started from the mapped point equals the generator
    # map applied to the original flow (definition of the conjugation)
    sys3, out = nf_single_wave
    field = lie_transform_field(sys3, out)
    x0 = np.array([1.0, 7 / 9, 5 / 7, 0.3, 0.9, 2.1])
    t_end = 10.0
    y0, _ = field.generator_flow(x0, field.epsilon, with_jacobian=False)

    from scipy.integrate import solve_ivp

    transformed_sol = solve_ivp(
        lambda t, y: field(y), (0, t_end), y0, method="DOP853",
        rtol=1e-9, atol=1e-11,
    )
    ref = integrate(sys3.vector_field(), x0, t_end, rtol=1e-11, atol=1e-13, sample_count=3)
    mapped, _ = field.generator_flow(ref.state(-1), field.epsilon, with_jacobian=False)
    got = transformed_sol.y[:, -1]
    assert np.allclose(got[:3], mapped[:3], atol=1e-8)
    diff = np.abs(np.mod(got[3:] - mapped[3:] + np.pi, 2 * np.pi) - np.pi)
    assert diff.max() < 1e-7


def test_new_actions_close_to_old(nf_single_wave):
    sys3, out = nf_single_wave
    field = lie_transform_field(sys3, out)
    x = np.array([1.0, 7 / 9, 5 / 7, 0.4, 1.1, 2.3])
    na = field.new_actions(x)
    assert np.allclose(na, x[:3], atol=5 * field.epsilon)
    assert not np.allclose(na, x[:3], atol=1e-6)


def test_finalize_attaches_remainder(nf_single_wave):
    sys3, out = nf_single_wave
    field = lie_transform_field(sys3, out)
    states = [np.array([1.0, 7 / 9, 5 / 7, 0.4, 1.1, 2.3])]
    finished = field.finalize(states)
    assert finished.epsilon_used == pytest.approx(1e-3)
    assert finished.remainder_estimate is not None
    assert 0 < finished.remainder_estimate < 100 * field.epsilon**2


# -- averages lemma ----------------------------------------------------------------


def test_averages_lemma_a_component_parallel_to_lambda():
    # the action component of Pi_Lambda X_g lies in the rational span of Lambda
    n = 3
    rng = np.random.default_rng(4)
    A = StructureMatrixField(n, {(0, 1): ActionPolynomial.variable(n, 2)})
    lam_basis = [(1, -1, 0), (0, 0, 1)]
    members = set()
    for c1 in range(-3, 4):
        for c2 in range(-3, 4):
            members.add(
                tuple(c1 * a + c2 * b for a, b in zip(lam_basis[0], lam_basis[1]))
            )
    g = (
        FourierSeries.cosine(n, (1, -1, 0), ActionPolynomial.variable(n, 0))
        + FourierSeries.sine(n, (0, 0, 1))
        + FourierSeries.cosine(n, (1, 0, 0))
        + FourierSeries.sine(n, (2, 1, 0), ActionPolynomial.variable(n, 1))
    )
    field = hamiltonian_vector_field(g, A)
    proj = [project(comp, members) for comp in field.action]
    span = np.array(lam_basis, float).T
    P = span @ np.linalg.pinv(span)
    for _ in range(50):
        a = rng.uniform(0.2, 2.0, n)
        alpha = rng.uniform(0, 2 * np.pi, n)
        v = np.array([evaluate(comp, a, alpha) for comp in proj])
        assert np.linalg.norm(P @ v - v) < 1e-12


# -- strong preservation ------------------------------------------------------------


def test_preservation_for_pendulum_perturbation():
    sys5 = pendulum_system(Fraction(1, 100))
    C = c_tensor(sys5.A)
    a_star = (Fraction(1), Fraction(1, 2), Fraction(-1, 3), Fraction(11, 10), Fraction(2))
    omega = tuple(p.eval_exact(a_star) for p in sys5.k.gradient())
    lam = resonance_set(omega, 2, Fraction(1, 100))
    out = solve_homological(sys5.k, sys5.f, lam, 2, a_star)
    report = check_strong_preservation(sys5, out, C)
    assert report.f_verdict.verdict
    assert report.contract_applies
    assert report.chi_verdict.verdict
    assert report.g_verdict.verdict
    assert report.contract_satisfied


def test_preservation_vacuous_for_bad_perturbation():
    import dataclasses

    sys5 = pendulum_system(Fraction(1, 100))
    bad = dataclasses.replace(sys5, f=FourierSeries.cosine(5, (1, 0, 0, 0, 0)))
    C = c_tensor(bad.A)
    a_star = (Fraction(1), Fraction(1, 2), Fraction(-1, 3), Fraction(11, 10), Fraction(2))
    omega = tuple(p.eval_exact(a_star) for p in bad.k.gradient())
    lam = resonance_set(omega, 1, Fraction(1, 100))
    out = solve_homological(bad.k, bad.f, lam, 1, a_star)
    report = check_strong_preservation(bad, out, C)
    assert not report.f_verdict.verdict
    assert not report.contract_applies
    assert report.contract_satisfied  # vacuous


def test_preservation_angle_independent():
    import dataclasses

    sys5 = pendulum_system(Fraction(1, 100))
    quiet = dataclasses.replace(
        sys5, f=FourierSeries.from_polynomial(ActionPolynomial.variable(5, 0))
    )
    C = c_tensor(quiet.A)
    a_star = (Fraction(1), Fraction(1, 2), Fraction(-1, 3), Fraction(11, 10), Fraction(2))
    omega = tuple(p.eval_exact(a_star) for p in quiet.k.gradient())
    lam = resonance_set(omega, 1, Fraction(1, 100))
    out = solve_homological(quiet.k, quiet.f, lam, 1, a_star)
    assert out.chi.is_zero
    report = check_strong_preservation(quiet, out, C)
    assert report.chi_verdict.verdict and report.g_verdict.verdict
