"""Canonical example systems used across tests, docs and the CLI demos."""

from __future__ import annotations

from fractions import Fraction

from .dynamics import SystemDefinition
from .fourier import FourierSeries
from .poly import ActionPolynomial
from .structure import StructureMatrixField


def unit_vector(n: int, k: int) -> tuple[int, ...]:
    """Unit frequency vector along slot k (1-based)."""
    return tuple(1 if i == k - 1 else 0 for i in range(n))


def coupling_n4() -> StructureMatrixField:
    """n = 4 structure with the single entry A12 = a4 (non-symplectic)."""
    return StructureMatrixField(4, {(0, 1): ActionPolynomial.variable(4, 3)})


def coupling_n5() -> StructureMatrixField:
    """n = 5 structure with the single entry A12 = a1 a3 (non-symplectic)."""
    n = 5
    a1 = ActionPolynomial.variable(n, 0)
    a3 = ActionPolynomial.variable(n, 2)
    return StructureMatrixField(n, {(0, 1): a1 * a3})


def pendulum_wells(n: int = 5) -> FourierSeries:
    """-(1 + cos alpha5) cos alpha4 on T^n (n >= 5)."""
    e4 = unit_vector(n, 4)
    e5 = unit_vector(n, 5)
    c4 = FourierSeries.cosine(n, e4)
    return -c4 - c4 * FourierSeries.cosine(n, e5)


def pendulum_hamiltonian(n: int = 5) -> FourierSeries:
    """a4^2/2 + a5 - (1 + cos alpha5) cos alpha4: a periodically forced pendulum."""
    a4 = ActionPolynomial.variable(n, 3)
    a5 = ActionPolynomial.variable(n, 4)
    drift = FourierSeries.from_polynomial(a4 * a4 * Fraction(1, 2) + a5)
    return drift + pendulum_wells(n)


def pendulum_system(epsilon=1, half_width=8) -> SystemDefinition:
    """Forced-pendulum Hamiltonian on the n = 5 coupled structure.

    With epsilon = 1 the full Hamiltonian k + eps f is exactly
    pendulum_hamiltonian(); f alone holds the angle-dependent wells.
    """
    n = 5
    a4 = ActionPolynomial.variable(n, 3)
    a5 = ActionPolynomial.variable(n, 4)
    k = a4 * a4 * Fraction(1, 2) + a5
    return SystemDefinition(
        n=n,
        k=k,
        f=pendulum_wells(n),
        A=coupling_n5(),
        epsilon=epsilon,
        domain=[(-half_width, half_width)] * n,
    )


def benchmark_n3(epsilon=Fraction(1, 1000)) -> SystemDefinition:
    """Convex 3-degree-of-freedom benchmark.

    k = |a|^2 / 2, f = cos alpha1 + cos(alpha1 - alpha2) + cos alpha3, and the
    n = 3 analog of the coupled structure: A12 = a3.
    """
    n = 3
    k = sum(
        (ActionPolynomial.variable(n, i) ** 2 * Fraction(1, 2) for i in range(n)),
        ActionPolynomial.zero(n),
    )
    f = (
        FourierSeries.cosine(n, (1, 0, 0))
        + FourierSeries.cosine(n, (1, -1, 0))
        + FourierSeries.cosine(n, (0, 0, 1))
    )
    A = StructureMatrixField(n, {(0, 1): ActionPolynomial.variable(n, 2)})
    return SystemDefinition(
        n=n, k=k, f=f, A=A, epsilon=epsilon, domain=[(Fraction(1, 4), 2)] * n
    )


def single_wave_n3(epsilon=Fraction(1, 1000)) -> SystemDefinition:
    """Same convex k and structure as benchmark_n3 but f = cos alpha1 only.

    The workhorse for normal-form gain measurements: with the mean-only
    resonance set the first-order term is removed completely.
    """
    base = benchmark_n3(epsilon)
    return SystemDefinition(
        n=3,
        k=base.k,
        f=FourierSeries.cosine(3, (1, 0, 0)),
        A=base.A,
        epsilon=epsilon,
        domain=[(Fraction(1, 2), Fraction(3, 2))] * 3,
    )
