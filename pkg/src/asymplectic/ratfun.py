"""Fourier series with rational-function action coefficients.

The homological solve divides harmonic coefficients by the small-divisor
polynomials omega(a).nu, which leaves the polynomial ring unless the division
happens to be exact.  This internal layer keeps those quotients exact: each
harmonic carries a complex numerator pair over one shared real denominator.
Only the operations the normal-form step needs are provided.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Sequence

from .errors import DimensionMismatchError
from .fourier import FourierSeries, MultiIndex, order
from .poly import ActionPolynomial


def _sort_key(nu):
    return (order(nu), nu)


class RationalCoeff:
    """(num_re + i num_im) / den with polynomial parts and a nonzero real den."""

    __slots__ = ("num_re", "num_im", "den")

    def __init__(self, num_re: ActionPolynomial, num_im: ActionPolynomial,
                 den: ActionPolynomial | None = None):
        n = num_re.n
        if den is None:
            den = ActionPolynomial.constant(n, 1)
        if num_im.n != n or den.n != n:
            raise DimensionMismatchError("coefficient part dimension mismatch")
        if den.is_zero:
            raise ZeroDivisionError("zero denominator")
        if num_re.is_zero and num_im.is_zero:
            den = ActionPolynomial.constant(n, 1)
        elif den.is_constant:
            c = den.constant_value()
            num_re = num_re * (1 / c)
            num_im = num_im * (1 / c)
            den = ActionPolynomial.constant(n, 1)
        else:
            qr = num_re.divide_exact(den)
            qi = num_im.divide_exact(den)
            if qr is not None and qi is not None:
                num_re, num_im = qr, qi
                den = ActionPolynomial.constant(n, 1)
        self.num_re = num_re
        self.num_im = num_im
        self.den = den

    @property
    def n(self) -> int:
        return self.num_re.n

    @property
    def is_zero(self) -> bool:
        return self.num_re.is_zero and self.num_im.is_zero

    @property
    def is_polynomial(self) -> bool:
        return self.den.is_constant

    @classmethod
    def zero(cls, n: int) -> "RationalCoeff":
        z = ActionPolynomial.zero(n)
        return cls(z, z)

    def __add__(self, other: "RationalCoeff") -> "RationalCoeff":
        if self.den == other.den:
            return RationalCoeff(
                self.num_re + other.num_re, self.num_im + other.num_im, self.den
            )
        return RationalCoeff(
            self.num_re * other.den + other.num_re * self.den,
            self.num_im * other.den + other.num_im * self.den,
            self.den * other.den,
        )

    def __neg__(self) -> "RationalCoeff":
        return RationalCoeff(-self.num_re, -self.num_im, self.den)

    def __sub__(self, other: "RationalCoeff") -> "RationalCoeff":
        return self + (-other)

    def times_poly(self, p: ActionPolynomial) -> "RationalCoeff":
        return RationalCoeff(self.num_re * p, self.num_im * p, self.den)

    def times_scalar(self, c) -> "RationalCoeff":
        return RationalCoeff(self.num_re * c, self.num_im * c, self.den)

    def times_i(self, factor: int) -> "RationalCoeff":
        """Multiply by i * factor."""
        return RationalCoeff(
            self.num_im * (-factor), self.num_re * factor, self.den
        )

    def times(self, other: "RationalCoeff") -> "RationalCoeff":
        return RationalCoeff(
            self.num_re * other.num_re - self.num_im * other.num_im,
            self.num_re * other.num_im + self.num_im * other.num_re,
            self.den * other.den,
        )

    def derivative(self, index: int) -> "RationalCoeff":
        """Quotient rule; shares the squared denominator between both parts."""
        if self.is_polynomial:
            return RationalCoeff(
                self.num_re.derivative(index), self.num_im.derivative(index), self.den
            )
        dden = self.den.derivative(index)
        return RationalCoeff(
            self.num_re.derivative(index) * self.den - self.num_re * dden,
            self.num_im.derivative(index) * self.den - self.num_im * dden,
            self.den * self.den,
        )

    def value(self, a) -> complex:
        d = self.den(a)
        return complex(self.num_re(a) / d, self.num_im(a) / d)

    def __eq__(self, other):
        if not isinstance(other, RationalCoeff):
            return NotImplemented
        return (
            self.num_re * other.den == other.num_re * self.den
            and self.num_im * other.den == other.num_im * self.den
        )

    __hash__ = None

    def __repr__(self):
        return f"RationalCoeff(({self.num_re!r}) + i({self.num_im!r})) / ({self.den!r})"


class RationalFourier:
    """Finite Fourier sum with RationalCoeff coefficients."""

    __slots__ = ("n", "_coeffs")

    def __init__(self, n: int, coeffs: Mapping[MultiIndex, RationalCoeff] | None = None):
        store = {}
        for nu, c in (coeffs or {}).items():
            nu = tuple(int(v) for v in nu)
            if len(nu) != n:
                raise DimensionMismatchError("frequency vector length mismatch")
            if not c.is_zero:
                store[nu] = c
        self.n = n
        self._coeffs = store

    @classmethod
    def zero(cls, n: int) -> "RationalFourier":
        return cls(n, {})

    @classmethod
    def from_fourier(cls, f: FourierSeries) -> "RationalFourier":
        return cls(f.n, {nu: RationalCoeff(re, im) for nu, (re, im) in f.items()})

    def items(self):
        return self._coeffs.items()

    def sorted_items(self):
        return sorted(self._coeffs.items(), key=lambda kv: _sort_key(kv[0]))

    def support(self):
        return frozenset(self._coeffs)

    @property
    def is_zero(self) -> bool:
        return not self._coeffs

    @property
    def is_polynomial(self) -> bool:
        return all(c.is_polynomial for c in self._coeffs.values())

    def coefficient(self, nu) -> RationalCoeff:
        return self._coeffs.get(tuple(int(v) for v in nu), RationalCoeff.zero(self.n))

    def __add__(self, other: "RationalFourier") -> "RationalFourier":
        if self.n != other.n:
            raise DimensionMismatchError("dimension mismatch")
        out = dict(self._coeffs)
        for nu, c in other._coeffs.items():
            out[nu] = out[nu] + c if nu in out else c
        return RationalFourier(self.n, out)

    def __neg__(self) -> "RationalFourier":
        return RationalFourier(self.n, {nu: -c for nu, c in self._coeffs.items()})

    def __sub__(self, other: "RationalFourier") -> "RationalFourier":
        return self + (-other)

    def times_poly(self, p: ActionPolynomial) -> "RationalFourier":
        return RationalFourier(self.n, {nu: c.times_poly(p) for nu, c in self._coeffs.items()})

    def times_scalar(self, s) -> "RationalFourier":
        return RationalFourier(self.n, {nu: c.times_scalar(s) for nu, c in self._coeffs.items()})

    def times_series(self, other: "RationalFourier") -> "RationalFourier":
        out: dict[MultiIndex, RationalCoeff] = {}
        for nu1, c1 in self._coeffs.items():
            for nu2, c2 in other._coeffs.items():
                nu = tuple(x + y for x, y in zip(nu1, nu2))
                prod = c1.times(c2)
                out[nu] = out[nu] + prod if nu in out else prod
        return RationalFourier(self.n, out)

    def derivative_action(self, index: int) -> "RationalFourier":
        return RationalFourier(
            self.n, {nu: c.derivative(index) for nu, c in self._coeffs.items()}
        )

    def derivative_angle(self, index: int) -> "RationalFourier":
        out = {}
        for nu, c in self._coeffs.items():
            if nu[index]:
                out[nu] = c.times_i(nu[index])
        return RationalFourier(self.n, out)

    def evaluate(self, a, alpha) -> float:
        import numpy as np

        total = 0.0
        for nu, c in self._coeffs.items():
            phase = sum(v * x for v, x in zip(nu, alpha))
            z = c.value(a)
            total += z.real * np.cos(phase) - z.imag * np.sin(phase)
        return float(total)

    def to_fourier(self) -> FourierSeries:
        """Exact FourierSeries when every coefficient is polynomial."""
        if not self.is_polynomial:
            raise ValueError("series has non-polynomial coefficients")
        return FourierSeries(
            self.n, {nu: (c.num_re, c.num_im) for nu, c in self._coeffs.items()}
        )

    def __repr__(self):
        return f"RationalFourier({self.n}, {len(self._coeffs)} harmonics)"


def action_bracket(k_gradient: Sequence[ActionPolynomial], g: RationalFourier) -> RationalFourier:
    """{k, g} for an action-only k: sum_i dk/da_i dg/dalpha_i.

    The structure-matrix terms of the full bracket vanish because k carries no
    angle dependence.
    """
    out = RationalFourier.zero(g.n)
    for i, w in enumerate(k_gradient):
        if w.is_zero:
            continue
        out = out + g.derivative_angle(i).times_poly(w)
    return out


def rational_vector_field(chi: RationalFourier, A) -> list[RationalFourier]:
    """Components (X^a, X^alpha) of the Hamiltonian field of chi.

    Same formulas as the polynomial path: X^a = -dchi/dalpha and
    X^alpha = dchi/da + A dchi/dalpha, with A a polynomial structure matrix.
    """
    n = chi.n
    dalpha = [chi.derivative_angle(i) for i in range(n)]
    comps = [-dalpha[i] for i in range(n)]
    for i in range(n):
        comp = chi.derivative_action(i)
        for j in range(n):
            entry = A.entry(i, j)
            if entry.is_zero or dalpha[j].is_zero:
                continue
            comp = comp + dalpha[j].times_poly(entry)
        comps.append(comp)
    return comps


def field_jacobian(components: Sequence[RationalFourier]) -> list[RationalFourier]:
    """Row-major entries of the (2n)x(2n) state Jacobian of a vector field."""
    n = components[0].n
    rows = []
    for comp in components:
        for j in range(n):
            rows.append(comp.derivative_action(j))
        for j in range(n):
            rows.append(comp.derivative_angle(j))
    return rows
