"""Exact sparse polynomials in the n action variables.

Coefficients are rationals (`fractions.Fraction`), terms are keyed by exponent
multi-indices (tuples of non-negative ints, one slot per action variable).
All arithmetic, differentiation and substitution is exact; a float evaluation
path exists for numerics.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import DimensionMismatchError

Exponent = tuple[int, ...]


def as_fraction(x) -> Fraction:
    """Coerce ints, strings and Fractions to Fraction; floats are converted exactly."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, str)):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as a rational number")


def _grlex_key(exponent: Exponent):
    return (sum(exponent), exponent)


class ActionPolynomial:
    """Immutable sparse polynomial over the rationals.

    Stored terms never carry a zero coefficient, so the zero polynomial has an
    empty term map and equality is plain dict equality.
    """

    __slots__ = ("n", "_terms")

    def __init__(self, n: int, terms: Mapping[Exponent, Fraction] | None = None):
        if n < 0:
            raise ValueError("dimension must be non-negative")
        clean: dict[Exponent, Fraction] = {}
        for expo, coeff in (terms or {}).items():
            expo = tuple(int(e) for e in expo)
            if len(expo) != n:
                raise DimensionMismatchError(f"exponent {expo} has length != {n}")
            if any(e < 0 for e in expo):
                raise ValueError(f"negative exponent in {expo}")
            c = as_fraction(coeff)
            if c != 0:
                acc = clean.get(expo)
                clean[expo] = c if acc is None else acc + c
                if clean[expo] == 0:
                    del clean[expo]
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "_terms", clean)

    def __setattr__(self, *a):  # pragma: no cover - guard
        raise AttributeError("ActionPolynomial is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, n: int) -> "ActionPolynomial":
        return cls(n, {})

    @classmethod
    def constant(cls, n: int, value) -> "ActionPolynomial":
        return cls(n, {(0,) * n: as_fraction(value)})

    @classmethod
    def variable(cls, n: int, index: int) -> "ActionPolynomial":
        """The monomial a_{index} (0-based index)."""
        if not 0 <= index < n:
            raise IndexError(f"variable index {index} out of range for n={n}")
        expo = tuple(1 if i == index else 0 for i in range(n))
        return cls(n, {expo: Fraction(1)})

    @classmethod
    def monomial(cls, n: int, exponent: Sequence[int], coeff=1) -> "ActionPolynomial":
        return cls(n, {tuple(exponent): as_fraction(coeff)})

    # -- queries -----------------------------------------------------------

    @property
    def terms(self) -> dict[Exponent, Fraction]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self._terms)

    def constant_value(self) -> Fraction:
        """Value of a constant polynomial (errors if non-constant terms exist)."""
        if not self.is_constant:
            raise ValueError("polynomial is not constant")
        return self._terms.get((0,) * self.n, Fraction(0))

    def degree(self) -> int:
        """Total degree; the zero polynomial reports -1."""
        if not self._terms:
            return -1
        return max(sum(e) for e in self._terms)

    def leading(self) -> tuple[Exponent, Fraction]:
        """Leading term in graded-lex order."""
        expo = max(self._terms, key=_grlex_key)
        return expo, self._terms[expo]

    def __eq__(self, other):
        if not isinstance(other, ActionPolynomial):
            return NotImplemented
        return self.n == other.n and self._terms == other._terms

    __hash__ = None

    def __bool__(self):
        return bool(self._terms)

    def __repr__(self):
        if not self._terms:
            return f"ActionPolynomial({self.n}, 0)"
        bits = []
        for expo in sorted(self._terms, key=_grlex_key, reverse=True):
            c = self._terms[expo]
            mono = "*".join(
                f"a{i + 1}" + (f"^{e}" if e > 1 else "")
                for i, e in enumerate(expo)
                if e
            )
            bits.append(f"{c}" + (f"*{mono}" if mono else ""))
        return f"ActionPolynomial({self.n}, {' + '.join(bits)})"

    # -- ring operations ---------------------------------------------------

    def _check(self, other: "ActionPolynomial"):
        if self.n != other.n:
            raise DimensionMismatchError(f"dimensions {self.n} != {other.n}")

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = ActionPolynomial.constant(self.n, other)
        if not isinstance(other, ActionPolynomial):
            return NotImplemented
        self._check(other)
        out = dict(self._terms)
        for expo, c in other._terms.items():
            acc = out.get(expo)
            out[expo] = c if acc is None else acc + c
            if out[expo] == 0:
                del out[expo]
        return ActionPolynomial(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return ActionPolynomial(self.n, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = ActionPolynomial.constant(self.n, other)
        if not isinstance(other, ActionPolynomial):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = as_fraction(other)
            if c == 0:
                return ActionPolynomial.zero(self.n)
            return ActionPolynomial(self.n, {e: c * v for e, v in self._terms.items()})
        if not isinstance(other, ActionPolynomial):
            return NotImplemented
        self._check(other)
        out: dict[Exponent, Fraction] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                acc = out.get(expo := e)
                out[expo] = c1 * c2 if acc is None else acc + c1 * c2
                if out[expo] == 0:
                    del out[expo]
        return ActionPolynomial(self.n, out)

    __rmul__ = __mul__

    def __pow__(self, power: int):
        if not isinstance(power, int) or power < 0:
            raise ValueError("only non-negative integer powers")
        result = ActionPolynomial.constant(self.n, 1)
        base = self
        p = power
        while p:
            if p & 1:
                result = result * base
            base = base * base
            p >>= 1
        return result

    # -- calculus ----------------------------------------------------------

    def derivative(self, index: int) -> "ActionPolynomial":
        """Exact partial derivative with respect to a_{index} (0-based)."""
        if not 0 <= index < self.n:
            raise IndexError(f"variable index {index} out of range for n={self.n}")
        out: dict[Exponent, Fraction] = {}
        for expo, c in self._terms.items():
            e = expo[index]
            if e == 0:
                continue
            new = list(expo)
            new[index] = e - 1
            out[tuple(new)] = c * e
        return ActionPolynomial(self.n, out)

    def gradient(self) -> tuple["ActionPolynomial", ...]:
        return tuple(self.derivative(i) for i in range(self.n))

    def hessian(self) -> tuple[tuple["ActionPolynomial", ...], ...]:
        grad = self.gradient()
        return tuple(tuple(g.derivative(j) for j in range(self.n)) for g in grad)

    # -- evaluation and substitution ----------------------------------------

    def eval_exact(self, point: Sequence) -> Fraction:
        """Exact value at a rational point."""
        if len(point) != self.n:
            raise DimensionMismatchError(f"point has length {len(point)} != {self.n}")
        pt = [as_fraction(x) for x in point]
        total = Fraction(0)
        for expo, c in self._terms.items():
            v = c
            for x, e in zip(pt, expo):
                if e:
                    v *= x**e
            total += v
        return total

    def __call__(self, point) -> float:
        """Float value at a numeric point."""
        if len(point) != self.n:
            raise DimensionMismatchError(f"point has length {len(point)} != {self.n}")
        total = 0.0
        for expo, c in self._terms.items():
            v = float(c)
            for x, e in zip(point, expo):
                for _ in range(e):
                    v *= x
            total += v
        return total

    def substitute_affine(self, matrix, offset, m: int | None = None) -> "ActionPolynomial":
        """Substitute a_i = sum_j matrix[i][j] x_j + offset[i], exactly.

        `matrix` is n x m with rational entries; the result is a polynomial in
        the m new variables.
        """
        m = self.n if m is None else m
        rows = [[as_fraction(v) for v in row] for row in matrix]
        off = [as_fraction(v) for v in offset]
        if len(rows) != self.n or any(len(r) != m for r in rows) or len(off) != self.n:
            raise DimensionMismatchError("substitution shape mismatch")
        images = []
        for i in range(self.n):
            terms: dict[Exponent, Fraction] = {}
            for j in range(m):
                if rows[i][j] != 0:
                    expo = tuple(1 if jj == j else 0 for jj in range(m))
                    terms[expo] = rows[i][j]
            if off[i] != 0:
                terms[(0,) * m] = off[i]
            images.append(ActionPolynomial(m, terms))
        out = ActionPolynomial.zero(m)
        for expo, c in self._terms.items():
            term = ActionPolynomial.constant(m, c)
            for img, e in zip(images, expo):
                if e:
                    term = term * img**e
            out = out + term
        return out

    def restrict(self, fixed: Mapping[int, object], keep: Sequence[int]) -> "ActionPolynomial":
        """Fix the variables in `fixed` (0-based index -> rational) and keep `keep`.

        Returns a polynomial of dimension len(keep) in the kept variables, in
        the order given.
        """
        keep = list(keep)
        fixed_vals = {i: as_fraction(v) for i, v in fixed.items()}
        if set(keep) & set(fixed_vals):
            raise ValueError("a variable cannot be both kept and fixed")
        if set(keep) | set(fixed_vals) != set(range(self.n)):
            raise ValueError("kept and fixed variables must cover all indices")
        m = len(keep)
        pos = {var: j for j, var in enumerate(keep)}
        out: dict[Exponent, Fraction] = {}
        for expo, c in self._terms.items():
            v = c
            new = [0] * m
            for i, e in enumerate(expo):
                if e == 0:
                    continue
                if i in fixed_vals:
                    v *= fixed_vals[i] ** e
                else:
                    new[pos[i]] = e
            if v != 0:
                key = tuple(new)
                acc = out.get(key)
                out[key] = v if acc is None else acc + v
                if out[key] == 0:
                    del out[key]
        return ActionPolynomial(m, out)

    def divide_exact(self, divisor: "ActionPolynomial") -> "ActionPolynomial | None":
        """Exact quotient self / divisor, or None when the division is not exact.

        Standard single-divisor reduction in graded-lex order: if the divisor
        divides exactly, the leading term of the remainder is divisible by the
        divisor's leading term at every step.
        """
        self._check(divisor)
        if divisor.is_zero:
            raise ZeroDivisionError("polynomial division by zero")
        if self.is_zero:
            return ActionPolynomial.zero(self.n)
        lead_d, coef_d = divisor.leading()
        quotient: dict[Exponent, Fraction] = {}
        rem = self
        while not rem.is_zero:
            lead_r, coef_r = rem.leading()
            diff = tuple(r - d for r, d in zip(lead_r, lead_d))
            if any(e < 0 for e in diff):
                return None
            c = coef_r / coef_d
            quotient[diff] = c
            rem = rem - ActionPolynomial.monomial(self.n, diff, c) * divisor
        return ActionPolynomial(self.n, quotient)

    # -- numeric compilation -------------------------------------------------

    def float_table(self):
        """(coeffs, exponents) float64/int64 arrays for fast evaluation."""
        import numpy as np

        if not self._terms:
            return np.zeros(0), np.zeros((0, self.n), dtype=np.int64)
        expos = sorted(self._terms, key=_grlex_key)
        coeffs = np.array([float(self._terms[e]) for e in expos])
        mat = np.array(expos, dtype=np.int64).reshape(len(expos), self.n)
        return coeffs, mat


def poly_dot(left: Sequence[ActionPolynomial], right: Sequence) -> ActionPolynomial:
    """Dot product of a polynomial vector with a rational/int vector."""
    if not left:
        raise ValueError("empty dot product")
    n = left[0].n
    out = ActionPolynomial.zero(n)
    for p, x in zip(left, right):
        out = out + p * as_fraction(x)
    return out
