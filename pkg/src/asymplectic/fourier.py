"""Truncated Fourier series on T^n with exact polynomial action dependence.

A series f(a, alpha) = sum_nu fhat_nu(a) e^{i nu.alpha} is stored as a finite
map from integer frequency vectors nu to complex coefficients, each coefficient
a pair (real part, imaginary part) of :class:`~asymplectic.poly.ActionPolynomial`.
Storage is Hermitian-closed (the coefficient at -nu is the conjugate of the one
at nu), which makes real-valued evaluation structural rather than numerical.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DimensionMismatchError
from .poly import ActionPolynomial, as_fraction

MultiIndex = tuple[int, ...]


def order(nu: Sequence[int]) -> int:
    """Order |nu| of a frequency vector: the sum of absolute components."""
    return sum(abs(int(v)) for v in nu)


def negate(nu: Sequence[int]) -> MultiIndex:
    return tuple(-int(v) for v in nu)


def _as_index(nu: Sequence[int], n: int) -> MultiIndex:
    nu = tuple(int(v) for v in nu)
    if len(nu) != n:
        raise DimensionMismatchError(f"frequency vector {nu} has length != {n}")
    return nu


def _sort_key(nu: MultiIndex):
    return (order(nu), nu)


class FourierSeries:
    """Finite Fourier series with exact complex-polynomial coefficients."""

    __slots__ = ("n", "_coeffs")

    def __init__(self, n: int, coeffs: Mapping[MultiIndex, tuple] | None = None):
        """Build from a map nu -> (re, im).

        Missing conjugate partners are filled in automatically; if both nu and
        -nu are supplied they must already be conjugate.  The mean harmonic
        (nu = 0) must be real.
        """
        store: dict[MultiIndex, tuple[ActionPolynomial, ActionPolynomial]] = {}
        for nu, (re, im) in (coeffs or {}).items():
            nu = _as_index(nu, n)
            re = self._as_poly(re, n)
            im = self._as_poly(im, n)
            if re.is_zero and im.is_zero:
                continue
            neg = negate(nu)
            if nu == neg:  # nu = 0
                if not im.is_zero:
                    raise ValueError("the mean harmonic must have a real coefficient")
                store[nu] = (re, im)
                continue
            conj = (re, -im)
            if nu in store and store[nu] != (re, im):
                raise ValueError(f"conflicting coefficients supplied at {nu}")
            if neg in store and store[neg] != conj:
                raise ValueError(f"coefficients at {nu} and {neg} are not conjugate")
            store[nu] = (re, im)
            store[neg] = conj
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "_coeffs", store)

    def __setattr__(self, *a):  # pragma: no cover - guard
        raise AttributeError("FourierSeries is immutable")

    @staticmethod
    def _as_poly(value, n) -> ActionPolynomial:
        if isinstance(value, ActionPolynomial):
            if value.n != n:
                raise DimensionMismatchError("coefficient polynomial dimension mismatch")
            return value
        return ActionPolynomial.constant(n, as_fraction(value))

    # -- constructors --------------------------------------------------------

    @classmethod
    def zero(cls, n: int) -> "FourierSeries":
        return cls(n, {})

    @classmethod
    def from_polynomial(cls, p: ActionPolynomial) -> "FourierSeries":
        """Angle-independent series with mean harmonic p(a)."""
        return cls(p.n, {(0,) * p.n: (p, ActionPolynomial.zero(p.n))})

    @classmethod
    def cosine(cls, n: int, nu: Sequence[int], scale=1) -> "FourierSeries":
        """scale(a) * cos(nu . alpha); scale may be rational or polynomial."""
        nu = _as_index(nu, n)
        p = cls._as_poly(scale, n)
        half = p * Fraction(1, 2)
        z = ActionPolynomial.zero(n)
        if all(v == 0 for v in nu):
            return cls(n, {nu: (p, z)})
        return cls(n, {nu: (half, z), negate(nu): (half, z)})

    @classmethod
    def sine(cls, n: int, nu: Sequence[int], scale=1) -> "FourierSeries":
        """scale(a) * sin(nu . alpha)."""
        nu = _as_index(nu, n)
        p = cls._as_poly(scale, n)
        half = p * Fraction(1, 2)
        z = ActionPolynomial.zero(n)
        if all(v == 0 for v in nu):
            return cls.zero(n)
        return cls(n, {nu: (z, -half), negate(nu): (z, half)})

    # -- queries -------------------------------------------------------------

    def coefficient(self, nu: Sequence[int]) -> tuple[ActionPolynomial, ActionPolynomial]:
        nu = _as_index(nu, self.n)
        z = ActionPolynomial.zero(self.n)
        return self._coeffs.get(nu, (z, z))

    def support(self) -> frozenset[MultiIndex]:
        return frozenset(self._coeffs)

    def items(self):
        return self._coeffs.items()

    def sorted_items(self):
        return sorted(self._coeffs.items(), key=lambda kv: _sort_key(kv[0]))

    @property
    def is_zero(self) -> bool:
        return not self._coeffs

    def max_order(self) -> int:
        """Largest stored |nu|; the zero series reports -1."""
        if not self._coeffs:
            return -1
        return max(order(nu) for nu in self._coeffs)

    def angle_dependencies(self) -> frozenset[int]:
        """0-based angle indices the series actually depends on."""
        return frozenset(
            k for nu in self._coeffs for k, v in enumerate(nu) if v != 0
        )

    def __eq__(self, other):
        if not isinstance(other, FourierSeries):
            return NotImplemented
        return self.n == other.n and self._coeffs == other._coeffs

    __hash__ = None

    def __bool__(self):
        return bool(self._coeffs)

    def __repr__(self):
        if not self._coeffs:
            return f"FourierSeries({self.n}, 0)"
        parts = [f"{nu}: ({re!r}, {im!r})" for nu, (re, im) in self.sorted_items()]
        return f"FourierSeries({self.n}, {{{', '.join(parts[:6])}{', ...' if len(parts) > 6 else ''}}})"

    # -- linear structure ------------------------------------------------------

    def _check(self, other: "FourierSeries"):
        if self.n != other.n:
            raise DimensionMismatchError(f"dimensions {self.n} != {other.n}")

    def __add__(self, other):
        if not isinstance(other, FourierSeries):
            return NotImplemented
        self._check(other)
        out: dict[MultiIndex, tuple] = {
            nu: pair for nu, pair in self._coeffs.items()
        }
        for nu, (re, im) in other._coeffs.items():
            if nu in out:
                out[nu] = (out[nu][0] + re, out[nu][1] + im)
            else:
                out[nu] = (re, im)
        return FourierSeries(self.n, out)

    def __neg__(self):
        return FourierSeries(
            self.n, {nu: (-re, -im) for nu, (re, im) in self._coeffs.items()}
        )

    def __sub__(self, other):
        if not isinstance(other, FourierSeries):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        """Product with a rational, a real polynomial, or another series."""
        if isinstance(other, (int, Fraction, ActionPolynomial)):
            p = self._as_poly(other, self.n)
            return FourierSeries(
                self.n, {nu: (re * p, im * p) for nu, (re, im) in self._coeffs.items()}
            )
        if not isinstance(other, FourierSeries):
            return NotImplemented
        self._check(other)
        out: dict[MultiIndex, list] = {}
        z = ActionPolynomial.zero(self.n)
        for nu1, (re1, im1) in self._coeffs.items():
            for nu2, (re2, im2) in other._coeffs.items():
                nu = tuple(x + y for x, y in zip(nu1, nu2))
                re = re1 * re2 - im1 * im2
                im = re1 * im2 + im1 * re2
                if nu in out:
                    out[nu][0] = out[nu][0] + re
                    out[nu][1] = out[nu][1] + im
                else:
                    out[nu] = [re, im]
        return FourierSeries(self.n, {nu: (re, im) for nu, (re, im) in out.items()})

    __rmul__ = __mul__

    # -- evaluation ------------------------------------------------------------

    def __call__(self, a, alpha) -> float:
        return evaluate(self, a, alpha)

    def complex_value(self, a, alpha) -> complex:
        """Full complex sum (the imaginary part is a roundoff diagnostic)."""
        if len(a) != self.n or len(alpha) != self.n:
            raise DimensionMismatchError("evaluation point dimension mismatch")
        total = 0.0 + 0.0j
        for nu, (re, im) in self._coeffs.items():
            phase = sum(v * x for v, x in zip(nu, alpha))
            total += complex(re(a), im(a)) * complex(np.cos(phase), np.sin(phase))
        return total


# -- module-level operations ----------------------------------------------


def evaluate(f: FourierSeries, a, alpha) -> float:
    """Real value sum_nu Re[fhat_nu(a) e^{i nu.alpha}]; angles are taken mod 2 pi."""
    if len(a) != f.n or len(alpha) != f.n:
        raise DimensionMismatchError("evaluation point dimension mismatch")
    total = 0.0
    for nu, (re, im) in f.items():
        phase = sum(v * x for v, x in zip(nu, alpha))
        total += re(a) * np.cos(phase) - im(a) * np.sin(phase)
    return float(total)


def truncate(f: FourierSeries, cutoff: int) -> FourierSeries:
    """Keep the harmonics with |nu| <= cutoff."""
    if cutoff < 0:
        raise ValueError("cutoff must be non-negative")
    return FourierSeries(
        f.n, {nu: pair for nu, pair in f.items() if order(nu) <= cutoff}
    )


def ultraviolet(f: FourierSeries, cutoff: int) -> FourierSeries:
    """The discarded tail f - truncate(f, cutoff)."""
    if cutoff < 0:
        raise ValueError("cutoff must be non-negative")
    return FourierSeries(
        f.n, {nu: pair for nu, pair in f.items() if order(nu) > cutoff}
    )


def project(f: FourierSeries, members) -> FourierSeries:
    """Keep exactly the harmonics whose nu lies in `members`.

    `members` is anything supporting membership tests on frequency tuples
    (a set of tuples, or an IntegerLattice).
    """
    return FourierSeries(
        f.n, {nu: pair for nu, pair in f.items() if tuple(nu) in members}
    )


def spectrum(f: FourierSeries, a, tol=0) -> frozenset[MultiIndex]:
    """Frequency vectors whose coefficient at the point a has modulus > tol.

    With tol = 0 and a rational point the test is exact; float inputs fall
    back to numeric evaluation.
    """
    if tol < 0:
        raise ValueError("tolerance must be non-negative")
    exact = tol == 0 and all(not isinstance(x, float) for x in a)
    found = []
    if exact:
        pt = [as_fraction(x) for x in a]
        for nu, (re, im) in f.items():
            if re.eval_exact(pt) != 0 or im.eval_exact(pt) != 0:
                found.append(nu)
    else:
        t2 = float(tol) ** 2
        for nu, (re, im) in f.items():
            if re(a) ** 2 + im(a) ** 2 > t2:
                found.append(nu)
    return frozenset(found)


def differentiate_action(f: FourierSeries, index: int) -> FourierSeries:
    """Exact partial derivative with respect to the action a_{index} (0-based)."""
    return FourierSeries(
        f.n,
        {nu: (re.derivative(index), im.derivative(index)) for nu, (re, im) in f.items()},
    )


def differentiate_angle(f: FourierSeries, index: int) -> FourierSeries:
    """Exact partial derivative with respect to the angle alpha_{index} (0-based).

    Differentiation multiplies the harmonic at nu by i * nu_index.
    """
    if not 0 <= index < f.n:
        raise IndexError(f"angle index {index} out of range for n={f.n}")
    out = {}
    for nu, (re, im) in f.items():
        v = nu[index]
        if v == 0:
            continue
        out[nu] = (im * (-v), re * v)
    return FourierSeries(f.n, out)


def angle_gradient(f: FourierSeries) -> tuple[FourierSeries, ...]:
    return tuple(differentiate_angle(f, i) for i in range(f.n))


def action_gradient(f: FourierSeries) -> tuple[FourierSeries, ...]:
    return tuple(differentiate_action(f, i) for i in range(f.n))


def bracket_aa(f: FourierSeries, g: FourierSeries, A) -> FourierSeries:
    """Almost-Poisson bracket in action-angle coordinates:

        {f, g} = sum_i (df/da_i dg/dalpha_i - df/dalpha_i dg/da_i)
                 + sum_{i,j} A_ij df/dalpha_i dg/dalpha_j

    `A` is a structure matrix field (anything with .n and .entry(i, j) giving
    the polynomial entries of the antisymmetric action block).
    """
    if f.n != g.n or f.n != A.n:
        raise DimensionMismatchError("bracket operand dimension mismatch")
    n = f.n
    fa = action_gradient(f)
    fal = angle_gradient(f)
    ga = action_gradient(g)
    gal = angle_gradient(g)
    out = FourierSeries.zero(n)
    for i in range(n):
        out = out + fa[i] * gal[i] - fal[i] * ga[i]
    for i in range(n):
        if fal[i].is_zero:
            continue
        for j in range(n):
            if i == j or gal[j].is_zero:
                continue
            entry = A.entry(i, j)
            if entry.is_zero:
                continue
            out = out + (fal[i] * gal[j]) * entry
    return out
