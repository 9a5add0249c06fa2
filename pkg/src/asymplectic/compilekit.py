"""Flat term tables and numba kernels for fast numeric evaluation.

Symbolic series (polynomial- or rational-coefficient Fourier sums) are
flattened into pooled arrays: one row per harmonic term, with monomial pools
for the numerator (complex) and denominator (real) coefficient functions.
A "field" is a list of scalar components sharing one pool, evaluated in a
single jitted pass.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit


@dataclass(frozen=True)
class FieldTable:
    """Pooled term tables for `ncomp` scalar functions of (a, alpha)."""

    n: int
    ncomp: int
    comp_off: np.ndarray  # (ncomp+1,) int64: term ranges per component
    nu: np.ndarray        # (T, n) float64: harmonic frequency rows
    num_off: np.ndarray   # (T+1,) int64: monomial ranges per term
    num_cre: np.ndarray   # (M,) float64
    num_cim: np.ndarray   # (M,) float64
    num_exp: np.ndarray   # (M, n) int64
    den_off: np.ndarray   # (T+1,) int64
    den_c: np.ndarray     # (Md,) float64
    den_exp: np.ndarray   # (Md, n) int64

    @property
    def arrays(self):
        return (
            self.comp_off,
            self.nu,
            self.num_off,
            self.num_cre,
            self.num_cim,
            self.num_exp,
            self.den_off,
            self.den_c,
            self.den_exp,
        )

    def evaluate(self, a, alpha) -> np.ndarray:
        out = np.empty(self.ncomp)
        eval_components(*self.arrays, np.asarray(a, float), np.asarray(alpha, float), out)
        return out


def _poly_pool(poly, n, coeffs, expos):
    """Append a polynomial's monomials to the pools; returns the count."""
    count = 0
    for expo, c in poly.items():
        coeffs.append(float(c))
        expos.append(tuple(expo))
        count += 1
    return count


def _iter_scalar_terms(scalar):
    """Yield (nu, re_poly, im_poly, den_poly) rows for one scalar component.

    Accepts FourierSeries (den = 1) or RationalFourier (shared real
    denominator per harmonic).
    """
    from .fourier import FourierSeries
    from .poly import ActionPolynomial

    if isinstance(scalar, FourierSeries):
        one = ActionPolynomial.constant(scalar.n, 1)
        for nu, (re, im) in scalar.sorted_items():
            yield nu, re, im, one
        return
    # ratfun.RationalFourier duck type: sorted_items of nu -> RationalCoeff
    for nu, coeff in scalar.sorted_items():
        yield nu, coeff.num_re, coeff.num_im, coeff.den


def compile_field(scalars, n: int) -> FieldTable:
    """Flatten scalar components (series over (a, alpha)) into one FieldTable."""
    comp_off = [0]
    nus = []
    num_off = [0]
    num_cre: list[float] = []
    num_expos: list[tuple] = []
    num_cim: list[float] = []
    den_off = [0]
    den_c: list[float] = []
    den_expos: list[tuple] = []

    for scalar in scalars:
        nterms = 0
        for nu, re, im, den in _iter_scalar_terms(scalar):
            nus.append(tuple(float(v) for v in nu))
            re_items = list(re.items())
            im_items = list(im.items())
            # interleave: a monomial may appear in both parts; keep separate slots
            for expo, c in re_items:
                num_cre.append(float(c))
                num_cim.append(0.0)
                num_expos.append(tuple(expo))
            for expo, c in im_items:
                num_cre.append(0.0)
                num_cim.append(float(c))
                num_expos.append(tuple(expo))
            num_off.append(num_off[-1] + len(re_items) + len(im_items))
            den_items = list(den.items())
            if not den_items:
                raise ZeroDivisionError("zero denominator polynomial in compiled term")
            for expo, c in den_items:
                den_c.append(float(c))
                den_expos.append(tuple(expo))
            den_off.append(den_off[-1] + len(den_items))
            nterms += 1
        comp_off.append(comp_off[-1] + nterms)

    T = len(nus)
    return FieldTable(
        n=n,
        ncomp=len(comp_off) - 1,
        comp_off=np.asarray(comp_off, np.int64),
        nu=np.asarray(nus, float).reshape(T, n),
        num_off=np.asarray(num_off, np.int64),
        num_cre=np.asarray(num_cre, float),
        num_cim=np.asarray(num_cim, float),
        num_exp=np.asarray(num_expos, np.int64).reshape(len(num_expos), n),
        den_off=np.asarray(den_off, np.int64),
        den_c=np.asarray(den_c, float),
        den_exp=np.asarray(den_expos, np.int64).reshape(len(den_expos), n),
    )


def compile_scalar(scalar, n: int) -> FieldTable:
    return compile_field([scalar], n)


@njit(cache=True)
def eval_components(comp_off, nu, num_off, num_cre, num_cim, num_exp,
                    den_off, den_c, den_exp, a, alpha, out):
    """out[c] = sum over terms of Re[(num(a)/den(a)) e^{i nu.alpha}]."""
    n = a.shape[0]
    ncomp = comp_off.shape[0] - 1
    for c in range(ncomp):
        acc = 0.0
        for t in range(comp_off[c], comp_off[c + 1]):
            zre = 0.0
            zim = 0.0
            for m in range(num_off[t], num_off[t + 1]):
                mono = 1.0
                for j in range(n):
                    e = num_exp[m, j]
                    for _ in range(e):
                        mono *= a[j]
                zre += num_cre[m] * mono
                zim += num_cim[m] * mono
            den = 0.0
            for m in range(den_off[t], den_off[t + 1]):
                mono = 1.0
                for j in range(n):
                    e = den_exp[m, j]
                    for _ in range(e):
                        mono *= a[j]
                den += den_c[m] * mono
            phase = 0.0
            for j in range(n):
                phase += nu[t, j] * alpha[j]
            acc += (zre * np.cos(phase) - zim * np.sin(phase)) / den
        out[c] = acc
    return out


@njit(cache=True)
def eval_state(comp_off, nu, num_off, num_cre, num_cim, num_exp,
               den_off, den_c, den_exp, n, x, out):
    """Evaluate a 2n-component field at phase-space state x = (a, alpha)."""
    eval_components(comp_off, nu, num_off, num_cre, num_cim, num_exp,
                    den_off, den_c, den_exp, x[:n], x[n:2 * n], out)
    return out
