"""The almost-symplectic structure in action-angle coordinates.

The 2-form on A x T^n is sum_i da_i ^ dalpha_i + (1/2) sum_ij A_ij(a) da_i ^ da_j
with A(a) antisymmetric and polynomial.  Its exterior derivative is encoded by
the totally antisymmetric 3-tensor

    C_ijk = dA_ij/da_k + dA_ki/da_j + dA_jk/da_i

which vanishes exactly when the structure is symplectic.
"""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from .errors import DimensionMismatchError
from .poly import ActionPolynomial


class StructureMatrixField:
    """Antisymmetric n x n matrix of action polynomials.

    Only the upper triangle is stored; the accessor applies the sign, so exact
    antisymmetry holds by construction.
    """

    __slots__ = ("n", "_upper")

    def __init__(self, n: int, upper: Mapping[tuple[int, int], ActionPolynomial] | None = None):
        store: dict[tuple[int, int], ActionPolynomial] = {}
        for (i, j), p in (upper or {}).items():
            if not (0 <= i < j < n):
                raise ValueError(f"upper-triangle key ({i}, {j}) must satisfy 0 <= i < j < n")
            if not isinstance(p, ActionPolynomial):
                p = ActionPolynomial.constant(n, p)
            if p.n != n:
                raise DimensionMismatchError("entry polynomial dimension mismatch")
            if not p.is_zero:
                store[(i, j)] = p
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "_upper", store)

    def __setattr__(self, *a):  # pragma: no cover - guard
        raise AttributeError("StructureMatrixField is immutable")

    @classmethod
    def zero(cls, n: int) -> "StructureMatrixField":
        return cls(n, {})

    @classmethod
    def from_full(cls, n: int, entries) -> "StructureMatrixField":
        """Build from a full matrix, validating exact antisymmetry."""
        upper = {}
        for i in range(n):
            if not entries[i][i].is_zero:
                raise ValueError("diagonal entries must vanish")
            for j in range(i + 1, n):
                if entries[i][j] != -entries[j][i]:
                    raise ValueError(f"entries ({i},{j}) and ({j},{i}) are not antisymmetric")
                upper[(i, j)] = entries[i][j]
        return cls(n, upper)

    def entry(self, i: int, j: int) -> ActionPolynomial:
        if not (0 <= i < self.n and 0 <= j < self.n):
            raise IndexError(f"index ({i}, {j}) out of range")
        if i == j:
            return ActionPolynomial.zero(self.n)
        if i < j:
            return self._upper.get((i, j), ActionPolynomial.zero(self.n))
        p = self._upper.get((j, i))
        return -p if p is not None else ActionPolynomial.zero(self.n)

    def upper_items(self):
        return self._upper.items()

    @property
    def is_zero(self) -> bool:
        return not self._upper

    def __eq__(self, other):
        if not isinstance(other, StructureMatrixField):
            return NotImplemented
        return self.n == other.n and self._upper == other._upper

    __hash__ = None

    def evaluate(self, a) -> np.ndarray:
        """Float matrix A(a)."""
        out = np.zeros((self.n, self.n))
        for (i, j), p in self._upper.items():
            v = p(a)
            out[i, j] = v
            out[j, i] = -v
        return out

    def __repr__(self):
        return f"StructureMatrixField(n={self.n}, upper={dict(self._upper)!r})"


_PERMUTATION_SIGN = {
    (0, 1, 2): 1,
    (1, 2, 0): 1,
    (2, 0, 1): 1,
    (0, 2, 1): -1,
    (2, 1, 0): -1,
    (1, 0, 2): -1,
}


class CTensorField:
    """Totally antisymmetric 3-tensor of action polynomials.

    Components are stored only on ordered triples i < j < k; the accessor
    applies the permutation sign and returns zero on repeated indices, so total
    antisymmetry cannot be violated.
    """

    __slots__ = ("n", "_entries")

    def __init__(self, n: int, entries: Mapping[tuple[int, int, int], ActionPolynomial] | None = None):
        store: dict[tuple[int, int, int], ActionPolynomial] = {}
        for (i, j, k), p in (entries or {}).items():
            if not (0 <= i < j < k < n):
                raise ValueError(f"key ({i}, {j}, {k}) must be an ordered triple below n")
            if p.n != n:
                raise DimensionMismatchError("entry polynomial dimension mismatch")
            if not p.is_zero:
                store[(i, j, k)] = p
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "_entries", store)

    def __setattr__(self, *a):  # pragma: no cover - guard
        raise AttributeError("CTensorField is immutable")

    @classmethod
    def zero(cls, n: int) -> "CTensorField":
        return cls(n, {})

    def entry(self, i: int, j: int, k: int) -> ActionPolynomial:
        if len({i, j, k}) < 3:
            return ActionPolynomial.zero(self.n)
        triple = tuple(sorted((i, j, k)))
        p = self._entries.get(triple)
        if p is None:
            return ActionPolynomial.zero(self.n)
        rank = {v: r for r, v in enumerate(triple)}
        sign = _PERMUTATION_SIGN[(rank[i], rank[j], rank[k])]
        return p if sign == 1 else -p

    def ordered_items(self):
        return self._entries.items()

    @property
    def is_zero(self) -> bool:
        return not self._entries

    def __eq__(self, other):
        if not isinstance(other, CTensorField):
            return NotImplemented
        return self.n == other.n and self._entries == other._entries

    __hash__ = None

    def __repr__(self):
        return f"CTensorField(n={self.n}, entries={dict(self._entries)!r})"

    def contraction_matrix(self, a) -> np.ndarray:
        """Float matrix M with rows indexed by pairs i < j and M[(ij), k] = C_ijk(a)."""
        n = self.n
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        out = np.zeros((len(pairs), n))
        for r, (i, j) in enumerate(pairs):
            for k in range(n):
                p = self.entry(i, j, k)
                if not p.is_zero:
                    out[r, k] = p(a)
        return out


def c_tensor(A: StructureMatrixField) -> CTensorField:
    """The 3-tensor C_ijk = dA_ij/da_k + dA_ki/da_j + dA_jk/da_i on i < j < k."""
    n = A.n
    entries = {}
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                p = (
                    A.entry(i, j).derivative(k)
                    + A.entry(k, i).derivative(j)
                    + A.entry(j, k).derivative(i)
                )
                if not p.is_zero:
                    entries[(i, j, k)] = p
    return CTensorField(n, entries)


def kernel_at(C: CTensorField, a, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis (columns) of ker C(a) = {u : sum_k C_ijk(a) u_k = 0}.

    Computed by singular-value thresholding of the stacked contraction matrix;
    singular values below tol times the largest one count as zero.
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    n = C.n
    mat = C.contraction_matrix(a)
    if not np.any(mat):
        return np.eye(n)
    _, s, vt = np.linalg.svd(mat)
    cut = tol * s[0]
    rank = int(np.sum(s > cut))
    return vt[rank:].T.copy()


def is_symplectic(A: StructureMatrixField) -> bool:
    """True iff the 3-tensor of A vanishes identically (exact polynomial test)."""
    return c_tensor(A).is_zero
