from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from asymplectic.poly import ActionPolynomial
from asymplectic.structure import (
    CTensorField,
    StructureMatrixField,
    c_tensor,
    is_symplectic,
    kernel_at,
)


def coupling_n4():
    """n = 4 structure with A12 = a4."""
    return StructureMatrixField(4, {(0, 1): ActionPolynomial.variable(4, 3)})


def coupling_n5():
    """n = 5 structure with A12 = a1 a3."""
    n = 5
    a1 = ActionPolynomial.variable(n, 0)
    a3 = ActionPolynomial.variable(n, 2)
    return StructureMatrixField(n, {(0, 1): a1 * a3})


@st.composite
def random_structures(draw, n_choices=(4, 5, 6), max_degree=2):
    n = draw(st.sampled_from(n_choices))
    upper = {}
    for _ in range(draw(st.integers(min_value=1, max_value=4))):
        i = draw(st.integers(min_value=0, max_value=n - 2))
        j = draw(st.integers(min_value=i + 1, max_value=n - 1))
        expo = [0] * n
        for _ in range(draw(st.integers(min_value=0, max_value=max_degree))):
            expo[draw(st.integers(min_value=0, max_value=n - 1))] += 1
        c = Fraction(draw(st.integers(min_value=-5, max_value=5)))
        prev = upper.get((i, j), ActionPolynomial.zero(n))
        upper[(i, j)] = prev + ActionPolynomial(n, {tuple(expo): c})
    return StructureMatrixField(n, upper)


def test_antisymmetry_by_construction():
    A = coupling_n4()
    a4 = ActionPolynomial.variable(4, 3)
    assert A.entry(0, 1) == a4
    assert A.entry(1, 0) == -a4
    assert A.entry(2, 2).is_zero


def test_from_full_validates():
    n = 2
    one = ActionPolynomial.constant(n, 1)
    zero = ActionPolynomial.zero(n)
    with pytest.raises(ValueError):
        StructureMatrixField.from_full(n, [[zero, one], [one, zero]])
    ok = StructureMatrixField.from_full(n, [[zero, one], [-one, zero]])
    assert ok.entry(0, 1) == one


def test_c_tensor_constant_structure_is_zero():
    n = 4
    A = StructureMatrixField(n, {(0, 1): ActionPolynomial.constant(n, 3)})
    assert c_tensor(A).is_zero
    assert is_symplectic(A)


def test_c_tensor_n4_example():
    # termwise: C_124 = dA12/da4 = 1, everything else vanishes
    C = c_tensor(coupling_n4())
    assert C.entry(0, 1, 3) == ActionPolynomial.constant(4, 1)
    assert dict(C.ordered_items()) == {
        (0, 1, 3): ActionPolynomial.constant(4, 1)
    }
    # accessor applies permutation signs
    assert C.entry(1, 0, 3) == ActionPolynomial.constant(4, -1)
    assert C.entry(3, 0, 1) == ActionPolynomial.constant(4, 1)
    assert C.entry(0, 0, 3).is_zero


def test_c_tensor_n5_example():
    C = c_tensor(coupling_n5())
    a1 = ActionPolynomial.variable(5, 0)
    assert dict(C.ordered_items()) == {(0, 1, 2): a1}


def test_c_tensor_linear_in_A_and_shift_invariant():
    A = coupling_n4()
    n = A.n
    shift = StructureMatrixField(n, {(0, 1): ActionPolynomial.constant(n, 7)})
    both = StructureMatrixField(
        n, {(0, 1): A.entry(0, 1) + shift.entry(0, 1)}
    )
    assert c_tensor(both) == c_tensor(A)


def test_kernel_full_space_for_zero_tensor():
    C = CTensorField.zero(4)
    basis = kernel_at(C, [0.3, 0.7, -1.0, 2.0])
    assert basis.shape == (4, 4)


def test_kernel_n4_example():
    C = c_tensor(coupling_n4())
    basis = kernel_at(C, [0.2, -0.4, 1.7, 0.9])
    assert basis.shape == (4, 1)
    direction = basis[:, 0] / np.linalg.norm(basis[:, 0])
    assert np.allclose(np.abs(direction), [0, 0, 1, 0], atol=1e-12)


def test_kernel_n5_example():
    C = c_tensor(coupling_n5())
    basis = kernel_at(C, [1.3, 0.2, -0.5, 0.8, 0.1])
    assert basis.shape == (5, 2)
    # spanned by e4, e5: the first three rows vanish
    assert np.allclose(basis[:3, :], 0.0, atol=1e-12)


def test_is_symplectic_examples():
    assert not is_symplectic(coupling_n4())
    assert not is_symplectic(coupling_n5())


def test_n2_always_symplectic():
    n = 2
    p = ActionPolynomial(n, {(2, 1): Fraction(5, 3), (0, 3): 2})
    A = StructureMatrixField(n, {(0, 1): p})
    assert is_symplectic(A)


def test_n3_nonzero_tensor_exists():
    n = 3
    A = StructureMatrixField(n, {(0, 1): ActionPolynomial.variable(n, 2)})
    C = c_tensor(A)
    assert not C.is_zero
    assert C.entry(0, 1, 2) == ActionPolynomial.constant(n, 1)


@given(random_structures())
def test_kernel_dimension_bound(A):
    # Lemma-style bound: wherever C(a) != 0 the kernel has dimension <= n - 3
    C = c_tensor(A)
    rng = np.random.default_rng(123)
    checked = 0
    for _ in range(20):
        a = rng.uniform(-2, 2, size=A.n)
        mat = C.contraction_matrix(a)
        if np.max(np.abs(mat)) < 1e-6:
            continue
        basis = kernel_at(C, a)
        assert basis.shape[1] <= A.n - 3
        checked += 1
        if checked >= 3:
            break


@given(random_structures(n_choices=(4, 5)))
def test_c_tensor_total_antisymmetry(A):
    C = c_tensor(A)
    for (i, j, k), p in C.ordered_items():
        assert C.entry(j, i, k) == -p
        assert C.entry(k, i, j) == p
        assert C.entry(i, k, j) == -p
