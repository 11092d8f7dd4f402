"""Exact rational linear algebra primitives."""

from fractions import Fraction

import pytest

from dgmodels.errors import ValidationError
from dgmodels.linalg import (
    GradedDims,
    PoincareSeries,
    Q,
    RatMatrix,
    cohomology_at,
    in_span,
    independent_subset,
    kron,
    quotient_with_section,
    span_dim,
    unit_vec,
    vec,
)


def test_vec_coerces_to_fractions():
    v = vec([1, "2/3", Fraction(1, 5)])
    assert v == (Q(1), Q(2, 3), Q(1, 5))
    assert all(isinstance(x, Fraction) for x in v)


def test_matrix_shape_validation():
    with pytest.raises(ValidationError):
        RatMatrix(2, 2, [[1, 2]])
    with pytest.raises(ValidationError):
        RatMatrix(-1, 0)


def test_matmul_and_identity():
    a = RatMatrix.from_rows([[1, 2], [3, 4]])
    i = RatMatrix.identity(2)
    assert (a * i).data == a.data
    b = RatMatrix.from_rows([[0, 1], [1, 0]])
    assert (a * b).data == RatMatrix.from_rows([[2, 1], [4, 3]]).data


def test_rref_rank_exact_fractions():
    m = RatMatrix.from_rows([["1/2", 1], [1, 2], [0, 1]])
    assert m.rank() == 2
    reduced, pivots, _ = m.rref()
    assert pivots == (0, 1)
    assert reduced.row(0) == (Q(1), Q(0))


def test_kernel_basis_is_exact_and_spans():
    m = RatMatrix.from_rows([[1, 2, 3], [2, 4, 6]])
    kb = m.kernel_basis()
    assert len(kb) == 2
    for v in kb:
        assert m.apply(v) == (Q(0), Q(0))


def test_solve_finds_exact_solution_or_none():
    m = RatMatrix.from_rows([[2, 0], [0, 3]])
    assert m.solve(vec([1, 1])) == (Q(1, 2), Q(1, 3))
    singular = RatMatrix.from_rows([[1, 1], [1, 1]])
    assert singular.solve(vec([0, 1])) is None


def test_kron_agrees_with_block_scaling():
    a = RatMatrix.from_rows([[1, 2]])
    b = RatMatrix.from_rows([[3], [5]])
    k = kron(a, b)
    assert (k.rows, k.cols) == (2, 2)
    assert k.data == ((Q(3), Q(6)), (Q(5), Q(10)))


def test_span_helpers():
    vs = [vec([1, 0]), vec([2, 0]), vec([0, 1])]
    assert span_dim(vs) == 2
    assert len(independent_subset(vs)) == 2
    assert in_span(vs, vec([5, 7]))
    assert not in_span([vec([1, 0])], vec([0, 1]))


def test_quotient_with_section_projects_and_sections():
    reps, proj = quotient_with_section([vec([1, 1, 0])], 3)
    assert len(reps) == 2
    assert proj.apply(vec([1, 1, 0])) == (Q(0), Q(0))
    for i, r in enumerate(reps):
        assert proj.apply(r) == unit_vec(2, i)


def test_cohomology_at_circle_complex():
    # 0 -> Q -> Q^2 -> Q -> 0 with d0 = (1,1)^T, d1 = (1,-1): H = 0 everywhere
    dims = {0: 1, 1: 2, 2: 1}
    d = {0: RatMatrix.from_rows([[1], [1]]), 1: RatMatrix.from_rows([[1, -1]])}
    assert cohomology_at(dims, d, 0).betti == 0
    assert cohomology_at(dims, d, 1).betti == 0
    assert cohomology_at(dims, d, 2).betti == 0


def test_cohomology_at_rejects_nonsquare_zero():
    dims = {0: 1, 1: 1, 2: 1}
    d = {0: RatMatrix.from_rows([[1]]), 1: RatMatrix.from_rows([[1]])}
    with pytest.raises(ValidationError):
        cohomology_at(dims, d, 1)


def test_cohomology_coords_of_reduces_mod_boundaries():
    dims = {0: 1, 1: 2, 2: 0}
    d = {0: RatMatrix.from_rows([[1], [0]])}
    data = cohomology_at(dims, d, 1)
    assert data.betti == 1
    coords = data.coords_of(vec([3, 5]))
    assert coords == (Q(5),)


def test_graded_dims_window():
    gd = GradedDims({0: 1, 4: 1}, top=6)
    assert gd.as_list() == [1, 0, 0, 0, 1, 0, 0]
    assert gd.get(9) == 0
    assert gd.support_max() == 4


def test_poincare_series_arithmetic():
    p = PoincareSeries([1, 0, 1], 2)
    assert p.mul_poly({2: 1}).coeffs == [0, 0, 1]
    assert p.add_const(-1, at=0).coeffs == [0, 0, 1]
    q = PoincareSeries([1, 0, 1], 2)
    assert p.agrees_with(q, 2)
    assert p.first_disagreement(PoincareSeries([1, 1, 1], 2), 2) == 1
    assert str(PoincareSeries([1, 0, 2], 2)) == "1 + 2*t^2"
