"""Sullivan presentations: graded-commutative products, differentials, parsing."""

import pytest

from dgmodels.cdga import (
    SullivanPresentation,
    adjoin_polynomial_generator,
    extend,
    parse_polynomial,
    trivial_algebra,
    verify_cdga,
)
from dgmodels.errors import ValidationError
from dgmodels.linalg import Q


def s2_model(cap=12):
    # Lambda(u, v), deg u = 2, deg v = 3, dv = u^2: the sphere S^2
    return SullivanPresentation([("u", 2), ("v", 3)], {"v": {(2, 0): Q(1)}}, cap=cap)


def test_basis_dimensions_are_monomial_counts():
    alg = s2_model()
    # degree 6: u^3, and degree 7: u^2 v
    assert alg.dim(6) == 1
    assert alg.dim(7) == 1
    assert alg.dim(1) == 0
    assert [alg.dim(n) for n in range(6)] == [1, 0, 1, 1, 1, 1]


def test_odd_squares_vanish():
    alg = SullivanPresentation([("a", 3)], {}, cap=12)
    a = alg.generator_poly("a")
    assert alg.poly_mul(a, a) == {}


def test_koszul_sign_on_odd_generators():
    alg = SullivanPresentation([("a", 3), ("b", 3)], {}, cap=12)
    a, b = alg.generator_poly("a"), alg.generator_poly("b")
    ab = alg.poly_mul(a, b)
    ba = alg.poly_mul(b, a)
    assert ab == {m: -c for m, c in ba.items()}
    assert len(ab) == 1


def test_leibniz_on_products():
    alg = s2_model()
    u, v = alg.generator_poly("u"), alg.generator_poly("v")
    uv = alg.poly_mul(u, v)
    # d(uv) = u * dv = u^3 since du = 0
    got = alg.differential_matrix(5).apply(alg.poly_vector(uv, 5))
    u3 = alg.poly_mul(u, alg.poly_mul(u, u))
    assert got == alg.poly_vector(u3, 6)


def test_differential_squares_to_zero_checked_at_build():
    with pytest.raises(ValidationError):
        # d(w) = z with dz != 0 forces d(d(w)) != 0
        SullivanPresentation(
            [("u", 2), ("z", 3), ("w", 2)],
            {"z": {(2, 0, 0): Q(1)}, "w": {(0, 1, 0): Q(1)}},
            cap=8,
        )


def test_generator_name_and_degree_validation():
    with pytest.raises(ValidationError):
        SullivanPresentation([("u", 0)], {}, cap=8)
    with pytest.raises(ValidationError):
        SullivanPresentation([("u", 2), ("u", 4)], {}, cap=8)
    with pytest.raises(ValidationError):
        SullivanPresentation([("2u", 2)], {}, cap=8)


def test_parse_polynomial_grammar():
    alg = s2_model()
    u = alg.generator_poly("u")
    assert parse_polynomial(alg, "u^2") == alg.poly_mul(u, u)
    assert parse_polynomial(alg, "u**2") == alg.poly_mul(u, u)
    assert parse_polynomial(alg, "3/4*u") == {m: Q(3, 4) * c for m, c in u.items()}
    assert parse_polynomial(alg, "u - u") == {}
    assert parse_polynomial(alg, "") == {}
    assert parse_polynomial(alg, "2") == {m: 2 * c for m, c in alg.unit_poly().items()}
    with pytest.raises(ValidationError):
        parse_polynomial(alg, "u +")
    with pytest.raises(ValidationError):
        parse_polynomial(alg, "w")
    with pytest.raises(ValidationError):
        parse_polynomial(alg, "u^(1/2)")


def test_poly_str_round_trips_through_parser():
    alg = s2_model()
    samples = ["u", "u^2 - 2*v*u", "-3/2*u + v", "0", "1", "u^3 + 7*v*u^2"]
    for text in samples:
        poly = parse_polynomial(alg, text)
        assert parse_polynomial(alg, alg.poly_str(poly)) == poly


def test_verify_cdga_passes_on_good_algebras():
    assert verify_cdga(s2_model()).ok
    assert verify_cdga(trivial_algebra(8)).ok
    assert verify_cdga(SullivanPresentation([("a", 3)], {}, cap=10)).ok


def test_extend_preserves_old_differentials():
    alg = s2_model(cap=10)
    big = extend(alg, "e", 2, None)
    assert big.names == ("u", "v", "e")
    dv = big.differentials[1]
    assert dv == {(2, 0, 0): Q(1)}
    assert verify_cdga(big).ok
    with pytest.raises(ValidationError):
        extend(alg, "u", 2, None)


def test_adjoin_polynomial_generator_requires_even_degree():
    alg = trivial_algebra(8)
    big = adjoin_polynomial_generator(alg, "e", 2)
    assert big.dim(4) == 1  # e^2
    with pytest.raises(ValidationError):
        adjoin_polynomial_generator(alg, "x", 3)


def test_poly_vector_round_trip():
    alg = s2_model()
    p = parse_polynomial(alg, "u^2 + 3*v*u")
    # degree check: v*u has degree 5, u^2 has degree 4; split by degree
    p4 = {m: c for m, c in p.items() if alg.mono_degree(m) == 4}
    v4 = alg.poly_vector(p4, 4)
    assert alg.vector_poly(v4, 4) == p4
