"""Minimal models: construction, verification, sections, morphism models."""

import pytest

from dgmodels.cdga import SullivanPresentation
from dgmodels.dgmodule import (
    FreeDgModule,
    algebra_module,
    compose,
    cone,
    free_cone,
    identity_map,
    is_homotopy,
    is_quis,
    map_from_generator_images,
    maps_equal,
    module_cohomology,
    tabulate,
    verify_dgmodule,
    zero_map,
    zero_module,
)
from dgmodels.errors import PreconditionError, ValidationError
from dgmodels.linalg import Q
from dgmodels.minmodel import (
    cone_quis,
    fiber_cohomology,
    lift_section,
    minimal_factorization,
    minimal_model,
    model_of_morphism,
    relative_cohomology,
    verify_minimal,
)


@pytest.fixture(scope="module")
def sphere():
    return SullivanPresentation([("a", 3)], {}, cap=14)


def b_table(top_deg):
    gens, diffs = [], {}
    n = 0
    while True:
        deg = 2 * ((n + 1) // 2) + 1
        if deg > top_deg:
            break
        gens.append((f"b_{n}", deg))
        if n >= 2:
            diffs[f"b_{n}"] = {f"b_{n-2}": "a"}
        n += 1
    return gens, diffs


@pytest.fixture(scope="module")
def s4_cone_model(sphere):
    """Minimal model of the tabulated cone computing H(S^4)."""
    gens, diffs = b_table(13)
    mbf = FreeDgModule(sphere, gens, diffs, cap=13)
    a_mod = algebra_module(sphere, cap=12)
    e_prime = map_from_generator_images(mbf, a_mod, 2, {"b_0": (Q(1),)})
    _, _, cn = free_cone(e_prime)
    x = tabulate(cn.module)
    return x, minimal_model(x, 12)


def test_minimal_model_of_free_rank_one(sphere):
    result = minimal_model(algebra_module(sphere, cap=13), 12)
    assert result.module.gen_count == 1
    assert result.module.gen_degrees == (0,)
    assert result.betti_model.as_list() == [1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0]
    assert result.mono_degree == 12
    assert is_quis(result.rho)


def test_identity_factorization_adds_nothing(sphere):
    result = minimal_factorization(identity_map(algebra_module(sphere, cap=13)), 12)
    assert result.module.gen_count == 1
    assert not result.batches


def test_h0_precondition(sphere):
    a_mod = algebra_module(sphere, cap=13)
    with pytest.raises(PreconditionError):
        minimal_factorization(zero_map(a_mod, a_mod, 0), 12)


def test_s4_cone_minimal_model(s4_cone_model):
    x, result = s4_cone_model
    assert sorted(result.module.gen_degrees) == [0, 2, 4, 4, 6, 6, 8, 8, 10, 10]
    assert result.betti_model.as_list() == [1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0]
    assert result.betti_model.as_list() == result.betti_target.as_list()
    assert verify_minimal(result.module).ok
    assert is_quis(result.rho)


def test_fiber_cohomology_of_s4_model(s4_cone_model, sphere):
    _, result = s4_cone_model
    fib = fiber_cohomology(result.module, top=11)
    assert fib.as_list() == [1, 0, 1, 0, 2, 0, 2, 0, 2, 0, 2, 0]
    # agrees with the free cone built directly from the basic data
    gens, diffs = b_table(13)
    mbf = FreeDgModule(sphere, gens, diffs, cap=13)
    a_mod = algebra_module(sphere, cap=12)
    e_prime = map_from_generator_images(mbf, a_mod, 2, {"b_0": (Q(1),)})
    free, _, _ = free_cone(e_prime)
    assert fib.as_list() == fiber_cohomology(free, top=11).as_list()


def test_verify_minimal_stage_derivation(sphere):
    gens, diffs = b_table(13)
    mbf = FreeDgModule(sphere, gens, diffs, cap=13)
    rep = verify_minimal(mbf)
    assert rep.ok
    assert rep.stages["b_0"] == (1, 1)
    assert rep.stages["b_2"] == (3, 1)


def test_verify_minimal_rejects_unit_coefficient(sphere):
    bad = FreeDgModule(sphere, [("u", 1), ("w", 0)], {"w": {"u": "1"}}, cap=6)
    rep = verify_minimal(bad)
    assert not rep.ok
    assert "unit coefficient" in rep.failures[0]


def test_model_of_model_has_equal_generator_counts(s4_cone_model):
    _, result = s4_cone_model
    again = minimal_model(result.module, 11)
    expect = [d for d in sorted(result.module.gen_degrees) if d <= 10]
    assert sorted(again.module.gen_degrees) == expect


def test_lift_section_free_minimal_target(s4_cone_model):
    _, result = s4_cone_model
    again = minimal_model(result.module, 11)
    sigma = lift_section(again.rho)
    assert maps_equal(compose(again.rho, sigma), identity_map(again.rho.target))
    assert sigma.verify().ok


def test_lift_section_retraction_onto_minimal_source(s4_cone_model):
    # rho : N -> X with N free minimal, X tabulated: sigma must satisfy
    # sigma . rho = id_N even where rho is not surjective.
    x, result = s4_cone_model
    sigma = lift_section(result.rho)
    assert sigma.source is x and sigma.target is result.module
    assert maps_equal(compose(sigma, result.rho), identity_map(result.module))
    assert sigma.verify().ok


def test_lift_section_needs_minimal_end(sphere):
    a_mod = algebra_module(sphere, cap=10)
    t = tabulate(a_mod)
    with pytest.raises(ValidationError):
        lift_section(identity_map(t))


def test_model_of_morphism_and_cone_quis(sphere):
    gens, diffs = b_table(9)
    mbf = FreeDgModule(sphere, gens, diffs, cap=13)
    a_mod = algebra_module(sphere, cap=14)
    e = map_from_generator_images(mbf, a_mod, 2, {"b_0": (Q(1),)})
    id_m = identity_map(mbf)
    id_n = identity_map(a_mod)
    phi_p, h = model_of_morphism(e, id_m, id_n)
    assert is_homotopy(h, compose(e, id_m), compose(id_n, phi_p))
    quis = cone_quis(e, phi_p, id_m, id_n, h)
    assert is_quis(quis)


def test_relative_cohomology_of_zero_map(sphere, s4_cone_model):
    x, _ = s4_cone_model
    z = zero_module(sphere, cap=13)
    data, reps = relative_cohomology(zero_map(z, x, 0), 4)
    assert data.betti == module_cohomology(x, 4).betti
    assert len(reps) == data.betti
