"""Models of circle actions assembled from orbit-space basic data.

The basic data of an action consists of a Sullivan presentation A for the
orbit space, a minimal free A-dg module M modelling the relative orbit
cohomology, and two A-linear structure maps into A itself: a degree-0
inclusion map i' and an Euler map e' whose degree depends on the variant
(2 for circle actions and isometric flows, 4 for semifree quaternionic
actions).  Cones over these maps yield minimal models of the total space
and of the fixed-point set; a cone over their combination q' = e' + i'e
yields the Borel (equivariant) model over A extended by a polynomial Euler
class.  Derived reports cover the shared-basis shift, the long exact
sequence of the Borel cone, extension of scalars back to the total space,
fiber Poincare series identities, equivariant formality, localization at
the Euler class, cohomological dimension, the almost-free reduction to a
dgc algebra, the naive product when the Euler map vanishes, and the
Smith-Gysin inequality for isometric flows.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

from .cdga import (
    CheckReport,
    Mono,
    Poly,
    SullivanPresentation,
    extend,
    poly_add,
    poly_eq,
    poly_is_zero,
    poly_scale,
)
from .dgmodule import (
    Combination,
    Cone,
    DgModuleMap,
    FreeDgModule,
    LesTable,
    TabulatedDgModule,
    algebra_module,
    betti_table,
    comb_add,
    comb_is_zero,
    comb_scale,
    cone_les,
    free_cone,
    induced_map,
    map_from_generator_images,
    module_cohomology,
    modules_equal,
)
from .errors import DegreeWindowError, PreconditionError, ValidationError
from .linalg import GradedDims, PoincareSeries, Q, RatMatrix, add_vec, in_span, unit_vec, vec
from .minmodel import (
    MinimalModelResult,
    cone_quis,
    fiber_cohomology,
    minimal_model,
    model_of_morphism,
    verify_minimal,
)

Vector = tuple[Fraction, ...]

VARIANTS = ("circle", "semifree_S3", "isometric_flow")
EULER_DEGREES = {"circle": 2, "isometric_flow": 2, "semifree_S3": 4}

DEFAULT_DEGREE = 12


# ---- basic data ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BasicData:
    """Orbit-space data determining the models of one action.

    relative_model is a minimal free A-dg module; i_prime (degree 0) and
    e_prime (degree 2, or 4 for the semifree variant) are A-linear chain
    maps from it into A viewed as a module over itself.  euler_self_map,
    when given, is the degree-raising action of the Euler class on the
    relative model itself, used by the localization report.
    """

    algebra: SullivanPresentation
    relative_model: FreeDgModule
    i_prime: DgModuleMap
    e_prime: DgModuleMap
    fixed_set_empty: bool = False
    variant: str = "circle"
    euler_self_map: DgModuleMap | None = None
    base_simply_connected: bool = True
    fixed_components: int | None = None
    name: str = ""

    @property
    def euler_degree(self) -> int:
        return EULER_DEGREES[self.variant]

    def validate(self) -> CheckReport:
        failures: list[str] = []
        checks = 0

        checks += 1
        if self.variant not in VARIANTS:
            failures.append(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
            return CheckReport("basic data", False, tuple(failures), checks)

        checks += 1
        if not isinstance(self.relative_model, FreeDgModule):
            failures.append("relative model must be a free module")
            return CheckReport("basic data", False, tuple(failures), checks)
        if self.relative_model.algebra != self.algebra:
            failures.append("relative model is not a module over the declared algebra")

        checks += 1
        if self.i_prime.source is not self.relative_model:
            failures.append("i' is not defined on the relative model")
        if self.e_prime.source is not self.relative_model:
            failures.append("e' is not defined on the relative model")
        if self.i_prime.target is not self.e_prime.target:
            failures.append("i' and e' must share one target module")

        checks += 1
        bad = _orbit_module_failure(self.i_prime.target, self.algebra)
        if bad:
            failures.append(bad)

        checks += 1
        if self.i_prime.degree != 0:
            failures.append(f"i' has degree {self.i_prime.degree}; expected 0")
        want = self.euler_degree
        if self.e_prime.degree != want:
            failures.append(
                f"e' has degree {self.e_prime.degree}; variant {self.variant} needs {want}"
            )

        if not failures:
            for label, phi in (("i'", self.i_prime), ("e'", self.e_prime)):
                checks += 1
                rep = phi.verify()
                if not rep.ok:
                    failures.extend(f"{label}: {msg}" for msg in rep.failures)

            checks += 1
            rep = verify_minimal(self.relative_model)
            if not rep.ok:
                failures.extend(f"relative model: {msg}" for msg in rep.failures)

        checks += 1
        if not self.fixed_set_empty:
            low = [
                name
                for name, deg in zip(
                    self.relative_model.gen_names, self.relative_model.gen_degrees
                )
                if deg < 1
            ]
            if low:
                failures.append(
                    "relative model has degree-0 generators "
                    f"({', '.join(low)}) although the fixed set is declared nonempty"
                )

        if self.euler_self_map is not None:
            checks += 1
            w = self.euler_self_map
            if w.source is not self.relative_model or w.target is not self.relative_model:
                failures.append("euler_self_map must be an endomorphism of the relative model")
            elif w.degree != self.euler_degree:
                failures.append(
                    f"euler_self_map has degree {w.degree}; expected {self.euler_degree}"
                )
            else:
                rep = w.verify()
                if not rep.ok:
                    failures.extend(f"euler_self_map: {msg}" for msg in rep.failures)

        if self.fixed_components is not None:
            checks += 1
            if self.fixed_components < 0:
                failures.append("fixed_components must be nonnegative")
            elif self.fixed_set_empty and self.fixed_components:
                failures.append("fixed set declared empty but fixed_components is positive")
            elif not self.fixed_set_empty and self.fixed_components == 0:
                failures.append("fixed set declared nonempty but fixed_components is zero")

        return CheckReport("basic data", not failures, tuple(failures), checks)


def _orbit_module_failure(mod, algebra: SullivanPresentation) -> str | None:
    if not isinstance(mod, FreeDgModule):
        return "structure maps must land in the algebra presented as a free module"
    if mod.algebra != algebra:
        return "structure map target is a module over a different algebra"
    if mod.gen_count != 1 or mod.gen_degrees != (0,) or mod.gen_diffs[0]:
        return "structure map target must be free of rank one on a closed degree-0 generator"
    return None


def _require_valid(data: BasicData) -> None:
    data.validate().raise_if_failed()


def _fresh_names(prefix: str, count: int, taken: set[str]) -> tuple[str, ...]:
    out: list[str] = []
    i = 0
    while len(out) < count:
        nm = f"{prefix}{i}"
        if nm not in taken:
            out.append(nm)
            taken.add(nm)
        i += 1
    return tuple(out)


def _inject_poly(poly: Poly, width: int) -> Poly:
    return {m + (0,) * width: c for m, c in poly.items()}


def _vector_label(module, degree: int, v) -> str:
    labels = module.basis_labels(degree)
    terms = []
    for c, lbl in zip(v, labels):
        if c == 0:
            continue
        if c == 1:
            terms.append(f"+ {lbl}")
        elif c == -1:
            terms.append(f"- {lbl}")
        elif c < 0:
            terms.append(f"- {-c}*{lbl}")
        else:
            terms.append(f"+ {c}*{lbl}")
    if not terms:
        return "0"
    head = terms[0][2:] if terms[0].startswith("+ ") else "-" + terms[0][2:]
    return " ".join([head] + terms[1:])


# ---- total-space and fixed-set models ------------------------------------


def _generator_image_poly(data: BasicData, phi: DgModuleMap, j: int) -> Poly:
    """Image of the j-th relative generator under a structure map, in A."""
    m = data.relative_model
    g = m.gen_degrees[j]
    t = g + phi.degree
    if t > phi.target.cap:
        return {}
    col = m.basis_index(g)[(j, data.algebra.unit_mono())]
    return data.algebra.vector_poly(phi.matrix(g).col(col), t)


def _cone_result(
    free: FreeDgModule,
    iota: DgModuleMap,
    cn: Cone,
    max_degree: int,
) -> MinimalModelResult:
    if free.cap < 0:
        raise DegreeWindowError("cone window is empty")
    window = min(max_degree, free.cap - 1)
    if window < 0:
        raise DegreeWindowError("degree window is empty; enlarge the caps")
    verify_minimal(free).raise_if_failed()
    betti_model = betti_table(free, top=window)
    betti_cone = betti_table(cn.module, top=window)
    if betti_model.dims != betti_cone.dims:
        raise ValidationError("free presentation of the cone disagrees with the cone cohomology")
    target = cn.phi.target
    idx = free.basis_index(target.gen_degrees[0])[(0, free.algebra.unit_mono())]
    inclusion = map_from_generator_images(
        target,
        free,
        0,
        {target.gen_names[0]: unit_vec(free.dim(target.gen_degrees[0]), idx)},
        name="base inclusion",
    )
    return MinimalModelResult(
        module=free,
        rho=iota,
        inclusion=inclusion,
        window=window,
        mono_degree=None,
        betti_model=betti_model,
        betti_target=betti_cone,
        batches=(),
    )


def model_of_total_space(data: BasicData, max_degree: int = DEFAULT_DEGREE) -> MinimalModelResult:
    """Minimal model of the total space: the cone of the Euler map e'."""
    _require_valid(data)
    names = _fresh_names("c", data.relative_model.gen_count, set(data.e_prime.target.gen_names))
    free, iota, cn = free_cone(data.e_prime, gen_names=names, check=False)
    return _cone_result(free, iota, cn, max_degree)


def model_of_fixed_set(data: BasicData, max_degree: int = DEFAULT_DEGREE) -> MinimalModelResult:
    """Minimal model of the fixed-point set: the cone of the inclusion map i'."""
    _require_valid(data)
    if data.fixed_set_empty:
        raise PreconditionError(
            "fixed set is declared empty, so there is no fixed-set model; "
            "use almost_free_model for the dgc reduction"
        )
    names = _fresh_names("g", data.relative_model.gen_count, set(data.i_prime.target.gen_names))
    free, iota, cn = free_cone(data.i_prime, gen_names=names, check=False)
    result = _cone_result(free, iota, cn, max_degree)
    if data.fixed_components is not None:
        h0 = module_cohomology(free, 0).betti
        if h0 != data.fixed_components:
            raise ValidationError(
                f"declared {data.fixed_components} fixed components but H^0 of the "
                f"fixed-set model has dimension {h0}"
            )
    return result


# ---- shared basis --------------------------------------------------------


@dataclass(frozen=True)
class SharedBasisReport:
    """Generator multisets of the two cone models, compared up to a shift."""

    ok: bool
    shift: int
    rows: tuple[tuple[int, int, int], ...]
    failures: tuple[str, ...]


def shared_basis_check(data: BasicData, max_degree: int = DEFAULT_DEGREE) -> SharedBasisReport:
    """Both models are free on the relative generators, shifted by d(e') - 1
    for the total space and by -1 for the fixed set; their generator tables
    therefore agree after shifting by the Euler degree."""
    _require_valid(data)
    if data.fixed_set_empty:
        raise PreconditionError("shared-basis comparison needs a nonempty fixed set")
    shift = data.euler_degree
    total = model_of_total_space(data, max_degree)
    fixed = model_of_fixed_set(data, max_degree)
    ct = Counter(total.module.gen_degrees[1:])
    cf = Counter(fixed.module.gen_degrees[1:])
    degrees = sorted(set(cf) | {k - shift for k in ct})
    rows: list[tuple[int, int, int]] = []
    failures: list[str] = []
    for k in degrees:
        a, b = ct.get(k + shift, 0), cf.get(k, 0)
        rows.append((k, a, b))
        if a != b:
            failures.append(
                f"{a} total-space generators at degree {k + shift} vs "
                f"{b} fixed-set generators at degree {k}"
            )
    return SharedBasisReport(not failures, shift, tuple(rows), tuple(failures))


# ---- Borel model ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class EquivariantModel:
    """Borel model: free over the algebra extended by the Euler class."""

    algebra: SullivanPresentation
    euler_name: str
    module: FreeDgModule
    rho: DgModuleMap
    q_prime: DgModuleMap
    window: int
    betti: GradedDims


def _equivariant_pieces(
    data: BasicData, max_degree: int
) -> tuple[EquivariantModel, Cone]:
    _require_valid(data)
    alg = data.algebra
    m = data.relative_model
    d_e = data.euler_degree

    e_name = "e"
    while e_name in alg.names:
        e_name += "e"
    alg_e = extend(alg, e_name, d_e, None)

    m_e = FreeDgModule(
        alg_e,
        list(zip(m.gen_names, m.gen_degrees)),
        {
            m.gen_names[j]: {
                m.gen_names[h]: _inject_poly(poly, 1)
                for h, poly in m.gen_diffs[j].items()
            }
            for j in range(m.gen_count)
        },
        cap=min(m.cap, alg_e.cap),
    )
    a_mod = algebra_module(alg_e, cap=min(alg_e.cap, m_e.cap + d_e - 1))

    e_poly = alg_e.generator_poly(e_name)
    i_hi = data.i_prime.window().stop - 1
    e_hi = data.e_prime.window().stop - 1
    images: dict[str, Vector] = {}
    for j, gname in enumerate(m.gen_names):
        g = m.gen_degrees[j]
        t = g + d_e
        if t > a_mod.cap:
            # the differential of this cone generator lies beyond the window
            continue
        if g > e_hi or g > i_hi:
            raise DegreeWindowError(
                f"structure maps are not defined at generator {gname} (degree {g}); "
                "enlarge the map windows to build the Borel model"
            )
        e_part = _inject_poly(_generator_image_poly(data, data.e_prime, j), 1)
        i_part = _inject_poly(_generator_image_poly(data, data.i_prime, j), 1)
        q_poly = poly_add(e_part, alg_e.poly_mul(i_part, e_poly))
        if not poly_is_zero(q_poly):
            images[gname] = alg_e.poly_vector(q_poly, t)
    q_prime = map_from_generator_images(m_e, a_mod, d_e, images, name="q'")
    q_prime.verify().raise_if_failed()

    names = _fresh_names("c", m.gen_count, set(a_mod.gen_names))
    free, iota, cn = free_cone(q_prime, gen_names=names, check=False)
    window = min(max_degree, free.cap - 1)
    if window < 0:
        raise DegreeWindowError("degree window is empty; enlarge the caps")
    verify_minimal(free).raise_if_failed()
    betti = betti_table(free, top=window)
    model = EquivariantModel(alg_e, e_name, free, iota, q_prime, window, betti)
    return model, cn


def equivariant_model(data: BasicData, max_degree: int = DEFAULT_DEGREE) -> EquivariantModel:
    """Minimal Borel model: the cone of q'(b) = e'(b) + i'(b) e over A(x)Lambda(e)."""
    model, _ = _equivariant_pieces(data, max_degree)
    return model


@dataclass(frozen=True)
class EquivariantLesReport:
    """Cone long exact sequence of the Borel model, with a rank recount."""

    table: LesTable
    h_equivariant: GradedDims
    h_from_ranks: GradedDims
    ok: bool
    failures: tuple[str, ...]


def equivariant_les(data: BasicData, max_degree: int = DEFAULT_DEGREE) -> EquivariantLesReport:
    """Exactness of the Borel cone sequence plus an independent recount of
    the equivariant Betti numbers from the connecting ranks."""
    model, cn = _equivariant_pieces(data, max_degree)
    table = cone_les(cn, top=max_degree)
    failures = list(table.failures)
    dims: dict[int, int] = {}
    recount: dict[int, int] = {}
    for row in table.rows:
        r_in = table.rows[row.n - 1].rank_connecting if row.n >= 1 else 0
        dims[row.n] = row.dim_h_cone
        recount[row.n] = (row.dim_h_target - r_in) + (row.dim_h_source - row.rank_connecting)
        if recount[row.n] != row.dim_h_cone:
            failures.append(
                f"degree {row.n}: rank recount gives {recount[row.n]} but the Borel "
                f"model has Betti {row.dim_h_cone}"
            )
        if model.betti.get(row.n) != row.dim_h_cone:
            failures.append(
                f"degree {row.n}: free Borel presentation has Betti "
                f"{model.betti.get(row.n)} but the cone has {row.dim_h_cone}"
            )
    return EquivariantLesReport(
        table,
        GradedDims(dims, table.top),
        GradedDims(recount, table.top),
        not failures,
        tuple(failures),
    )


@dataclass(frozen=True)
class ScalarsReport:
    """Setting the Euler class to zero in the Borel model recovers the
    total-space model, generator by generator."""

    ok: bool
    window: int
    generators: int
    failures: tuple[str, ...]


def extension_of_scalars_check(
    data: BasicData, max_degree: int = DEFAULT_DEGREE
) -> ScalarsReport:
    model, _ = _equivariant_pieces(data, max_degree)
    total = model_of_total_space(data, max_degree)
    free_e, free_t = model.module, total.module
    alg, alg_e = data.algebra, model.algebra
    e_idx = alg_e.generator_index(model.euler_name)

    failures: list[str] = []
    if free_e.gen_names != free_t.gen_names:
        failures.append("Borel and total-space models name their generators differently")
    if free_e.gen_degrees != free_t.gen_degrees:
        failures.append("Borel and total-space generator degrees differ")
    if failures:
        return ScalarsReport(False, 0, free_e.gen_count, tuple(failures))

    def drop(poly: Poly) -> Poly:
        return {
            m[:e_idx] + m[e_idx + 1 :]: c for m, c in poly.items() if m[e_idx] == 0
        }

    cap = min(free_e.cap, free_t.cap)
    quotient = FreeDgModule(
        alg,
        list(zip(free_e.gen_names, free_e.gen_degrees)),
        {
            free_e.gen_names[j]: {
                free_e.gen_names[h]: drop(poly)
                for h, poly in free_e.gen_diffs[j].items()
            }
            for j in range(free_e.gen_count)
        },
        cap=cap,
    )
    reference = FreeDgModule(
        alg,
        list(zip(free_t.gen_names, free_t.gen_degrees)),
        {
            free_t.gen_names[j]: {
                free_t.gen_names[h]: dict(poly)
                for h, poly in free_t.gen_diffs[j].items()
            }
            for j in range(free_t.gen_count)
        },
        cap=cap,
    )
    for j, name in enumerate(free_e.gen_names):
        got = quotient.gen_diffs[j]
        want = reference.gen_diffs[j]
        keys = set(got) | set(want)
        for h in keys:
            if not poly_eq(got.get(h, {}), want.get(h, {})):
                failures.append(
                    f"d({name}) differs after setting {model.euler_name} = 0: "
                    f"coefficient of {free_e.gen_names[h]} is "
                    f"{alg.poly_str(got.get(h, {}))} vs {alg.poly_str(want.get(h, {}))}"
                )
    if not failures and not modules_equal(quotient, reference, labels=True):
        failures.append("quotient by the Euler class does not match the total-space model")
    return ScalarsReport(not failures, cap - 1, free_e.gen_count, tuple(failures))


# ---- fiber Poincare series -----------------------------------------------


@dataclass(frozen=True)
class PoincareReport:
    """Power-series identities tying the three fiber series together."""

    ok: bool
    through: int
    total_fiber: PoincareSeries
    fixed_fiber: PoincareSeries
    borel_fiber: PoincareSeries
    failures: tuple[str, ...]


def poincare_relations(data: BasicData, max_degree: int = DEFAULT_DEGREE) -> PoincareReport:
    """Checks P_total = 1 - t^2 + t^2 P_fixed and P_total = (1 - t^2) P_borel,
    all three series read off as generator counts of the minimal models."""
    _require_valid(data)
    if data.fixed_set_empty:
        raise PreconditionError("fiber series identities need a nonempty fixed set")
    if data.euler_degree != 2:
        raise PreconditionError("fiber series identities are stated for a degree-2 Euler class")
    if not data.base_simply_connected:
        raise PreconditionError("fiber series identities assume a simply connected orbit space")
    total = model_of_total_space(data, max_degree)
    fixed = model_of_fixed_set(data, max_degree)
    model, _ = _equivariant_pieces(data, max_degree)
    through = min(max_degree, total.window, fixed.window, model.window)

    p_total = PoincareSeries.from_dims(fiber_cohomology(total.module, top=through), through)
    p_fixed = PoincareSeries.from_dims(fiber_cohomology(fixed.module, top=through), through)
    eq_gens = PoincareSeries.from_dims(fiber_cohomology(model.module, top=through), through)
    geometric = {k: 1 for k in range(0, through + 1, 2)}
    p_borel = eq_gens.mul_poly(geometric)

    failures: list[str] = []
    rhs1 = p_fixed.mul_poly({2: 1}).add_const(1, at=0).add_const(-1, at=2)
    d1 = p_total.first_disagreement(rhs1, through)
    if d1 is not None:
        failures.append(
            f"P_total = 1 - t^2 + t^2 P_fixed fails first at t^{d1}: "
            f"{p_total.coeff(d1)} vs {rhs1.coeff(d1)}"
        )
    rhs2 = p_borel.mul_poly({0: 1, 2: -1})
    d2 = p_total.first_disagreement(rhs2, through)
    if d2 is not None:
        failures.append(
            f"P_total = (1 - t^2) P_borel fails first at t^{d2}: "
            f"{p_total.coeff(d2)} vs {rhs2.coeff(d2)}"
        )
    return PoincareReport(not failures, through, p_total, p_fixed, p_borel, tuple(failures))


# ---- equivariant formality ------------------------------------------------


@dataclass(frozen=True)
class FormalityString:
    """Witness chain alpha_0, alpha_1, ... with e*(alpha_n) = i*(alpha_{n-1})."""

    degree: int
    steps: tuple[str, ...]


@dataclass(frozen=True)
class FormalityReport:
    """Surjectivity of Ker q* -> Ker e*, degree by degree."""

    formal: bool
    window: int
    kernel_dims: GradedDims
    strings: tuple[FormalityString, ...]
    witness_degree: int | None
    witness_label: str | None
    failures: tuple[str, ...]


def formality_check(data: BasicData, max_degree: int = DEFAULT_DEGREE) -> FormalityReport:
    """Equivariant formality: every class killed by e* must extend to a
    finite string (alpha_n) with e*(alpha_0) = 0 replaced by the cone
    condition, i.e. a kernel element of the combined map q*."""
    _require_valid(data)
    m = data.relative_model
    a_mod = data.i_prime.target
    d_e = data.euler_degree
    window = min(
        max_degree,
        m.cap - 1,
        a_mod.cap - d_e - 1,
        data.i_prime.window().stop - 1,
        data.e_prime.window().stop - 1,
    )
    if window < 0:
        raise DegreeWindowError("degree window is empty; enlarge the caps")

    h_m = {s: module_cohomology(m, s) for s in range(window + 1)}
    h_a = {s: module_cohomology(a_mod, s) for s in range(window + d_e + 1)}
    i_star = {s: induced_map(data.i_prime, h_m[s], h_a[s]) for s in range(window + 1)}
    e_star = {s: induced_map(data.e_prime, h_m[s], h_a[s + d_e]) for s in range(window + 1)}

    kernel_dims: dict[int, int] = {}
    strings: list[FormalityString] = []
    failures: list[str] = []
    witness_degree: int | None = None
    witness_label: str | None = None

    for u in range(window + 1):
        ker_e = e_star[u].kernel_basis()
        kernel_dims[u] = len(ker_e)
        if not ker_e:
            continue
        n_blocks = u // d_e + 1
        m_blocks = (u + d_e) // d_e + 1
        cdim = [h_m[u - d_e * n].betti for n in range(n_blocks)]
        rdim = [h_a[u + d_e - d_e * mi].betti for mi in range(m_blocks)]
        grid = [
            [RatMatrix.zero(rdim[mi], cdim[n]) for n in range(n_blocks)]
            for mi in range(m_blocks)
        ]
        for n in range(n_blocks):
            grid[n][n] = e_star[u - d_e * n]
            grid[n + 1][n] = i_star[u - d_e * n]
        q_block = RatMatrix.block(grid)
        kernel = q_block.kernel_basis()
        proj = [kv[: cdim[0]] for kv in kernel]

        def class_label(s: int, coords) -> str:
            z = [Q(0)] * m.dim(s)
            for c, rep in zip(coords, h_m[s].representatives):
                if c:
                    z = [x + c * y for x, y in zip(z, rep)]
            return _vector_label(m, s, z)

        missing = [k for k in ker_e if not in_span(proj, k)]
        if missing:
            label = class_label(u, missing[0])
            if witness_degree is None:
                witness_degree = u
                witness_label = label
            failures.append(
                f"degree {u}: kernel class {label} of e* does not lift "
                "to the kernel of q*"
            )
            continue
        if kernel:
            head = RatMatrix.from_cols(proj, nrows=cdim[0])
            for k in ker_e:
                sol = head.solve(vec(k))
                if sol is None:
                    continue
                full = [Q(0)] * (sum(cdim))
                for c, kv in zip(sol, kernel):
                    if c:
                        full = [x + c * y for x, y in zip(full, kv)]
                steps = []
                off = 0
                for n in range(n_blocks):
                    block = tuple(full[off : off + cdim[n]])
                    off += cdim[n]
                    if any(block):
                        steps.append(class_label(u - d_e * n, block))
                strings.append(FormalityString(u, tuple(steps)))

    return FormalityReport(
        not failures,
        window,
        GradedDims(kernel_dims, window),
        tuple(strings),
        witness_degree,
        witness_label,
        tuple(failures),
    )


# ---- localization ---------------------------------------------------------


@dataclass(frozen=True)
class LocalizationReport:
    """Invertibility of nabla = e + W on the Euler-inverted relative module."""

    verdict: str
    window: int
    exponent: int | None
    h_dims: GradedDims
    basis_checked: int
    reason: str | None


def localization_check(
    data: BasicData,
    max_degree: int = DEFAULT_DEGREE,
    nilpotency_exponent: int | None = None,
) -> LocalizationReport:
    """The connecting map nabla([w]) = e [w] + [w e] on H(M) with the Euler
    class inverted; its inverse is the finite sum of (-1)^n e^{-(n+1)} W^n
    over n below the nilpotency exponent of W.  Both composites are checked
    on every basis class inside the window, with exact Laurent coefficients."""
    _require_valid(data)
    m = data.relative_model
    d_e = data.euler_degree
    S = min(max_degree, m.cap - 1)
    if S < 0:
        raise DegreeWindowError("degree window is empty; enlarge the caps")
    h = {s: module_cohomology(m, s) for s in range(S + 1)}
    dims = GradedDims({s: h[s].betti for s in range(S + 1)}, S)
    degs = [s for s in range(S + 1) if h[s].betti]
    total = sum(h[s].betti for s in degs)
    if total == 0:
        return LocalizationReport(
            "bijective", S, nilpotency_exponent or 1, dims, 0,
            "relative cohomology vanishes on the window",
        )

    offsets: dict[int, int] = {}
    at = 0
    for s in degs:
        offsets[s] = at
        at += h[s].betti

    entries = [[Q(0)] * total for _ in range(total)]
    if data.euler_self_map is not None:
        smax = max(degs)
        if smax + d_e > S:
            return LocalizationReport(
                "inconclusive", S, None, dims, 0,
                f"the Euler action out of degree {smax} leaves the window "
                f"(need degree {smax + d_e} <= {S})",
            )
        for s in degs:
            t = s + d_e
            if h.get(t) is None or not h[t].betti:
                continue
            block = induced_map(data.euler_self_map, h[s], h[t])
            for r in range(block.rows):
                for c in range(block.cols):
                    x = block.entries[r][c]
                    if x:
                        entries[offsets[t] + r][offsets[s] + c] = x
    w_mat = RatMatrix(total, total, entries)

    powers = [RatMatrix.identity(total)]
    p = 1
    cur = w_mat
    while not cur.is_zero():
        powers.append(cur)
        cur = cur * w_mat
        p += 1
        if p > S + 2:
            raise PreconditionError("Euler self-map is not nilpotent on the window")
    if nilpotency_exponent is not None:
        if nilpotency_exponent < p:
            raise PreconditionError(
                f"declared nilpotency exponent {nilpotency_exponent} but W^"
                f"{nilpotency_exponent} is nonzero (true exponent {p})"
            )
        p = nilpotency_exponent
        while len(powers) < p:
            powers.append(powers[-1] * w_mat)

    def prune(x: dict[int, Vector]) -> dict[int, Vector]:
        return {k: v for k, v in x.items() if any(v)}

    def nabla(x: dict[int, Vector]) -> dict[int, Vector]:
        out: dict[int, Vector] = {}
        for k, v in x.items():
            out[k + 1] = add_vec(out.get(k + 1, (Q(0),) * total), v)
            wv = w_mat.apply(v)
            out[k] = add_vec(out.get(k, (Q(0),) * total), wv)
        return prune(out)

    def nabla_inv(x: dict[int, Vector]) -> dict[int, Vector]:
        out: dict[int, Vector] = {}
        for k, v in x.items():
            for n in range(p):
                wv = powers[n].apply(v) if n else tuple(v)
                if n % 2:
                    wv = tuple(-c for c in wv)
                key = k - (n + 1)
                out[key] = add_vec(out.get(key, (Q(0),) * total), wv)
        return prune(out)

    failures: list[str] = []
    for t in range(total):
        u = prune({0: unit_vec(total, t)})
        if nabla(nabla_inv(u)) != u:
            failures.append(f"nabla(nabla^-1) is not the identity on basis class {t}")
        if nabla_inv(nabla(u)) != u:
            failures.append(f"nabla^-1(nabla) is not the identity on basis class {t}")
    if failures:
        raise ValidationError("localization inverse check failed: " + failures[0])
    return LocalizationReport("bijective", S, p, dims, total, None)


# ---- cohomological dimension ----------------------------------------------


@dataclass(frozen=True)
class DimcReport:
    """Window reading of dimc(M) against dimc(F) and dimc(F) + 2."""

    applicable: bool
    reasons: tuple[str, ...]
    window: int
    dimc_total: int
    dimc_fixed: int
    dimc_base: int | None
    total_fiber: int
    fixed_fiber: int
    case: str


def dimc_relation(data: BasicData, max_degree: int = DEFAULT_DEGREE) -> DimcReport:
    """dimc(M) is dimc(F) or dimc(F) + 2 whenever the base and the Borel
    fiber have finite cohomological dimension; the report certifies those
    finiteness hypotheses inside the window or flags the degrees that
    persist to the top."""
    _require_valid(data)
    if data.fixed_set_empty:
        raise PreconditionError("cohomological dimension comparison needs a nonempty fixed set")
    if data.euler_degree != 2:
        raise PreconditionError("the dichotomy is stated for a degree-2 Euler class")
    total = model_of_total_space(data, max_degree)
    fixed = model_of_fixed_set(data, max_degree)
    window = min(total.window, fixed.window)
    bm, bf = total.betti_model, fixed.betti_model

    reasons: list[str] = []
    if bm.get(window):
        reasons.append(f"total-space cohomology persists to the window top {window}")
    if bf.get(window):
        reasons.append(f"fixed-set cohomology persists to the window top {window}")

    a_mod = data.e_prime.target
    base = betti_table(a_mod, top=min(window, a_mod.cap - 1))
    base_sup = base.support_max() or 0
    if base_sup > window - 2:
        reasons.append("orbit-space cohomology is not certified finite inside the window")

    total_fiber = max(total.module.gen_degrees)
    fixed_fiber = max(fixed.module.gen_degrees)
    if total_fiber > window - 2:
        reasons.append(
            f"total-space fiber generators persist to degree {total_fiber}, "
            f"beyond the certified band of the window {window}"
        )
    if fixed_fiber > window - 2:
        reasons.append(
            f"fixed-set fiber generators persist to degree {fixed_fiber}, "
            f"beyond the certified band of the window {window}"
        )

    dimc_total = max((n for n in range(window + 1) if bm.get(n)), default=0)
    dimc_fixed = max((n for n in range(window + 1) if bf.get(n)), default=0)
    if dimc_total == dimc_fixed:
        case = "equal"
    elif dimc_total == dimc_fixed + 2:
        case = "plus_two"
    else:
        case = "mismatch"
    return DimcReport(
        not reasons,
        tuple(reasons),
        window,
        dimc_total,
        dimc_fixed,
        base_sup,
        total_fiber,
        fixed_fiber,
        case,
    )


# ---- almost-free reduction -------------------------------------------------


@dataclass(frozen=True, eq=False)
class AlmostFreeReport:
    """Total-space model rewritten as the dgc algebra A(x)Lambda(x), dx = e."""

    ok: bool
    window: int
    generator_name: str
    euler_poly: str
    betti: GradedDims
    failures: tuple[str, ...]


def _module_over_subalgebra(
    big: SullivanPresentation, sub: SullivanPresentation, cap: int
) -> TabulatedDgModule:
    """The larger algebra as a dg module over a generator-prefix subalgebra."""
    width = len(big.names) - len(sub.names)
    labels = {n: tuple(big.mono_str(mb) for mb in big.basis(n)) for n in range(cap + 1)}
    d_mats = {n: big.differential_matrix(n) for n in range(cap)}
    act_mats: dict[tuple[int, int], RatMatrix] = {}
    for i in range(1, min(cap, sub.cap) + 1):
        for k in range(cap - i + 1):
            dim_k = big.dim(k)
            rows = big.dim(i + k)
            index = big.basis_index(i + k)
            entries = [[Q(0)] * (sub.dim(i) * dim_k) for _ in range(rows)]
            for ai, ma in enumerate(sub.basis(i)):
                big_ma = ma + (0,) * width
                for bi, mb in enumerate(big.basis(k)):
                    got = big.mono_mul(big_ma, mb)
                    if got is None:
                        continue
                    coeff, mono = got
                    entries[index[mono]][ai * dim_k + bi] = Q(coeff)
            act_mats[(i, k)] = RatMatrix(rows, sub.dim(i) * dim_k, entries)
    return TabulatedDgModule(sub, cap, labels, d_mats, act_mats)


def almost_free_model(data: BasicData, max_degree: int = DEFAULT_DEGREE) -> AlmostFreeReport:
    """For an action without fixed points and a rank-one relative model, the
    total-space model is the dgc algebra A(x)Lambda(x) with dx the Euler
    cocycle; the correspondence (a, b) -> a + b x is checked to be a chain
    isomorphism compatible with the pair product
    (a, b)(a', b') = (a a', a b' + (-1)^{deg a'} b a')."""
    _require_valid(data)
    if not data.fixed_set_empty:
        raise PreconditionError("almost-free reduction needs fixed_set_empty")
    m = data.relative_model
    if m.gen_count != 1 or m.gen_degrees != (0,) or m.gen_diffs[0]:
        raise PreconditionError(
            "almost-free reduction needs the relative model free of rank one "
            "on a closed degree-0 generator"
        )
    alg = data.algebra
    e_poly = _generator_image_poly(data, data.e_prime, 0)

    x_name = "x"
    while x_name in alg.names:
        x_name += "x"
    alg_x = extend(alg, x_name, data.euler_degree - 1, e_poly)

    free, iota, cn = free_cone(data.e_prime, gen_names=(x_name,), check=False)
    window = min(max_degree, free.cap - 1, alg_x.cap - 1)
    if window < 0:
        raise DegreeWindowError("degree window is empty; enlarge the caps")
    target = _module_over_subalgebra(alg_x, alg, cap=min(alg_x.cap, free.cap))

    mats: dict[int, RatMatrix] = {}
    for n in range(min(free.cap, target.cap) + 1):
        rows = target.dim(n)
        index = alg_x.basis_index(n)
        entries = [[Q(0)] * free.dim(n) for _ in range(rows)]
        for c_idx, (gi, mono) in enumerate(free.basis(n)):
            big_mono = mono + ((0,) if gi == 0 else (1,))
            entries[index[big_mono]][c_idx] = Q(1)
        mats[n] = RatMatrix(rows, free.dim(n), entries)
    mu = DgModuleMap(free, target, 0, mats, name="(a,b) -> a + b x")

    failures: list[str] = []
    rep = mu.verify(top=window)
    if not rep.ok:
        failures.extend(f"chain map: {msg}" for msg in rep.failures)
    for n in range(window + 1):
        if free.dim(n) != target.dim(n):
            failures.append(
                f"degree {n}: cone has dimension {free.dim(n)} but the algebra "
                f"has {target.dim(n)}"
            )
        elif mu.matrix(n).rank() != free.dim(n):
            failures.append(f"degree {n}: the correspondence is not invertible")

    one = Q(1)
    for i in range(window + 1):
        for gi, mi in free.basis(i):
            left = {mi + ((0,) if gi == 0 else (1,)): one}
            for j in range(window + 1 - i):
                for gj, mj in free.basis(j):
                    right = {mj + ((0,) if gj == 0 else (1,)): one}
                    want = alg_x.poly_mul(left, right)
                    if gi == 0 and gj == 0:
                        pair = alg.poly_mul({mi: one}, {mj: one})
                        got = _inject_poly(pair, 1)
                    elif gi == 0:
                        pair = alg.poly_mul({mi: one}, {mj: one})
                        got = {mm + (1,): c for mm, c in pair.items()}
                    elif gj == 0:
                        pair = alg.poly_mul({mi: one}, {mj: one})
                        sign = -one if alg.mono_degree(mj) % 2 else one
                        got = {mm + (1,): sign * c for mm, c in pair.items()}
                    else:
                        got = {}
                    if not poly_eq(want, got):
                        failures.append(
                            f"product rule fails on {free.basis_labels(i)[0]} "
                            f"type pair at degrees ({i}, {j})"
                        )
    betti = betti_table(free, top=window)
    return AlmostFreeReport(
        not failures, window, x_name, alg.poly_str(e_poly), betti, tuple(failures)
    )


# ---- naive product ---------------------------------------------------------


@dataclass(frozen=True)
class RingEntry:
    """Product of two positive-degree cohomology classes, in H-coordinates."""

    left_degree: int
    left_index: int
    right_degree: int
    right_index: int
    coords: tuple[Fraction, ...]


@dataclass(frozen=True, eq=False)
class NaiveReport:
    """The naive product on the total-space cone when the Euler map vanishes."""

    ok: bool
    window: int
    betti: GradedDims
    unital: bool
    graded_commutative: bool
    associative: bool
    leibniz: bool
    positive_products_zero: bool
    wedge_of_spheres: bool
    sphere_degrees: tuple[int, ...] | None
    ring: tuple[RingEntry, ...]
    failures: tuple[str, ...]


def _euler_map_is_zero(data: BasicData) -> bool:
    return all(data.e_prime.matrix(k).is_zero() for k in data.e_prime.window())


def _naive_pair_mul(
    free: FreeDgModule, shift: int, gi: int, mi: Mono, gj: int, mj: Mono
) -> Combination:
    alg = free.algebra
    one = Q(1)
    if gi == 0 and gj == 0:
        poly = alg.poly_mul({mi: one}, {mj: one})
        return {0: poly} if poly else {}
    if gi == 0:
        poly = alg.poly_mul({mi: one}, {mj: one})
        if alg.mono_degree(mi) % 2:
            poly = poly_scale(Q(-1), poly)
        return {gj: poly} if poly else {}
    if gj == 0:
        beta_deg = alg.mono_degree(mi) + free.gen_degrees[gi] - shift
        poly = alg.poly_mul({mj: one}, {mi: one})
        if (alg.mono_degree(mj) * beta_deg) % 2:
            poly = poly_scale(Q(-1), poly)
        return {gi: poly} if poly else {}
    return {}


def _naive_mul(free: FreeDgModule, shift: int, a: Combination, b: Combination) -> Combination:
    out: Combination = {}
    for gi, pi in a.items():
        for mi, ci in pi.items():
            for gj, pj in b.items():
                for mj, cj in pj.items():
                    term = _naive_pair_mul(free, shift, gi, mi, gj, mj)
                    if term:
                        out = comb_add(out, comb_scale(ci * cj, term))
    return out


def _comb_eq(a: Combination, b: Combination) -> bool:
    return comb_is_zero(comb_add(a, comb_scale(Q(-1), b)))


def naive_structure(data: BasicData, max_degree: int = DEFAULT_DEGREE) -> NaiveReport:
    """When e' = 0 the total-space cone splits and carries the naive product
    (a, b)(a', b') = (a a', (-1)^{deg a} a b' + (-1)^{deg a' deg b} a' b);
    the report checks the dgc axioms on the window basis and tabulates the
    cohomology ring, with a wedge-of-spheres verdict when the differential
    vanishes and all positive products are zero."""
    _require_valid(data)
    if not _euler_map_is_zero(data):
        raise PreconditionError("naive product needs a vanishing Euler map on the window")
    shift = data.euler_degree - 1
    total = model_of_total_space(data, max_degree)
    free = total.module
    alg = free.algebra
    window = total.window

    def elt_degree(gi: int, m: Mono) -> int:
        return alg.mono_degree(m) + free.gen_degrees[gi]

    basis_by_degree = {n: free.basis(n) for n in range(window + 1)}
    failures: list[str] = []

    unital = True
    unit: Combination = {0: {alg.unit_mono(): Q(1)}}
    for n in range(window + 1):
        for gi, m in basis_by_degree[n]:
            x: Combination = {gi: {m: Q(1)}}
            if not _comb_eq(_naive_mul(free, shift, unit, x), x) or not _comb_eq(
                _naive_mul(free, shift, x, unit), x
            ):
                unital = False
                failures.append(f"unit fails on {free.basis_labels(n)}")

    commutative = True
    leibniz = True
    for i in range(window + 1):
        for j in range(i, window + 1 - i):
            for gi, mi in basis_by_degree[i]:
                x: Combination = {gi: {mi: Q(1)}}
                for gj, mj in basis_by_degree[j]:
                    y: Combination = {gj: {mj: Q(1)}}
                    xy = _naive_mul(free, shift, x, y)
                    yx = _naive_mul(free, shift, y, x)
                    if (i * j) % 2:
                        yx = comb_scale(Q(-1), yx)
                    if not _comb_eq(xy, yx):
                        commutative = False
                        failures.append(
                            f"graded commutativity fails at degrees ({i}, {j})"
                        )
                    lhs = free.d_combination(xy)
                    rhs = comb_add(
                        _naive_mul(free, shift, free.d_combination(x), y),
                        comb_scale(
                            Q(-1 if i % 2 else 1),
                            _naive_mul(free, shift, x, free.d_combination(y)),
                        ),
                    )
                    if not _comb_eq(lhs, rhs):
                        leibniz = False
                        failures.append(f"Leibniz fails at degrees ({i}, {j})")

    associative = True
    for i in range(window + 1):
        for j in range(window + 1 - i):
            for k in range(window + 1 - i - j):
                for gi, mi in basis_by_degree[i]:
                    x = {gi: {mi: Q(1)}}
                    for gj, mj in basis_by_degree[j]:
                        y = {gj: {mj: Q(1)}}
                        xy = _naive_mul(free, shift, x, y)
                        for gk, mk in basis_by_degree[k]:
                            z = {gk: {mk: Q(1)}}
                            if not _comb_eq(
                                _naive_mul(free, shift, xy, z),
                                _naive_mul(free, shift, x, _naive_mul(free, shift, y, z)),
                            ):
                                associative = False
                                failures.append(
                                    f"associativity fails at degrees ({i}, {j}, {k})"
                                )

    betti = total.betti_model
    ring: list[RingEntry] = []
    positive_zero = True
    if leibniz:
        h = {n: module_cohomology(free, n) for n in range(window + 1)}
        for i in range(1, window):
            for j in range(i, window + 1 - i):
                for ai, arep in enumerate(h[i].representatives):
                    xa = free.vector_combination(arep, i)
                    for bi, brep in enumerate(h[j].representatives):
                        prod = _naive_mul(free, shift, xa, free.vector_combination(brep, j))
                        coords = h[i + j].coords_of(free.combination_vector(prod, i + j))
                        ring.append(RingEntry(i, ai, j, bi, coords))
                        if any(coords):
                            positive_zero = False
    else:
        positive_zero = False

    zero_diff = all(
        free.differential_matrix(k).is_zero() for k in range(window)
    ) and all(
        not free.gen_diffs[t]
        for t in range(free.gen_count)
        if free.gen_degrees[t] <= window
    )
    wedge = zero_diff and positive_zero and not failures
    spheres = (
        tuple(n for n in range(1, window + 1) for _ in range(betti.get(n)))
        if wedge
        else None
    )
    ok = unital and commutative and associative and leibniz
    return NaiveReport(
        ok,
        window,
        betti,
        unital,
        commutative,
        associative,
        leibniz,
        positive_zero,
        wedge,
        spheres,
        tuple(ring),
        tuple(failures),
    )


# ---- Smith-Gysin inequality -------------------------------------------------


@dataclass(frozen=True)
class SmithGysinReport:
    """One instance of the inequality
    dim H^{r-1}(relative) + sum_i dim H^{r+2i}(F) <= sum_i dim H^{r+2i}(M)."""

    r: int
    verdict: str
    window: int
    relative_term: int
    fixed_sum: int
    total_sum: int
    stabilized: bool
    reason: str | None


def smith_gysin_inequality(
    data: BasicData, max_degree: int = DEFAULT_DEGREE, r: int = 0
) -> SmithGysinReport:
    """Evaluates both sides of the Smith-Gysin inequality for an isometric
    flow; the verdict is inconclusive unless both Betti tables vanish in the
    top two window degrees, so the lacunary sums are complete."""
    _require_valid(data)
    if data.variant != "isometric_flow":
        raise PreconditionError("the Smith-Gysin inequality is reported for isometric flows")
    if data.fixed_set_empty:
        raise PreconditionError("the Smith-Gysin inequality needs a nonempty fixed set")
    if r < 0:
        raise ValidationError(f"inequality index r = {r} must be nonnegative")
    total = model_of_total_space(data, max_degree)
    fixed = model_of_fixed_set(data, max_degree)
    window = min(total.window, fixed.window)
    if r > window:
        return SmithGysinReport(
            r, "inconclusive", window, 0, 0, 0, False,
            f"index {r} lies outside the window {window}",
        )
    bm, bf = total.betti_model, fixed.betti_model
    relative_term = 0 if r == 0 else module_cohomology(data.relative_model, r - 1).betti
    fixed_sum = sum(bf.get(n) for n in range(r, window + 1, 2))
    total_sum = sum(bm.get(n) for n in range(r, window + 1, 2))
    stabilized = window >= 1 and not any(
        (bm.get(window), bm.get(window - 1), bf.get(window), bf.get(window - 1))
    )
    if not stabilized:
        return SmithGysinReport(
            r, "inconclusive", window, relative_term, fixed_sum, total_sum, False,
            "cohomology has not stabilized in the top two window degrees",
        )
    verdict = "holds" if relative_term + fixed_sum <= total_sum else "fails"
    return SmithGysinReport(
        r, verdict, window, relative_term, fixed_sum, total_sum, True, None
    )


def semifree_s3_models(
    data: BasicData, max_degree: int = DEFAULT_DEGREE
) -> tuple[MinimalModelResult, MinimalModelResult]:
    """Total-space and fixed-set models for a semifree quaternionic action,
    built from the same two cones with a degree-4 Euler map."""
    _require_valid(data)
    if data.variant != "semifree_S3":
        raise PreconditionError(
            "semifree quaternionic models need variant semifree_S3 (degree-4 Euler map)"
        )
    return model_of_total_space(data, max_degree), model_of_fixed_set(data, max_degree)


# ---- assembly from tabulated complexes --------------------------------------


@dataclass(frozen=True, eq=False)
class AssembledData:
    """Basic data produced from tabulated complexes, with quis certificates."""

    data: BasicData
    relative: MinimalModelResult
    total_cone_quis: DgModuleMap
    fixed_cone_quis: DgModuleMap


def from_complexes(
    orbit_quis: DgModuleMap,
    inclusion_map: DgModuleMap,
    euler_map: DgModuleMap,
    max_degree: int = DEFAULT_DEGREE,
    fixed_set_empty: bool = False,
    variant: str = "circle",
    base_simply_connected: bool = True,
    fixed_components: int | None = None,
    name: str = "",
) -> AssembledData:
    """Builds basic data from tabulated stand-ins for the orbit complexes.

    orbit_quis is a quasi-isomorphism from the algebra-as-module onto the
    orbit complex X_B; inclusion_map (degree 0) and euler_map (degree 2, or
    4 for the semifree variant) share a source complex standing in for the
    relative orbit complex and land in X_B.  The relative complex is
    replaced by its minimal model, the two maps are transported onto it,
    and the transported cones are certified against the original ones.
    """
    if variant not in VARIANTS:
        raise ValidationError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    d_e = EULER_DEGREES[variant]
    src = orbit_quis.source
    bad = _orbit_module_failure(src, src.algebra)
    if bad:
        raise ValidationError(f"orbit_quis source: {bad}")
    alg = src.algebra
    if inclusion_map.source is not euler_map.source:
        raise ValidationError("inclusion_map and euler_map must share their source complex")
    if inclusion_map.target is not orbit_quis.target or euler_map.target is not orbit_quis.target:
        raise ValidationError("structure maps must land in the orbit complex")
    if inclusion_map.degree != 0:
        raise ValidationError(f"inclusion_map has degree {inclusion_map.degree}; expected 0")
    if euler_map.degree != d_e:
        raise ValidationError(
            f"euler_map has degree {euler_map.degree}; variant {variant} needs {d_e}"
        )

    x_bf = inclusion_map.source
    relative = minimal_model(x_bf, n_cap=min(max_degree + 1, x_bf.cap, alg.cap - 1))
    m_model, rho_m = relative.module, relative.rho

    need = max(m_model.gen_degrees) + d_e
    a_mod = algebra_module(alg, cap=min(alg.cap, max(need, src.cap)))
    unit_img = orbit_quis.matrix(0).col(0)
    rho_n = map_from_generator_images(
        a_mod, orbit_quis.target, 0, {a_mod.gen_names[0]: unit_img}, name=orbit_quis.name
    )

    i_prime, h_i = model_of_morphism(inclusion_map, rho_m, rho_n)
    e_prime, h_e = model_of_morphism(euler_map, rho_m, rho_n)
    fixed_quis = cone_quis(inclusion_map, i_prime, rho_m, rho_n, h_i)
    total_quis = cone_quis(euler_map, e_prime, rho_m, rho_n, h_e)

    data = BasicData(
        algebra=alg,
        relative_model=m_model,
        i_prime=i_prime,
        e_prime=e_prime,
        fixed_set_empty=fixed_set_empty,
        variant=variant,
        base_simply_connected=base_simply_connected,
        fixed_components=fixed_components,
        name=name,
    )
    _require_valid(data)
    return AssembledData(data, relative, total_quis, fixed_quis)


# ---- full report -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ActionReport:
    """Everything the basic data determines, with notes for skipped parts."""

    name: str
    variant: str
    max_degree: int
    betti_total: GradedDims
    betti_fixed: GradedDims | None
    betti_borel: GradedDims | None
    total: MinimalModelResult
    fixed: MinimalModelResult | None
    equivariant: EquivariantModel | None
    les: EquivariantLesReport | None
    shared_basis: SharedBasisReport | None
    scalars: ScalarsReport | None
    poincare: PoincareReport | None
    formality: FormalityReport | None
    localization: LocalizationReport
    dimc: DimcReport | None
    almost_free: AlmostFreeReport | None
    naive: NaiveReport | None
    smith_gysin: tuple[SmithGysinReport, ...]
    notes: tuple[str, ...]


def action_report(data: BasicData, max_degree: int = DEFAULT_DEGREE) -> ActionReport:
    """Runs every applicable operation on the basic data and collects the
    results; operations whose hypotheses the data does not meet are skipped
    with an explanatory note."""
    _require_valid(data)
    notes: list[str] = []
    total = model_of_total_space(data, max_degree)
    fixed = equivariant = les = shared = scalars = None
    poincare = formality = dimc = almost = naive = None
    smith: tuple[SmithGysinReport, ...] = ()

    if data.fixed_set_empty:
        notes.append(
            "fixed set declared empty: fixed-set, Borel, fiber-series, formality "
            "and dimension reports are skipped"
        )
        try:
            almost = almost_free_model(data, max_degree)
        except PreconditionError as exc:
            notes.append(f"almost-free reduction skipped: {exc}")
    else:
        fixed = model_of_fixed_set(data, max_degree)
        shared = shared_basis_check(data, max_degree)
        equivariant = equivariant_model(data, max_degree)
        les = equivariant_les(data, max_degree)
        scalars = extension_of_scalars_check(data, max_degree)
        formality = formality_check(data, max_degree)
        if data.euler_degree == 2:
            poincare = poincare_relations(data, max_degree)
            dimc = dimc_relation(data, max_degree)
        else:
            notes.append(
                "fiber-series and cohomological-dimension identities are stated "
                "for a degree-2 Euler class: skipped"
            )

    localization = localization_check(data, max_degree)

    if _euler_map_is_zero(data):
        naive = naive_structure(data, max_degree)
    else:
        notes.append("Euler map is nonzero on the window: naive product report skipped")

    if data.variant == "isometric_flow" and not data.fixed_set_empty:
        smith = tuple(smith_gysin_inequality(data, max_degree, r) for r in (0, 1, 2))

    return ActionReport(
        name=data.name,
        variant=data.variant,
        max_degree=max_degree,
        betti_total=total.betti_model,
        betti_fixed=fixed.betti_model if fixed else None,
        betti_borel=equivariant.betti if equivariant else None,
        total=total,
        fixed=fixed,
        equivariant=equivariant,
        les=les,
        shared_basis=shared,
        scalars=scalars,
        poincare=poincare,
        formality=formality,
        localization=localization,
        dimc=dimc,
        almost_free=almost,
        naive=naive,
        smith_gysin=smith,
        notes=tuple(notes),
    )
