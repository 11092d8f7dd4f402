"""Differential graded modules over a Sullivan-presented algebra.

Two representations share one read interface (dims, labels, differential
and action matrices per degree):

* FreeDgModule: free on a finite generator table; the differential is an
  A-linear combination per generator and everything else is derived.
* TabulatedDgModule: explicit per-degree matrices, used for targets that
  are not free and for negative-control fixtures.

Degree-p morphisms follow the shifted conventions throughout:
phi(a.m) = (-1)^{|a| p} a.phi(m) and d phi = (-1)^p phi d.  The graded
cone of a degree-p map phi: M -> N lives on N^n + M^{n-p+1} with

    d(y, x) = (dy + phi x, (-1)^{p-1} dx)
    a.(y, x) = (a.y, (-1)^{|a|(p-1)} a.x)

and a module built at cap N certifies cohomology only in degrees
<= N - 1; helpers raise DegreeWindowError rather than truncate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .cdga import (
    CheckReport,
    Mono,
    Poly,
    SullivanPresentation,
    parse_polynomial,
    poly_add,
    poly_is_zero,
    poly_scale,
)
from .errors import DegreeWindowError, ValidationError
from .linalg import (
    CohomologyData,
    GradedDims,
    Q,
    RatMatrix,
    as_q,
    cohomology_at,
    kron,
    vec,
)

# A-linear combination of module generators: generator index -> coefficient.
Combination = dict[int, Poly]


def comb_add(a: Combination, b: Combination) -> Combination:
    out = {j: dict(p) for j, p in a.items()}
    for j, p in b.items():
        s = poly_add(out.get(j, {}), p)
        if poly_is_zero(s):
            out.pop(j, None)
        else:
            out[j] = s
    return out


def comb_scale(c, a: Combination) -> Combination:
    c = as_q(c)
    if not c:
        return {}
    return {j: poly_scale(c, p) for j, p in a.items()}


def comb_is_zero(a: Combination) -> bool:
    return all(poly_is_zero(p) for p in a.values())


class FreeDgModule:
    """Free A-dg module on an ordered generator table."""

    __slots__ = (
        "algebra",
        "cap",
        "gen_names",
        "gen_degrees",
        "gen_diffs",
        "stages",
        "_index",
        "_basis_cache",
        "_basis_index_cache",
        "_diff_cache",
        "_act_cache",
    )

    def __init__(
        self,
        algebra: SullivanPresentation,
        generators: Sequence[tuple[str, int]],
        differentials: Mapping[str, Mapping[str, Poly | str]] | None = None,
        cap: int | None = None,
        stages: Sequence[tuple[int, int] | None] | None = None,
    ):
        self.algebra = algebra
        self.cap = algebra.cap if cap is None else int(cap)
        if self.cap < 0:
            raise ValidationError("module cap must be nonnegative")
        names = tuple(name for name, _ in generators)
        degrees = tuple(int(d) for _, d in generators)
        if len(set(names)) != len(names):
            raise ValidationError("module generator names must be distinct")
        for name, deg in zip(names, degrees):
            if not name or any(ch.isspace() for ch in name):
                raise ValidationError(f"bad module generator name {name!r}")
            if deg < 0:
                raise ValidationError(f"generator {name} has negative degree {deg}")
        self.gen_names = names
        self.gen_degrees = degrees
        self._index = {n: i for i, n in enumerate(names)}
        self.stages = tuple(stages) if stages is not None else (None,) * len(names)
        if len(self.stages) != len(names):
            raise ValidationError("stages must align with generators")

        diffs: list[Combination] = []
        given = {name: dict(c) for name, c in (differentials or {}).items()}
        for i, name in enumerate(names):
            raw = given.pop(name, {})
            comb: Combination = {}
            for tgt, coeff in raw.items():
                j = self.gen_index(tgt)
                poly = parse_polynomial(algebra, coeff) if isinstance(coeff, str) else {
                    m: as_q(c) for m, c in coeff.items() if c
                }
                if poly_is_zero(poly):
                    continue
                want = degrees[i] + 1 - degrees[j]
                got = algebra.poly_degree(poly)
                if got != want:
                    raise ValidationError(
                        f"d({name}) coefficient on {tgt} has degree {got}, expected {want}"
                    )
                comb[j] = poly
            diffs.append(comb)
        if given:
            extra = ", ".join(sorted(given))
            raise ValidationError(f"differentials for unknown generators: {extra}")
        self.gen_diffs = tuple(diffs)

        for i, name in enumerate(names):
            dd = self.d_combination(self.gen_diffs[i])
            if not comb_is_zero(dd):
                raise ValidationError(f"d(d({name})) is nonzero")

        self._basis_cache: dict[int, tuple[tuple[int, Mono], ...]] = {}
        self._basis_index_cache: dict[int, dict[tuple[int, Mono], int]] = {}
        self._diff_cache: dict[int, RatMatrix] = {}
        self._act_cache: dict[tuple[int, int], RatMatrix] = {}

    def gen_index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise ValidationError(f"unknown module generator {name!r}") from None

    @property
    def gen_count(self) -> int:
        return len(self.gen_names)

    def __repr__(self) -> str:
        gens = ", ".join(f"{n}:{d}" for n, d in zip(self.gen_names, self.gen_degrees))
        return f"FreeDgModule({gens}; cap={self.cap})"

    # ---- combinations --------------------------------------------------

    def d_combination(self, comb: Combination) -> Combination:
        """Module Leibniz rule on an A-linear combination of generators."""
        out: Combination = {}
        for j, cj in comb.items():
            if poly_is_zero(cj):
                continue
            deg = self.algebra.poly_degree(cj)
            dcj = self.algebra.d_poly(cj)
            if not poly_is_zero(dcj):
                out = comb_add(out, {j: dcj})
            sign = Q(-1 if deg % 2 else 1)
            for h, q in self.gen_diffs[j].items():
                prod = self.algebra.poly_mul(cj, q)
                if not poly_is_zero(prod):
                    out = comb_add(out, {h: poly_scale(sign, prod)})
        return out

    def act_combination(self, p: Poly, comb: Combination) -> Combination:
        out: Combination = {}
        for j, cj in comb.items():
            prod = self.algebra.poly_mul(p, cj)
            if not poly_is_zero(prod):
                out[j] = prod
        return out

    def combination_degree(self, comb: Combination) -> int | None:
        degs = set()
        for j, cj in comb.items():
            if not poly_is_zero(cj):
                degs.add(self.algebra.poly_degree(cj) + self.gen_degrees[j])
        if not degs:
            return None
        if len(degs) > 1:
            raise ValidationError(f"inhomogeneous combination with degrees {sorted(degs)}")
        return degs.pop()

    # ---- materialized interface ----------------------------------------

    def dim(self, k: int) -> int:
        return len(self.basis(k))

    def basis(self, k: int) -> tuple[tuple[int, Mono], ...]:
        """Basis (generator index, algebra monomial), generator-major order."""
        if k < 0:
            return ()
        if k > self.cap:
            raise DegreeWindowError(f"degree {k} exceeds module cap {self.cap}")
        if k not in self._basis_cache:
            out = []
            for gi, deg in enumerate(self.gen_degrees):
                if deg <= k:
                    out.extend((gi, m) for m in self.algebra.basis(k - deg))
            self._basis_cache[k] = tuple(out)
        return self._basis_cache[k]

    def basis_index(self, k: int) -> dict[tuple[int, Mono], int]:
        if k not in self._basis_index_cache:
            self._basis_index_cache[k] = {b: i for i, b in enumerate(self.basis(k))}
        return self._basis_index_cache[k]

    def basis_labels(self, k: int) -> tuple[str, ...]:
        out = []
        for gi, m in self.basis(k):
            name = self.gen_names[gi]
            mono = self.algebra.mono_str(m)
            if mono == "1":
                out.append(name)
            elif name == "1":
                out.append(mono)
            else:
                out.append(f"{mono}*{name}")
        return tuple(out)

    def combination_vector(self, comb: Combination, k: int) -> tuple[Fraction, ...]:
        idx = self.basis_index(k)
        coords = [Q(0)] * len(idx)
        for j, cj in comb.items():
            for m, c in cj.items():
                key = (j, m)
                if key not in idx:
                    raise ValidationError(
                        f"term of degree {self.algebra.mono_degree(m) + self.gen_degrees[j]}"
                        f" in a degree-{k} slot"
                    )
                coords[idx[key]] = c
        return tuple(coords)

    def vector_combination(self, v: Sequence[Fraction], k: int) -> Combination:
        basis = self.basis(k)
        if len(v) != len(basis):
            raise ValidationError(f"vector length {len(v)} != dim {len(basis)} at degree {k}")
        out: Combination = {}
        for (gi, m), c in zip(basis, v):
            if c:
                out = comb_add(out, {gi: {m: as_q(c)}})
        return out

    def differential_matrix(self, k: int) -> RatMatrix:
        if k + 1 > self.cap:
            raise DegreeWindowError(f"differential out of degree {k} exceeds cap {self.cap}")
        if k < 0:
            return RatMatrix.zero(self.dim(k + 1), 0)
        if k not in self._diff_cache:
            cols = []
            for gi, m in self.basis(k):
                image = self.d_combination({gi: {m: Q(1)}})
                cols.append(self.combination_vector(image, k + 1))
            self._diff_cache[k] = RatMatrix.from_cols(cols, nrows=self.dim(k + 1))
        return self._diff_cache[k]

    def action_matrix(self, i: int, k: int) -> RatMatrix:
        """Multiplication A^i (x) M^k -> M^{i+k}; columns A-major."""
        if i < 0:
            raise ValidationError(f"negative algebra degree {i}")
        if i + k > self.cap:
            raise DegreeWindowError(f"action into degree {i + k} exceeds cap {self.cap}")
        if k < 0:
            return RatMatrix.zero(self.dim(i + k), 0)
        if i == 0:
            return RatMatrix.identity(self.dim(k))
        key = (i, k)
        if key not in self._act_cache:
            amonos = self.algebra.basis(i)
            cols = []
            for am in amonos:
                for gi, m in self.basis(k):
                    image = self.act_combination({am: Q(1)}, {gi: {m: Q(1)}})
                    cols.append(self.combination_vector(image, i + k))
            self._act_cache[key] = RatMatrix.from_cols(cols, nrows=self.dim(i + k))
        return self._act_cache[key]


class TabulatedDgModule:
    """A-dg module given by explicit per-degree labels and matrices.

    Construction checks shapes only; semantic axioms (d^2, Leibniz,
    associativity) are the job of verify_dgmodule, so deliberately broken
    tables can be built for negative controls.
    """

    __slots__ = ("algebra", "cap", "labels", "d_mats", "act_mats")

    def __init__(
        self,
        algebra: SullivanPresentation,
        cap: int,
        labels: Mapping[int, Sequence[str]],
        d_mats: Mapping[int, RatMatrix] | None = None,
        act_mats: Mapping[tuple[int, int], RatMatrix] | None = None,
    ):
        self.algebra = algebra
        self.cap = int(cap)
        if self.cap < 0:
            raise ValidationError("module cap must be nonnegative")
        self.labels: dict[int, tuple[str, ...]] = {}
        for k, ls in labels.items():
            if not 0 <= k <= self.cap:
                raise ValidationError(f"labels at degree {k} outside [0, {self.cap}]")
            if ls:
                self.labels[k] = tuple(str(s) for s in ls)
        self.d_mats: dict[int, RatMatrix] = {}
        for k, mat in (d_mats or {}).items():
            if not 0 <= k <= self.cap - 1:
                raise ValidationError(f"differential at degree {k} outside [0, {self.cap - 1}]")
            if (mat.rows, mat.cols) != (self.dim(k + 1), self.dim(k)):
                raise ValidationError(f"differential at degree {k} has wrong shape")
            if not mat.is_zero():
                self.d_mats[k] = mat
        self.act_mats: dict[tuple[int, int], RatMatrix] = {}
        for (i, k), mat in (act_mats or {}).items():
            if i < 1 or k < 0 or i + k > self.cap:
                raise ValidationError(f"action key ({i}, {k}) outside the window")
            if (mat.rows, mat.cols) != (self.dim(i + k), algebra.dim(i) * self.dim(k)):
                raise ValidationError(f"action at ({i}, {k}) has wrong shape")
            if not mat.is_zero():
                self.act_mats[(i, k)] = mat

    def dim(self, k: int) -> int:
        if k < 0:
            return 0
        if k > self.cap:
            raise DegreeWindowError(f"degree {k} exceeds module cap {self.cap}")
        return len(self.labels.get(k, ()))

    def basis_labels(self, k: int) -> tuple[str, ...]:
        if k < 0:
            return ()
        if k > self.cap:
            raise DegreeWindowError(f"degree {k} exceeds module cap {self.cap}")
        return self.labels.get(k, ())

    def differential_matrix(self, k: int) -> RatMatrix:
        if k + 1 > self.cap:
            raise DegreeWindowError(f"differential out of degree {k} exceeds cap {self.cap}")
        if k in self.d_mats:
            return self.d_mats[k]
        return RatMatrix.zero(self.dim(k + 1), max(self.dim(k), 0))

    def action_matrix(self, i: int, k: int) -> RatMatrix:
        if i < 0:
            raise ValidationError(f"negative algebra degree {i}")
        if i + k > self.cap:
            raise DegreeWindowError(f"action into degree {i + k} exceeds cap {self.cap}")
        if i == 0:
            return RatMatrix.identity(self.dim(k))
        if k < 0:
            return RatMatrix.zero(self.dim(i + k), 0)
        if (i, k) in self.act_mats:
            return self.act_mats[(i, k)]
        return RatMatrix.zero(self.dim(i + k), self.algebra.dim(i) * self.dim(k))

    def __repr__(self) -> str:
        dims = [self.dim(k) for k in range(self.cap + 1)]
        return f"TabulatedDgModule(dims={dims}; cap={self.cap})"


DgModule = FreeDgModule | TabulatedDgModule


def algebra_module(algebra: SullivanPresentation, cap: int | None = None) -> FreeDgModule:
    """The algebra as a module over itself, free on one degree-0 generator."""
    return FreeDgModule(algebra, [("1", 0)], {}, cap=cap)


def zero_module(algebra: SullivanPresentation, cap: int | None = None) -> FreeDgModule:
    return FreeDgModule(algebra, [], {}, cap=cap)


def tabulate(module: DgModule, cap: int | None = None) -> TabulatedDgModule:
    """Materialize any module into the tabulated representation."""
    cap = module.cap if cap is None else min(cap, module.cap)
    labels = {k: module.basis_labels(k) for k in range(cap + 1)}
    d_mats = {k: module.differential_matrix(k) for k in range(cap)}
    act_mats = {}
    for i in range(1, min(cap, module.algebra.cap) + 1):
        for k in range(cap - i + 1):
            act_mats[(i, k)] = module.action_matrix(i, k)
    return TabulatedDgModule(module.algebra, cap, labels, d_mats, act_mats)


def modules_equal(a: DgModule, b: DgModule, labels: bool = True) -> bool:
    """Exact equality of the materialized structure over the common interface."""
    if a.algebra != b.algebra or a.cap != b.cap:
        return False
    for k in range(a.cap + 1):
        if a.dim(k) != b.dim(k):
            return False
        if labels and a.basis_labels(k) != b.basis_labels(k):
            return False
    for k in range(a.cap):
        if a.differential_matrix(k) != b.differential_matrix(k):
            return False
    for i in range(1, min(a.cap, a.algebra.cap) + 1):
        for k in range(a.cap - i + 1):
            if a.action_matrix(i, k) != b.action_matrix(i, k):
                return False
    return True


def verify_dgmodule(module: DgModule, top: int | None = None) -> CheckReport:
    """Check d^2 = 0, module Leibniz, unit, and action associativity on bases <= top."""
    top = module.cap if top is None else min(top, module.cap)
    acap = module.algebra.cap
    failures: list[str] = []
    checks = 0

    for k in range(top - 1):
        checks += 1
        if not (module.differential_matrix(k + 1) * module.differential_matrix(k)).is_zero():
            failures.append(f"d(d(x)) != 0 out of degree {k}")

    for k in range(top + 1):
        checks += 1
        if module.action_matrix(0, k) != RatMatrix.identity(module.dim(k)):
            failures.append(f"unit does not act as identity in degree {k}")

    for i in range(1, top + 1):
        if i + 1 > acap:
            break
        d_a = module.algebra.differential_matrix(i)
        for k in range(top - i):
            checks += 1
            lhs = module.differential_matrix(i + k) * module.action_matrix(i, k)
            rhs = module.action_matrix(i + 1, k) * kron(d_a, RatMatrix.identity(module.dim(k)))
            sign = Q(-1 if i % 2 else 1)
            rhs = rhs + (
                module.action_matrix(i, k + 1)
                * kron(RatMatrix.identity(module.algebra.dim(i)), module.differential_matrix(k))
            ).scale(sign)
            if lhs != rhs:
                failures.append(f"module Leibniz fails for (|a|, |m|) = ({i}, {k})")

    for i in range(1, min(top, acap) + 1):
        for j in range(1, min(top, acap) + 1 - i):
            prod = module.algebra.product_matrix(i, j)
            for k in range(top + 1 - i - j):
                checks += 1
                lhs = module.action_matrix(i + j, k) * kron(
                    prod, RatMatrix.identity(module.dim(k))
                )
                rhs = module.action_matrix(i, j + k) * kron(
                    RatMatrix.identity(module.algebra.dim(i)), module.action_matrix(j, k)
                )
                if lhs != rhs:
                    failures.append(f"associativity fails for (|a|, |b|, |m|) = ({i}, {j}, {k})")

    return CheckReport("verify_dgmodule", not failures, tuple(failures), checks)


class DgModuleMap:
    """Degree-p morphism; matrices indexed by source degree.

    Degrees with the source or the target outside [0, cap] carry the zero
    map; degrees above either cap, or above an explicit window_cap (used
    by compositions that are only defined on part of the nominal window),
    are not materialized and raise on access.
    """

    __slots__ = ("source", "target", "degree", "mats", "name", "window_cap")

    def __init__(
        self,
        source: DgModule,
        target: DgModule,
        degree: int,
        mats: Mapping[int, RatMatrix] | None = None,
        name: str = "",
        window_cap: int | None = None,
    ):
        self.source = source
        self.target = target
        self.degree = int(degree)
        self.name = name
        self.window_cap = None if window_cap is None else int(window_cap)
        hi = self.window().stop - 1
        self.mats: dict[int, RatMatrix] = {}
        for k, mat in (mats or {}).items():
            if not 0 <= k <= hi:
                raise ValidationError(f"map matrix at source degree {k} outside the window")
            want = (target.dim(k + self.degree), source.dim(k))
            if (mat.rows, mat.cols) != want:
                raise ValidationError(
                    f"map matrix at degree {k} has shape {(mat.rows, mat.cols)}, expected {want}"
                )
            if not mat.is_zero():
                self.mats[k] = mat

    def matrix(self, k: int) -> RatMatrix:
        t = k + self.degree
        if k >= self.window().stop:
            raise DegreeWindowError(
                f"map matrix at source degree {k} is above the window "
                f"(source cap {self.source.cap}, target cap {self.target.cap}"
                + ("" if self.window_cap is None else f", window cap {self.window_cap}")
                + ")"
            )
        if k < 0 or t < 0:
            return RatMatrix.zero(self.target.dim(t) if t >= 0 else 0, self.source.dim(k) if k >= 0 else 0)
        if k in self.mats:
            return self.mats[k]
        return RatMatrix.zero(self.target.dim(t), self.source.dim(k))

    def window(self) -> range:
        """Source degrees where the matrix is materializable."""
        hi = min(self.source.cap, self.target.cap - self.degree)
        if self.window_cap is not None:
            hi = min(hi, self.window_cap)
        return range(0, hi + 1)

    def verify(self, top: int | None = None) -> CheckReport:
        """Chain condition d phi = (-1)^p phi d and twisted A-linearity."""
        p = self.degree
        sign = Q(-1 if p % 2 else 1)
        hi = self.window().stop - 1 if top is None else min(top, self.window().stop - 1)
        failures: list[str] = []
        checks = 0
        for k in range(min(hi, self.source.cap - 1, self.target.cap - p - 1) + 1):
            checks += 1
            lhs = self.target.differential_matrix(k + p) * self.matrix(k)
            rhs = (self.matrix(k + 1) * self.source.differential_matrix(k)).scale(sign)
            if lhs != rhs:
                failures.append(f"chain condition fails at source degree {k}")
        acap = self.source.algebra.cap
        for i in range(1, min(hi, acap) + 1):
            ident_a = RatMatrix.identity(self.source.algebra.dim(i))
            for k in range(min(hi - i, self.source.cap - i, self.target.cap - p - i) + 1):
                checks += 1
                lhs = self.matrix(i + k) * self.source.action_matrix(i, k)
                tw = Q(-1 if (i * p) % 2 else 1)
                rhs = (self.target.action_matrix(i, k + p) * kron(ident_a, self.matrix(k))).scale(tw)
                if lhs != rhs:
                    failures.append(f"A-linearity fails for (|a|, |m|) = ({i}, {k})")
        return CheckReport("verify_map", not failures, tuple(failures), checks)

    def is_chain_map(self, top: int | None = None) -> bool:
        return self.verify(top).ok

    def __add__(self, other: "DgModuleMap") -> "DgModuleMap":
        self._check_parallel(other)
        hi = min(self.window().stop, other.window().stop) - 1
        mats = {k: self.matrix(k) + other.matrix(k) for k in range(hi + 1)}
        return DgModuleMap(
            self.source, self.target, self.degree, mats, window_cap=self._merged_cap(other)
        )

    def __sub__(self, other: "DgModuleMap") -> "DgModuleMap":
        self._check_parallel(other)
        hi = min(self.window().stop, other.window().stop) - 1
        mats = {k: self.matrix(k) - other.matrix(k) for k in range(hi + 1)}
        return DgModuleMap(
            self.source, self.target, self.degree, mats, window_cap=self._merged_cap(other)
        )

    def __neg__(self) -> "DgModuleMap":
        return self.scale(Q(-1))

    def scale(self, c) -> "DgModuleMap":
        mats = {k: self.matrix(k).scale(c) for k in self.window()}
        return DgModuleMap(
            self.source, self.target, self.degree, mats, window_cap=self.window_cap
        )

    def _merged_cap(self, other: "DgModuleMap") -> int | None:
        caps = [c for c in (self.window_cap, other.window_cap) if c is not None]
        return min(caps) if caps else None

    def _check_parallel(self, other: "DgModuleMap") -> None:
        if (
            self.source is not other.source
            or self.target is not other.target
            or self.degree != other.degree
        ):
            raise ValidationError("maps are not parallel")

    def __repr__(self) -> str:
        tag = f" {self.name}" if self.name else ""
        return f"DgModuleMap(degree={self.degree}{tag})"


def identity_map(module: DgModule) -> DgModuleMap:
    mats = {k: RatMatrix.identity(module.dim(k)) for k in range(module.cap + 1)}
    return DgModuleMap(module, module, 0, mats, name="id")


def zero_map(source: DgModule, target: DgModule, degree: int) -> DgModuleMap:
    return DgModuleMap(source, target, degree, {}, name="0")


def compose(g: DgModuleMap, f: DgModuleMap) -> DgModuleMap:
    """g after f; defined where both factors are, which may narrow the window."""
    if f.target is not g.source:
        raise ValidationError("composition mismatch: target of f is not source of g")
    degree = f.degree + g.degree
    hi = min(f.window().stop - 1, g.window().stop - 1 - f.degree)
    mats = {}
    for k in range(hi + 1):
        if k + degree <= g.target.cap:
            mats[k] = g.matrix(k + f.degree) * f.matrix(k)
    nominal = min(f.source.cap, g.target.cap - degree)
    window_cap = hi if hi < nominal else None
    return DgModuleMap(f.source, g.target, degree, mats, window_cap=window_cap)


def maps_equal(f: DgModuleMap, g: DgModuleMap, top: int | None = None) -> bool:
    if f.degree != g.degree:
        return False
    hi = min(f.window().stop, g.window().stop) - 1
    if top is not None:
        hi = min(hi, top)
    return all(f.matrix(k) == g.matrix(k) for k in range(hi + 1))


def map_from_generator_images(
    source: FreeDgModule,
    target: DgModule,
    degree: int,
    images: Mapping[str, Sequence[Fraction]],
    name: str = "",
) -> DgModuleMap:
    """A-linear map from a free module, determined by generator images.

    images[name] is a coordinate vector in the target's basis at degree
    deg(g) + degree; omitted generators map to zero.  Generators whose
    image degree falls outside the target window must be omitted.
    """
    img_vectors: dict[int, tuple[Fraction, ...]] = {}
    for gname, v in images.items():
        gi = source.gen_index(gname)
        t = source.gen_degrees[gi] + degree
        if not 0 <= t <= target.cap:
            if any(x != 0 for x in v):
                raise ValidationError(
                    f"image of {gname} lands in degree {t}, outside the target window"
                )
            continue
        v = vec(v)
        if len(v) != target.dim(t):
            raise ValidationError(
                f"image of {gname} has length {len(v)}, expected {target.dim(t)}"
            )
        if any(x != 0 for x in v):
            img_vectors[gi] = v
    mats = {}
    for k in range(min(source.cap, target.cap - degree) + 1):
        cols = []
        for gi, m in source.basis(k):
            img = img_vectors.get(gi)
            t = source.gen_degrees[gi] + degree
            if img is None or t < 0:
                cols.append((Q(0),) * target.dim(k + degree))
                continue
            i = source.algebra.mono_degree(m)
            act = target.action_matrix(i, t)
            m_idx = source.algebra.basis_index(i)[m]
            dim_t = target.dim(t)
            col = [Q(0)] * target.dim(k + degree)
            for s, c in enumerate(img):
                if c:
                    piece = act.col(m_idx * dim_t + s)
                    col = [x + c * y for x, y in zip(col, piece)]
            sign = Q(-1 if (i * degree) % 2 else 1)
            cols.append(tuple(sign * x for x in col))
        mats[k] = RatMatrix.from_cols(cols, nrows=target.dim(k + degree))
    return DgModuleMap(source, target, degree, mats, name=name)


@dataclass(frozen=True)
class Homotopy:
    """Degree-(p-1) map h asserted to satisfy (-1)^p dh + hd = psi - phi."""

    map: DgModuleMap


def is_homotopy(
    h: Homotopy | DgModuleMap,
    phi: DgModuleMap,
    psi: DgModuleMap,
    top: int | None = None,
) -> bool:
    """Whether (-1)^p d h + h d = psi - phi holds as matrices on the window."""
    hmap = h.map if isinstance(h, Homotopy) else h
    p = phi.degree
    if psi.degree != p or hmap.degree != p - 1:
        raise ValidationError("homotopy degrees are inconsistent")
    src, tgt = phi.source, phi.target
    sign = Q(-1 if p % 2 else 1)
    hi = min(
        src.cap - 1,
        tgt.cap - p,
        phi.window().stop - 1,
        psi.window().stop - 1,
        hmap.window().stop - 2,
    )
    if top is not None:
        hi = min(hi, top)
    for k in range(hi + 1):
        lhs = (tgt.differential_matrix(k + p - 1) * hmap.matrix(k)).scale(sign)
        lhs = lhs + hmap.matrix(k + 1) * src.differential_matrix(k)
        if lhs != psi.matrix(k) - phi.matrix(k):
            return False
    return True


def shift(module: DgModule, p: int) -> TabulatedDgModule:
    """The shifted module M[-p]: degree n holds M^{n-p}, with sign twists."""
    new_cap = module.cap + p
    if new_cap < 0:
        raise DegreeWindowError(f"shift by {p} empties the window of cap {module.cap}")
    for k in range(max(0, -p)):
        if module.dim(k):
            raise DegreeWindowError(
                f"shift by {p} pushes degree {k} below zero (window underflow)"
            )
    sign_d = Q(-1 if p % 2 else 1)
    labels = {n: module.basis_labels(n - p) for n in range(new_cap + 1)}
    d_mats = {n: module.differential_matrix(n - p).scale(sign_d) for n in range(new_cap)}
    act_mats = {}
    for i in range(1, min(new_cap, module.algebra.cap) + 1):
        tw = Q(-1 if (i * p) % 2 else 1)
        for n in range(new_cap - i + 1):
            act_mats[(i, n)] = module.action_matrix(i, n - p).scale(tw)
    return TabulatedDgModule(module.algebra, new_cap, labels, d_mats, act_mats)


@dataclass
class Cone:
    """Graded cone N +_phi M of a degree-p map, with its structure maps."""

    module: TabulatedDgModule
    phi: DgModuleMap
    degree: int
    n_dims: dict[int, int]
    m_dims: dict[int, int]
    inclusion: DgModuleMap
    projection: DgModuleMap

    @property
    def cap(self) -> int:
        return self.module.cap


def cone(phi: DgModuleMap, check: bool = True) -> Cone:
    """The graded cone on N^n + M^{n-p+1} with the displayed sign conventions."""
    if check:
        report = phi.verify()
        if not report.ok:
            raise ValidationError(f"cone input is not a morphism: {report.failures[0]}")
    m_mod, n_mod, p = phi.source, phi.target, phi.degree
    if m_mod.algebra != n_mod.algebra:
        raise ValidationError("cone over maps between modules over different algebras")
    cap = min(n_mod.cap, m_mod.cap + p - 1)
    if cap < 0:
        raise DegreeWindowError("cone window is empty")
    for k in range(m_mod.cap + 1):
        if k + p - 1 < 0 and m_mod.dim(k):
            raise DegreeWindowError(
                f"cone places M^{k} below degree 0 (window underflow)"
            )

    algebra = n_mod.algebra
    shift_tag = 1 - p
    labels = {}
    n_dims, m_dims = {}, {}
    for n in range(cap + 1):
        n_dims[n] = n_mod.dim(n)
        m_dims[n] = m_mod.dim(n - p + 1)
        labels[n] = n_mod.basis_labels(n) + tuple(
            f"{lbl}[{shift_tag}]" for lbl in m_mod.basis_labels(n - p + 1)
        )

    sign_d = Q(-1 if (p - 1) % 2 else 1)
    d_mats = {}
    for n in range(cap):
        d_mats[n] = RatMatrix.block(
            [
                [n_mod.differential_matrix(n), phi.matrix(n - p + 1)],
                [
                    RatMatrix.zero(m_dims[n + 1], n_dims[n]),
                    m_mod.differential_matrix(n - p + 1).scale(sign_d),
                ],
            ]
        )
    act_mats = {}
    for i in range(1, min(cap, algebra.cap) + 1):
        tw = Q(-1 if (i * (p - 1)) % 2 else 1)
        for n in range(cap - i + 1):
            da = algebra.dim(i)
            act_mats[(i, n)] = RatMatrix.block(
                [
                    [n_mod.action_matrix(i, n), RatMatrix.zero(n_dims[i + n], da * m_dims[n])],
                    [
                        RatMatrix.zero(m_dims[i + n], da * n_dims[n]),
                        m_mod.action_matrix(i, n - p + 1).scale(tw),
                    ],
                ]
            )
    module = TabulatedDgModule(algebra, cap, labels, d_mats, act_mats)

    incl = {}
    for k in range(min(n_mod.cap, cap) + 1):
        incl[k] = RatMatrix.identity(n_dims[k]).vstack(RatMatrix.zero(m_dims[k], n_dims[k]))
    inclusion = DgModuleMap(n_mod, module, 0, incl, name="cone inclusion")

    proj = {}
    for n in range(cap + 1):
        if 0 <= n - p + 1 <= m_mod.cap:
            proj[n] = RatMatrix.zero(m_dims[n], n_dims[n]).hstack(RatMatrix.identity(m_dims[n]))
    projection = DgModuleMap(module, m_mod, 1 - p, proj, name="cone projection")

    return Cone(module, phi, p, n_dims, m_dims, inclusion, projection)


def free_cone(
    phi: DgModuleMap,
    gen_names: Sequence[str] | None = None,
    check: bool = True,
) -> tuple[FreeDgModule, DgModuleMap, Cone]:
    """Cone of a map of free modules, presented again as a free module.

    Returns (F, iota, cone) where F is free on the target's generators
    together with one generator per source generator shifted by p - 1, and
    iota: F -> cone.module is a degree-0 isomorphism of A-dg modules
    (diagonal, with the action twist signs on the shifted block).
    """
    m_mod, n_mod, p = phi.source, phi.target, phi.degree
    if not isinstance(m_mod, FreeDgModule) or not isinstance(n_mod, FreeDgModule):
        raise ValidationError("free_cone needs free source and target")
    cn = cone(phi, check=check)
    algebra = n_mod.algebra

    if gen_names is None:
        gen_names = tuple(f"{name}'" for name in m_mod.gen_names)
    if len(gen_names) != m_mod.gen_count:
        raise ValidationError("gen_names must match the source generator count")

    gens = list(zip(n_mod.gen_names, n_mod.gen_degrees))
    gens += [(nm, m_mod.gen_degrees[j] + p - 1) for j, nm in enumerate(gen_names)]
    taken = {g for g, _ in gens}
    if len(taken) != len(gens):
        raise ValidationError("cone generator names collide")

    n_count = n_mod.gen_count
    diffs: dict[str, dict[str, Poly]] = {}
    for j, name in enumerate(n_mod.gen_names):
        diffs[name] = {
            n_mod.gen_names[h]: dict(poly) for h, poly in n_mod.gen_diffs[j].items()
        }
    for j, nm in enumerate(gen_names):
        comb: dict[str, Poly] = {}
        gdeg = m_mod.gen_degrees[j]
        t = gdeg + p
        if 0 <= t <= n_mod.cap:
            img = phi.matrix(gdeg).col(m_mod.basis_index(gdeg)[(j, algebra.unit_mono())])
            for h, poly in n_mod.vector_combination(img, t).items():
                comb[n_mod.gen_names[h]] = poly
        for h, poly in m_mod.gen_diffs[j].items():
            cdeg = algebra.poly_degree(poly)
            sign = Q(-1 if ((cdeg + 1) * (p - 1)) % 2 else 1)
            comb[gen_names[h]] = poly_scale(sign, poly)
        diffs[nm] = comb

    free = FreeDgModule(algebra, gens, diffs, cap=cn.cap)

    mats = {}
    for n in range(cn.cap + 1):
        diag = []
        for gi, m in free.basis(n):
            if gi < n_count:
                diag.append(Q(1))
            else:
                i = algebra.mono_degree(m)
                diag.append(Q(-1 if (i * (p - 1)) % 2 else 1))
        entries = [
            [diag[r] if r == c else Q(0) for c in range(free.dim(n))]
            for r in range(cn.module.dim(n))
        ]
        mats[n] = RatMatrix(cn.module.dim(n), free.dim(n), entries)
    iota = DgModuleMap(free, cn.module, 0, mats, name="cone transport")
    return free, iota, cn


# ---- cohomology ---------------------------------------------------------


def module_cohomology(module: DgModule, n: int) -> CohomologyData:
    """Cohomology of the module's complex at degree n (needs n <= cap - 1)."""
    if n > module.cap - 1:
        raise DegreeWindowError(
            f"cohomology at degree {n} needs the differential into degree {n + 1}"
        )
    if n < 0:
        return CohomologyData(n, 0)
    dims = {n - 1: module.dim(n - 1), n: module.dim(n), n + 1: module.dim(n + 1)}
    d_mats = {n - 1: module.differential_matrix(n - 1), n: module.differential_matrix(n)}
    return cohomology_at(dims, d_mats, n)


def betti_table(module: DgModule, top: int | None = None) -> GradedDims:
    """Betti numbers in degrees 0..top (default: the certified window cap-1)."""
    top = module.cap - 1 if top is None else min(top, module.cap - 1)
    return GradedDims({n: module_cohomology(module, n).betti for n in range(top + 1)}, top)


def induced_map(f: DgModuleMap, source_h: CohomologyData, target_h: CohomologyData) -> RatMatrix:
    """Matrix of f_* between cohomology in the stored representative bases."""
    if target_h.degree != source_h.degree + f.degree:
        raise ValidationError("cohomology degrees do not match the map degree")
    cols = []
    mat = f.matrix(source_h.degree)
    for z in source_h.representatives:
        cols.append(target_h.coords_of(mat.apply(z)))
    return RatMatrix.from_cols(cols, nrows=target_h.betti)


def is_quis(f: DgModuleMap, top: int | None = None) -> bool:
    """Whether f induces cohomology isomorphisms in all window degrees."""
    hi = min(f.source.cap - 1, f.target.cap - 1 - f.degree, f.window().stop - 2)
    if top is not None:
        hi = min(hi, top)
    for n in range(hi + 1):
        hs = module_cohomology(f.source, n)
        ht = module_cohomology(f.target, n + f.degree)
        if hs.betti != ht.betti:
            return False
        if induced_map(f, hs, ht).rank() != hs.betti:
            return False
    return True


@dataclass
class LesRow:
    """One window degree of the cone long exact sequence."""

    n: int
    dim_h_target: int
    dim_h_cone: int
    dim_h_source: int
    rank_into_cone: int
    rank_onto_source: int
    rank_connecting: int
    exact_at_cone: bool
    exact_at_source: bool


@dataclass
class LesTable:
    """H^n(N) -> H^n(cone) -> H^{n+1-p}(M) -> H^{n+1}(N), checked per node."""

    degree: int
    top: int
    rows: list[LesRow]
    ok: bool
    failures: tuple[str, ...]


def cone_les(cn: Cone, top: int | None = None) -> LesTable:
    phi = cn.phi
    m_mod, n_mod, p = phi.source, phi.target, phi.degree
    hi = min(n_mod.cap - 2, cn.cap - 1, m_mod.cap + p - 2)
    if top is not None:
        hi = min(hi, top)

    h_n: dict[int, CohomologyData] = {}
    h_c: dict[int, CohomologyData] = {}
    h_m: dict[int, CohomologyData] = {}

    def get(cache, module, n):
        if n not in cache:
            cache[n] = module_cohomology(module, n)
        return cache[n]

    failures: list[str] = []
    rows: list[LesRow] = []
    for n in range(hi + 1):
        hn = get(h_n, n_mod, n)
        hc = get(h_c, cn.module, n)
        hm = get(h_m, m_mod, n + 1 - p)
        hn1 = get(h_n, n_mod, n + 1)
        alpha = induced_map(cn.inclusion, hn, hc)
        beta = induced_map(cn.projection, hc, hm)
        delta = induced_map(phi, hm, hn1)
        exact_c = (beta * alpha).is_zero() and alpha.rank() == hc.betti - beta.rank()
        exact_m = (delta * beta).is_zero() and beta.rank() == hm.betti - delta.rank()
        if not exact_c:
            failures.append(f"not exact at H^{n}(cone)")
        if not exact_m:
            failures.append(f"not exact at H^{n + 1 - p}(source)")
        if n + 1 <= hi:
            hc1 = get(h_c, cn.module, n + 1)
            alpha1 = induced_map(cn.inclusion, hn1, hc1)
            if not ((alpha1 * delta).is_zero() and delta.rank() == hn1.betti - alpha1.rank()):
                failures.append(f"not exact at H^{n + 1}(target)")
        rows.append(
            LesRow(
                n,
                hn.betti,
                hc.betti,
                hm.betti,
                alpha.rank(),
                beta.rank(),
                delta.rank(),
                exact_c,
                exact_m,
            )
        )
    return LesTable(p, hi, rows, not failures, tuple(failures))
