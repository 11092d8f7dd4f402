"""Sullivan-presented graded-commutative differential algebras.

A presentation lists generators with their degrees and one differential
polynomial per generator.  Monomials are exponent vectors over the
generators in declaration order (exponents 0/1 on odd generators),
polynomials map monomials to rational coefficients, and per-degree bases
are enumerated in ascending lexicographic order on exponent vectors, so
every matrix produced here is deterministic.

All structure is materialized only up to the presentation's degree cap;
products that would land above the cap are rejected rather than
truncated.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

from .errors import DegreeWindowError, ValidationError
from .linalg import Q, RatMatrix, as_q

Mono = tuple[int, ...]
Poly = dict[Mono, Fraction]


def poly_zero() -> Poly:
    return {}


def poly_is_zero(p: Mapping[Mono, Fraction]) -> bool:
    return not p


def poly_add(p: Mapping[Mono, Fraction], q: Mapping[Mono, Fraction]) -> Poly:
    out: Poly = dict(p)
    for m, c in q.items():
        s = out.get(m, Q(0)) + c
        if s:
            out[m] = s
        else:
            out.pop(m, None)
    return out


def poly_sub(p: Mapping[Mono, Fraction], q: Mapping[Mono, Fraction]) -> Poly:
    return poly_add(p, poly_scale(Q(-1), q))


def poly_scale(c, p: Mapping[Mono, Fraction]) -> Poly:
    c = as_q(c)
    if not c:
        return {}
    return {m: c * v for m, v in p.items()}


def poly_eq(p: Mapping[Mono, Fraction], q: Mapping[Mono, Fraction]) -> bool:
    return poly_is_zero(poly_sub(p, q))


@dataclass(frozen=True)
class CheckReport:
    """Outcome of a structural verification, with human-readable witnesses."""

    name: str
    ok: bool
    failures: tuple[str, ...] = ()
    checks_run: int = 0

    def raise_if_failed(self) -> None:
        if not self.ok:
            head = self.failures[0] if self.failures else "unspecified failure"
            raise ValidationError(f"{self.name}: {head}")


class SullivanPresentation:
    """Free graded-commutative algebra on named generators, with differential.

    Generators have degree >= 1; parity is determined by the degree.  The
    differential is stored as one polynomial per generator and extended to
    monomials by the Leibniz rule.  d(d(g)) = 0 is checked on construction.
    """

    __slots__ = (
        "names",
        "degrees",
        "differentials",
        "cap",
        "_index",
        "_odd",
        "_basis_cache",
        "_basis_index_cache",
        "_product_cache",
        "_diff_cache",
    )

    def __init__(
        self,
        generators: Sequence[tuple[str, int]],
        differentials: Mapping[str, Mapping[Mono, Fraction]] | None = None,
        cap: int = 12,
    ):
        names = tuple(name for name, _ in generators)
        degrees = tuple(int(deg) for _, deg in generators)
        if len(set(names)) != len(names):
            raise ValidationError("generator names must be distinct")
        for name, deg in zip(names, degrees):
            if not name or not name.replace("_", "a").isalnum() or name[0].isdigit():
                raise ValidationError(f"generator name {name!r} is not an identifier")
            if deg < 1:
                raise ValidationError(f"generator {name} has degree {deg}; need >= 1")
        if cap < 0:
            raise ValidationError(f"degree cap {cap} must be nonnegative")
        self.names = names
        self.degrees = degrees
        self.cap = int(cap)
        self._index = {name: i for i, name in enumerate(names)}
        self._odd = tuple(deg % 2 == 1 for deg in degrees)
        self._basis_cache: dict[int, tuple[Mono, ...]] = {}
        self._basis_index_cache: dict[int, dict[Mono, int]] = {}
        self._product_cache: dict[tuple[int, int], RatMatrix] = {}
        self._diff_cache: dict[int, RatMatrix] = {}

        diffs: list[Poly] = []
        given = dict(differentials or {})
        for name in names:
            raw = given.pop(name, {})
            poly = {m: as_q(c) for m, c in raw.items() if c}
            for m in poly:
                self._check_mono(m)
            diffs.append(poly)
        if given:
            extra = ", ".join(sorted(given))
            raise ValidationError(f"differentials given for unknown generators: {extra}")
        self.differentials = tuple(diffs)

        for i, name in enumerate(names):
            dg = self.differentials[i]
            if dg:
                deg = self.poly_degree(dg)
                if deg != degrees[i] + 1:
                    raise ValidationError(
                        f"d({name}) has degree {deg}, expected {degrees[i] + 1}"
                    )
            dd = self.d_poly(dg)
            if not poly_is_zero(dd):
                raise ValidationError(
                    f"d(d({name})) = {self.poly_str(dd)} is nonzero"
                )

    # ---- bookkeeping -------------------------------------------------

    def _check_mono(self, m: Mono) -> None:
        if len(m) != len(self.names):
            raise ValidationError(
                f"monomial {m} has {len(m)} slots, algebra has {len(self.names)} generators"
            )
        for i, e in enumerate(m):
            if e < 0:
                raise ValidationError(f"negative exponent in monomial {m}")
            if self._odd[i] and e > 1:
                raise ValidationError(
                    f"odd generator {self.names[i]} has exponent {e} in {m}"
                )

    def __eq__(self, other) -> bool:
        if not isinstance(other, SullivanPresentation):
            return NotImplemented
        return (
            self.names == other.names
            and self.degrees == other.degrees
            and self.cap == other.cap
            and all(poly_eq(p, q) for p, q in zip(self.differentials, other.differentials))
        )

    def __repr__(self) -> str:
        gens = ", ".join(f"{n}:{d}" for n, d in zip(self.names, self.degrees))
        return f"SullivanPresentation({gens}; cap={self.cap})"

    def generator_index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise ValidationError(f"unknown generator {name!r}") from None

    def generator_poly(self, name: str) -> Poly:
        i = self.generator_index(name)
        m = tuple(1 if j == i else 0 for j in range(len(self.names)))
        return {m: Q(1)}

    def unit_mono(self) -> Mono:
        return (0,) * len(self.names)

    def unit_poly(self) -> Poly:
        return {self.unit_mono(): Q(1)}

    def mono_degree(self, m: Mono) -> int:
        return sum(e * d for e, d in zip(m, self.degrees))

    def poly_degree(self, p: Mapping[Mono, Fraction]) -> int | None:
        """Common degree of a homogeneous polynomial; None for zero."""
        degs = {self.mono_degree(m) for m in p}
        if not degs:
            return None
        if len(degs) > 1:
            raise ValidationError(f"inhomogeneous polynomial with degrees {sorted(degs)}")
        return degs.pop()

    # ---- basis enumeration -------------------------------------------

    def basis(self, n: int) -> tuple[Mono, ...]:
        """Monomials of total degree n, ascending lexicographic order."""
        if n < 0:
            return ()
        if n > self.cap:
            raise DegreeWindowError(f"degree {n} exceeds cap {self.cap}")
        if n not in self._basis_cache:
            out: list[Mono] = []
            self._enumerate(0, n, [0] * len(self.names), out)
            self._basis_cache[n] = tuple(out)
        return self._basis_cache[n]

    def _enumerate(self, i: int, remaining: int, current: list[int], out: list[Mono]) -> None:
        if remaining == 0:
            tail = current[i:]
            out.append(tuple(current[:i]) + tuple(0 for _ in tail))
            return
        if i == len(self.names):
            return
        deg = self.degrees[i]
        limit = 1 if self._odd[i] else remaining // deg
        for e in range(min(limit, remaining // deg) + 1):
            current[i] = e
            self._enumerate(i + 1, remaining - e * deg, current, out)
        current[i] = 0

    def dim(self, n: int) -> int:
        return len(self.basis(n))

    def basis_index(self, n: int) -> dict[Mono, int]:
        if n not in self._basis_index_cache:
            self._basis_index_cache[n] = {m: k for k, m in enumerate(self.basis(n))}
        return self._basis_index_cache[n]

    def poly_vector(self, p: Mapping[Mono, Fraction], n: int) -> tuple[Fraction, ...]:
        """Coordinates of a degree-n polynomial in basis(n)."""
        idx = self.basis_index(n)
        coords = [Q(0)] * len(idx)
        for m, c in p.items():
            if self.mono_degree(m) != n:
                raise ValidationError(
                    f"monomial of degree {self.mono_degree(m)} in a degree-{n} slot"
                )
            coords[idx[m]] = c
        return tuple(coords)

    def vector_poly(self, v: Sequence[Fraction], n: int) -> Poly:
        monos = self.basis(n)
        if len(v) != len(monos):
            raise ValidationError(f"vector length {len(v)} != dim {len(monos)} in degree {n}")
        return {m: as_q(c) for m, c in zip(monos, v) if c}

    # ---- products and differential -----------------------------------

    def mono_mul(self, m1: Mono, m2: Mono) -> tuple[int, Mono] | None:
        """Sorted product of two monomials: (Koszul sign, monomial) or None if zero."""
        exps = []
        for i, (a, b) in enumerate(zip(m1, m2)):
            e = a + b
            if self._odd[i] and e > 1:
                return None
            exps.append(e)
        swaps = 0
        for j, b in enumerate(m2):
            if b and self._odd[j]:
                swaps += sum(m1[i] for i in range(j + 1, len(m1)) if self._odd[i])
        return (-1 if swaps % 2 else 1), tuple(exps)

    def poly_mul(self, p: Mapping[Mono, Fraction], q: Mapping[Mono, Fraction]) -> Poly:
        out: Poly = {}
        for m1, c1 in p.items():
            for m2, c2 in q.items():
                hit = self.mono_mul(m1, m2)
                if hit is None:
                    continue
                sign, m = hit
                s = out.get(m, Q(0)) + sign * c1 * c2
                if s:
                    out[m] = s
                else:
                    out.pop(m, None)
        return out

    def d_mono(self, m: Mono) -> Poly:
        """Differential of a monomial via the Leibniz rule."""
        out: Poly = {}
        prefix_deg = 0
        k = len(self.names)
        for i in range(k):
            e = m[i]
            if e and self.differentials[i]:
                left = m[:i] + (e - 1,) + (0,) * (k - i - 1)
                right = (0,) * (i + 1) + m[i + 1 :]
                term = self.poly_mul({left: Q(1)}, self.differentials[i])
                term = self.poly_mul(term, {right: Q(1)})
                sign = -1 if prefix_deg % 2 else 1
                out = poly_add(out, poly_scale(Q(sign * e), term))
            prefix_deg += e * self.degrees[i]
        return out

    def d_poly(self, p: Mapping[Mono, Fraction]) -> Poly:
        out: Poly = {}
        for m, c in p.items():
            out = poly_add(out, poly_scale(c, self.d_mono(m)))
        return out

    def product_matrix(self, i: int, j: int) -> RatMatrix:
        """Multiplication basis_i (x) basis_j -> basis_{i+j}; columns i-major."""
        if i < 0 or j < 0:
            raise DegreeWindowError(f"negative degrees ({i}, {j})")
        if i + j > self.cap:
            raise DegreeWindowError(
                f"product degree {i + j} exceeds cap {self.cap}; rejected, not truncated"
            )
        key = (i, j)
        if key not in self._product_cache:
            bi, bj = self.basis(i), self.basis(j)
            target = self.basis_index(i + j)
            entries = [[Q(0)] * (len(bi) * len(bj)) for _ in range(len(target))]
            for a, m1 in enumerate(bi):
                for b, m2 in enumerate(bj):
                    hit = self.mono_mul(m1, m2)
                    if hit is None:
                        continue
                    sign, m = hit
                    entries[target[m]][a * len(bj) + b] = Q(sign)
            self._product_cache[key] = RatMatrix(len(target), len(bi) * len(bj), entries)
        return self._product_cache[key]

    def differential_matrix(self, n: int) -> RatMatrix:
        """Matrix of d: degree n -> degree n+1 (requires n+1 <= cap)."""
        if n + 1 > self.cap:
            raise DegreeWindowError(f"differential out of degree {n} exceeds cap {self.cap}")
        if n not in self._diff_cache:
            source = self.basis(n)
            mat = RatMatrix.from_cols(
                [self.poly_vector(self.d_mono(m), n + 1) for m in source],
                nrows=self.dim(n + 1),
            )
            self._diff_cache[n] = mat
        return self._diff_cache[n]

    # ---- rendering ----------------------------------------------------

    def mono_str(self, m: Mono) -> str:
        factors = []
        for name, e in zip(self.names, m):
            if e == 1:
                factors.append(name)
            elif e > 1:
                factors.append(f"{name}^{e}")
        return "*".join(factors) if factors else "1"

    def poly_str(self, p: Mapping[Mono, Fraction]) -> str:
        if not p:
            return "0"
        terms = sorted(p.items(), key=lambda item: (self.mono_degree(item[0]), item[0]))
        parts: list[str] = []
        for m, c in terms:
            mono = self.mono_str(m)
            if mono == "1":
                body = str(c)
            elif c == 1:
                body = mono
            elif c == -1:
                body = f"-{mono}"
            else:
                body = f"{c}*{mono}"
            if parts and not body.startswith("-"):
                parts.append(f"+ {body}")
            elif parts:
                parts.append(f"- {body[1:]}")
            else:
                parts.append(body)
        return " ".join(parts)


def trivial_algebra(cap: int = 12) -> SullivanPresentation:
    """The ground field as an algebra: no generators, unit in degree 0."""
    return SullivanPresentation([], {}, cap=cap)


@dataclass(frozen=True)
class MonomialBasis:
    """Per-degree monomial bases of a presentation, degrees 0..top."""

    top: int
    monomials: tuple[tuple[Mono, ...], ...]

    def at(self, n: int) -> tuple[Mono, ...]:
        if 0 <= n <= self.top:
            return self.monomials[n]
        return ()

    def dims(self) -> list[int]:
        return [len(ms) for ms in self.monomials]


def enumerate_basis(algebra: SullivanPresentation, top: int) -> MonomialBasis:
    """Complete monomial bases in degrees 0..top (top must be <= cap)."""
    if top < 0:
        raise DegreeWindowError(f"negative top degree {top}")
    return MonomialBasis(top, tuple(algebra.basis(n) for n in range(top + 1)))


def product_matrix(algebra: SullivanPresentation, i: int, j: int) -> RatMatrix:
    return algebra.product_matrix(i, j)


def verify_cdga(algebra: SullivanPresentation, top: int | None = None) -> CheckReport:
    """Check d(d(x)) = 0, Leibniz, unit, and graded commutativity on bases <= top."""
    top = algebra.cap if top is None else min(top, algebra.cap)
    failures: list[str] = []
    checks = 0

    for n in range(top):
        for m in algebra.basis(n):
            checks += 1
            dd = algebra.d_poly(algebra.d_mono(m))
            if not poly_is_zero(dd):
                failures.append(
                    f"d(d({algebra.mono_str(m)})) = {algebra.poly_str(dd)} != 0"
                )

    for i in range(top + 1):
        for j in range(top + 1 - i):
            for m1 in algebra.basis(i):
                for m2 in algebra.basis(j):
                    checks += 1
                    prod = algebra.poly_mul({m1: Q(1)}, {m2: Q(1)})
                    swapped = algebra.poly_mul({m2: Q(1)}, {m1: Q(1)})
                    sign = -1 if (i * j) % 2 else 1
                    if not poly_eq(prod, poly_scale(Q(sign), swapped)):
                        failures.append(
                            f"commutativity fails on ({algebra.mono_str(m1)}, {algebra.mono_str(m2)})"
                        )
                    if i + j + 1 <= top:
                        checks += 1
                        lhs = algebra.d_poly(prod)
                        rhs = poly_add(
                            algebra.poly_mul(algebra.d_mono(m1), {m2: Q(1)}),
                            poly_scale(
                                Q(-1 if i % 2 else 1),
                                algebra.poly_mul({m1: Q(1)}, algebra.d_mono(m2)),
                            ),
                        )
                        if not poly_eq(lhs, rhs):
                            failures.append(
                                "Leibniz fails on "
                                f"({algebra.mono_str(m1)}, {algebra.mono_str(m2)}): "
                                f"d(xy) = {algebra.poly_str(lhs)}, "
                                f"(dx)y + (-1)^|x| x(dy) = {algebra.poly_str(rhs)}"
                            )

    unit = algebra.unit_mono()
    for n in range(top + 1):
        for m in algebra.basis(n):
            checks += 1
            if not poly_eq(algebra.poly_mul({unit: Q(1)}, {m: Q(1)}), {m: Q(1)}):
                failures.append(f"unit fails on {algebra.mono_str(m)}")

    return CheckReport("verify_cdga", not failures, tuple(failures), checks)


def extend(
    algebra: SullivanPresentation,
    name: str,
    degree: int,
    differential: Mapping[Mono, Fraction] | None = None,
) -> SullivanPresentation:
    """Adjoin one free generator; its differential is a polynomial in the old generators."""
    if name in algebra.names:
        raise ValidationError(f"generator name {name!r} already in use")
    gens = list(zip(algebra.names, algebra.degrees)) + [(name, degree)]
    diffs: dict[str, Poly] = {
        n: {m + (0,): c for m, c in p.items()}
        for n, p in zip(algebra.names, algebra.differentials)
    }
    diffs[name] = {m + (0,): as_q(c) for m, c in (differential or {}).items() if c}
    return SullivanPresentation(gens, diffs, cap=algebra.cap)


def adjoin_polynomial_generator(
    algebra: SullivanPresentation, name: str, degree: int = 2
) -> SullivanPresentation:
    """Tensor with a polynomial algebra on one even closed generator."""
    if degree % 2 or degree < 2:
        raise ValidationError(f"polynomial generator needs positive even degree, got {degree}")
    return extend(algebra, name, degree, None)


def parse_polynomial(algebra: SullivanPresentation, text: str) -> Poly:
    """Parse an expression over generator names into a polynomial.

    Grammar: rational literals (2, -1, 3/4), generator names, +, -, *,
    and nonnegative integer powers written u^2 or u**2.
    """
    source = text.strip()
    if not source:
        return {}
    try:
        tree = ast.parse(source.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ValidationError(f"cannot parse expression {text!r}: {exc.msg}") from None
    return _eval_node(algebra, tree.body, text)


def _poly_as_rational(p: Poly) -> Fraction | None:
    if not p:
        return Q(0)
    if len(p) == 1:
        (m, c), = p.items()
        if not any(m):
            return c
    return None


def _eval_node(algebra: SullivanPresentation, node: ast.AST, text: str) -> Poly:
    if isinstance(node, ast.Constant):
        if isinstance(node.value, int) and not isinstance(node.value, bool):
            return poly_scale(Q(node.value), algebra.unit_poly())
        raise ValidationError(f"non-integer literal {node.value!r} in {text!r}")
    if isinstance(node, ast.Name):
        return algebra.generator_poly(node.id)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.UAdd, ast.USub)):
        inner = _eval_node(algebra, node.operand, text)
        return inner if isinstance(node.op, ast.UAdd) else poly_scale(Q(-1), inner)
    if isinstance(node, ast.BinOp):
        if isinstance(node.op, ast.Pow):
            base = _eval_node(algebra, node.left, text)
            exp = _poly_as_rational(_eval_node(algebra, node.right, text))
            if exp is None or exp.denominator != 1 or exp < 0:
                raise ValidationError(f"exponent must be a nonnegative integer in {text!r}")
            out = algebra.unit_poly()
            for _ in range(int(exp)):
                out = algebra.poly_mul(out, base)
            return out
        left = _eval_node(algebra, node.left, text)
        right = _eval_node(algebra, node.right, text)
        if isinstance(node.op, ast.Add):
            return poly_add(left, right)
        if isinstance(node.op, ast.Sub):
            return poly_sub(left, right)
        if isinstance(node.op, ast.Mult):
            return algebra.poly_mul(left, right)
        if isinstance(node.op, ast.Div):
            c = _poly_as_rational(right)
            if c is None or c == 0:
                raise ValidationError(f"division only by nonzero rationals in {text!r}")
            return poly_scale(1 / c, left)
    raise ValidationError(f"unsupported syntax in expression {text!r}")
