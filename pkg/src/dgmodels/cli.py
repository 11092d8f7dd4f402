"""Command-line interface.

Subcommands: verify (structural checks on a document), minmodel (minimal
model of one module), circle (full circle-action report), export (canonical
JSON of the parsed document or of a computed model).  Input comes from
--input PATH (a JSON document) or --fixture NAME (a bundled dataset).

Exit codes: 0 success, 1 validation failure, 2 precondition failure,
3 window-limited verdict.
"""

from __future__ import annotations

import argparse
import sys
from typing import Any

from .cdga import verify_cdga
from .circle import (
    ActionReport,
    EquivariantModel,
    action_report,
    equivariant_model,
    model_of_fixed_set,
    model_of_total_space,
)
from .dgmodule import DgModule, FreeDgModule, modules_equal, verify_dgmodule
from .errors import InconclusiveWindowError, PreconditionError, ValidationError
from .fixtures import FIXTURES, fixture
from .io import (
    DEFAULT_MAX_DEGREE,
    InputDocument,
    document_json,
    dump_json,
    load_document,
    loads_document,
    model_document,
)
from .linalg import GradedDims, PoincareSeries
from .minmodel import MinimalModelResult, minimal_model


# ---- input resolution ----------------------------------------------------------


def _document_from_fixture(name: str, max_degree: int) -> InputDocument:
    data = fixture(name, max_degree)
    action_raw: dict[str, Any] = {
        "relative_model": "M",
        "i_prime": "i_prime",
        "e_prime": "e_prime",
        "name": data.name,
    }
    if data.variant != "circle":
        action_raw["variant"] = data.variant
    if data.fixed_set_empty:
        action_raw["fixed_set_empty"] = True
    if not data.base_simply_connected:
        action_raw["base_simply_connected"] = False
    if data.fixed_components is not None:
        action_raw["fixed_components"] = data.fixed_components
    return InputDocument(
        name=data.name,
        algebra=data.algebra,
        modules={"M": data.relative_model},
        maps={"i_prime": data.i_prime, "e_prime": data.e_prime},
        action=data,
        assembled=None,
        options={"max_degree": max_degree},
        action_raw=action_raw,
    )


def _resolve_input(args) -> tuple[InputDocument, int, dict[str, str]]:
    if bool(args.input) == bool(args.fixture):
        raise ValidationError("give exactly one of --input PATH or --fixture NAME")
    if args.fixture:
        n = args.max_degree if args.max_degree is not None else DEFAULT_MAX_DEGREE
        doc = _document_from_fixture(args.fixture, n)
        return doc, n, {"fixture": args.fixture}
    doc = load_document(args.input, max_degree=args.max_degree)
    return doc, doc.max_degree(args.max_degree), {"input": args.input}


def _echo(command: str, source: dict[str, str], max_degree: int) -> str:
    key, value = next(iter(source.items()))
    return f"dgmodels {command} --{key.replace('_', '-')} {value} --max-degree {max_degree}"


# ---- rendering helpers ----------------------------------------------------------


def _dims_str(dims: GradedDims) -> str:
    return " ".join(str(x) for x in dims.as_list())


def _table(rows: list[tuple[str, ...]], indent: str = "  ") -> list[str]:
    if not rows:
        return []
    widths = [max(len(r[c]) for r in rows) for c in range(len(rows[0]))]
    return [indent + "  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in rows]


def _comb_str(module: FreeDgModule, comb) -> str:
    if not comb:
        return "0"
    alg = module.algebra
    parts = []
    for j in sorted(comb):
        poly = comb[j]
        body = alg.poly_str(poly)
        gen = module.gen_names[j]
        composite = ("+" in body) or (" - " in body)
        if gen == "1":
            parts.append(f"({body})" if composite else body)
        elif body == "1":
            parts.append(gen)
        elif composite:
            parts.append(f"({body})*{gen}")
        else:
            parts.append(f"{body}*{gen}")
    return " + ".join(parts)


def _generator_rows(module: FreeDgModule) -> list[tuple[str, str, str]]:
    rows = [("generator", "degree", "differential")]
    for i, name in enumerate(module.gen_names):
        rows.append((name, str(module.gen_degrees[i]), _comb_str(module, module.gen_diffs[i])))
    return rows


def _generators_json(module: FreeDgModule) -> list[list[Any]]:
    alg = module.algebra
    out = []
    for i, name in enumerate(module.gen_names):
        diff = {module.gen_names[j]: alg.poly_str(p) for j, p in module.gen_diffs[i].items()}
        out.append([name, module.gen_degrees[i], diff])
    return out


def _model_json(result: MinimalModelResult) -> dict[str, Any]:
    return {
        "window": result.window,
        "mono_degree": result.mono_degree,
        "generators": _generators_json(result.module),
        "betti_model": result.betti_model.as_list(),
        "betti_target": result.betti_target.as_list(),
    }


def _series_str(series: PoincareSeries) -> str:
    return str(series)


# ---- verify ---------------------------------------------------------------------


def cmd_verify(doc: InputDocument, max_degree: int, source: dict[str, str], fmt: str) -> int:
    groups: list[tuple[str, Any]] = []
    if doc.algebra is not None:
        groups.append(("algebra", verify_cdga(doc.algebra)))
    for name, module in doc.modules.items():
        groups.append((f"module {name!r}", verify_dgmodule(module)))
    for name, f in doc.maps.items():
        groups.append((f"map {name!r}", f.verify()))
    if doc.action is not None:
        groups.append(("action", doc.action.validate()))

    ok = all(rep.ok for _, rep in groups)
    if fmt == "machine":
        payload = {
            "command": "verify",
            "source": source,
            "max_degree": max_degree,
            "ok": ok,
            "checks": [
                {
                    "name": label,
                    "ok": rep.ok,
                    "checks_run": rep.checks_run,
                    "failures": list(rep.failures),
                }
                for label, rep in groups
            ],
        }
        sys.stdout.write(dump_json(payload))
        return 0 if ok else 1

    lines = [_echo("verify", source, max_degree)]
    if not groups:
        lines.append("empty document: nothing to check; trivially valid")
        print("\n".join(lines))
        return 0
    for label, rep in groups:
        status = "ok  " if rep.ok else "FAIL"
        lines.append(f"{status}  {label} (checks: {rep.checks_run})")
        for failure in rep.failures[:3]:
            lines.append(f"        {failure}")
        if len(rep.failures) > 3:
            lines.append(f"        ... and {len(rep.failures) - 3} more")
    total = sum(rep.checks_run for _, rep in groups)
    if ok:
        lines.append(f"all checks passed ({len(groups)} groups, {total} checks)")
    else:
        bad = sum(1 for _, rep in groups if not rep.ok)
        lines.append(f"{bad} of {len(groups)} groups failed")
    print("\n".join(lines))
    return 0 if ok else 1


# ---- minmodel -------------------------------------------------------------------


def cmd_minmodel(
    doc: InputDocument, max_degree: int, source: dict[str, str], fmt: str, target: str | None
) -> int:
    if not doc.modules:
        raise ValidationError("documents for minmodel must declare at least one module")
    if target is None:
        if len(doc.modules) == 1:
            target = next(iter(doc.modules))
        else:
            names = ", ".join(sorted(doc.modules))
            raise ValidationError(f"--target needed; document declares modules: {names}")
    if target not in doc.modules:
        names = ", ".join(sorted(doc.modules))
        raise ValidationError(f"unknown module {target!r}; document declares: {names}")
    module = doc.modules[target]
    algebra = module.algebra
    n_cap = min(max_degree + 1, module.cap, algebra.cap - 1)
    result = minimal_model(module, n_cap=n_cap)

    if fmt == "machine":
        payload = {
            "command": "minmodel",
            "source": source,
            "max_degree": max_degree,
            "target": target,
            "model": _model_json(result),
        }
        sys.stdout.write(dump_json(payload))
        return 0

    lines = [_echo("minmodel", source, max_degree) + f" --target {target}"]
    lines.append(f"minimal model of {target!r} (window {result.window})")
    lines.extend(_table(_generator_rows(result.module)))
    lines.append("cohomology (model vs input)")
    rows = [("degree", "model", "input")]
    for n in range(result.window + 1):
        rows.append((str(n), str(result.betti_model.get(n)), str(result.betti_target.get(n))))
    lines.extend(_table(rows))
    if result.mono_degree is not None:
        lines.append(f"injective on cohomology in degree {result.mono_degree}")
    print("\n".join(lines))
    return 0


# ---- circle ---------------------------------------------------------------------


def _report_json(rep: ActionReport) -> dict[str, Any]:
    payload: dict[str, Any] = {
        "command": "circle",
        "name": rep.name,
        "variant": rep.variant,
        "max_degree": rep.max_degree,
        "betti": {
            "total": rep.betti_total.as_list(),
            "fixed": rep.betti_fixed.as_list() if rep.betti_fixed else None,
            "borel": rep.betti_borel.as_list() if rep.betti_borel else None,
        },
        "total": _model_json(rep.total),
        "fixed": _model_json(rep.fixed) if rep.fixed else None,
        "notes": list(rep.notes),
    }
    if rep.equivariant is not None:
        payload["equivariant"] = {
            "euler_class": rep.equivariant.euler_name,
            "window": rep.equivariant.window,
            "betti": rep.equivariant.betti.as_list(),
            "generators": _generators_json(rep.equivariant.module),
        }
    if rep.les is not None:
        payload["les"] = {
            "ok": rep.les.ok,
            "top": rep.les.table.top,
            "rows": [
                [
                    row.n,
                    row.dim_h_target,
                    row.dim_h_cone,
                    row.dim_h_source,
                    row.rank_into_cone,
                    row.rank_onto_source,
                    row.rank_connecting,
                    row.exact_at_cone,
                    row.exact_at_source,
                ]
                for row in rep.les.table.rows
            ],
            "failures": list(rep.les.failures),
        }
    if rep.shared_basis is not None:
        payload["shared_basis"] = {
            "ok": rep.shared_basis.ok,
            "shift": rep.shared_basis.shift,
            "rows": [list(r) for r in rep.shared_basis.rows],
            "failures": list(rep.shared_basis.failures),
        }
    if rep.scalars is not None:
        payload["extension_of_scalars"] = {
            "ok": rep.scalars.ok,
            "window": rep.scalars.window,
            "generators": rep.scalars.generators,
            "failures": list(rep.scalars.failures),
        }
    if rep.poincare is not None:
        payload["poincare"] = {
            "ok": rep.poincare.ok,
            "through": rep.poincare.through,
            "total_fiber": rep.poincare.total_fiber.coeffs,
            "fixed_fiber": rep.poincare.fixed_fiber.coeffs,
            "borel_fiber": rep.poincare.borel_fiber.coeffs,
            "failures": list(rep.poincare.failures),
        }
    if rep.formality is not None:
        payload["formality"] = {
            "formal": rep.formality.formal,
            "window": rep.formality.window,
            "kernel_dims": rep.formality.kernel_dims.as_list(),
            "strings": [
                {"degree": s.degree, "steps": list(s.steps)} for s in rep.formality.strings
            ],
            "witness_degree": rep.formality.witness_degree,
            "witness_label": rep.formality.witness_label,
            "failures": list(rep.formality.failures),
        }
    payload["localization"] = {
        "verdict": rep.localization.verdict,
        "window": rep.localization.window,
        "exponent": rep.localization.exponent,
        "h_dims": rep.localization.h_dims.as_list(),
        "basis_checked": rep.localization.basis_checked,
        "reason": rep.localization.reason,
    }
    if rep.dimc is not None:
        payload["dimc"] = {
            "applicable": rep.dimc.applicable,
            "reasons": list(rep.dimc.reasons),
            "window": rep.dimc.window,
            "dimc_total": rep.dimc.dimc_total,
            "dimc_fixed": rep.dimc.dimc_fixed,
            "dimc_base": rep.dimc.dimc_base,
            "total_fiber": rep.dimc.total_fiber,
            "fixed_fiber": rep.dimc.fixed_fiber,
            "case": rep.dimc.case,
        }
    if rep.almost_free is not None:
        payload["almost_free"] = {
            "ok": rep.almost_free.ok,
            "window": rep.almost_free.window,
            "generator_name": rep.almost_free.generator_name,
            "euler_poly": rep.almost_free.euler_poly,
            "betti": rep.almost_free.betti.as_list(),
            "failures": list(rep.almost_free.failures),
        }
    if rep.naive is not None:
        payload["naive"] = {
            "ok": rep.naive.ok,
            "window": rep.naive.window,
            "betti": rep.naive.betti.as_list(),
            "unital": rep.naive.unital,
            "graded_commutative": rep.naive.graded_commutative,
            "associative": rep.naive.associative,
            "leibniz": rep.naive.leibniz,
            "positive_products_zero": rep.naive.positive_products_zero,
            "wedge_of_spheres": rep.naive.wedge_of_spheres,
            "sphere_degrees": list(rep.naive.sphere_degrees or ()) or None,
            "ring": [
                {
                    "left": [e.left_degree, e.left_index],
                    "right": [e.right_degree, e.right_index],
                    "coords": [str(c) for c in e.coords],
                }
                for e in rep.naive.ring
            ],
            "failures": list(rep.naive.failures),
        }
    if rep.smith_gysin:
        payload["smith_gysin"] = [
            {
                "r": s.r,
                "verdict": s.verdict,
                "window": s.window,
                "relative_term": s.relative_term,
                "fixed_sum": s.fixed_sum,
                "total_sum": s.total_sum,
                "stabilized": s.stabilized,
                "reason": s.reason,
            }
            for s in rep.smith_gysin
        ]
    return payload


def _render_circle(rep: ActionReport, source: dict[str, str]) -> list[str]:
    lines = [_echo("circle", source, rep.max_degree)]
    lines.append(f"circle action report: {rep.name or '(unnamed)'} (variant {rep.variant})")
    lines.append("")
    lines.append("cohomology dimensions, degrees 0..top of each window")
    lines.append(f"  total  {_dims_str(rep.betti_total)}")
    if rep.betti_fixed is not None:
        lines.append(f"  fixed  {_dims_str(rep.betti_fixed)}")
    if rep.betti_borel is not None:
        lines.append(f"  borel  {_dims_str(rep.betti_borel)}")

    lines.append("")
    lines.append(f"total-space model (window {rep.total.window})")
    lines.extend(_table(_generator_rows(rep.total.module)))
    if rep.fixed is not None:
        lines.append("")
        lines.append(f"fixed-set model (window {rep.fixed.window})")
        lines.extend(_table(_generator_rows(rep.fixed.module)))
    if rep.equivariant is not None:
        lines.append("")
        lines.append(
            f"borel model (window {rep.equivariant.window}, "
            f"euler class {rep.equivariant.euler_name})"
        )
        lines.extend(_table(_generator_rows(rep.equivariant.module)))

    lines.append("")
    lines.append("verdicts")
    if rep.les is not None:
        verdict = "exact at every node" if rep.les.ok else "NOT EXACT"
        lines.append(f"  long exact sequence     {verdict} through degree {rep.les.table.top}")
        for failure in rep.les.failures[:3]:
            lines.append(f"      {failure}")
    if rep.shared_basis is not None:
        verdict = "ok" if rep.shared_basis.ok else "MISMATCH"
        lines.append(
            f"  shared basis            {verdict} (degree shift {rep.shared_basis.shift})"
        )
        for failure in rep.shared_basis.failures[:3]:
            lines.append(f"      {failure}")
    if rep.scalars is not None:
        verdict = "ok" if rep.scalars.ok else "FAIL"
        lines.append(
            f"  extension of scalars    {verdict} "
            f"(euler class to zero; {rep.scalars.generators} generators compared)"
        )
        for failure in rep.scalars.failures[:3]:
            lines.append(f"      {failure}")
    if rep.poincare is not None:
        verdict = "hold" if rep.poincare.ok else "FAIL"
        lines.append(f"  poincare identities     {verdict} through degree {rep.poincare.through}")
        lines.append(f"      total fiber series  {_series_str(rep.poincare.total_fiber)}")
        lines.append(f"      fixed fiber series  {_series_str(rep.poincare.fixed_fiber)}")
        lines.append(f"      borel fiber series  {_series_str(rep.poincare.borel_fiber)}")
        for failure in rep.poincare.failures[:3]:
            lines.append(f"      {failure}")
    if rep.formality is not None:
        f = rep.formality
        verdict = "equivariantly formal" if f.formal else "NOT equivariantly formal"
        lines.append(f"  formality               {verdict} (window {f.window})")
        if f.formal:
            for s in f.strings:
                steps = ", ".join(s.steps)
                lines.append(f"      degree {s.degree}: {steps}")
        else:
            lines.append(
                f"      witness: degree {f.witness_degree}, class {f.witness_label}"
            )
    loc = rep.localization
    detail = f"exponent {loc.exponent}" if loc.exponent is not None else "no exponent"
    lines.append(
        f"  localization            {loc.verdict} "
        f"({detail}, {loc.basis_checked} classes checked)"
    )
    if loc.reason:
        lines.append(f"      {loc.reason}")
    if rep.dimc is not None:
        d = rep.dimc
        if d.applicable:
            lines.append(
                f"  dimc                    case {d.case}: "
                f"total {d.dimc_total}, fixed {d.dimc_fixed}"
            )
        else:
            lines.append(f"  dimc                    not applicable (case {d.case})")
            for reason in d.reasons:
                lines.append(f"      {reason}")
    if rep.almost_free is not None:
        a = rep.almost_free
        verdict = "ok" if a.ok else "FAIL"
        lines.append(
            f"  almost-free model       {verdict} "
            f"(generator {a.generator_name}, euler {a.euler_poly})"
        )
        lines.append(f"      cohomology  {' '.join(str(x) for x in a.betti.as_list())}")
        for failure in a.failures[:3]:
            lines.append(f"      {failure}")
    if rep.naive is not None:
        nv = rep.naive
        verdict = "ok" if nv.ok else "FAIL"
        lines.append(f"  naive product           {verdict} (window {nv.window})")
        lines.append(
            "      unital "
            + _yn(nv.unital)
            + ", graded-commutative "
            + _yn(nv.graded_commutative)
            + ", associative "
            + _yn(nv.associative)
            + ", leibniz "
            + _yn(nv.leibniz)
        )
        if nv.wedge_of_spheres:
            degs = ", ".join(str(d) for d in (nv.sphere_degrees or ()))
            lines.append(f"      wedge of spheres in degrees {degs}")
        for failure in nv.failures[:3]:
            lines.append(f"      {failure}")
    for s in rep.smith_gysin:
        lhs = f"{s.relative_term} + {s.fixed_sum}"
        lines.append(
            f"  smith-gysin r={s.r}         {s.verdict}: {lhs} <= {s.total_sum}"
        )
        if s.reason:
            lines.append(f"      {s.reason}")

    if rep.notes:
        lines.append("")
        lines.append("notes")
        for note in rep.notes:
            lines.append(f"  {note}")
    return lines


def _yn(flag: bool) -> str:
    return "yes" if flag else "no"


def cmd_circle(doc: InputDocument, max_degree: int, source: dict[str, str], fmt: str) -> int:
    if doc.action is None:
        raise ValidationError("document has no action section")
    rep = action_report(doc.action, max_degree)
    inconclusive = rep.localization.verdict == "inconclusive" or any(
        s.verdict == "inconclusive" for s in rep.smith_gysin
    )
    if fmt == "machine":
        sys.stdout.write(dump_json(_report_json(rep)))
    else:
        print("\n".join(_render_circle(rep, source)))
    return 3 if inconclusive else 0


# ---- export ---------------------------------------------------------------------


def _export_payload(doc: InputDocument, max_degree: int, what: str) -> tuple[dict, DgModule | None, str]:
    if what == "document":
        return document_json(doc), None, ""
    if doc.action is None:
        raise ValidationError(f"export of {what!r} needs an action section")
    data = doc.action
    label = doc.name or data.name or "action"
    if what == "relative":
        module = (
            doc.assembled.relative.module if doc.assembled is not None else data.relative_model
        )
        return (
            model_document(f"{label} relative model", data.algebra, module, "relative", max_degree),
            module,
            "relative",
        )
    if what == "total":
        module = model_of_total_space(data, max_degree).module
        return (
            model_document(f"{label} total model", data.algebra, module, "total", max_degree),
            module,
            "total",
        )
    if what == "fixed":
        module = model_of_fixed_set(data, max_degree).module
        return (
            model_document(f"{label} fixed model", data.algebra, module, "fixed", max_degree),
            module,
            "fixed",
        )
    if what == "equivariant":
        em: EquivariantModel = equivariant_model(data, max_degree)
        return (
            model_document(
                f"{label} borel model", em.algebra, em.module, "equivariant", max_degree
            ),
            em.module,
            "equivariant",
        )
    raise ValidationError(f"unknown export kind {what!r}")


def cmd_export(
    doc: InputDocument,
    max_degree: int,
    source: dict[str, str],
    fmt: str,
    what: str,
    output: str | None,
) -> int:
    payload, module, module_name = _export_payload(doc, max_degree, what)
    text = dump_json(payload)

    reloaded = loads_document(text)
    if module is not None:
        if not modules_equal(reloaded.modules[module_name], module):
            raise ValidationError("export round-trip produced a different module")
    else:
        if dump_json(document_json(reloaded)) != text:
            raise ValidationError("export round-trip produced a different document")

    if output:
        try:
            with open(output, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise ValidationError(f"cannot write {output}: {exc.strerror}") from None
        if fmt == "machine":
            sys.stdout.write(
                dump_json(
                    {
                        "command": "export",
                        "source": source,
                        "what": what,
                        "path": output,
                        "bytes": len(text.encode()),
                        "round_trip": "ok",
                    }
                )
            )
        else:
            print(f"wrote {output} ({len(text.encode())} bytes, round-trip verified)")
        return 0
    sys.stdout.write(text)
    return 0


# ---- entry ----------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    """Argument errors are validation problems: exit 1, not argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="dgmodels",
        description="Minimal models of dg modules and circle-action reports.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    fixtures = sorted(FIXTURES)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--input", metavar="PATH", help="JSON input document")
        p.add_argument(
            "--fixture", choices=fixtures, help="bundled dataset instead of --input"
        )
        p.add_argument(
            "--max-degree",
            type=int,
            default=None,
            metavar="N",
            help=f"certification window (default {DEFAULT_MAX_DEGREE})",
        )
        p.add_argument(
            "--format", choices=("text", "machine"), default="text", dest="fmt",
            help="human-readable text or canonical JSON",
        )

    p = sub.add_parser("verify", help="structural checks on every declared object")
    common(p)
    p = sub.add_parser("minmodel", help="minimal model of one module")
    common(p)
    p.add_argument("--target", metavar="NAME", default=None, help="module to model")
    p = sub.add_parser("circle", help="full circle-action report")
    common(p)
    p = sub.add_parser("export", help="canonical JSON of the document or a computed model")
    common(p)
    p.add_argument(
        "--what",
        choices=("document", "relative", "total", "fixed", "equivariant"),
        default="document",
        help="which object to export",
    )
    p.add_argument("--output", metavar="PATH", default=None, help="write here instead of stdout")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.max_degree is not None and args.max_degree < 0:
            raise ValidationError("--max-degree must be nonnegative")
        doc, max_degree, source = _resolve_input(args)
        if args.command == "verify":
            return cmd_verify(doc, max_degree, source, args.fmt)
        if args.command == "minmodel":
            return cmd_minmodel(doc, max_degree, source, args.fmt, args.target)
        if args.command == "circle":
            return cmd_circle(doc, max_degree, source, args.fmt)
        return cmd_export(doc, max_degree, source, args.fmt, args.what, args.output)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except PreconditionError as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return 2
    except InconclusiveWindowError as exc:
        print(f"inconclusive: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
