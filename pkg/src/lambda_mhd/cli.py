"""``lambda-mhd`` command line.

Subcommands: ``cone``, ``hull decompose``, ``hull verify``,
``subsol generate`` and ``audit``.  Exit codes: 0 success, 1 a check
failed (or two decision paths disagree), 2 malformed input, 3 a hull
precondition or the ``a . b = 0`` constraint is violated, 4 the generated
subsolution is trivial.  ``LAMBDA_MHD_THREADS`` caps worker threads.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict, dataclass

import numpy as np

from .errors import (ConstraintViolated, FormatMismatch, NontrivialityFailed, NoScaleFound,
                     NotSolenoidal, ParseError, PreconditionViolated)

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_PRECONDITION, EXIT_TRIVIAL = 0, 1, 2, 3, 4


def _out(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True, default=_jsonable))


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    return str(x)


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as err:
        raise ParseError(f"{path}: malformed JSON: {err}") from err
    except OSError as err:
        raise ParseError(f"{path}: {err}") from err


def _number(text: str):
    """Exact rational from ``"1"``, ``"1/2"`` or ``"0.5"``."""
    from .numbers import to_exact
    try:
        return to_exact(text)
    except (ValueError, TypeError, ZeroDivisionError) as err:
        raise ParseError(f"not a number: {text!r}") from err


# --------------------------------------------------------------------------
# cone


def _witness_json(w):
    if w is None:
        return None
    from .algebra import _json_list
    out = {"xi": _json_list(list(w.xi)), "c": _json_list([w.c])[0]}
    xi, c = w.as_floats()
    n = float(np.linalg.norm(xi))
    if n > 0:
        # scale-free form for comparing the two decision paths
        out["xi_unit"] = (xi / n).tolist()
        out["c_unit"] = c / n
    return out


def cmd_cone(args) -> int:
    from .algebra import State3D, state_from_json, to_elsasser
    from .wavecone import (LAMBDA0, cone_membership, cone_witness_numeric, witness_residual)
    try:
        st = state_from_json(_load_json(args.state))
    except ValueError as err:
        raise ParseError(str(err)) from err
    e = to_elsasser(st) if isinstance(st, State3D) else st
    dim = len(np.asarray(e.zp))
    if args.dim is not None and args.dim != dim:
        raise ParseError(f"state has dimension {dim}, --dim says {args.dim}")
    structural = cone_membership(e, args.tol)
    s_member, reason = structural.member, structural.reason
    if args.variant == LAMBDA0 and not s_member:
        # with xi = 0 the conditions reduce to c zp = c zm = 0
        s_member = all(float(x) == 0.0 for x in list(np.asarray(e.zp)) + list(np.asarray(e.zm)))
        if s_member:
            reason = "zp = zm = 0: (xi, c) = (0, 1) solves the conditions"
    numeric = cone_witness_numeric(e, args.variant, args.tol)
    n_member = numeric is not None
    agree = s_member == n_member
    expected = None if args.expect is None else args.expect == "member"
    report = {
        "dim": dim, "variant": args.variant,
        "structural": {"member": s_member, "case": structural.case,
                       "witness": _witness_json(structural.witness), "reason": reason},
        "numeric": {"member": n_member, "witness": _witness_json(numeric),
                    "residual": witness_residual(e, *numeric.as_floats()) if numeric else None},
        "agree": agree,
    }
    if expected is not None:
        report["expected"] = expected
    _out(report)
    if not agree or (expected is not None and expected != s_member):
        return EXIT_FAIL
    return EXIT_OK


# --------------------------------------------------------------------------
# hull


def _report_json(rep) -> dict:
    d = rep.as_dict()
    d["ok"] = rep.ok
    return d


def cmd_hull_decompose(args) -> int:
    from .algebra import State3D, state_from_json
    from .hull import Outside, dump_tree, membership_u_rs, verify_laminate
    r, s, tau = _number(args.r), _number(args.s), _number(args.tau)
    exact = args.backend == "exact"
    if args.zero:
        st = State3D.zero(exact)
    else:
        if args.state is None:
            raise ParseError("give a state file or --zero")
        try:
            st = state_from_json(_load_json(args.state), exact=exact)
        except ValueError as err:
            raise ParseError(str(err)) from err
        if not isinstance(st, State3D):
            raise ParseError("hull decompose needs a 3D state {u, b, S, a}")
    try:
        res = membership_u_rs(st, r, s, tol=args.tol, backend=args.backend, tau=tau)
    except ConstraintViolated as err:
        _out({"status": "ConstraintViolated", "reason": str(err)})
        return EXIT_PRECONDITION
    except PreconditionViolated as err:
        _out({"status": "PreconditionViolated", "reason": str(err), "bound": err.bound})
        return EXIT_PRECONDITION
    if isinstance(res, Outside):
        _out({"status": "PreconditionViolated", "reason": res.reason})
        return EXIT_PRECONDITION
    t0 = time.perf_counter()
    rep = verify_laminate(res.tree, r, s, tol=args.verify_tol)
    report = {"status": "verified" if rep.ok else "verification_failed",
              "report": _report_json(rep), "r": str(r), "s": str(s), "tau": str(tau),
              "verify_seconds": time.perf_counter() - t0}
    if args.out:
        dump_tree(res.tree, args.out, meta={"r": str(r), "s": str(s), "tau": str(tau)})
        report["laminate"] = args.out
    if args.report:
        with open(args.report, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True, default=_jsonable)
    _out(report)
    return EXIT_OK if rep.ok else EXIT_FAIL


def cmd_hull_verify(args) -> int:
    from .hull import tree_from_json, verify_laminate
    obj = _load_json(args.laminate)
    tree = tree_from_json(obj)
    meta = obj.get("meta", {}) if isinstance(obj, dict) else {}
    r = _number(args.r) if args.r is not None else (_number(meta["r"]) if "r" in meta else None)
    s = _number(args.s) if args.s is not None else (_number(meta["s"]) if "s" in meta else None)
    rep = verify_laminate(tree, r, s, tol=args.tol)
    report = {"status": "verified" if rep.ok else "verification_failed",
              "report": _report_json(rep)}
    if not rep.ok:
        report["defect_location"] = {"leaf": rep.worst_leaf, "edge": rep.worst_edge,
                                     "convexity": rep.worst_convexity}
    _out(report)
    return EXIT_OK if rep.ok else EXIT_FAIL


# --------------------------------------------------------------------------
# subsolutions


def cmd_subsol_generate(args) -> int:
    from .pfld import PeriodicField, write_pfld
    from .subsolution import assemble_subsolution, check_tolerances, spec_from_config
    cfg = _load_json(args.config) if args.config else {}
    spec, grid, opts = spec_from_config(cfg)
    if args.no_refine:
        opts["refine"] = False
    if args.certify:
        opts["certify"] = True
    r, s = _number(str(opts["r"])), _number(str(opts["s"]))
    try:
        sub = assemble_subsolution(spec, r, s, grid, refine=opts["refine"], certify=opts["certify"])
    except NontrivialityFailed as err:
        _out({"status": "NontrivialityFailed", "reason": str(err)})
        return EXIT_TRIVIAL
    except NoScaleFound as err:
        _out({"status": "NoScaleFound", "reason": str(err)})
        return EXIT_FAIL
    os.makedirs(args.out, exist_ok=True)
    for name in ("u", "b", "S", "a"):
        write_pfld(os.path.join(args.out, f"{name}.pfld"),
                   PeriodicField(getattr(sub, name), grid.dt))
    fails = check_tolerances(sub, opts["tolerances"])
    summary = dict(sub.summary)
    summary.update({"status": "ok" if not fails else "tolerance_failed", "failures": fails,
                    "tolerances": opts["tolerances"], "r": str(r), "s": str(s),
                    "time_offset": grid.t0 + 0.5 * grid.dt,
                    "files": {"u": "u.pfld", "b": "b.pfld", "a": "a.pfld",
                              "S": "S.pfld (S11,S12,S13,S22,S23,S33)"}})
    with open(os.path.join(args.out, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")
    _out(summary)
    return EXIT_OK if not fails else EXIT_FAIL


# --------------------------------------------------------------------------
# audit


@dataclass
class AuditCheck:
    """One audit line; ``status`` is ``pass`` iff ``defect <= tolerance``."""

    name: str
    status: str
    defect: float
    tolerance: float
    wall_time: float
    detail: str = ""


_DRIFT = {"energy": "energy", "cross": "cross_helicity", "helicity": "magnetic_helicity",
          "msmp": "msmp"}
ALL_CHECKS = ("energy", "cross", "helicity", "msmp", "ohm", "balance")


def _read_fields(directory):
    from .pfld import read_pfld
    fields = {}
    for name in ("u", "b", "a"):
        path = os.path.join(directory, f"{name}.pfld")
        if os.path.exists(path):
            fields[name] = read_pfld(path)
    if "u" not in fields or "b" not in fields:
        raise ParseError(f"{directory}: needs u.pfld and b.pfld")
    ref = fields["b"]
    for name, f in fields.items():
        if not f.same_grid(ref):
            raise FormatMismatch(f"{name}.pfld grid or time axis differs from b.pfld")
    d = ref.dim
    if fields["u"].components != d or ref.components != d:
        raise FormatMismatch("u and b need one component per dimension")
    if "a" in fields and fields["a"].components != (3 if d == 3 else 1):
        raise FormatMismatch("a needs 3 components in 3D and 1 in 2D")
    return fields


def _check(name, fn, tol):
    t0 = time.perf_counter()
    try:
        defect, detail = fn()
    except NotSolenoidal as err:
        defect, detail = float(err.residual or np.inf), str(err)
    status = "pass" if defect <= tol else "fail"
    return AuditCheck(name, status, float(defect), float(tol), time.perf_counter() - t0, detail)


def _nz(x: float) -> float:
    return x if x > 0 and np.isfinite(x) else 1.0


def run_audit(directory, checks, tol: float, balance_tol: float):
    """Return ``(diagnostics, [AuditCheck])`` for the fields in ``directory``.

    Tolerances are relative to the natural size of each quantity, not
    floored at 1, so tiny-amplitude fields are not accepted vacuously:
    ``max int (|u|^2 + |b|^2)`` for energy and cross helicity,
    ``max int |b|^2 / (2 pi)`` for helicity (which bounds ``|int psi . b|``),
    ``max msmp`` for msmp, ``max|u| max|b|`` for Ohm's law and
    ``max 2 |a|_2 |b|_2`` for the helicity balance.
    """
    from .spectral import diagnostics, helicity_balance_3d, integral, ohm_defect
    fields = _read_fields(directory)
    u, b = fields["u"].data, fields["b"].data
    dim, dt = fields["b"].dim, fields["b"].dt
    a = fields["a"].data if "a" in fields else None
    diag_err = None
    try:
        diag = diagnostics(u, b, dt)
    except NotSolenoidal as err:
        diag_err = err
        diag = diagnostics(u, b, dt, check=False)
    b2 = integral(np.sum(b * b, axis=1), dim)
    scales = {"energy": _nz(float(np.max(integral(np.sum(u * u, axis=1), dim) + b2))),
              "helicity": _nz(float(np.max(b2)) / (2.0 * np.pi)),
              "msmp": _nz(float(np.nanmax(diag.msmp)) if dim == 2 else 0.0)}
    scales["cross"] = scales["energy"]
    results = []
    for name in checks:
        if name in _DRIFT:
            if (name == "helicity" and dim != 3) or (name == "msmp" and dim != 2):
                results.append(AuditCheck(name, "skip", 0.0, tol, 0.0, f"not defined in {dim}D"))
                continue

            def drift(name=name):
                if name in ("helicity", "msmp") and diag_err is not None:
                    raise diag_err
                return diag.drift(_DRIFT[name]), "max |Q(t) - Q(0)|"
            results.append(_check(name, drift, tol * scales[name]))
        elif name in ("ohm", "balance"):
            if a is None:
                results.append(AuditCheck(name, "skip", 0.0, tol, 0.0, "no a.pfld"))
                continue
            if name == "ohm":
                scale = _nz(float(np.max(np.abs(u))) * float(np.max(np.abs(b))))
                results.append(_check(name, lambda: (ohm_defect(u, b, a, dim),
                                                     "max |a - b x u|" if dim == 3 else
                                                     "max |A12 - (b1 u2 - u1 b2)|"), tol * scale))
            elif dim != 3:
                results.append(AuditCheck(name, "skip", 0.0, balance_tol, 0.0, "3D only"))
            else:
                a2 = integral(np.sum(a * a, axis=1), dim)
                scale = _nz(2.0 * float(np.max(np.sqrt(a2 * b2))))
                if scale == 1.0 and np.any(b2 > 0):
                    scale = _nz(float(np.max(b2)) / (2.0 * np.pi))

                def bal():
                    res = helicity_balance_3d(b, a, dt)
                    return res.max_defect, (f"max |dH/dt + 2 int a.b|; max |d_t b + curl a| = "
                                            f"{res.induction_residual:.3e}")
                results.append(_check(name, bal, balance_tol * scale))
        else:
            raise ParseError(f"unknown check {name!r}; choose from {', '.join(ALL_CHECKS)}")
    return diag, results


def cmd_audit(args) -> int:
    dim_default = None
    checks = [c.strip() for c in args.checks.split(",") if c.strip()] if args.checks else None
    if checks is None:
        from .pfld import read_pfld
        path = os.path.join(args.fields, "b.pfld")
        try:
            dim_default = read_pfld(path).dim
        except OSError as err:
            raise ParseError(f"{path}: {err}") from err
        checks = ["energy", "cross", "helicity" if dim_default == 3 else "msmp"]
    diag, results = run_audit(args.fields, checks, args.tol, args.balance_tol)
    csv = diag.to_csv()
    csv_path = args.csv or os.path.join(args.fields, "diagnostics.csv")
    with open(csv_path, "w") as fh:
        fh.write(csv)
    ok = all(r.status != "fail" for r in results)
    for r in results:
        print(f"{r.name:9s} {r.status:4s} defect={r.defect:.17g} tol={r.tolerance:.3g}"
              + (f"  ({r.detail})" if r.detail else ""))
    if args.report:
        with open(args.report, "w") as fh:
            json.dump({"ok": ok, "csv": csv_path, "checks": [asdict(r) for r in results]},
                      fh, indent=2, sort_keys=True)
            fh.write("\n")
    return EXIT_OK if ok else EXIT_FAIL


# --------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lambda-mhd", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("cone", help="wave cone membership of a state direction")
    c.add_argument("state", help="state JSON: {u, b, S, a} or {alpha, beta, M}")
    c.add_argument("--dim", type=int, choices=(2, 3))
    c.add_argument("--variant", choices=("Lambda", "Lambda0"), default="Lambda")
    c.add_argument("--tol", type=float, default=1e-9)
    c.add_argument("--expect", choices=("member", "nonmember"))
    c.set_defaults(func=cmd_cone)

    h = sub.add_parser("hull", help="certified laminates")
    hs = h.add_subparsers(dest="hull_command", required=True)
    d = hs.add_parser("decompose", help="build and verify a laminate for a state")
    d.add_argument("state", nargs="?", help="3D state JSON {u, b, S, a}")
    d.add_argument("--zero", action="store_true", help="use the zero state")
    d.add_argument("--tau", default="0")
    d.add_argument("--r", default="1")
    d.add_argument("--s", default="1")
    d.add_argument("--backend", choices=("exact", "float"), default="exact")
    d.add_argument("--tol", type=float, default=0.0, help="tolerance on a.b (relative)")
    d.add_argument("--verify-tol", type=float, default=None,
                   help="verification tolerance (default 0 exact, 1e-12 float)")
    d.add_argument("--out", help="write the laminate JSON here")
    d.add_argument("--report", help="write the verification report here")
    d.set_defaults(func=cmd_hull_decompose)
    v = hs.add_parser("verify", help="re-verify a laminate file")
    v.add_argument("laminate")
    v.add_argument("--r")
    v.add_argument("--s")
    v.add_argument("--tol", type=float, default=0.0)
    v.set_defaults(func=cmd_hull_verify)

    g = sub.add_parser("subsol", help="smooth strict subsolutions")
    gs = g.add_subparsers(dest="subsol_command", required=True)
    gg = gs.add_parser("generate", help="sample, scale and check a subsolution")
    gg.add_argument("--config", help="JSON config (defaults are used for missing keys)")
    gg.add_argument("--out", required=True, help="output directory")
    gg.add_argument("--certify", action="store_true",
                    help="exactly certify the worst sample")
    gg.add_argument("--no-refine", action="store_true", help="skip the refined-grid residuals")
    gg.set_defaults(func=cmd_subsol_generate)

    a = sub.add_parser("audit", help="conservation audit of PFLD fields")
    a.add_argument("fields", help="directory with u.pfld, b.pfld and optionally a.pfld")
    a.add_argument("--checks", help=f"comma list from {','.join(ALL_CHECKS)}")
    a.add_argument("--tol", type=float, default=1e-10, help="relative drift/defect tolerance")
    a.add_argument("--balance-tol", type=float, default=1e-6,
                   help="relative tolerance of the helicity balance (time differences)")
    a.add_argument("--csv", help="per-slice CSV path (default <fields>/diagnostics.csv)")
    a.add_argument("--report", help="write the audit report JSON here")
    a.set_defaults(func=cmd_audit)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "verify_tol", 0.0) is None:
        args.verify_tol = 0.0 if args.backend == "exact" else 1e-12
    try:
        return args.func(args)
    except (ParseError, FormatMismatch) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
