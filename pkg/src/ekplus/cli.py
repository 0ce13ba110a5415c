"""Command-line front end.

Exit codes: 0 on success, 1 on domain errors (a JSON error object goes to
stderr), 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from fractions import Fraction

from .errors import EKError, ParseError
from .exact import QuadField, is_prime, parse_real_spec, v_int
from .padic import embed_field, legendre, parse_padic_spec

RECORD_FIELDS = ["q", "r", "n_params", "real_lo", "real_hi", "vp", "product_lo", "product_hi",
                 "log_product_hi"]


class _UsageError(Exception):
    def __init__(self, usage: str, message: str):
        super().__init__(message)
        self.usage = usage


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(self.format_usage(), message)


def _odd_prime(text: str) -> int:
    try:
        p = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer")
    if p == 2 or not is_prime(p):
        raise argparse.ArgumentTypeError(f"p={p} must be an odd prime")
    return p


def _positive(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer")
    if n < 1:
        raise argparse.ArgumentTypeError(f"{n} must be positive")
    return n


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated integer list, got {text!r}")


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="ekplus", description="Witness pairs and certified products for (EK+) type conditions.")
    ap.add_argument("--precision-cap", type=_positive, help="bit cap for adaptive real precision")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def output_flags(p, default):
        g = p.add_mutually_exclusive_group()
        g.add_argument("--json", dest="output", action="store_const", const="json")
        g.add_argument("--csv", dest="output", action="store_const", const="csv")
        g.add_argument("--human", dest="output", action="store_const", const="human")
        p.set_defaults(output=default)

    fi = sub.add_parser("field-info", help="basic data of Q(sqrt d), optionally at a prime")
    fi.add_argument("--d", type=int, required=True)
    fi.add_argument("--p", type=_odd_prime)
    output_flags(fi, "json")

    un = sub.add_parser("units", help="unit system used by the constructions")
    un.add_argument("--d", type=int, required=True)
    un.add_argument("--p", type=_odd_prime, required=True)
    un.add_argument("--branch", type=int)
    un.add_argument("--kmax", type=_positive, default=8)
    un.add_argument("--coeff-bound", type=_positive, default=10**6)
    un.add_argument("--N", type=_positive, default=20, help="p-adic precision for the zeta check")
    output_flags(un, "json")

    co = sub.add_parser("construct", help="witness constructions")
    csub = co.add_subparsers(dest="which", required=True, parser_class=_Parser)
    t1 = csub.add_parser("thm1", help="two-sided construction (beta quadratic)")
    t1.add_argument("--alpha", required=True)
    t1.add_argument("--beta", required=True)
    t1.add_argument("--p", type=_odd_prime, required=True)
    g = t1.add_mutually_exclusive_group()
    g.add_argument("--count", type=_positive)
    g.add_argument("--epsilon", type=_fraction, help="real case: first n2 with distance <= epsilon")
    t1.add_argument("--kmax", type=_positive, default=8)
    t1.add_argument("--coeff-bound", type=_positive, default=10**6)
    t1.add_argument("--verify", action="store_true", help="re-evaluate every record independently")
    t1.add_argument("--threads", type=_positive, default=1)
    output_flags(t1, "json")
    t2 = csub.add_parser("thm2", help="unit-power construction (alpha real quadratic)")
    t2.add_argument("--alpha", required=True)
    t2.add_argument("--beta", required=True)
    t2.add_argument("--p", type=_odd_prime, required=True)
    t2.add_argument("--N", type=_int_list, required=True)
    t2.add_argument("--branch", type=int, help="branch of sqrt d for the field of alpha")
    t2.add_argument("--verify", action="store_true")
    t2.add_argument("--threads", type=_positive, default=1)
    output_flags(t2, "json")

    sc = sub.add_parser("scan", help="record chain of EK+ products")
    sc.add_argument("--alpha", required=True)
    sc.add_argument("--beta", required=True)
    sc.add_argument("--p", type=_odd_prime, required=True)
    sc.add_argument("--qmax", type=_positive, required=True)
    sc.add_argument("--kmax", type=_positive, default=2)
    sc.add_argument("--strategy", choices=["exhaustive", "residue_window"], default="exhaustive")
    sc.add_argument("--threads", type=_positive, default=1)
    output_flags(sc, "csv")

    bo = sub.add_parser("bound", help="lower bound certificate for a conjugate pair")
    bo.add_argument("--f", type=_int_list, required=True, help="coefficients a,b,c of aX^2+bX+c")
    bo.add_argument("--p", type=_odd_prime, required=True)
    bo.add_argument("--qmax", type=_positive, help="also confirm the bound by an exhaustive scan")
    bo.add_argument("--kmax", type=_positive, default=2)
    output_flags(bo, "json")

    st = sub.add_parser("selftest", help="quick run of the acceptance checks")
    output_flags(st, "human")
    return ap


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _emit_json(obj, out) -> None:
    out.write(json.dumps(obj, separators=(", ", ": ")) + "\n")


def _emit_records(rows: list[dict], fields: list[str], fmt: str, out) -> None:
    if fmt == "json":
        for row in rows:
            _emit_json(row, out)
        return
    if fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(fields)
        for row in rows:
            w.writerow([_cell(row.get(k)) for k in fields])
        return
    widths = {k: max(len(k), *(len(_cell(r.get(k))) for r in rows)) if rows else len(k) for k in fields}
    out.write("  ".join(k.ljust(widths[k]) for k in fields) + "\n")
    for row in rows:
        out.write("  ".join(_cell(row.get(k)).ljust(widths[k]) for k in fields) + "\n")


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (list, tuple)):
        return ";".join(str(v) for v in x)
    return str(x)


def _emit_object(obj: dict, fmt: str, out) -> None:
    if fmt == "json":
        _emit_json(obj, out)
    elif fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["key", "value"])
        for k, v in obj.items():
            w.writerow([k, json.dumps(v) if isinstance(v, (dict, list)) else v])
    else:
        for k, v in obj.items():
            out.write(f"{k}: {json.dumps(v) if isinstance(v, (dict, list)) else v}\n")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_field_info(args, out) -> int:
    F = QuadField(args.d)
    info = {
        "d": F.d,
        "real": F.is_real,
        "integral_basis": str(F.integral_basis()),
        "discriminant": F.d if F.ring_shift else 4 * F.d,
    }
    if F.is_real:
        from .units import fundamental_unit

        eps = fundamental_unit(F.d)
        info["fundamental_unit"] = str(eps)
        info["fundamental_unit_norm"] = str(eps.norm())
    if args.p is not None:
        p = args.p
        if v_int(F.d, p) > 0:
            info["splitting"] = "ramified"
        else:
            emb = embed_field(F, p, 8)
            info["splitting"] = emb.splitting
            if emb.splitting == "split":
                r = emb.embed(F.sqrt_d).residue(1)
                info["sqrt_d_branches_mod_p"] = sorted({r, p - r})
        info["legendre"] = legendre(F.d, p)
    _emit_object(info, args.output, out)
    return 0


def cmd_units(args, out) -> int:
    from .units import unit_system, zeta_system

    system = unit_system(args.d, args.p, args.branch, args.kmax, args.coeff_bound).to_dict()
    if args.d > 0:
        system["zeta"] = zeta_system(args.d, args.p, args.N, args.branch).to_dict()
    _emit_object(system, args.output, out)
    return 0


def _verify_records(records, alpha, beta_spec, p) -> None:
    """Recompute exact records with the independent evaluator; raise on any mismatch."""
    from .verify import ek_product, padic_abs_difference

    for rec in records:
        if not rec.is_exact:
            continue  # residues and closed forms were already cross-checked at construction
        pa = padic_abs_difference(rec.Q, rec.R, beta_spec, p)
        if pa != rec.padic_abs:
            raise EKError(f"record {rec.n_params}: |Q beta - R|_p is {pa}, record says {rec.padic_abs}")
        prod = ek_product(rec.Q, rec.R, alpha, beta_spec, p, "EK+")
        mine = rec.ek_plus_product
        if prod.upper < mine.lower or mine.upper < prod.lower:
            raise EKError(f"record {rec.n_params}: product enclosures disagree")


def _record_rows(records, verified: bool) -> list[dict]:
    rows = []
    for rec in records:
        row = rec.to_dict()
        if verified:
            row["verified"] = "yes" if rec.is_exact else "residues"
        rows.append(row)
    return rows


def _record_fields(rows: list[dict]) -> list[str]:
    fields = list(RECORD_FIELDS)
    for row in rows:
        for k in row:
            if k not in fields:
                fields.append(k)
    return fields


def cmd_construct(args, out) -> int:
    from .construct import thm1_imaginary, thm1_real, thm2_construct

    alpha = parse_real_spec(args.alpha)
    beta = parse_padic_spec(args.beta)
    p = args.p
    if args.which == "thm1":
        if beta.is_rational:
            raise ParseError("thm1 needs a quadratic beta (quad:d=..,a=..,b=..)")
        if beta.quad.field.is_real:
            if args.count is None and args.epsilon is None:
                args.count = 5
            records = thm1_real(alpha, beta, p, args.count, args.epsilon, args.kmax, args.coeff_bound,
                                threads=args.threads)
        else:
            if args.epsilon is not None:
                raise ParseError("--epsilon applies to real quadratic beta only")
            records = thm1_imaginary(alpha, beta, p, args.count or 5, args.kmax, args.coeff_bound,
                                     threads=args.threads)
    else:
        records = thm2_construct(alpha, beta, p, args.N, args.branch, threads=args.threads)
    if args.verify:
        _verify_records(records, alpha, beta, p)
    rows = _record_rows(records, args.verify)
    _emit_records(rows, _record_fields(rows), args.output, out)
    return 0


def cmd_scan(args, out) -> int:
    from .verify import scan_records

    alpha = parse_real_spec(args.alpha)
    beta = parse_padic_spec(args.beta)
    chain = scan_records(alpha, beta, args.p, args.qmax, args.kmax, args.strategy, args.threads)
    rows = [dict(zip(("q", "r", "product_lo", "product_hi"), rec.to_row())) for rec in chain]
    _emit_records(rows, ["q", "r", "product_lo", "product_hi"], args.output, out)
    return 0


def cmd_bound(args, out) -> int:
    from .exact import RealSpec
    from .verify import check_lower_bound, conjugate_lower_bound

    if len(args.f) != 3:
        raise ParseError("--f needs exactly three coefficients a,b,c")
    cert = conjugate_lower_bound(args.f, args.p)
    obj = cert.to_dict()
    if args.qmax:
        res = check_lower_bound(RealSpec.from_quad(cert.alpha), cert.beta, args.p, args.qmax, cert, args.kmax)
        obj["scan"] = {"qmax": args.qmax, "kmax": args.kmax, "pairs": res.pairs,
                       "exact_checks": res.exact_checks, "holds": res.ok}
        if res.worst is not None:
            q, r, prod = res.worst
            obj["scan"]["min_pair"] = [q, r]
            obj["scan"]["min_product_lo"] = prod.lo_str()
    _emit_object(obj, args.output, out)
    return 0 if not args.qmax or obj["scan"]["holds"] else 1


def cmd_selftest(args, out) -> int:
    from .selftest import run_selftest

    results = run_selftest()
    if args.output == "json":
        for name, ok, detail in results:
            _emit_json({"check": name, "pass": ok, "detail": detail}, out)
    else:
        for name, ok, detail in results:
            out.write(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}\n")
    return 0 if all(ok for _, ok, _ in results) else 1


COMMANDS = {
    "field-info": cmd_field_info,
    "units": cmd_units,
    "construct": cmd_construct,
    "scan": cmd_scan,
    "bound": cmd_bound,
    "selftest": cmd_selftest,
}


def run(argv: list[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        err.write(exc.usage)
        err.write(json.dumps({"error": "UsageError", "message": str(exc)}) + "\n")
        return 2
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.precision_cap:
        os.environ["EKPLUS_PRECISION_CAP"] = str(args.precision_cap)
    try:
        return COMMANDS[args.command](args, out)
    except ParseError as exc:
        err.write(json.dumps(exc.to_dict()) + "\n")
        return 2
    except EKError as exc:
        err.write(json.dumps(exc.to_dict()) + "\n")
        return 1


def main() -> None:
    sys.exit(run())
