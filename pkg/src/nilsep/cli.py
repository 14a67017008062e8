"""Command line entry point: ``nilsep <command> ...``."""

from __future__ import annotations

import argparse
import csv
import json
import sys

from .growth import (CONGRUENCE, LAMBDA_CONGRUENCE, PartialMeasurement, fit_exponent,
                     measure_conj_growth, measure_rf_growth)
from .lie import distortion_profile
from .malcev import BUILTIN, BudgetExceeded, default_budget, get_group, parse_element
from .report import emit_report
from .witness import (SeparabilityCertificate, conjugacy_witness, rf_witness,
                      verify_certificate)

MEASURE_GROUPS = ("z", "z2", "h3", "h5", "ut4")


def _budget(args) -> int:
    return args.budget if args.budget is not None else default_budget()


def cmd_witness(args) -> int:
    ctx = get_group(args.group)
    g = parse_element(args.gamma, ctx)[1]
    h = parse_element(args.eta, ctx)[1]
    cert = conjugacy_witness(ctx, g, h, _budget(args))
    print(cert.to_json())
    return 0 if cert.verified else 1


def cmd_rf_witness(args) -> int:
    ctx = get_group(args.group)
    g = parse_element(args.element, ctx)[1]
    cert = rf_witness(ctx, g)
    print(cert.to_json())
    return 0 if cert.verified else 1


def cmd_verify(args) -> int:
    ok = True
    with open(args.cert) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            cert = SeparabilityCertificate.from_json(line)
            res = verify_certificate(cert, _budget(args))
            ok &= res
            print(json.dumps({"kind": cert.kind, "inputs": list(cert.inputs),
                              "modulus": cert.spec.modulus, "verified": res}, sort_keys=True))
    return 0 if ok else 1


def cmd_measure(args) -> int:
    ctx = get_group(args.group)
    budget = _budget(args)
    partial = False
    try:
        if args.mode == "rf":
            samples = measure_rf_growth(ctx, args.radius, budget)
        else:
            samples = measure_conj_growth(ctx, args.radius, budget, args.family)
    except PartialMeasurement as exc:
        samples, partial = exc.samples, True
        print(f"budget exceeded: {exc}", file=sys.stderr)
    fits = []
    for model in ("power", "polylog"):
        try:
            fits.append(fit_exponent(samples, model))
        except ValueError:
            pass
    meta = {"group": ctx.name, "mode": args.mode, "radius": args.radius, "budget": budget,
            "partial": partial, "title": f"{ctx.name} {args.mode}"}
    paths = emit_report(samples, fits, args.out, f"{ctx.name}_{args.mode}", meta)
    print(json.dumps({"files": [str(p) for p in paths], "partial": partial,
                      "values": [s.value for s in samples],
                      "fits": {f.model: round(f.exponent, 6) for f in fits}}, sort_keys=True))
    return 2 if partial else 0


def cmd_lie_profile(args) -> int:
    ctx = get_group(args.group)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(("n", "max_log_norm", "max_ad_coeff"))
    for n, lo, ad in distortion_profile(ctx, args.radius):
        w.writerow((n, lo, ad))
    return 0


def cmd_list_groups(args) -> int:
    for name in BUILTIN:
        ctx = get_group(name)
        print(f"{name}\thirsch={ctx.hirsch}\tclass={ctx.nilpotency_class}\tdim={ctx.dim}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nilsep", description="Separability witnesses and growth "
                                "measurements for unitriangular integer lattices.")
    sub = p.add_subparsers(dest="command", required=True)

    w = sub.add_parser("witness", help="quotient separating two non-conjugate elements")
    w.add_argument("--group", required=True)
    w.add_argument("--gamma", required=True)
    w.add_argument("--eta", required=True)
    w.add_argument("--budget", type=int)
    w.set_defaults(func=cmd_witness)

    r = sub.add_parser("rf-witness", help="quotient in which a nontrivial element survives")
    r.add_argument("--group", required=True)
    r.add_argument("--element", required=True)
    r.set_defaults(func=cmd_rf_witness)

    m = sub.add_parser("measure", help="measure F or Conj growth and write a report")
    m.add_argument("--group", required=True, choices=MEASURE_GROUPS)
    m.add_argument("--mode", required=True, choices=("rf", "conj"))
    m.add_argument("--radius", type=int, required=True)
    m.add_argument("--budget", type=int)
    m.add_argument("--family", choices=(LAMBDA_CONGRUENCE, CONGRUENCE), default=LAMBDA_CONGRUENCE,
                   help="quotient family for conj mode")
    m.add_argument("--out", required=True)
    m.set_defaults(func=cmd_measure)

    v = sub.add_parser("verify", help="re-check certificates (one JSON object per line)")
    v.add_argument("--cert", required=True)
    v.add_argument("--budget", type=int)
    v.set_defaults(func=cmd_verify)

    lp = sub.add_parser("lie-profile", help="CSV of Log-norm and Ad-coefficient maxima over balls")
    lp.add_argument("--group", required=True)
    lp.add_argument("--radius", type=int, required=True)
    lp.set_defaults(func=cmd_lie_profile)

    lg = sub.add_parser("list-groups", help="list built-in groups")
    lg.set_defaults(func=cmd_list_groups)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, BudgetExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
