"""Command-line front end.

Builds progression families over boxes or convex bodies, computes the
combinatorial threshold f, gamma_2 certificates, Gram-Schmidt walk
colorings, brute-force optima, certified lower bounds, property-suite
verification, and scaling sweeps.  Reports are JSON (canonical) or CSV
(flat projection), replayable from (config, seed).
"""

import argparse
import csv
import io
import json
import math
import sys
import time
from fractions import Fraction

import numpy as np

from . import apgen, body, fourier, gamma2, walk
from .core import Coloring, disc_eval, pdisc_eval, random_coloring
from .errors import DomainError, ResourceLimitError, StructuralError

DEFAULT_SEED = 1729


def _parse_ints(text):
    try:
        return tuple(int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated integers")


def _parse_fracs(text):
    try:
        return tuple(Fraction(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated rationals")


def _load_domain(args):
    """Return ('box', BoxSpec) or ('body', ShiftedBody)."""
    if getattr(args, "box", None) is not None:
        if getattr(args, "polytope", None) is not None:
            raise DomainError("exactly one of --box / --polytope")
        return "box", apgen.BoxSpec(args.box)
    if getattr(args, "polytope", None) is not None:
        B = body.load_polytope(args.polytope)
        if getattr(args, "shift", None) is not None:
            B = body.ShiftedBody(B.base, args.shift)
        return "body", B
    raise DomainError("one of --box / --polytope is required")


def _emit(report, args):
    report.setdefault("seed", getattr(args, "seed", DEFAULT_SEED))
    payload = dict(report)
    payload["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%S")
    if args.format == "json":
        text = json.dumps(payload, indent=2, default=str) + "\n"
    else:
        rows = report.get("records", [report])
        buf = io.StringIO()
        keys = sorted({k for r in rows for k in r if not isinstance(r[k], (dict, list))})
        w = csv.DictWriter(buf, fieldnames=keys, extrasaction="ignore")
        w.writeheader()
        for r in rows:
            w.writerow({k: r.get(k, "") for k in keys})
        text = buf.getvalue()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_bound(args):
    kind, dom = _load_domain(args)
    if kind == "box":
        r = gamma2.f_of_N(dom.N)
        report = {
            "op": "bound",
            "domain": {"box": list(dom.N)},
            "f": r.value,
            "s": float(r.s),
            "argmax_subset": list(r.argmax_subset),
            "subset_product": int(r.product),
        }
    else:
        r = body.f_K(dom.base)
        diff = body.difference_body(dom.base)
        table = [{"t": str(t), "count": body.zeta(diff, t).count}
                 for t in (Fraction(1, 2), Fraction(1), Fraction(2), Fraction(4))]
        report = {
            "op": "bound",
            "domain": {"polytope": args.polytope},
            "f": r.f_K,
            "s_star": str(r.s_star),
            "bracket": [str(r.bracket[0]), str(r.bracket[1])],
            "attained": r.attained,
            "zeta_table": table,
        }
    _emit(report, args)
    return 0


def cmd_cert(args):
    kind, dom = _load_domain(args)
    if kind != "box":
        raise DomainError("certificates are built over boxes")
    builder = gamma2.map_cert if args.family == "maximal" else gamma2.ap_cert
    F = builder(dom, mode=args.mode)
    doc = gamma2.certificate_document(F)
    f = gamma2.f_of_N(dom.N).value
    doc.update({"op": "cert", "domain": {"box": list(dom.N)},
                "f": f, "ratio_to_f": F.value / f})
    _emit(doc, args)
    return 0


def cmd_color(args):
    kind, dom = _load_domain(args)
    if kind == "box":
        F = gamma2.ap_cert(dom, mode="right")
        chi, rep = walk.gamma2_coloring(
            None, F, seed=args.seed,
            disc_fn=lambda c: walk.ap_family_disc(dom, c))
        m = walk.ap_family_size(dom)
        f = gamma2.f_of_N(dom.N).value
        report = {
            "op": "color", "domain": {"box": list(dom.N)},
            "disc": rep["disc"], "sets": m,
            "cert_value": F.value,
            "bound": math.sqrt(math.log(2 * m)) * F.value,
            "ratio": rep["disc"] / (math.sqrt(math.log(2 * m)) * F.value),
            "f": f,
        }
    else:
        S = body.enumerate_maximal_aps_in_body(dom)
        n = len(S.universe)
        F = gamma2.size_bound_cert(S, mode="right")
        chi, rep = walk.gamma2_coloring(S, F, seed=args.seed)
        report = {
            "op": "color", "domain": {"polytope": args.polytope},
            "disc": rep["disc"], "sets": len(S),
            "cert_value": F.value, "bound": rep["bound_scale"],
            "ratio": rep["ratio"], "points": n,
        }
    _emit(report, args)
    return 0


def cmd_brute(args):
    kind, dom = _load_domain(args)
    if kind == "box":
        S = apgen.enumerate_all_aps(dom)
    else:
        S = body.enumerate_maximal_aps_in_body(dom)
    r = walk.brute_force_min_disc(S)
    report = {
        "op": "brute",
        "domain": {"box": list(dom.N)} if kind == "box"
        else {"polytope": args.polytope},
        "min_disc": r.min_disc, "evaluated": r.evaluated,
        "witness": r.witness.values.tolist(),
    }
    _emit(report, args)
    return 0


def cmd_lowerbound(args):
    kind, dom = _load_domain(args)
    if kind == "box":
        K = body.box_polytope(dom.N)
        B = body.ShiftedBody(K)
        domain = {"box": list(dom.N)}
    else:
        B = dom
        domain = {"polytope": args.polytope}
    params = fourier.choose_lb_params(B.base)
    lb = fourier.certified_lower_bound(B, params)
    report = {
        "op": "lowerbound", "domain": domain,
        "value": lb.value, "ell": params.ell, "m": str(params.m),
        "epsilon": str(params.epsilon),
        "zeta_half_m": params.zeta_half_m,
        "zeta_long": lb.zeta_long, "zeta_m": lb.zeta_m,
        "omega": lb.omega,
    }
    _emit(report, args)
    return 0


def _verify_lex(box, records):
    universe = box.universe()
    ok = True
    try:
        for b in apgen.canonical_steps(box):
            for p in universe.points[:: max(1, len(universe) // 16)]:
                ap = apgen.maximal_ap(tuple(int(c) for c in p), b, box)
                apgen.lex_interval_repr(ap, box)
    except (StructuralError, DomainError):
        ok = False
    records.append({"lemma": "lex-interval", "box": list(box.N), "ok": ok})
    return ok


def _verify_reduction(box, seeds, records):
    A = apgen.enumerate_all_aps(box)
    M = apgen.enumerate_maximal_aps(box)
    sigma = apgen.lex_order(box.universe())
    ok = True
    for s in seeds:
        chi = random_coloring(box.size(), seed=s)
        if disc_eval(A, chi) > 2 * pdisc_eval(M, sigma, chi):
            ok = False
            records.append({"lemma": "reduction", "box": list(box.N),
                            "seed": s, "ok": False})
    records.append({"lemma": "reduction", "box": list(box.N), "ok": ok})
    return ok


def _verify_cert(box, records):
    F = gamma2.map_cert(box, mode="full")
    res = F.residual()
    ok = res <= 1e-9
    records.append({"lemma": "cert-residual", "box": list(box.N),
                    "residual": res, "ok": ok})
    return ok


def _verify_large_sets(box, records):
    ok = True
    for s in range(2, max(box.N) + 1):
        r = apgen.large_step_set(box, s)
        exact = len(r)
        bound = r.count_bound
        row_ok = Fraction(exact) <= bound
        if not row_ok:
            ok = False
        records.append({"lemma": "large-sets", "box": list(box.N), "s": s,
                        "count": exact, "bound": str(bound), "ok": row_ok})
    return ok


def cmd_verify(args):
    if getattr(args, "box", None) is None:
        boxes = [apgen.BoxSpec((8,)), apgen.BoxSpec((4, 4)),
                 apgen.BoxSpec((3, 3, 2))]
    else:
        boxes = [apgen.BoxSpec(args.box)]
    records = []
    ok = True
    which = args.lemma
    for b in boxes:
        if which in (None, "lex"):
            ok &= _verify_lex(b, records)
        if which in (None, "reduction"):
            ok &= _verify_reduction(b, range(20), records)
        if which in (None, "certificate"):
            ok &= _verify_cert(b, records)
        if which in (None, "large-sets"):
            ok &= _verify_large_sets(b, records)
    report = {"op": "verify", "ok": ok, "records": records}
    _emit(report, args)
    return 0 if ok else 1


def cmd_sweep(args):
    scales = args.scales
    records = []
    if getattr(args, "polytope", None) is not None:
        K = body.load_polytope(args.polytope).base
        d = K.dim
        for r in scales:
            scaled = body.Polytope([[r * c for c in v] for v in K.vertices])
            fk = body.f_K(scaled)
            records.append({"r": r, "f": fk.f_K, "s_star": str(fk.s_star)})
        xs = [math.log(r["r"]) for r in records]
        ys = [math.log(r["f"]) for r in records]
        target = d / (2 * (d + 1))
    else:
        for r in scales:
            N = tuple(args.box) if args.box else (1,)
            Nr = tuple(max(1, c * r) for c in N)
            fb = gamma2.f_of_N(Nr)
            records.append({"r": r, "box": list(Nr), "f": fb.value})
        xs = [math.log(r["r"]) for r in records]
        ys = [math.log(r["f"]) for r in records]
        d = len(args.box) if args.box else 1
        target = d / (2 * (d + 1))
    if len(scales) < 2:
        report = {"op": "sweep", "records": records,
                  "slope": None, "degenerate": True, "target": target}
    else:
        slope = float(np.polyfit(xs, ys, 1)[0])
        report = {"op": "sweep", "records": records,
                  "slope": slope, "target": target,
                  "deviation": abs(slope - target)}
    _emit(report, args)
    return 0


def build_parser():
    p = argparse.ArgumentParser(
        prog="apdisc",
        description="Discrepancy of multidimensional arithmetic progressions: "
                    "bounds, certificates, colorings, and checks.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, box=True, poly=True):
        if box:
            sp.add_argument("--box", type=_parse_ints, default=None,
                            help="comma-separated side lengths N1,N2,...")
        if poly:
            sp.add_argument("--polytope", default=None,
                            help="path to a polytope file")
            sp.add_argument("--shift", type=_parse_fracs, default=None,
                            help="rational shift vector r1,r2,...")
        sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
        sp.add_argument("--out", default=None, help="output path (default stdout)")
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--scale", type=int, default=None,
                        help="override resource guard scale")

    sp = sub.add_parser("bound", help="threshold f and zeta tables")
    common(sp)
    sp.set_defaults(func=cmd_bound)

    sp = sub.add_parser("cert", help="build a gamma_2 certificate")
    common(sp, poly=False)
    sp.add_argument("--family", choices=("maximal", "all"), default="all")
    sp.add_argument("--mode", choices=("full", "right", "value"), default="right")
    sp.set_defaults(func=cmd_cert)

    sp = sub.add_parser("color", help="Gram-Schmidt walk coloring")
    common(sp)
    sp.set_defaults(func=cmd_color)

    sp = sub.add_parser("brute", help="exact optimum by enumeration")
    common(sp)
    sp.set_defaults(func=cmd_brute)

    sp = sub.add_parser("lowerbound", help="certified lower bound")
    common(sp)
    sp.set_defaults(func=cmd_lowerbound)

    sp = sub.add_parser("verify", help="run the exact property suite")
    common(sp)
    sp.add_argument("--lemma", default=None,
                    choices=("lex", "reduction", "certificate", "large-sets"))
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("sweep", help="scaling sweep with log-log slope fit")
    common(sp)
    sp.add_argument("--scales", type=_parse_ints, required=True,
                    help="comma-separated scale factors")
    sp.set_defaults(func=cmd_sweep)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ResourceLimitError as e:
        print("resource guard: %s" % e, file=sys.stderr)
        return 3
    except (DomainError, StructuralError) as e:
        print("error: %s" % e, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
