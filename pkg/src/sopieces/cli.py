"""Command-line driver: classify one element, tabulate pieces, run the suites, list labels."""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .census import census, kind_of
from .counting import card_piece, dim_d
from .filtration import admissible_labels, canonical_filtration, class_label, piece_label
from .groups import dickson, is_unipotent, progress, unipotent_count
from .linalg import Mat
from .nilpotent import eps_bits, jordan_data
from .quadspace import space_from_descriptor

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE = 0, 1, 2
DEFAULT_GROUP_GUARD = 10 ** 7


class UsageError(Exception):
    pass


def _space(args):
    try:
        return space_from_descriptor(args.space, args.q)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def envelope(s, results) -> dict:
    F = s.ctx if s is not None else None
    return {
        "tool_version": __version__,
        "field": None if F is None else {"p": F.p, "k": F.k, "modulus": [int(c) for c in F.modulus]},
        "space": None if s is None else {"descriptor": s.descriptor, "D": s.D, "q": F.q,
                                         "type": s.eta},
        "results": results,
    }


# ---------------------------------------------------------------- classify

def cmd_classify(args) -> tuple[dict, int]:
    s = _space(args)
    F = s.ctx
    try:
        with open(args.matrix) as fh:
            g = Mat.from_text(fh.read(), F).a
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read matrix: {exc}") from None
    if g.shape != (s.D, s.D):
        raise UsageError(f"matrix is {g.shape[0]}x{g.shape[1]}, space has dimension {s.D}")
    if not s.is_isometry(g):
        raise UsageError("not an isometry of the form")
    if not is_unipotent(F, g):
        raise UsageError("not unipotent")
    delta = dickson(s, g)
    if delta:
        raise UsageError("not in SO (Dickson invariant 1)")
    N = F.sub(g, np.eye(s.D, dtype=np.int64))
    e, c = jordan_data(F, N)
    filt = canonical_filtration(s, N)
    lab = piece_label(filt)
    rec = {
        "dickson": delta,
        "nilpotency": e,
        "c": list(c),
        "eps": list(eps_bits(s, N)) if F.p == 2 and s.D else None,
        "filtration": [{"degree": a, "basis": filt.X(a).basis.tolist()}
                       for a in filt.degrees()],
        "phi": list(lab.f),
        "component": lab.component,
        "S": None,
    }
    if F.p == 2 and lab.at(0) > 0:
        rec["S"] = [list(b) for b in class_label(filt, N).S]
    return envelope(s, [rec]), EXIT_OK


# ---------------------------------------------------------------- pieces

def piece_report(s, verbose: bool = False) -> tuple[dict, bool]:
    cen = census(s, verbose=verbose)
    kind = kind_of(s)
    q = s.ctx.q
    by_class: dict = {}
    if q % 2 == 0:
        for cl in cen.class_labels:
            key = (cl.piece, cl.S)
            by_class[key] = by_class.get(key, 0) + 1
    records = []
    ok = True
    for lab in admissible_labels(s.D, s.eta):
        poly = card_piece(lab, kind)
        obs = cen.piece_counts.get(lab, 0)
        pred = poly.at(q)
        ok &= obs == pred
        if q % 2 == 0:
            orbits = [{"S": [list(b) for b in S], "size": n}
                      for (p, S), n in sorted(by_class.items(), key=lambda t: str(t[0][1]))
                      if p == lab]
        else:
            orbits = [{"S": None, "size": obs}] if obs else []
        records.append({"phi": list(lab.f), "component": lab.component, "dim_d": dim_d(lab),
                        "predicted_poly": str(poly), "predicted_at_q": pred, "observed": obs,
                        "orbits": orbits})
    stray = [lab for lab in cen.piece_counts if lab not in set(admissible_labels(s.D, s.eta))]
    ok &= not stray
    total = sum(r["observed"] for r in records)
    ok &= total == cen.n == unipotent_count(s)
    report = {"D": s.D, "q": q, "type": s.eta, "total": total, "labels": records,
              "passed": bool(ok)}
    return report, bool(ok)


def cmd_pieces(args) -> tuple[dict, int]:
    s = _space(args)
    n = unipotent_count(s)
    if n > args.max_group:
        raise UsageError(f"{n} unipotents exceed the guard {args.max_group}; try a smaller q or D")
    report, ok = piece_report(s, verbose=args.verbose)
    return envelope(s, [report]), EXIT_OK if ok else EXIT_MISMATCH


# ---------------------------------------------------------------- verify

def _run_suite(name, dmax, qlist, verbose):
    from .verify import run_suites
    return run_suites([name], dmax=dmax, qlist=qlist, verbose=verbose)[0].to_dict()


def cmd_verify(args) -> tuple[dict, int]:
    from .verify import SUITES, run_suites
    try:
        qlist = tuple(int(x) for x in args.qlist.split(","))
    except ValueError:
        raise UsageError(f"bad --qlist {args.qlist!r}") from None
    names = list(SUITES) if args.suite == "all" else [args.suite]
    if args.jobs > 1 and len(names) > 1:
        with ProcessPoolExecutor(max_workers=min(args.jobs, len(names))) as ex:
            futs = [ex.submit(_run_suite, n, args.dmax, qlist, args.verbose) for n in names]
            results = [f.result() for f in futs]
    else:
        results = [r.to_dict() for r in run_suites(names, dmax=args.dmax, qlist=qlist,
                                                  verbose=args.verbose)]
    ok = all(r["passed"] for r in results)
    for r in results:
        # wall-clock time would make reports differ between identical runs
        secs = r.pop("seconds")
        if args.verbose:
            progress(f"{r['suite']} took {secs}s")
    if not args.full:
        for r in results:
            r["results"] = [c for c in r["results"] if not c["passed"]]
    return envelope(None, results), EXIT_OK if ok else EXIT_MISMATCH


# ---------------------------------------------------------------- labels

def cmd_labels(args) -> tuple[dict, int]:
    s = _space(args)
    kind = kind_of(s)
    out = []
    for lab in admissible_labels(s.D, s.eta):
        poly = card_piece(lab, kind)
        out.append({"phi": list(lab.f), "component": lab.component, "dim_d": dim_d(lab),
                    "predicted_poly": str(poly), "predicted_at_q": poly.at(s.ctx.q)})
    return envelope(s, out), EXIT_OK


# ---------------------------------------------------------------- text output

def _text(doc: dict, command: str) -> str:
    lines = []
    sp = doc.get("space")
    if sp:
        lines.append(f"space {sp['descriptor']} over GF({sp['q']})")
    for r in doc["results"]:
        if command == "labels":
            comp = "" if r["component"] is None else f" j={r['component']}"
            lines.append(f"{tuple(r['phi'])}{comp}  d={r['dim_d']}  {r['predicted_poly']}"
                         f"  -> {r['predicted_at_q']}")
        elif command == "pieces":
            for lab in r["labels"]:
                comp = "" if lab["component"] is None else f" j={lab['component']}"
                mark = "ok" if lab["observed"] == lab["predicted_at_q"] else "MISMATCH"
                lines.append(f"{tuple(lab['phi'])}{comp}  predicted {lab['predicted_at_q']}"
                             f"  observed {lab['observed']}  {mark}")
            lines.append(f"total {r['total']}  {'PASS' if r['passed'] else 'FAIL'}")
        elif command == "classify":
            lines.append(f"c = {r['c']}  eps = {r['eps']}")
            for lvl in r["filtration"]:
                lines.append(f"X>={lvl['degree']}: {lvl['basis']}")
            lines.append(f"phi = {tuple(r['phi'])}  component = {r['component']}  S = {r['S']}")
        else:
            lines.append(f"{r['suite']}: {'PASS' if r['passed'] else 'FAIL'}"
                         f"  ({r['checks']} checks, {r['failed']} failed)")
            if r["counterexample"]:
                lines.append("  counterexample: " + json.dumps(r["counterexample"], default=str))
    return "\n".join(lines) + "\n"


def _plain(x):
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    return str(x)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sopieces", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, space=True):
        if space:
            sp.add_argument("--space", required=True, help="descriptor such as D4+, D5, D6-")
            sp.add_argument("--q", type=int, required=True)
        sp.add_argument("--format", choices=("json", "text"), default="json")
        sp.add_argument("--out", help="write output here instead of stdout")
        sp.add_argument("--verbose", action="store_true", help="progress on stderr")

    c = sub.add_parser("classify", help="canonical filtration and label of one element")
    common(c)
    c.add_argument("--matrix", required=True, help="file with 'rows cols q' header and entries")
    pc = sub.add_parser("pieces", help="enumerate unipotents and compare with predicted sizes")
    common(pc)
    pc.add_argument("--max-group", type=int, default=DEFAULT_GROUP_GUARD,
                    help="refuse spaces with more unipotents than this")
    v = sub.add_parser("verify", help="run verification suites")
    common(v, space=False)
    v.add_argument("--suite", choices=("theorem17", "counts", "invariants", "all"), default="all")
    v.add_argument("--dmax", type=int, default=7)
    v.add_argument("--qlist", default="2,3,4,5")
    v.add_argument("--jobs", type=int, default=1)
    v.add_argument("--full", action="store_true", help="include passing checks in the report")
    lb = sub.add_parser("labels", help="admissible labels with predicted piece sizes")
    common(lb)
    return p


COMMANDS = {"classify": cmd_classify, "pieces": cmd_pieces, "verify": cmd_verify,
            "labels": cmd_labels}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        doc, code = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = (json.dumps(doc, indent=2, sort_keys=True, default=_plain) + "\n" if args.format == "json"
            else _text(doc, args.command))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        if args.verbose:
            progress(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
