"""``nfdiag`` command line: validate trees, inspect the automorphism, diagonalise, verify."""

from __future__ import annotations

import argparse
import json
import sys
from typing import Any, Sequence

from . import ratexpr
from .automorphism import OrderMismatch, RecursionOracleMismatch, build_phi
from .diagonalizer import FAULTS, diagonalize
from .nntree import SCHEMA, NNTree, TreeValidationError, validate_tree
from .verifier import Twist, VerifyConfig, load_twist, verify_all

EXIT_OK, EXIT_INVALID, EXIT_FAILED = 0, 1, 2

# The order-2 and order-3 single-vertex trees with their twists; values bind the symbols numerically.
PRESETS: dict[str, dict[str, Any]] = {
    "ex1": {
        "schema": SCHEMA,
        "n": 2,
        "vertices": [{"id": "b", "parent": "a", "tau": 1, "gamma": 2, "beta": 2, "alpha": 2}],
        "pairs": [],
        "twist": {"twist": {"b.0": "c"}, "values": {"c": 2}},
    },
    "ex2": {
        "schema": SCHEMA,
        "n": 3,
        "vertices": [{"id": "b", "parent": "a", "tau": 1, "gamma": 3, "beta": 3, "alpha": 3}],
        "pairs": [],
        "twist": {"twist": {"b.0": "c", "b.1": "d"}, "values": {"c": 2, "d": 5}},
    },
}


class UsageError(Exception):
    pass


def _read_json(path: str) -> Any:
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise TreeValidationError([f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})"]) from None


def _write(text: str, path: str = "-") -> None:
    if path == "-":
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")


def _dump(obj: Any) -> str:
    return json.dumps(obj, indent=2)


def load_inputs(args: argparse.Namespace) -> tuple[NNTree, Twist]:
    raw = _read_json(args.tree)
    tree = validate_tree(raw)
    twist_doc = raw.get("twist") if isinstance(raw, dict) else None
    if getattr(args, "twist", None):
        twist_doc = _read_json(args.twist)
    try:
        twist = load_twist(twist_doc)
        build_phi(tree, check_order=False).twisted(twist.scalars)
    except ValueError as exc:
        raise TreeValidationError([f"twist: {exc}"]) from None
    return tree, twist


def _parse_sizes(text: str) -> tuple[int, ...]:
    try:
        sizes = tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"sizes must be comma-separated integers, got {text!r}") from None
    if not sizes or any(s < 1 for s in sizes):
        raise argparse.ArgumentTypeError("sizes must be positive")
    return sizes


def _parse_faults(text: str) -> tuple[str, ...]:
    faults = tuple(f for f in text.split(",") if f)
    bad = [f for f in faults if f not in FAULTS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown fault {bad[0]!r}; choose from {', '.join(FAULTS)}")
    return faults


# -- subcommands ---------------------------------------------------------------------


def cmd_validate(args: argparse.Namespace) -> int:
    tree, _ = load_inputs(args)
    aut = build_phi(tree, check_order=False)
    info = {"schema": SCHEMA, "valid": True, "n": tree.n, "n1": aut.n1, "vertices": len(tree.vertices),
            "pairs": len(tree.pairs), "letters": len(aut.alphabet)}
    if args.format == "json":
        _write(_dump(info))
    else:
        _write(f"valid: n={tree.n} n1={aut.n1} vertices={len(tree.vertices)} pairs={len(tree.pairs)} "
               f"letters={len(aut.alphabet)}")
    return EXIT_OK


def cmd_phi(args: argparse.Namespace) -> int:
    tree, twist = load_inputs(args)
    aut = build_phi(tree)
    if twist.scalars:
        aut = aut.twisted(twist.scalars)
    lmap = aut.letter_map()
    if args.format == "json":
        _write(_dump({"schema": SCHEMA, "map": {s: {"coeff": c.to_json(), "word": str(w)} for s, (c, w) in lmap.items()}}))
    else:
        for s, (c, w) in lmap.items():
            _write(f"{s} -> {w}" if c.is_one() else f"{s} -> {c} * {w}")
    return EXIT_OK


def cmd_order(args: argparse.Namespace) -> int:
    tree, _ = load_inputs(args)
    rep = build_phi(tree, check_order=False).order_report()
    if args.format == "json":
        _write(_dump({"schema": SCHEMA, "order": rep["order"], "n1": rep["n1"], "ok": rep["ok"]}))
    else:
        _write(str(rep["order"]))
    return EXIT_OK if rep["ok"] else EXIT_FAILED


def cmd_lambda(args: argparse.Namespace) -> int:
    tree, _ = load_inputs(args)
    aut = build_phi(tree)
    verts = {v.id: dict(zip(("lambda", "u"), aut.lam(v.id))) for v in tree.level_order}
    pairs = {p.label: dict(zip(("u", "v"), aut.u_v(p))) for p in tree.pairs}
    if args.format == "json":
        _write(_dump({"schema": SCHEMA, "vertices": verts, "pairs": pairs}))
    else:
        for vid, d in verts.items():
            _write(f"{vid}: lambda={d['lambda']} u={d['u']}")
        for label, d in pairs.items():
            _write(f"{label}: u={d['u']} v={d['v']}")
    return EXIT_OK


def cmd_diagonalize(args: argparse.Namespace) -> int:
    tree, twist = load_inputs(args)
    aut = build_phi(tree).twisted(twist.scalars)
    res = diagonalize(aut, faults=args.faults, strict=False)
    failed = [c for c in res.checks if not c.passed]
    if args.format == "text":
        for g in res.generators:
            _write(f"{g.name}  eigenvalue {g.eigenvalue}")
            _write(f"    {g.expr}")
        for s, e in res.inverse.items():
            _write(f"{s} = {e}")
        _write(f"exact checks: {len(res.checks) - len(failed)}/{len(res.checks)} passed")
    else:
        doc = {
            "schema": SCHEMA,
            "generators": [{"name": g.name, "expr": ratexpr.to_json(g.expr), "eigenvalue": g.eigenvalue.to_json(),
                            "eigenvalue_text": str(g.eigenvalue), "provenance": g.provenance}
                           for g in res.generators],
            "inverse": {s: ratexpr.to_json(e) for s, e in res.inverse.items()},
            "report": {"exact_checks": len(res.checks), "failed": [c.to_json() for c in failed],
                       "summary": "fail" if failed else "pass"},
        }
        _write(_dump(doc), args.output)
    return EXIT_FAILED if failed else EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    tree, twist = load_inputs(args)
    cfg = VerifyConfig(sizes=args.sizes, samples=args.samples, seed=args.seed, tol_rel=args.tol_rel,
                       tol_abs=args.tol_abs, faults=args.faults)
    report = verify_all(tree, twist, cfg)
    if args.json:
        _write(report.dumps(), args.json)
    if args.format == "json" and args.json != "-":
        _write(report.dumps())
    elif args.format == "text" and args.json != "-":
        fails = report.failures()
        _write(f"{report.summary}: {len(report.checks) - len(fails)}/{len(report.checks)} checks passed; "
               f"{report.generators} generators, eigenvalues {', '.join(report.eigenvalues) or '-'}")
        for c in fails:
            _write(f"  FAIL {c['name']}: {c.get('detail') or c.get('witness')}")
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_preset(args: argparse.Namespace) -> int:
    _write(_dump(PRESETS[args.name]), args.output)
    return EXIT_OK


# -- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nfdiag", description="Diagonalise twisted periodic free-group automorphisms "
                                "acting on the free skew-field.")
    sub = p.add_subparsers(dest="command", required=True)

    def tree_cmd(name: str, help_: str, default_format: str = "text", twist: bool = True) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("tree", help="tree JSON file, or - for standard input")
        if twist:
            sp.add_argument("--twist", help="twist JSON file (overrides a twist embedded in the tree document)")
        sp.add_argument("--format", choices=("json", "text"), default=default_format)
        return sp

    sp = tree_cmd("validate", "check a tree description and report every violation")
    sp.set_defaults(func=cmd_validate)
    sp = tree_cmd("phi", "print the letter map of the (twisted) automorphism")
    sp.set_defaults(func=cmd_phi)
    sp = tree_cmd("order", "print the order of the automorphism", twist=False)
    sp.set_defaults(func=cmd_order)
    sp = tree_cmd("lambda", "print lambda and u per vertex, u and v per pair family", twist=False)
    sp.set_defaults(func=cmd_lambda)

    sp = tree_cmd("diagonalize", "emit the diagonalising generators, eigenvalues and inverse map", "json")
    sp.add_argument("-o", "--output", default="-", help="output path (default standard output)")
    sp.add_argument("--inject", dest="faults", type=_parse_faults, default=(), metavar="FAULTS",
                    help=f"comma-separated fault injections ({', '.join(FAULTS)})")
    sp.set_defaults(func=cmd_diagonalize)

    sp = tree_cmd("verify", "run every exact and numeric check", "text")
    sp.add_argument("--sizes", type=_parse_sizes, default=(3, 4, 5), help="matrix sizes, e.g. 3,4,5")
    sp.add_argument("--samples", type=int, default=5, help="samples per size")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--tol-rel", type=float, default=ratexpr.TOL_REL)
    sp.add_argument("--tol-abs", type=float, default=ratexpr.TOL_ABS)
    sp.add_argument("--json", metavar="PATH", help="also write the JSON report here (- for standard output)")
    sp.add_argument("--inject", dest="faults", type=_parse_faults, default=(), metavar="FAULTS",
                    help=f"comma-separated fault injections ({', '.join(FAULTS)})")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("preset", help="print a built-in example tree with its twist")
    sp.add_argument("name", choices=sorted(PRESETS))
    sp.add_argument("-o", "--output", default="-")
    sp.set_defaults(func=cmd_preset)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TreeValidationError as exc:
        print("invalid input:", file=sys.stderr)
        for e in exc.errors:
            print(f"  - {e}", file=sys.stderr)
        return EXIT_INVALID
    except (OrderMismatch, RecursionOracleMismatch) as exc:
        print(f"internal consistency check failed: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except UsageError as exc:
        print(f"nfdiag: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
