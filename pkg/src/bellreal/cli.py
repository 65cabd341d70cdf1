"""Command-line front end.

Exit codes: 0 ok/feasible, 1 invalid square, 2 usage or parse error,
3 infeasible or CHSH violation, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import corpus
from .chsh import CLASSICAL_BOUND, ChshAssignment, chsh_value, max_chsh, term_expectations
from .diagram import CORNERS, validate_bell_square
from .finprob import EPS, errors
from .localreal import LP_TOL, find_local_realization, verify_certificate
from .quantum import EPR_DIRECTIONS, build_quantum_bell_square, epr_state, maximally_mixed
from .serialize import (
    SquareFileError,
    assignment_to_dict,
    dumps_square,
    load_square,
    save_square,
)
from .simplex import NumericalFailure

EXIT_OK, EXIT_INVALID, EXIT_USAGE, EXIT_VIOLATION, EXIT_NUMERICAL = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


def _load(path: str):
    try:
        return load_square(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except SquareFileError as exc:
        raise UsageError(f"{path}: {exc}") from exc


def _emit(args, report: dict, lines: Sequence[str]) -> None:
    if args.json:
        print(json.dumps(report, indent=2))
    else:
        for line in lines:
            print(line)


def _violation_dicts(vs) -> list[dict]:
    return [{"kind": v.kind, "message": v.message, "where": _jsonable(v.where),
             "severity": v.severity} for v in vs]


def _jsonable(x):
    if isinstance(x, (tuple, list)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    return x


def _validate(bs, tol: float) -> tuple[bool, list]:
    vs = validate_bell_square(bs, tol)
    return not errors(vs), vs


def cmd_check(args) -> int:
    bs, _ = _load(args.path)
    valid, vs = _validate(bs, args.tol)
    lines = ["valid Bell square" if valid else "INVALID Bell square"]
    lines += [f"  {v}" for v in vs]
    _emit(args, {"valid": valid, "violations": _violation_dicts(vs)}, lines)
    return EXIT_OK if valid else EXIT_INVALID


def _realization_dict(result, emit_certificate: bool) -> dict:
    out = {"status": result.status, "phase_one_objective": result.phase_one_objective}
    if result.feasible:
        out["joint"] = {
            "axes": {c: [str(l) for l in a.labels] for c, a in zip(CORNERS, result.joint.axes)},
            "table": result.joint.table.ravel().tolist(),
            "shape": list(result.joint.table.shape),
        }
    else:
        c = result.certificate
        out["certificate"] = {"bound": c.bound, "observed": c.observed, "gap": c.gap}
        if emit_certificate:
            out["certificate"]["weights"] = {p: w.tolist() for p, w in c.weights.items()}
    return out


def cmd_realize(args) -> int:
    bs, _ = _load(args.path)
    valid, vs = _validate(bs, EPS)
    if not valid:
        _emit(args, {"valid": False, "violations": _violation_dicts(vs)},
              ["INVALID Bell square"] + [f"  {v}" for v in vs])
        return EXIT_INVALID
    try:
        result = find_local_realization(bs, tol=args.tol)
    except NumericalFailure as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_NUMERICAL
    report = {"valid": True, "violations": _violation_dicts(vs),
              "realization": _realization_dict(result, args.emit_certificate or args.json)}
    if result.feasible:
        lines = ["feasible: local realization found on Q x R x S x T"]
        for idx in np.ndindex(*result.joint.table.shape):
            p = float(result.joint.table[idx])
            if p > 0:
                labels = ", ".join(str(a.labels[i]) for a, i in zip(result.joint.axes, idx))
                lines.append(f"  ({labels}): {p!r}")
    else:
        c = result.certificate
        ok = not verify_certificate(bs, c)
        lines = [f"infeasible: Bell inequality with local bound {c.bound!r}, observed {c.observed!r}",
                 f"  certificate verified: {ok}"]
        if args.emit_certificate:
            for pair, w in c.weights.items():
                lines.append(f"  {pair}: {w.tolist()}")
    _emit(args, report, lines)
    return EXIT_OK if result.feasible else EXIT_VIOLATION


def cmd_chsh(args) -> int:
    bs, rvs = _load(args.path)
    if rvs is None and not args.maximize:
        raise UsageError(f"{args.path} has no 'rvs'; pass --maximize to search over sign assignments")
    valid, vs = _validate(bs, EPS)
    if not valid:
        _emit(args, {"valid": False, "violations": _violation_dicts(vs)},
              ["INVALID Bell square"] + [f"  {v}" for v in vs])
        return EXIT_INVALID
    report: dict = {"valid": True, "violations": _violation_dicts(vs), "chsh": {}}
    lines = []
    violation = False
    if rvs is not None:
        try:
            a = ChshAssignment.from_signs(bs, rvs, args.minus)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        value = chsh_value(bs, a)
        terms = term_expectations(bs, a)
        report["chsh"].update(value=value, terms=terms, assignment=assignment_to_dict(a))
        lines.append(f"CHSH value: {value!r}")
        lines += [f"  E({p}) = {v!r}" for p, v in terms.items()]
        violation |= value > CLASSICAL_BOUND + args.tol
    if args.maximize:
        best, a = max_chsh(bs)
        report["chsh"].update(max=best, max_assignment=assignment_to_dict(a))
        if rvs is None:
            report["chsh"]["assignment"] = assignment_to_dict(a)
        lines.append(f"max CHSH value: {best!r} (minus on {a.minus}, signs {a.signs()})")
        violation |= best > CLASSICAL_BOUND + args.tol
    report["chsh"]["violation"] = violation
    lines.append("violates the local bound 2" if violation else "within the local bound 2")
    _emit(args, report, lines)
    return EXIT_VIOLATION if violation else EXIT_OK


def _direction(text: str) -> tuple[float, float, float]:
    try:
        parts = [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated vector: {text!r}") from exc
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected three components, got {text!r}")
    return tuple(parts)  # type: ignore[return-value]


def _state(name: str) -> np.ndarray:
    if name == "epr":
        return epr_state()
    if name == "maxmixed":
        return maximally_mixed(4)
    try:
        doc = json.loads(Path(name).read_text(encoding="utf-8"))
        if isinstance(doc, dict):
            rho = np.array(doc["real"], dtype=float) + 1j * np.array(doc.get("imag", 0.0), dtype=float)
        else:
            rho = np.array(doc, dtype=complex)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot load state {name!r}: {exc}") from exc
    return rho


def quantum_square(state: str, directions: dict):
    try:
        return build_quantum_bell_square(_state(state), *(directions[c] for c in CORNERS))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_quantum(args) -> int:
    dirs = {c: getattr(args, f"u{c}") for c in CORNERS}
    bs = quantum_square(args.state, dirs)
    rvs = corpus.ALTERNATING_RVS
    if args.out:
        save_square(args.out, bs, rvs)
    else:
        print(dumps_square(bs, rvs))
    return EXIT_OK


def cmd_examples(args) -> int:
    out = Path(args.directory)
    out.mkdir(parents=True, exist_ok=True)
    for name, (build, rvs) in corpus.EXAMPLES.items():
        if name == "quantum_epr.json":
            ns = argparse.Namespace(state="epr", out=str(out / name),
                                    **{f"u{c}": EPR_DIRECTIONS[c] for c in CORNERS})
            cmd_quantum(ns)
        else:
            save_square(out / name, build(), rvs)
        print(out / name)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bellreal", description="Local realism checks for two-party Bell squares.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, tol):
        p.add_argument("path", help="Bell square JSON file")
        p.add_argument("--tol", type=float, default=tol)
        p.add_argument("--json", action="store_true", help="print a machine-readable report")

    p = sub.add_parser("check", help="validate a Bell square file")
    common(p, EPS)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("realize", help="search for a local hidden-variable model")
    common(p, LP_TOL)
    p.add_argument("--emit-certificate", action="store_true",
                   help="print the full inequality weights when infeasible")
    p.set_defaults(func=cmd_realize)

    p = sub.add_parser("chsh", help="evaluate the CHSH expression")
    common(p, EPS)
    p.add_argument("--maximize", action="store_true", help="maximize over all sign assignments")
    p.add_argument("--minus", default="QT", choices=["QS", "RS", "RT", "QT"],
                   help="term carrying the minus sign for the stored rvs")
    p.set_defaults(func=cmd_chsh)

    p = sub.add_parser("quantum", help="generate a Bell square from a two-qubit state")
    p.add_argument("--state", default="epr", help="epr, maxmixed, or a JSON file with a 4x4 matrix")
    for c in CORNERS:
        p.add_argument(f"--u{c}", type=_direction, default=EPR_DIRECTIONS[c], metavar="X,Y,Z",
                       help=f"measurement direction for {c}")
    p.add_argument("--out", help="output file (default: standard output)")
    p.set_defaults(func=cmd_quantum)

    p = sub.add_parser("examples", help="write the reference example squares")
    p.add_argument("directory")
    p.set_defaults(func=cmd_examples)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"bellreal: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
