"""Command-line front end: decompose, certify, delta, curve, replay.

Each verb prints a JSON or CSV artifact produced by the library layer
and exits 0 only when everything it was asked to certify verified.
``--workers`` sizes the certification worker pool (default: machine
parallelism); orchestration itself is single-threaded, so runs with
different pool sizes print byte-identical artifacts apart from timing.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .cases import CASE_NAMES, certify_block, find_delta, load_case
from .certify import Certificate, replay
from .reports import (
    decomposition_summary,
    delta_summary,
    export_curve,
    run_case,
)


def _print_doc(doc: dict) -> None:
    print(json.dumps(doc, sort_keys=True, indent=2))


def _cmd_decompose(args) -> int:
    case = load_case(args.case)
    doc = {"schema": "symcert-decomposition/1", **decomposition_summary(case)}
    _print_doc(doc)
    return 0


def _cmd_certify(args) -> int:
    if args.block is not None:
        case = load_case(args.case)
        depth_kw = {} if args.max_depth is None else {"max_depth": args.max_depth}
        cert = certify_block(case, args.block, workers=args.workers, **depth_kw)
        sys.stdout.write(cert.dumps())
        return 0 if cert.verified else 1
    report = run_case(
        args.case, max_depth=args.max_depth, workers=args.workers, out=args.out
    )
    sys.stdout.write(report.dumps())
    ok = report.equal_masses and all(
        cert.verified for cert in report.certificates.values()
    )
    return 0 if ok else 1


def _cmd_delta(args) -> int:
    case = load_case(args.case)
    result = find_delta(case, digits=args.digits, workers=args.workers)
    doc = {
        "schema": "symcert-delta/1",
        "case": result.case,
        **delta_summary(result, digits=args.digits),
        "certificates": {
            key: cert.to_json() for key, cert in result.certificates.items()
        },
    }
    _print_doc(doc)
    return 0 if all(cert.verified for cert in result.certificates.values()) else 1


def _cmd_curve(args) -> int:
    path = export_curve(args.case, args.samples, args.out)
    print(f"wrote {args.samples} certified samples to {path}")
    return 0


def _replay_units(path: Path) -> list[tuple[str, Certificate]]:
    """Certificates named by one file: a bare certificate or a report."""
    doc = json.loads(path.read_text(encoding="utf-8"))
    if "kind" in doc and "data" in doc:
        return [(str(path), Certificate.from_json(doc))]
    if "certificates" in doc:
        return [
            (f"{path}#{key}", Certificate.from_json(sub))
            for key, sub in sorted(doc["certificates"].items())
        ]
    raise ValueError(f"{path} holds neither a certificate nor a report")


def _cmd_replay(args) -> int:
    failures = 0
    for name in args.files:
        for label, cert in _replay_units(Path(name)):
            try:
                replay(cert)
            except (ValueError, KeyError, ZeroDivisionError) as exc:
                print(f"FAIL {label}: {exc}")
                failures += 1
            else:
                print(f"ok   {label}: {cert.kind} for {cert.target}")
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="symcert",
        description=(
            "Certified block decomposition and exact sign/root-count "
            "certificates for two-shell polyhedral configurations."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def case_arg(p):
        p.add_argument("case", choices=CASE_NAMES, help="which nested-solid model")

    def workers_arg(p):
        p.add_argument(
            "--workers",
            type=int,
            default=os.cpu_count() or 1,
            metavar="N",
            help="certification worker pool size (default: machine parallelism)",
        )

    p = sub.add_parser(
        "decompose",
        help="build one model and print its verified block decomposition",
    )
    case_arg(p)
    p.set_defaults(func=_cmd_decompose)

    p = sub.add_parser(
        "certify",
        help="run the full certification pipeline (or one block) and print the report",
    )
    case_arg(p)
    p.add_argument(
        "--block", metavar="NAME", help="certify a single non-trivial block instead"
    )
    p.add_argument(
        "--max-depth",
        type=int,
        default=None,
        metavar="D",
        help="subdivision depth limit for covering certificates "
        "(default: per-stage defaults)",
    )
    workers_arg(p)
    p.add_argument(
        "--out",
        metavar="DIR",
        help="also write the report and its certificate files to this directory",
    )
    p.set_defaults(func=_cmd_certify)

    p = sub.add_parser(
        "delta", help="isolate the sign change of the shell mass ratio"
    )
    case_arg(p)
    p.add_argument(
        "--digits",
        type=int,
        default=4,
        metavar="K",
        help="decimal places to isolate the crossing to",
    )
    workers_arg(p)
    p.set_defaults(func=_cmd_delta)

    p = sub.add_parser(
        "curve", help="export certified mass-curve samples as CSV"
    )
    case_arg(p)
    p.add_argument(
        "--samples",
        type=int,
        required=True,
        metavar="N",
        help="grid size; rows at t = k/(N+1), k = 1..N",
    )
    p.add_argument("--out", required=True, metavar="FILE", help="CSV destination")
    p.set_defaults(func=_cmd_curve)

    p = sub.add_parser(
        "replay", help="re-derive stored certificates and compare them exactly"
    )
    p.add_argument(
        "files",
        nargs="+",
        metavar="certificate-file",
        help="certificate files, or reports with embedded certificates",
    )
    p.set_defaults(func=_cmd_replay)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except KeyError as exc:
        message = exc.args[0] if exc.args else exc
        print(f"error: {message}", file=sys.stderr)
        return 1
    except (ValueError, OSError, ZeroDivisionError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
