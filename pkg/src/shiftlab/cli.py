"""Batch command-line front end.

Subcommands: entropy, spectrum, synthesize, classify, verify.  All
randomness flows from --seed, outputs are written atomically, and repeated
runs with identical inputs produce byte-identical files.  Exit codes:
0 success, 2 invalid input, 3 mixing required but absent, 4 certificate
mismatch, 5 statistical verdict failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import io
from .beta import beta_entropy_estimate, quasi_greedy_normalize
from .classify import evaluate_certificate
from .errors import (CertificateMismatch, NotPrimitive, SchemaError, ShiftlabError)
from .measures import validate_potential
from .shifts import count_periodic, count_words, parse_word, topological_entropy
from .spectrum import check_concavity, spectrum_curve, sup_equals_htop
from .synthesis import GapClass, certify, synthesize_witness

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NOT_PRIMITIVE = 3
EXIT_CERTIFICATE = 4
EXIT_VERDICT = 5

LOG_BASE_NOTE = "# log base: natural (nats)"


def _timestamps(args) -> dict | None:
    if getattr(args, "timestamps", False):
        now = datetime.now(timezone.utc).isoformat()
        return {"completed": now}
    return None


def _maybe_manifest(args, command: str, inputs: dict, outputs: list[str]) -> None:
    path = getattr(args, "manifest", None)
    if path:
        io.write_json(path, io.manifest_doc(command, inputs, outputs, _timestamps(args)))


def cmd_entropy(args) -> int:
    print(LOG_BASE_NOTE)
    outputs: list[str] = []
    if args.beta is not None:
        spec = quasi_greedy_normalize(args.beta, raw=args.raw_digits)
        n = args.n or 22
        est = beta_entropy_estimate(spec, n)
        print(f"beta = {args.beta}  alphabet = {spec.alphabet}")
        print(f"word-count estimate (n={n}): {est:.12f}")
        print(f"log beta:                    {math.log(spec.beta):.12f}")
        inputs = {
            "beta": str(args.beta),
            "raw_digits": bool(args.raw_digits),
            "n": n,
            "digit_stream": {"preperiod": list(spec.preperiod), "period": list(spec.period),
                             "validity_length": min(spec.validity_length, 1 << 30),
                             "is_integer": spec.is_integer},
        }
        _maybe_manifest(args, "entropy", inputs, outputs)
        return EXIT_OK

    s = io.shift_from_doc(io.read_json(args.shift))
    methods = [args.method] if args.method else ["spectral", "words", "periodic"]
    n = args.n or 24
    for method in methods:
        if method == "spectral":
            print(f"spectral: {topological_entropy(s):.12f}")
        elif method == "words":
            est = math.log(count_words(s, n)) / n
            print(f"words (n={n}): {est:.12f}")
        elif method == "periodic":
            cnt = count_periodic(s, n)
            est = math.log(cnt) / n if cnt > 0 else float("-inf")
            print(f"periodic (n={n}): {est:.12f}")
    _maybe_manifest(args, "entropy", {"shift": args.shift, "methods": methods, "n": n}, outputs)
    return EXIT_OK


def cmd_spectrum(args) -> int:
    s = io.shift_from_doc(io.read_json(args.shift))
    phi = io.potential_from_doc(io.read_json(args.potential))
    validate_potential(s, phi)
    from .spectrum import lphi_interval

    iv = lphi_interval(s, phi)
    curve = spectrum_curve(s, phi, args.points)
    lines = ["a,psi,q_star"]
    for a, psi, q in curve.points:
        lines.append(f"{a:.12g},{psi:.12g},{q:.12g}")
    io.atomic_write_text(args.out, "\n".join(lines) + "\n")
    print(LOG_BASE_NOTE)
    print(f"h_top = {curve.h_top:.12f}  L_phi = [{iv.lo:.12g}, {iv.hi:.12g}]")
    print(f"points = {len(curve.points)} concave = {check_concavity(curve)} "
          f"sup_reaches_htop = {sup_equals_htop(curve)}")
    _maybe_manifest(args, "spectrum",
                    {"shift": args.shift, "potential": args.potential,
                     "points": args.points, "h_top": curve.h_top,
                     "L_phi": [iv.lo, iv.hi],
                     "lo_cycle": list(iv.lo_cycle), "hi_cycle": list(iv.hi_cycle)},
                    [args.out])
    return EXIT_OK


def cmd_synthesize(args) -> int:
    s = io.shift_from_doc(io.read_json(args.shift))
    phi = None
    if args.potential:
        phi = io.potential_from_doc(io.read_json(args.potential))
        validate_potential(s, phi)
    prefix = parse_word(args.prefix) if args.prefix else None
    cycle = parse_word(args.cycle) if args.cycle else None
    o = synthesize_witness(s, GapClass(args.gap_class), phi, args.horizon, args.seed,
                           pinned_prefix=prefix, cycle=cycle)
    outputs = io.write_orbit_dir(o, args.out)
    manifest = io.manifest_doc(
        "synthesize",
        {"shift": args.shift, "potential": args.potential, "class": args.gap_class,
         "horizon": args.horizon, "seed": args.seed, "prefix": args.prefix,
         "cycle": args.cycle},
        outputs, _timestamps(args))
    io.write_json(Path(args.out) / "manifest.json", manifest)
    print(f"wrote {args.out}: {', '.join(outputs + ['manifest.json'])}")
    print(f"class = {o.certificate.gap_class.value}  "
          f"inf entropy over K = {o.certificate.inf_entropy_over_K:.6f}")
    return EXIT_OK


def _run_report(orbit_dir: str):
    o = io.read_orbit_dir(orbit_dir)
    report = evaluate_certificate(o.word, o.shift, o.certificate.expected_statistics,
                                  phi=o.certificate.phi)
    return o, report


def cmd_classify(args) -> int:
    o, report = _run_report(args.orbit)
    io.write_json(args.out, io.report_to_doc(report))
    _print_verdicts(report)
    _maybe_manifest(args, "classify", {"orbit": args.orbit}, [args.out])
    return EXIT_OK


def _print_verdicts(report) -> None:
    width = max((len(v["check"]) for v in report.verdicts), default=10)
    print(f"{'verdict':<{width}}  result")
    for v in report.verdicts:
        print(f"{v['check']:<{width}}  {'pass' if v['passed'] else 'FAIL'}")


def cmd_verify(args) -> int:
    o = io.read_orbit_dir(args.orbit)
    try:
        certify(o)
    except CertificateMismatch as e:
        print(f"certificate mismatch: {e}", file=sys.stderr)
        return EXIT_CERTIFICATE
    report = evaluate_certificate(o.word, o.shift, o.certificate.expected_statistics,
                                  phi=o.certificate.phi)
    _print_verdicts(report)
    if not report.all_pass:
        return EXIT_VERDICT
    print("verified")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shiftlab",
        description="Shift spaces, entropy, Birkhoff spectra, witness orbits. "
                    "All logarithms natural.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("entropy", help="entropy of a shift space or beta-shift")
    p.add_argument("--shift", help="shift definition JSON")
    p.add_argument("--beta", help="beta as a decimal literal")
    p.add_argument("--raw-digits", action="store_true",
                   help="keep the literal terminating digit stream (comparison mode)")
    p.add_argument("--method", choices=["spectral", "words", "periodic"])
    p.add_argument("--n", type=int, help="word length for counting estimates")
    p.add_argument("--manifest")
    p.add_argument("--timestamps", action="store_true")
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("spectrum", help="constrained-entropy curve over Birkhoff averages")
    p.add_argument("--shift", required=True)
    p.add_argument("--potential", required=True)
    p.add_argument("--points", type=int, default=33)
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--manifest")
    p.add_argument("--timestamps", action="store_true")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("synthesize", help="build a witness orbit for a gap class")
    p.add_argument("--shift", required=True)
    p.add_argument("--class", dest="gap_class", required=True,
                   choices=[gc.value for gc in GapClass])
    p.add_argument("--potential")
    p.add_argument("--horizon", type=int, default=1 << 20)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--prefix", help="pinned prefix as a digit string")
    p.add_argument("--cycle", help="cycle digits (PERIODIC class)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--timestamps", action="store_true")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("classify", help="recurrence/regularity evidence for an orbit dir")
    p.add_argument("--orbit", required=True)
    p.add_argument("--out", required=True, help="report JSON path")
    p.add_argument("--manifest")
    p.add_argument("--timestamps", action="store_true")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("verify", help="certificate arithmetic + statistical verdicts")
    p.add_argument("--orbit", required=True)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NotPrimitive as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NOT_PRIMITIVE
    except (SchemaError, FileNotFoundError, ValueError, ShiftlabError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
