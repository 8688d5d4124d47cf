"""Command-line surface tying the pipeline together.

Subcommands:

    rsm         build an RSM file from a representation file
    embed       embed an RSM file into a row-stochastic matrix file
    similarity  score two RSM files (or two comma-separated lists of
                representation files for the multi-layer measures)
    evaluate    run a manifest-driven protocol and write a JSON report
    selftest    run the random-instance invariant battery

Exit codes: 0 success, 1 validation/format errors, 2 degenerate-input
signals.  Errors are written to stderr as single-line records of the form
``error.kind=<kind> detail=<message>``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DegenerateInputError, DiffsimError, ValidationError
from .kernels import RSM, build_rsm
from .markov import RepresentationSet, markov_embed
from . import measures
from .evaluation import run_grs_bench4, run_resi_test
from .manifest import load_manifest, load_models
from .matrixio import read_array, read_matrix, write_matrix
from .selftest import run_selftest

_SINGLE_MEASURES = {
    "cka": lambda a, b, t: measures.cka(a, b),
    "distcorr": lambda a, b, t: measures.distcorr(a, b),
    "ms-cka": lambda a, b, t: measures.ms_cka(a, b, t),
    "ms-distcorr": lambda a, b, t: measures.ms_distcorr(a, b, t),
    "blended-ms-distcorr": lambda a, b, t: measures.blended_ms_distcorr(a, b),
}
_AD_MEASURES = ("ad-cka", "ad-distcorr")


class _Parser(argparse.ArgumentParser):
    # argparse would sys.exit(2) on bad usage; route through our error taxonomy
    def error(self, message: str):
        raise ValidationError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="diffsim", description=__doc__, add_help=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p_rsm = sub.add_parser("rsm", help="build an RSM from a representation matrix file")
    p_rsm.add_argument("--kernel", required=True, choices=["linear", "rbf", "distance"])
    p_rsm.add_argument("--sigma", type=float, default=None)
    p_rsm.add_argument("--input", required=True)
    p_rsm.add_argument("--output", required=True)

    p_embed = sub.add_parser("embed", help="embed an RSM file into a Markov matrix file")
    p_embed.add_argument("--input", required=True)
    p_embed.add_argument("--output", required=True)

    p_sim = sub.add_parser("similarity", help="print the similarity of two inputs")
    p_sim.add_argument(
        "--measure", required=True, choices=sorted(_SINGLE_MEASURES) + list(_AD_MEASURES)
    )
    p_sim.add_argument("--t", type=int, default=2, help="diffusion scale for ms-* measures")
    p_sim.add_argument("--kernel", default=None, choices=["linear", "rbf", "distance"],
                       help="kernel for ad-* measures (default: linear for ad-cka, "
                            "distance for ad-distcorr)")
    p_sim.add_argument("--sigma", type=float, default=None)
    p_sim.add_argument("--a", required=True, help="RSM file, or comma-separated "
                                                  "representation files for ad-* measures")
    p_sim.add_argument("--b", required=True)

    p_eval = sub.add_parser("evaluate", help="run a manifest-driven evaluation protocol")
    p_eval.add_argument("--manifest", required=True)
    p_eval.add_argument("--report", required=True)

    sub.add_parser("selftest", help="run the invariant battery on random instances")
    return parser


def _load_rsm(path: str) -> RSM:
    data = read_array(path)
    return RSM(data, kernel_id=None)


def _cmd_rsm(args) -> int:
    rep = read_matrix(args.input)
    s = build_rsm(rep, args.kernel, sigma=args.sigma)
    write_matrix(s.data, args.output)
    return 0


def _cmd_embed(args) -> int:
    s = _load_rsm(args.input)
    p = markov_embed(s)
    write_matrix(p.data, args.output)
    return 0


def _rep_set(spec: str) -> RepresentationSet:
    paths = [p for p in spec.split(",") if p]
    if not paths:
        raise ValidationError("empty representation file list")
    return RepresentationSet(tuple(read_matrix(p) for p in paths))


def _cmd_similarity(args) -> int:
    if args.measure in _AD_MEASURES:
        sa = _rep_set(args.a)
        sb = _rep_set(args.b)
        if args.measure == "ad-cka":
            score = measures.ad_cka(sa, sb, kernel=args.kernel or "linear", sigma=args.sigma)
        else:
            score = measures.ad_distcorr(sa, sb, kernel=args.kernel or "distance", sigma=args.sigma)
    else:
        if args.t < 1:
            raise ValidationError(f"--t must be >= 1, got {args.t}")
        score = _SINGLE_MEASURES[args.measure](_load_rsm(args.a), _load_rsm(args.b), args.t)
    print(f"{score.value:.12f}")
    return 0


def _write_report(report_dict: dict, path: Path) -> None:
    text = json.dumps(report_dict, sort_keys=True, indent=2) + "\n"
    fd, tmp_name = tempfile.mkstemp(dir=path.parent or Path("."), suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def _cmd_evaluate(args) -> int:
    manifest = load_manifest(args.manifest)
    models = load_models(manifest)
    if manifest.protocol_id == "resi":
        report = run_resi_test(models, manifest.measure, manifest.target)
    else:
        report = run_grs_bench4(models, manifest.measure)
    doc = report.to_dict()
    doc["run_metadata"] = {"tool": "diffsim", "report_format": 1}
    _write_report(doc, Path(args.report))
    return 0


def cli_dispatch(argv: Sequence[str] | None = None) -> int:
    """Parse argv, run the selected subcommand, and map errors to exit codes."""
    try:
        args = _build_parser().parse_args(argv)
        if args.command == "rsm":
            return _cmd_rsm(args)
        if args.command == "embed":
            return _cmd_embed(args)
        if args.command == "similarity":
            return _cmd_similarity(args)
        if args.command == "evaluate":
            return _cmd_evaluate(args)
        if args.command == "selftest":
            return 0 if run_selftest() else 1
        raise ValidationError(f"unknown command {args.command!r}")
    except DegenerateInputError as exc:
        _emit_error(exc.kind, str(exc))
        return 2
    except DiffsimError as exc:
        _emit_error(exc.kind, str(exc))
        return 1
    except FileNotFoundError as exc:
        _emit_error("io", f"file not found: {exc.filename}")
        return 1
    except OSError as exc:
        _emit_error("io", str(exc))
        return 1


def _emit_error(kind: str, detail: str) -> None:
    flat = " ".join(str(detail).split())
    print(f"error.kind={kind} detail={flat}", file=sys.stderr)


def main() -> None:
    sys.exit(cli_dispatch())


if __name__ == "__main__":
    main()
