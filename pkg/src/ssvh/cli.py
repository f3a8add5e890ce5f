"""Command line interface: ``ssvh {vh,mme,topics,simulate,validate}``.

Exit codes: 0 success, 2 input error, 3 numerical failure.  Warnings go to
standard error; the log level is taken from ``SSVH_LOG``
(error, warn, info, debug).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import SvsConfig, sketched_vertex_search, successive_projection
from .config import DEFAULT_TOLERANCES, Tolerances
from .diagnostics import validate_inputs
from .engine import ssvh
from .errors import InputError, NumericalError
from .io import (
    read_edge_list,
    read_indexed_rows,
    read_matrix,
    read_triplets,
    write_indexed_rows,
    write_matrix,
)
from .network import estimate_memberships
from .simlab import ExperimentConfig, run_experiment, write_records_csv, write_summary_csv
from .topics import estimate_topics, word_frequencies

log = logging.getLogger("ssvh")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3
_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "warning": logging.WARNING,
           "info": logging.INFO, "debug": logging.DEBUG}


def _require(args, *flags):
    for flag in flags:
        path = getattr(args, flag.lstrip("-").replace("-", "_"))
        if path is None:
            raise InputError(f"{flag} is required for '{args.command}'")
        if not Path(path).is_file():
            raise InputError(f"{flag}: file not found: {path}")


def _tolerances(args) -> Tolerances:
    return Tolerances.from_json(args.tol_file) if args.tol_file else DEFAULT_TOLERANCES


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _dump_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _warn_all(notes) -> None:
    for note in notes:
        log.warning(note)


def cmd_vh(args) -> int:
    tol = _tolerances(args)
    _require(args, "--x")
    X = read_matrix(args.x)
    out = _outdir(args)
    if args.method == "ssvh":
        _require(args, "--labels")
        idx, PiS = read_indexed_rows(args.labels, "labels")
        if idx.max() >= X.shape[0]:
            raise InputError(f"--labels: point index {idx.max() + 1} exceeds the {X.shape[0]} rows of --x")
        if np.unique(idx).size != idx.size:
            raise InputError("--labels: duplicate point index")
        fit = ssvh(args.k, X[idx], PiS, args.alpha, args.seed, tol=tol)
        _warn_all(fit.warnings)
        result = {"method": "ssvh", "alpha_method": args.alpha, **fit.to_dict()}
        V = fit.V_hat
    else:
        if args.labels:
            log.info("--labels ignored by unsupervised method %s", args.method)
        if args.method == "sp":
            V = successive_projection(X, args.k, tol)
        else:
            V = sketched_vertex_search(X, args.k, SvsConfig(args.svs_l or 10 * args.k), args.seed, tol)
        result = {"method": args.method, "V_hat": V.tolist()}
    write_matrix(out / "vertices.csv", V)
    _dump_json(out / "fit.json", result)
    return EXIT_OK


def cmd_mme(args) -> int:
    tol = _tolerances(args)
    _require(args, "--edges", "--labels")
    A = read_edge_list(args.edges, args.n)
    S, PiS = read_indexed_rows(args.labels, "labels")
    out = _outdir(args)
    res = estimate_memberships(A, PiS, S, args.k, None, args.alpha, args.seed, tol)
    _warn_all(res.warnings)
    nodes = np.concatenate([res.nodes, res.missing])
    rows = np.vstack([res.pi_hat, np.full((res.missing.size, args.k), np.nan)])
    order = np.argsort(nodes, kind="stable")
    write_indexed_rows(out / "memberships.csv", nodes[order], rows[order], header="node", prefix="pi")
    _dump_json(out / "fit.json", {
        "method": "ssvh",
        "alpha_method": args.alpha,
        **res.fit.to_dict(),
        "missing_nodes": (res.missing + 1).tolist(),
        "fallback_nodes": (res.fallback + 1).tolist(),
        "warnings": list(res.warnings),
    })
    return EXIT_OK


def cmd_topics(args) -> int:
    tol = _tolerances(args)
    _require(args, "--counts", "--loadings")
    Y = read_triplets(args.counts)
    S, AstarS = read_indexed_rows(args.loadings, "loadings")
    p = max(Y.shape[0], int(S.max()) + 1, args.p or 0)
    if p > Y.shape[0]:
        Y.resize((p, Y.shape[1]))
    D = word_frequencies(Y)
    out = _outdir(args)
    res = estimate_topics(D, AstarS, S, args.k, None, args.alpha, args.seed, tol)
    _warn_all(res.warnings)
    write_matrix(out / "topics.csv", res.A_hat)
    write_matrix(out / "topics_raw.csv", res.A_hat_raw)
    _dump_json(out / "fit.json", {
        "method": "ssvh",
        "alpha_method": args.alpha,
        **res.fit.to_dict(),
        "b_scale": res.b_scale,
        "column_mass": res.column_mass.tolist(),
        "excluded_words": (res.excluded + 1).tolist(),
        "warnings": list(res.warnings),
    })
    return EXIT_OK


def cmd_simulate(args) -> int:
    tol = _tolerances(args)
    _require(args, "--config")
    config = ExperimentConfig.from_json(args.config)
    out = _outdir(args)
    threads = args.threads or os.cpu_count() or 1
    records, summary = run_experiment(config, threads, tol)
    failed = sum(row["n_failed"] for row in summary)
    if failed:
        log.warning("%d repetition(s) failed; see the warnings column of records.csv", failed)
    write_records_csv(records, config, out / "records.csv")
    write_summary_csv(summary, config, out / "summary.csv")
    return EXIT_OK


def cmd_validate(args) -> int:
    tol = _tolerances(args)
    _require(args, "--labels")
    idx, PiS = read_indexed_rows(args.labels, "labels")
    XS = None
    if args.x:
        _require(args, "--x")
        X = read_matrix(args.x)
        if idx.max() >= X.shape[0]:
            raise InputError(f"--labels: point index {idx.max() + 1} exceeds the {X.shape[0]} rows of --x")
        XS = X[idx]
    checks = validate_inputs(PiS, XS, args.k, args.alpha, args.seed, tol)
    report = {"passed": all(c.passed for c in checks), "checks": [c.to_dict() for c in checks]}
    text = json.dumps(report, indent=2, sort_keys=True)
    print(text)
    if args.out:
        _dump_json(_outdir(args) / "validate.json", report)
    for c in checks:
        if not c.passed:
            log.warning("check %s failed: %s", c.name, c.detail)
    return EXIT_OK if report["passed"] else EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--k", type=int, help="number of vertices / communities / topics")
    common.add_argument("--alpha", choices=["variance", "projection"], default="variance",
                        help="alpha selector (default: variance)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=".", help="output directory (default: .)")
    common.add_argument("--tol-file", help="JSON file overriding numerical tolerances")

    p = argparse.ArgumentParser(prog="ssvh", description="Semi-supervised vertex hunting.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    vh = sub.add_parser("vh", parents=[common], help="estimate simplex vertices")
    vh.add_argument("--x", help="points, CSV or JSON matrix (n x d)")
    vh.add_argument("--labels", help="labels CSV: index,pi_1,...,pi_K (1-based)")
    vh.add_argument("--method", choices=["ssvh", "sp", "svs"], default="ssvh")
    vh.add_argument("--svs-l", type=int, help="number of k-means centers for svs (default 10K)")

    mme = sub.add_parser("mme", parents=[common], help="network mixed membership estimation")
    mme.add_argument("--edges", help="edge list 'i j [w]', 1-based")
    mme.add_argument("--labels", help="labels CSV: node,pi_1,...,pi_K")
    mme.add_argument("--n", type=int, help="number of nodes (default: largest id)")

    tm = sub.add_parser("topics", parents=[common], help="topic matrix estimation")
    tm.add_argument("--counts", help="corpus triplets CSV: word,doc,count (1-based)")
    tm.add_argument("--loadings", help="loadings CSV: word,a_1,...,a_K")
    tm.add_argument("--p", type=int, help="vocabulary size (default: largest word id)")

    sim = sub.add_parser("simulate", parents=[common], help="run a simulation experiment")
    sim.add_argument("config_path", nargs="?", help="experiment config JSON")
    sim.add_argument("--config", help="experiment config JSON")
    sim.add_argument("--threads", type=int, help="worker threads (default: all cores)")

    val = sub.add_parser("validate", parents=[common], help="check identifiability proxies")
    val.add_argument("--labels", help="labels CSV")
    val.add_argument("--x", help="points matrix; enables the eigengap check")
    return p


_NEEDS_K = {"vh", "mme", "topics"}


def main(argv=None) -> int:
    level = os.environ.get("SSVH_LOG", "warn").lower()
    logging.basicConfig(level=_LEVELS.get(level, logging.WARNING), stream=sys.stderr,
                        format="ssvh: %(levelname)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "simulate" and args.config is None:
        args.config = args.config_path
    if args.command in _NEEDS_K and (args.k is None or args.k < 1):
        parser.error(f"--k (a positive integer) is required for '{args.command}'")
    handler = {"vh": cmd_vh, "mme": cmd_mme, "topics": cmd_topics,
               "simulate": cmd_simulate, "validate": cmd_validate}[args.command]
    try:
        return handler(args)
    except InputError as exc:
        print(f"ssvh: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"ssvh: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"ssvh: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
