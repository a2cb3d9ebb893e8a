"""Command-line entry points.

Exit codes: 0 success, 2 bad flags or configuration, 3 I/O or parse error,
4 solver error, 5 Gram export too large.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
import time
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import __version__
from .core import ConfigError, DSCMCError, HyperParams, MultiViewDataset
from .datagen import BlobSpec, make_blobs
from .io import (RESULT_SCHEMA, IOFailure, dump_result, load_dataset, load_matrix,
                 read_pgm, read_result, save_matrix, write_dataset, write_pgm)
from .pipeline import PREPROCESSORS, cluster
from .solver import SolverConfig

EXIT_OK, EXIT_FLAGS, EXIT_IO, EXIT_SOLVER, EXIT_TOO_LARGE = 0, 2, 3, 4, 5
GRAM_CAP = 5000
SUMMARY_COLUMNS = ("lambda1", "lambda2", "lambda3", "acc", "nmi", "fscore", "ari")


class _Exit(Exception):
    def __init__(self, code: int, msg: str):
        super().__init__(msg)
        self.code = code


def _err(msg: str) -> None:
    print(f"dscmc: {msg}", file=sys.stderr)


def parse_grid(text: str) -> List[float]:
    """Parse a value list for one lambda.

    Accepted forms: a single number ``"0.1"``, a comma list ``"0.1,1,10"``,
    or a range ``"1e-3..1e3 log7"`` / ``"0..1 lin5"`` (inclusive endpoints).
    """
    text = text.strip()
    try:
        if ".." in text:
            span, _, spacing = text.partition(" ")
            lo, hi = (float(t) for t in span.split(".."))
            spacing = spacing.strip() or "lin2"
            kind, count = spacing[:3], int(spacing[3:])
            if count < 1:
                raise ValueError
            if kind == "log":
                if lo <= 0 or hi <= 0:
                    raise ValueError
                return [float(v) for v in np.logspace(np.log10(lo), np.log10(hi), count)]
            if kind == "lin":
                return [float(v) for v in np.linspace(lo, hi, count)]
            raise ValueError
        return [float(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}") from None


def _mode(text: str) -> str:
    return text.replace("-", "_")


def _add_solver_flags(p: argparse.ArgumentParser, lam_type) -> None:
    p.add_argument("--manifest", required=True, type=Path)
    for name in ("lambda1", "lambda2", "lambda3"):
        p.add_argument(f"--{name}", required=True, type=lam_type)
    p.add_argument("--anchors", type=int, default=None,
                   help="anchor count m (default k, must be <= k)")
    p.add_argument("--max-iter", type=int, default=20)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", type=_mode, default="full",
                   choices=["full", "only_p", "only_w", "frobenius_w"])
    p.add_argument("--paper-hessian", action="store_true",
                   help="Z-step curvature 2(V+l1+l2) instead of the exact 2(V+l1 V+l2)")
    p.add_argument("--restarts", type=int, default=50)
    p.add_argument("--preprocess", choices=PREPROCESSORS, default="zscore")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dscmc", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="cluster one dataset")
    _add_solver_flags(p, float)
    p.add_argument("--out", required=True, type=Path)

    p = sub.add_parser("sweep", help="grid over lambda values")
    _add_solver_flags(p, parse_grid)
    p.add_argument("--out", required=True, type=Path, help="output directory")

    p = sub.add_parser("export-gram", help="write Z^T Z from a result file")
    p.add_argument("--result", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--format", choices=["csv", "pgm"], default=None,
                   help="default: pgm for a .pgm path, csv otherwise")

    p = sub.add_parser("synth", help="generate a Gaussian-blob dataset")
    p.add_argument("--n", type=int, default=300)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--dims", type=lambda s: tuple(int(t) for t in s.split(",")),
                   default=(10, 15, 20))
    p.add_argument("--separation", type=float, default=10.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["mvdm", "csv"], default="mvdm")
    p.add_argument("--out", required=True, type=Path)
    return ap


def _hyper(args, lambdas) -> HyperParams:
    try:
        return HyperParams(lambda1=lambdas[0], lambda2=lambdas[1], lambda3=lambdas[2],
                           m=args.anchors, max_iter=args.max_iter, tol=args.tol,
                           seed=args.seed, mode=args.mode, restarts=args.restarts,
                           paper_hessian=args.paper_hessian)
    except ConfigError as exc:
        raise _Exit(EXIT_FLAGS, str(exc)) from None


def _load(path: Path) -> MultiViewDataset:
    try:
        return load_dataset(path)
    except (OSError, DSCMCError, ValueError) as exc:
        raise _Exit(EXIT_IO, f"cannot load {path}: {exc}") from None


def _hyper_doc(h: HyperParams, preprocessing: str) -> dict:
    return {
        "lambda1": h.lambda1, "lambda2": h.lambda2, "lambda3": h.lambda3,
        "m": h.m, "max_iter": h.max_iter, "tol": h.tol, "seed": h.seed,
        "mode": h.mode, "restarts": h.restarts, "paper_hessian": h.paper_hessian,
        "preprocess": preprocessing,
    }


def run_one(d: MultiViewDataset, h: HyperParams, preprocessing: str) -> dict:
    """Fit and package everything the result document needs."""
    h.anchors(d.k)
    cfg = SolverConfig(hyper=h, parallel_views=True, parallel_columns=True)
    t0 = time.perf_counter()
    try:
        res = cluster(d, cfg=cfg, preprocessing=preprocessing)
    except ConfigError as exc:
        raise _Exit(EXIT_FLAGS, str(exc)) from None
    except (DSCMCError, np.linalg.LinAlgError, FloatingPointError) as exc:
        raise _Exit(EXIT_SOLVER, f"solver failed: {exc}") from None
    total = time.perf_counter() - t0
    trace = res.trace
    return {
        "schema": RESULT_SCHEMA,
        "dataset": {"n": d.n, "k": d.k, "dims": d.dims},
        "hyperparams": _hyper_doc(h, preprocessing),
        "labels": [int(v) for v in res.labels],
        "metrics": res.metrics,
        "initial_objective": trace.initial,
        "trace": [{"iter": r.iter, "total": r.total,
                   "reconstruction": r.reconstruction, "consistency": r.consistency,
                   "z_penalty": r.z_penalty, "w_penalty": r.w_penalty}
                  for r in trace],
        "iterations": len(trace),
        "kmeans_objective": res.kmeans_objective,
        "Z": res.state.Z.tolist(),
        "timing": {"total_s": total, "fit_s": res.timing["fit_s"],
                   "embed_kmeans_s": res.timing["embed_kmeans_s"],
                   "sweep_ms": res.timing["sweep_ms"]},
    }


def _write_verified(path: Path, doc: dict) -> None:
    try:
        dump_result(path, doc)
        back = read_result(path)
    except (OSError, IOFailure) as exc:
        raise _Exit(EXIT_IO, f"cannot write {path}: {exc}") from None
    if back["labels"] != doc["labels"]:
        raise _Exit(EXIT_IO, f"{path}: re-read labels differ from what was written")


def run_fit(args) -> int:
    d = _load(args.manifest)
    h = _hyper(args, (args.lambda1, args.lambda2, args.lambda3))
    try:
        h.anchors(d.k)
    except ConfigError as exc:
        raise _Exit(EXIT_FLAGS, str(exc)) from None
    doc = run_one(d, h, args.preprocess)
    _write_verified(args.out, doc)
    return EXIT_OK


def run_sweep(args) -> int:
    d = _load(args.manifest)
    out: Path = args.out
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise _Exit(EXIT_IO, f"cannot create {out}: {exc}") from None
    grid = [(a, b, c) for a in args.lambda1 for b in args.lambda2 for c in args.lambda3]
    rows, failures = [], 0
    for i, lams in enumerate(grid):
        cell = out / f"cell_{i:04d}.json"
        row = dict(zip(SUMMARY_COLUMNS[:3], lams))
        try:
            h = _hyper(args, lams)
            h.anchors(d.k)
            doc = run_one(d, h, args.preprocess)
            _write_verified(cell, doc)
            row.update(doc["metrics"] or {})
        except (_Exit, ConfigError) as exc:
            failures += 1
            _err(f"cell {i} {lams}: {exc}")
            dump_result(cell, {"schema": RESULT_SCHEMA, "error": str(exc),
                               "lambdas": list(lams)})
        rows.append(row)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SUMMARY_COLUMNS)
    for row in rows:
        writer.writerow(["" if row.get(c) is None else repr(float(row[c]))
                         for c in SUMMARY_COLUMNS])
    summary = out / "summary.csv"
    try:
        summary.write_text(buf.getvalue())
        if summary.read_text() != buf.getvalue():
            raise OSError("summary re-read mismatch")
    except OSError as exc:
        raise _Exit(EXIT_IO, f"cannot write {summary}: {exc}") from None
    return EXIT_SOLVER if failures else EXIT_OK


def run_export_gram(args) -> int:
    try:
        doc = read_result(args.result)
        Z = np.asarray(doc["Z"], dtype=np.float64)
    except (OSError, IOFailure, ValueError) as exc:
        raise _Exit(EXIT_IO, f"cannot read {args.result}: {exc}") from None
    if Z.ndim != 2:
        raise _Exit(EXIT_IO, f"{args.result}: Z is not a matrix")
    n = Z.shape[1]
    if n > GRAM_CAP:
        raise _Exit(EXIT_TOO_LARGE,
                    f"n={n} exceeds the {GRAM_CAP}-sample cap for an n x n Gram "
                    f"export; subsample the columns of Z first")
    fmt = args.format or ("pgm" if args.out.suffix.lower() == ".pgm" else "csv")
    G = Z.T @ Z
    try:
        if fmt == "pgm":
            write_pgm(args.out, G)
            shape = read_pgm(args.out).shape
        else:
            save_matrix(args.out, G, "csv")
            shape = load_matrix(args.out, "csv").shape
    except (OSError, IOFailure) as exc:
        raise _Exit(EXIT_IO, f"cannot write {args.out}: {exc}") from None
    if shape != (n, n):
        raise _Exit(EXIT_IO, f"{args.out}: re-read shape {shape} != {(n, n)}")
    return EXIT_OK


def run_synth(args) -> int:
    try:
        spec = BlobSpec(n=args.n, k=args.k, dims=tuple(args.dims),
                        separation=args.separation, sigma=args.sigma, seed=args.seed)
    except ConfigError as exc:
        raise _Exit(EXIT_FLAGS, str(exc)) from None
    d = make_blobs(spec)
    try:
        manifest = write_dataset(args.out, d, args.format)
        back = load_dataset(manifest)
    except (OSError, DSCMCError) as exc:
        raise _Exit(EXIT_IO, f"cannot write dataset to {args.out}: {exc}") from None
    same = all(np.array_equal(a, b) for a, b in zip(d.views, back.views))
    if not same or not np.array_equal(back.labels, d.labels):
        raise _Exit(EXIT_IO, f"{manifest}: re-read data differs from what was written")
    return EXIT_OK


COMMANDS = {"fit": run_fit, "sweep": run_sweep, "export-gram": run_export_gram,
            "synth": run_synth}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except _Exit as exc:
        _err(str(exc))
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
