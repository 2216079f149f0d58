"""Command-line surface: band dumps, butterfly datasets, tree exports,
gap-certification reports and the invariant verification suites.

Exit codes: 0 success (for ``gaps``: all labels certified), 1 not all
certified / verification failure, 2 invalid input, 3 numeric failure,
4 tree invariant failure.  Output files are written atomically.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from . import verify as verify_mod
from .bandtree import TreeError, build_tree, tree_dot, tree_json
from .contfrac import ContinuedFraction, PrecisionBudget, convergents, rational_grid
from .gaplabels import (
    CertificationError,
    certificate_json,
    certify_gap,
    negative_coupling_transfer,
)
from .spectrum import MAX_Q_DEFAULT, SpectrumError, bands_cached, bands_csv, compute_bands
from .svgplot import ButterflyRow, render_butterfly_svg

__all__ = ["main", "RunConfig", "UsageError"]


class UsageError(ValueError):
    """Inconsistent or malformed run configuration (exit code 2)."""


@dataclass(frozen=True)
class RunConfig:
    command: str
    cf: ContinuedFraction | None
    pq: tuple[int, int] | None
    V: float
    depth: int
    q_max: int
    n_range: tuple[int, int] | None
    budget: PrecisionBudget
    out: str | None
    fmt: str
    suite: str | None
    highlight_cf: ContinuedFraction | None
    threads: int


def _worker_count() -> int:
    env = os.environ.get("STURMIAN_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise UsageError(f"STURMIAN_THREADS={env!r} is not an integer") from exc
    return min(8, os.cpu_count() or 1)


def _atomic_write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".sturmian-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parse_pq(text: str) -> tuple[int, int]:
    try:
        p_text, q_text = text.split("/")
        p, q = int(p_text), int(q_text)
    except ValueError as exc:
        raise UsageError(f"--pq wants P/Q, got {text!r}") from exc
    return p, q


def _parse_n_range(text: str) -> tuple[int, int]:
    try:
        a_text, b_text = text.split("..")
        a, b = int(a_text), int(b_text)
    except ValueError as exc:
        raise UsageError(f"--n-range wants A..B, got {text!r}") from exc
    if a > b:
        raise UsageError(f"--n-range {text!r} is empty")
    return a, b


def _parse_cf(text: str) -> ContinuedFraction:
    try:
        return ContinuedFraction.parse(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _config(args: argparse.Namespace) -> RunConfig:
    cf = _parse_cf(args.cf) if getattr(args, "cf", None) else None
    pq = _parse_pq(args.pq) if getattr(args, "pq", None) else None
    n_range = _parse_n_range(args.n_range) if getattr(args, "n_range", None) else None
    highlight = _parse_cf(args.highlight_cf) if getattr(args, "highlight_cf", None) else None
    try:
        budget = PrecisionBudget(bits=args.prec, abs_tol=args.tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return RunConfig(
        command=args.command,
        cf=cf,
        pq=pq,
        V=args.V,
        depth=getattr(args, "depth", 10),
        q_max=getattr(args, "qmax", 50),
        n_range=n_range,
        budget=budget,
        out=args.out,
        fmt=getattr(args, "format", "csv"),
        suite=getattr(args, "suite", None),
        highlight_cf=highlight,
        threads=_worker_count(),
    )


# -- commands -----------------------------------------------------------------

def cmd_bands(cfg: RunConfig) -> int:
    if cfg.fmt != "csv":
        raise UsageError("bands only writes csv")
    if cfg.pq is not None:
        p, q = cfg.pq
        spec = compute_bands(p, q, cfg.V, cfg.budget)
    elif cfg.cf is not None:
        cs = convergents(cfg.cf, cfg.depth)
        spec = compute_bands(cs[-1].p, cs[-1].q, cfg.V, cfg.budget,
                             chain=cfg.cf.head(cfg.depth), level=cfg.depth)
    else:
        raise UsageError("bands needs --pq or --cf with --depth")
    _atomic_write(cfg.out, bands_csv(spec))
    return 0


def _chain_rows(cfg: RunConfig) -> list[ButterflyRow]:
    """Typed band rows for the highlighted convergent chain (q_k <= q_max)."""
    cf = cfg.highlight_cf
    depth = 0
    while True:
        nxt = convergents(cf, depth + 1)[-1]
        if nxt.q > cfg.q_max:
            break
        depth += 1
        if cf.length is not None and depth >= cf.length:
            break
    depth = max(depth, 2)
    tree = build_tree(cf, cfg.V, depth, cfg.budget)
    rows = []
    for k in range(depth + 1):
        conv = convergents(cf, k)[-1]
        for idx, node_id in enumerate(tree.levels[k]):
            node = tree.nodes[node_id]
            rows.append(ButterflyRow(p=conv.p, q=conv.q, index=idx,
                                     lower=node.band.lower, upper=node.band.upper,
                                     band_type=node.band_type))
    return rows


def cmd_butterfly(cfg: RunConfig) -> int:
    if cfg.fmt not in ("csv", "svg"):
        raise UsageError("butterfly writes csv or svg")
    fractions = rational_grid(cfg.q_max)

    def one(frac: Fraction) -> list[ButterflyRow]:
        spec = bands_cached(frac.numerator, frac.denominator, cfg.V, cfg.budget)
        return [ButterflyRow(p=spec.p, q=spec.q, index=b.index,
                             lower=b.lower, upper=b.upper) for b in spec.bands]

    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        chunks = list(pool.map(one, fractions))
    rows = [row for chunk in chunks for row in chunk]
    rows.sort(key=lambda r: (r.q, r.p, r.index))

    if cfg.fmt == "csv":
        lines = ["p,q,band_index,lower,upper"]
        lines += [f"{r.p},{r.q},{r.index},{r.lower!r},{r.upper!r}" for r in rows]
        _atomic_write(cfg.out, "\n".join(lines) + "\n")
        return 0
    chain_rows = _chain_rows(cfg) if cfg.highlight_cf is not None else []
    _atomic_write(cfg.out, render_butterfly_svg(rows, chain_rows, cfg.V, cfg.q_max))
    return 0


def cmd_tree(cfg: RunConfig) -> int:
    if cfg.cf is None:
        raise UsageError("tree needs --cf")
    if cfg.fmt not in ("json", "dot"):
        raise UsageError("tree writes json or dot")
    if cfg.depth < 2:
        raise UsageError("tree depth must be >= 2")
    tree = build_tree(cfg.cf, cfg.V, cfg.depth, cfg.budget)
    _atomic_write(cfg.out, tree_json(tree) if cfg.fmt == "json" else tree_dot(tree))
    return 0


def cmd_gaps(cfg: RunConfig) -> int:
    if cfg.cf is None or cfg.n_range is None:
        raise UsageError("gaps needs --cf and --n-range")
    if cfg.V == 0:
        raise UsageError("gaps needs a nonzero coupling")
    ns = [n for n in range(cfg.n_range[0], cfg.n_range[1] + 1) if n != 0]
    v_pos = abs(cfg.V)
    mirror = cfg.V < 0

    def one(n: int):
        cert = certify_gap(cfg.cf, v_pos, n if not mirror else -n, cfg.depth, cfg.budget)
        return negative_coupling_transfer(cert, cfg.budget) if mirror else cert

    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        certs = list(pool.map(one, ns))
    certs.sort(key=lambda c: c.n)
    summary = {"certified": 0, "closed-at-depth": 0, "undecided": 0}
    for cert in certs:
        summary[cert.status] += 1
    doc = {
        "cf": str(cfg.cf),
        "V": cfg.V,
        "depth": cfg.depth,
        "summary": summary,
        "certificates": [certificate_json(c) for c in certs],
    }
    _atomic_write(cfg.out, json.dumps(doc, indent=1) + "\n")
    return 0 if summary["certified"] == len(certs) else 1


def cmd_verify(cfg: RunConfig) -> int:
    try:
        results = verify_mod.run_suite(cfg.suite, cfg.budget)
    except KeyError:
        raise UsageError(f"unknown suite {cfg.suite!r}; pick from contfrac, spectrum, tree, labels, all")
    doc = {
        "suite": cfg.suite,
        "bits": cfg.budget.bits,
        "abs_tol": cfg.budget.abs_tol,
        "checks": [{"name": r.name, "ok": r.ok, "detail": r.detail} for r in results],
        "ok": all(r.ok for r in results),
    }
    _atomic_write(cfg.out, json.dumps(doc, indent=1) + "\n")
    if not doc["ok"]:
        first = next(r for r in results if not r.ok)
        print(f"FAILED: {first.name}: {first.detail}", file=sys.stderr)
        return 1
    return 0


# -- argument parsing ---------------------------------------------------------

def _add_shared(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--cf", help="continued fraction, e.g. 0,1,2,(4,3)")
    sub.add_argument("--pq", help="reduced rational frequency P/Q")
    sub.add_argument("--V", type=float, default=2.0, help="coupling constant (default 2)")
    sub.add_argument("--depth", type=int, default=10, help="chain depth (default 10)")
    sub.add_argument("--qmax", type=int, default=50, help="max denominator (default 50)")
    sub.add_argument("--n-range", dest="n_range", help="gap label range A..B (0 skipped)")
    sub.add_argument("--prec", type=int, default=53, help="mantissa bits (default 53)")
    sub.add_argument("--tol", type=float, default=1e-10, help="absolute tolerance (default 1e-10)")
    sub.add_argument("--format", default=None, help="csv | json | dot | svg")
    sub.add_argument("--out", default=None, help="output path (default stdout)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sturmian",
        description="Spectra, band trees and gap-label certificates for Sturmian Hamiltonians.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("bands", help="band CSV for one approximant")
    _add_shared(p)
    p = sub.add_parser("butterfly", help="all-rational band dataset (csv or svg)")
    _add_shared(p)
    p.add_argument("--highlight-cf", dest="highlight_cf",
                   help="convergent chain to colour by band type")
    p = sub.add_parser("tree", help="band tree export (json or dot)")
    _add_shared(p)
    p = sub.add_parser("gaps", help="gap certification report")
    _add_shared(p)
    p = sub.add_parser("verify", help="run module invariant suites")
    _add_shared(p)
    p.add_argument("--suite", default="all", help="contfrac | spectrum | tree | labels | all")
    return parser


_DEFAULT_FORMATS = {"bands": "csv", "butterfly": "csv", "tree": "json", "gaps": "json",
                    "verify": "json"}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    # argparse mistakes "-5..5" for a flag; glue the value onto its option
    for i, tok in enumerate(argv[:-1]):
        if tok == "--n-range" and argv[i + 1].startswith("-"):
            argv[i : i + 2] = [f"--n-range={argv[i + 1]}"]
            break
    args = _build_parser().parse_args(argv)
    if getattr(args, "format", None) is None:
        args.format = _DEFAULT_FORMATS[args.command]
    try:
        cfg = _config(args)
        handler = {
            "bands": cmd_bands,
            "butterfly": cmd_butterfly,
            "tree": cmd_tree,
            "gaps": cmd_gaps,
            "verify": cmd_verify,
        }[cfg.command]
        return handler(cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TreeError as exc:
        print(json.dumps({"error": str(exc), "diagnostics": exc.diagnostics}), file=sys.stderr)
        return 4
    except (SpectrumError, CertificationError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
