"""Command-line front end: ``hodgefir <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 data or validation error,
3 numerical failure.  Errors go to stderr as one JSON object.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import complex as cxm
from .design import DesignSpec, design_fir, design_sv, fit_fir_from_data, fit_sv_from_data
from .experiments import (
    DENOISING_METHODS,
    _atomic_write,
    _jsonable,
    _rows_to_csv,
    load_bundled,
    run_denoising,
    run_extraction,
    run_prediction,
)
from .filtering import FirFilter, SvFilter, apply_filter, response
from .spectral import AmbiguousEigenvector, EigensolverFailure, eigendecompose

BUNDLED = ("toy", "siouxfalls")


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


# ----------------------------------------------------------------------------
# input helpers


def _existing(path: str) -> Path:
    p = Path(path)
    if not p.exists():
        raise DataError(f"no such file: {path}")
    return p


def _writable(path: str | None) -> Path | None:
    if path is None:
        return None
    p = Path(path)
    if not p.parent.exists():
        raise DataError(f"output directory does not exist: {p.parent}")
    return p


def _complex(arg: str) -> cxm.SimplicialComplex:
    p = Path(arg)
    if not p.exists() and arg in BUNDLED:
        return load_bundled(arg)
    return cxm.load_complex(_existing(arg))


def load_filter(path: str | Path) -> FirFilter | SvFilter:
    """Read ``{"h": [...]}`` or ``{"h0": x, "alpha": [...], "beta": [...]}``."""
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise DataError(f"{path}: filter must be a JSON object")
    keys = set(data)
    if keys == {"h"}:
        return FirFilter(data["h"])
    if "h0" in keys and keys <= {"h0", "alpha", "beta"}:
        return SvFilter(data["h0"], data.get("alpha", []), data.get("beta", []))
    raise DataError(f"{path}: ambiguous filter keys {sorted(keys)}; use 'h' or 'h0/alpha/beta'")


def load_pairs(cx: cxm.SimplicialComplex, directory: str | Path) -> list[tuple[np.ndarray, np.ndarray]]:
    """Pairs ``NAME_in.csv`` / ``NAME_out.csv`` from a directory, sorted by name."""
    d = Path(directory)
    if not d.is_dir():
        raise DataError(f"not a directory: {directory}")
    ins = sorted(d.glob("*_in.csv"))
    if not ins:
        raise DataError(f"{directory}: no *_in.csv files")
    pairs = []
    for f_in in ins:
        f_out = f_in.with_name(f_in.name[: -len("_in.csv")] + "_out.csv")
        if not f_out.exists():
            raise DataError(f"missing output file {f_out.name} for {f_in.name}")
        pairs.append((cxm.load_flow(cx, f_in), cxm.load_flow(cx, f_out)))
    return pairs


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        _atomic_write(out, text)


def _table(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_jsonable(rows), indent=2) + "\n"
    return _rows_to_csv(rows)


def _json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2) + "\n"


def _setup(cx, tol_zero):
    lap = cxm.laplacians(cxm.incidence(cx))
    return lap, eigendecompose(lap, tol_zero=tol_zero)


# ----------------------------------------------------------------------------
# subcommands


def cmd_build(args):
    out = _writable(args.out)
    cx = _complex(args.complex)
    pair = cxm.incidence(cx)
    r1 = cxm.integer_rank(pair.b1)
    r2 = cxm.integer_rank(pair.b2)
    summary = {
        "nodes": cx.n_nodes,
        "edges": cx.n_edges,
        "triangles": cx.n_triangles,
        "components": cxm.count_components(cx),
        "rank_b1": r1,
        "rank_b2": r2,
        "harmonic_dim": cx.n_edges - r1 - r2,
        "max_edge_degree": cxm.max_edge_degree(cx),
    }
    if out is not None:
        _atomic_write(out, _json(cxm.complex_to_dict(cx)))
    _emit(_table([summary], args.format), None)


def cmd_fill_triangles(args):
    out = _writable(args.out)
    cx = _complex(args.complex)
    rows = [{"u": u, "v": v, "w": w} for u, v, w in cxm.fill_triangles(cx)]
    if args.format == "json":
        text = _json([[r["u"], r["v"], r["w"]] for r in rows])
    else:
        text = _rows_to_csv(rows) or "u,v,w\n"
    _emit(text, out)


def cmd_spectrum(args):
    out = _writable(args.out)
    vec_out = _writable(args.eigenvectors)
    _, spec = _setup(_complex(args.complex), args.tol_zero)
    rows = [
        {"index": i, "eigenvalue": float(lam), "label": lab.value}
        for i, (lam, lab) in enumerate(zip(spec.eigenvalues, spec.labels))
    ]
    _emit(_table(rows, args.format), out)
    if vec_out is not None:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        for row in spec.eigenvectors:
            writer.writerow([repr(float(x)) for x in row])
        _atomic_write(vec_out, buf.getvalue())


def _read_spec(spectrum, path) -> DesignSpec:
    with open(_existing(path)) as fh:
        mapping = json.load(fh)
    if not isinstance(mapping, dict):
        raise DataError(f"{path}: spec must be a JSON object")
    return DesignSpec.from_mapping(spectrum, mapping)


def _lengths(args):
    if args.family == "fir":
        if args.length is None:
            raise UsageError("--family fir requires --length")
        return (args.length,)
    if args.l1 is None or args.l2 is None:
        raise UsageError("--family sv requires --l1 and --l2")
    return (args.l1, args.l2)


def cmd_design(args):
    out, rep_out = _writable(args.out), _writable(args.report)
    lengths = _lengths(args)
    _, spec = _setup(_complex(args.complex), args.tol_zero)
    target = _read_spec(spec, args.spec)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        if args.family == "fir":
            filt, report = design_fir(spec, target, *lengths, weight_by_multiplicity=args.weight_by_multiplicity)
        else:
            filt, report = design_sv(spec, target, *lengths, weight_by_multiplicity=args.weight_by_multiplicity)
    rep = report.to_dict() | {"warnings": [str(w.message) for w in caught]}
    _emit(_json(filt.to_dict()), out)
    if rep_out is not None:
        _atomic_write(rep_out, _json(rep))
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)


def cmd_fit(args):
    out, rep_out = _writable(args.out), _writable(args.report)
    lengths = _lengths(args)
    cx = _complex(args.complex)
    lap = cxm.laplacians(cxm.incidence(cx))
    pairs = load_pairs(cx, args.pairs)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        if args.family == "fir":
            filt, report = fit_fir_from_data(lap, pairs, *lengths)
        else:
            filt, report = fit_sv_from_data(lap, pairs, *lengths)
    rep = report.to_dict() | {"pairs": len(pairs), "warnings": [str(w.message) for w in caught]}
    _emit(_json(filt.to_dict()), out)
    if rep_out is not None:
        _atomic_write(rep_out, _json(rep))


def cmd_apply(args):
    out = _writable(args.out)
    cx = _complex(args.complex)
    filt = load_filter(_existing(args.filter))
    flow = cxm.load_flow(cx, _existing(args.flow))
    lap = cxm.laplacians(cxm.incidence(cx))
    result = apply_filter(filt, lap, flow)
    rows = [{"u": u, "v": v, "value": x} for u, v, x in cxm.flow_rows(cx, result)]
    _emit(_table(rows, args.format), out)


def cmd_response(args):
    out = _writable(args.out)
    filt = load_filter(_existing(args.filter))
    _, spec = _setup(_complex(args.complex), args.tol_zero)
    resp = response(filt, spec)
    rows = [
        {"eigenvalue": float(lam), "label": lab.value, "response": float(r)}
        for lam, lab, r in zip(spec.eigenvalues, spec.labels, resp.values)
    ]
    _emit(_table(rows, args.format), out)


def _int_list(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        if "-" in part:
            a, b = part.split("-")
            out.extend(range(int(a), int(b) + 1))
        else:
            out.append(int(part))
    if not out or min(out) < 1:
        raise argparse.ArgumentTypeError(f"expected positive integers, got {text!r}")
    return out


def cmd_experiment(args):
    out_dir = Path(args.out) if args.out else None
    if out_dir is not None and not out_dir.parent.exists():
        raise DataError(f"output directory parent does not exist: {out_dir.parent}")
    seed = args.seed if args.seed is not None else 0
    if args.kind == "extract":
        cx = _complex(args.complex or "toy")
        report = run_extraction(cx, args.components, args.families, args.lengths, tol_zero=args.tol_zero)
        report.config["seed"] = seed
    elif args.kind == "denoise":
        cx = _complex(args.complex or "toy")
        report = run_denoising(
            cx,
            noise_sigma=args.sigma,
            trials=args.trials,
            methods=args.methods,
            seed=seed,
            target_input_nrmse=args.target_input_nrmse,
            mu=args.mu,
            tol_zero=args.tol_zero,
        )
    else:
        cx = _complex(args.complex or "siouxfalls")
        report = run_prediction(
            cx,
            l_totals=args.l_totals,
            train_pairs=args.train_pairs,
            test_len=args.test_len,
            seeds=range(seed, seed + args.n_seeds),
            aggregate=args.aggregate,
        )
    if out_dir is not None:
        report.write(out_dir)
    sys.stdout.write(_table(report.rows, args.format))


# ----------------------------------------------------------------------------
# parser


def _add_globals(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--seed", type=int, default=d, help="random seed (default 0)")
    p.add_argument("--tol-zero", type=float, default=d, help="harmonic eigenvalue threshold (default 1e-8 * max eigenvalue)")
    p.add_argument("--format", choices=("csv", "json"), default=argparse.SUPPRESS if suppress else "csv",
                   help="table output format (default csv)")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    _add_globals(common, suppress=True)

    parser = _Parser(prog="hodgefir", description=__doc__.splitlines()[0])
    _add_globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_, func):
        p = sub.add_parser(name, help=help_, description=help_, parents=[common])
        p.set_defaults(func=func)
        return p

    cx_help = "complex JSON file, or a bundled name: toy, siouxfalls"

    p = add("build", "validate a complex and print its summary", cmd_build)
    p.add_argument("--complex", required=True, help=cx_help)
    p.add_argument("--out", help="write the canonicalized complex JSON here")

    p = add("fill-triangles", "list all 3-cliques of a complex's edge graph", cmd_fill_triangles)
    p.add_argument("--complex", required=True, help=cx_help)
    p.add_argument("--out")

    p = add("spectrum", "eigenvalues of L1 with gradient/curl/harmonic labels", cmd_spectrum)
    p.add_argument("--complex", required=True, help=cx_help)
    p.add_argument("--out", help="CSV path (default stdout)")
    p.add_argument("--eigenvectors", help="also write the eigenvector matrix as dense CSV")

    def lengths(p):
        p.add_argument("--family", choices=("fir", "sv"), required=True)
        p.add_argument("--length", type=int, help="FIR filter length")
        p.add_argument("--l1", type=int, help="SV order on the lower Laplacian")
        p.add_argument("--l2", type=int, help="SV order on the upper Laplacian")
        p.add_argument("--out", help="filter JSON path (default stdout)")
        p.add_argument("--report", help="design report JSON path")

    p = add("design", "least-squares filter design from a frequency-response spec", cmd_design)
    p.add_argument("--complex", required=True, help=cx_help)
    p.add_argument("--spec", required=True,
                   help='JSON targets, e.g. {"gradient": 1, "curl": 0, "harmonic": 0} or {"0": 1, ...}')
    p.add_argument("--weight-by-multiplicity", action="store_true",
                   help="one row per eigenpair instead of per distinct eigenvalue")
    lengths(p)

    p = add("fit", "fit a filter to input/output flow pairs", cmd_fit)
    p.add_argument("--complex", required=True, help=cx_help)
    p.add_argument("--pairs", required=True, help="directory of NAME_in.csv / NAME_out.csv flow files")
    lengths(p)

    p = add("apply", "filter an edge flow", cmd_apply)
    p.add_argument("--complex", required=True, help=cx_help)
    p.add_argument("--filter", required=True, help='{"h": [...]} or {"h0": .., "alpha": [...], "beta": [...]}')
    p.add_argument("--flow", required=True, help="CSV with header u,v,value")
    p.add_argument("--out", help="output flow CSV (default stdout)")

    p = add("response", "frequency response of a filter at every eigenvalue", cmd_response)
    p.add_argument("--complex", required=True, help=cx_help)
    p.add_argument("--filter", required=True)
    p.add_argument("--out")

    p = add("experiment", "run an extraction, denoising or prediction experiment", cmd_experiment)
    p.add_argument("kind", choices=("extract", "denoise", "predict"))
    p.add_argument("--complex", help=cx_help + " (default toy, siouxfalls for predict)")
    p.add_argument("--out", help="directory for report.csv, report.json and curve_*.csv")
    p.add_argument("--lengths", type=_int_list, default=list(range(1, 11)), help="extract: total lengths, e.g. 1-10")
    p.add_argument("--components", nargs="+", default=["gradient", "curl", "harmonic"])
    p.add_argument("--families", nargs="+", choices=("fir", "sv"), default=["fir", "sv"])
    p.add_argument("--sigma", type=float, help="denoise: noise std (default: calibrate)")
    p.add_argument("--target-input-nrmse", type=float, default=0.46)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--methods", nargs="+", choices=DENOISING_METHODS, default=list(DENOISING_METHODS))
    p.add_argument("--mu", type=float, default=0.5, help="regularized baselines: (I + mu L)^-1")
    p.add_argument("--l-totals", type=_int_list, default=list(range(1, 11)))
    p.add_argument("--train-pairs", type=int, default=20)
    p.add_argument("--test-len", type=int, default=80)
    p.add_argument("--n-seeds", type=int, default=1, help="predict: seeds seed .. seed+n-1")
    p.add_argument("--aggregate", choices=("concatenated", "per_step"), default="concatenated")
    return parser


def _check_ranges(args):
    for name in ("length", "trials", "train_pairs", "test_len", "n_seeds"):
        v = getattr(args, name, None)
        if v is not None and v < 1:
            raise UsageError(f"--{name.replace('_', '-')} must be >= 1")
    for name in ("l1", "l2"):
        v = getattr(args, name, None)
        if v is not None and v < 0:
            raise UsageError(f"--{name} must be >= 0")
    if getattr(args, "mu", None) is not None and args.mu < 0:
        raise UsageError("--mu must be >= 0")
    if getattr(args, "sigma", None) is not None and args.sigma <= 0:
        raise UsageError("--sigma must be > 0")
    if args.tol_zero is not None and args.tol_zero <= 0:
        raise UsageError("--tol-zero must be > 0")


def _fail(kind: str, message: str, code: int) -> int:
    print(json.dumps({"error": kind, "message": message}), file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _check_ranges(args)
        args.func(args)
    except UsageError as exc:
        return _fail("usage", str(exc), 1)
    except (EigensolverFailure, AmbiguousEigenvector, np.linalg.LinAlgError, FloatingPointError) as exc:
        return _fail("numerical", str(exc), 3)
    except (DataError, ValueError, KeyError, IndexError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc)
        return _fail(type(exc).__name__, str(msg), 2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
