"""Command-line front end.

Commands
--------
fit     ingest a column, fit FSD parameters, test the fit, write a report
sample  draw FSD variates, one per line
pdf     evaluate the FSD density on a grid
gof     Pearson test of a column against given parameters
ctrw    simulate a CTRW ensemble and write scaled positions

Reports are JSON objects with sorted keys; plot tables are comma-separated
with a header line.  Every number is written with 9 significant digits and
no field depends on the clock, so equal seeds give byte-identical output.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass

import numpy as np

from . import __version__
from .ctrw import CtrwConfig, ctrw_limit_pdf, simulate_ensemble
from .errors import DomainError, EstimationError, QuadratureError
from .estimation import default_window, estimate_moments, fit_chi2
from .fsd import FsdParams, fsd_pdf, make_mixing_sample, sample_fsd
from .gof import Histogram, bin_counts, build_histogram, cell_probabilities, degrees_of_freedom, pearson_test
from .optimize import SearchConfig
from .stable import RngStream

__all__ = ["IngestSpec", "IngestResult", "ingest_table", "build_parser", "main", "fmt"]

EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_IO = 4
EXIT_NUMERIC = 5

DELIMITERS = {"comma": ",", "tab": "\t", "whitespace": None}


def fmt(x) -> str:
    """Format a number with 9 significant digits."""
    return f"{float(x):.9g}"


def _round9(obj):
    """Recursively round floats to 9 significant digits for JSON output."""
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return float(fmt(v)) if math.isfinite(v) else fmt(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, dict):
        return {k: _round9(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round9(v) for v in obj]
    return obj


# ---------------------------------------------------------------------------
# ingest
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IngestSpec:
    path: str
    delimiter: str = "comma"
    column: str | int = 0
    skip_header: bool = False
    drop_nonpositive: bool = False

    def __post_init__(self):
        if self.delimiter not in DELIMITERS:
            raise DomainError(f"delimiter must be one of {sorted(DELIMITERS)}, got {self.delimiter!r}")


@dataclass(frozen=True)
class IngestResult:
    values: np.ndarray
    rows: int
    dropped: int


def _split(line: str, delimiter: str):
    sep = DELIMITERS[delimiter]
    return [c.strip() for c in (line.split(sep) if sep is not None else line.split())]


def ingest_table(spec: IngestSpec) -> IngestResult:
    """Read one numeric column of a delimited text file.

    A column given by name requires ``skip_header``; the header row is then
    used to resolve it.  Blank lines are ignored.  ``rows`` counts data rows
    read and ``dropped`` the nonpositive values removed on request.
    """
    try:
        with open(spec.path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise OSError(f"cannot read {spec.path}: {exc.strerror or exc}") from exc

    numbered = [(i + 1, ln) for i, ln in enumerate(lines) if ln.strip()]
    col = spec.column
    if spec.skip_header:
        if not numbered:
            raise DomainError(f"{spec.path}: file is empty")
        _, header = numbered.pop(0)
        names = _split(header, spec.delimiter)
        if isinstance(col, str) and not col.lstrip("-").isdigit():
            if col not in names:
                raise DomainError(f"{spec.path}: column {col!r} not in header {names}")
            col = names.index(col)
    if isinstance(col, str):
        if not col.lstrip("-").isdigit():
            raise DomainError(f"column {col!r} given by name but the file has no header (use --skip-header)")
        col = int(col)
    if col < 0:
        raise DomainError(f"column index must be nonnegative, got {col}")

    values = []
    for lineno, ln in numbered:
        cells = _split(ln, spec.delimiter)
        if col >= len(cells):
            raise DomainError(f"{spec.path}:{lineno}: column {col} missing (row has {len(cells)} fields)")
        try:
            v = float(cells[col])
        except ValueError:
            raise DomainError(f"{spec.path}:{lineno}: non-numeric value {cells[col]!r} in column {col}") from None
        if not math.isfinite(v):
            raise DomainError(f"{spec.path}:{lineno}: non-finite value {cells[col]!r}")
        values.append(v)

    arr = np.array(values, dtype=float)
    rows = arr.size
    dropped = 0
    if spec.drop_nonpositive:
        keep = arr > 0.0
        dropped = int(rows - keep.sum())
        arr = arr[keep]
    if arr.size == 0:
        raise DomainError(f"{spec.path}: no usable rows ({rows} read, {dropped} dropped)")
    return IngestResult(arr, rows, dropped)


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


class StageError(Exception):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause


@contextlib.contextmanager
def stage(name: str):
    try:
        yield
    except StageError:
        raise
    except (DomainError, EstimationError, QuadratureError, OSError, ValueError, ArithmeticError) as exc:
        raise StageError(name, exc) from exc


class OutputSet:
    """Files written atomically and all removed if any later stage fails."""

    def __init__(self):
        self.written: list[str] = []

    def write(self, path: str | None, text: str):
        if path is None or path == "-":
            sys.stdout.write(text)
            return
        d = os.path.dirname(os.path.abspath(path))
        fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            with contextlib.suppress(OSError):
                os.unlink(tmp)
            raise
        self.written.append(path)

    def rollback(self):
        for p in self.written:
            with contextlib.suppress(OSError):
                os.unlink(p)
        self.written.clear()


def _report_text(report: dict) -> str:
    return json.dumps(_round9(report), sort_keys=True, indent=2) + "\n"


def _table_text(header, columns) -> str:
    lines = [",".join(header)]
    for row in zip(*columns):
        lines.append(",".join(fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _params_dict(p: FsdParams) -> dict:
    return {"alpha": p.alpha, "beta": p.beta, "theta": p.theta, "lambda": p.lam}


def _gof_dict(r) -> dict:
    return {"statistic": r.statistic, "dof": r.dof, "p_value": r.p_value, "level": r.level, "decision": r.decision}


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _shared(parser: argparse.ArgumentParser):
    g = parser.add_argument_group("shared options")
    g.add_argument("--input", help="input table path")
    g.add_argument("--column", default="0", help="column name (with --skip-header) or 0-based index")
    g.add_argument("--delimiter", choices=sorted(DELIMITERS), default="comma")
    g.add_argument("--skip-header", action="store_true", help="first nonblank line is a header")
    g.add_argument("--drop-nonpositive", action="store_true", help="drop values <= 0 after reading")
    g.add_argument("--xmin", type=float, help="lower window edge")
    g.add_argument("--xmax", type=float, help="upper window edge")
    g.add_argument("--bins", type=positive_int, default=40)
    g.add_argument("--binning", choices=("linear", "log", "equalprob"), default="log")
    g.add_argument("--mc-samples", type=positive_int, default=100_000)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--penalty-A", type=float, default=100.0, dest="penalty_A")
    g.add_argument("--max-evals", type=positive_int, default=20_000)
    g.add_argument("--level", type=float, default=0.05)
    g.add_argument("--out", help="report or data output path (default stdout)")
    g.add_argument("--plot-out", help="plot table output path")


def _params_args(parser, required=True):
    parser.add_argument("--alpha", type=float, required=required)
    parser.add_argument("--beta", type=float, required=required)
    parser.add_argument("--theta", type=float, default=0.0)
    parser.add_argument("--lambda", type=float, default=1.0, dest="lam")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracstable", description="Fractional stable distribution toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit FSD parameters to a column of data")
    _shared(p)

    p = sub.add_parser("sample", help="draw FSD variates")
    _shared(p)
    _params_args(p)
    p.add_argument("--n", type=positive_int, required=True, help="number of variates")

    p = sub.add_parser("pdf", help="evaluate the FSD density on a grid")
    _shared(p)
    _params_args(p)
    p.add_argument("--points", type=positive_int, default=201, help="grid size between --xmin and --xmax")
    p.add_argument("--method", choices=("quadrature", "monte-carlo"), default="quadrature")

    p = sub.add_parser("gof", help="Pearson test of a column against given parameters")
    _shared(p)
    _params_args(p)
    p.add_argument("--fitted-params", type=int, default=0, help="parameters estimated from the same data")

    p = sub.add_parser("ctrw", help="simulate a CTRW ensemble")
    _shared(p)
    p.add_argument("--alpha", type=float, required=True, help="jump tail exponent")
    p.add_argument("--beta", type=float, required=True, help="wait tail exponent")
    p.add_argument("--t", type=float, required=True, help="observation time")
    p.add_argument("--n", type=positive_int, default=10_000, help="ensemble size")
    p.add_argument("--x0", type=float, default=1.0, help="jump scale")
    p.add_argument("--t0", type=float, default=1.0, help="wait scale")
    p.add_argument("--one-sided", action="store_true", help="positive jumps only")
    p.add_argument("--D", type=float, default=1.0, help="diffusion constant of the reference curve")
    return parser


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _ingest(args) -> IngestResult:
    if not args.input:
        raise DomainError("--input is required")
    spec = IngestSpec(args.input, args.delimiter, args.column, args.skip_header, args.drop_nonpositive)
    return ingest_table(spec)


def _window(args, sample):
    if args.xmin is not None and args.xmax is not None:
        return args.xmin, args.xmax
    lo, hi = default_window(sample)
    return (args.xmin if args.xmin is not None else lo, args.xmax if args.xmax is not None else hi)


def _model_table(hist: Histogram, model: np.ndarray):
    # empirical density is renormalized over the window; the model column is
    # the plain Monte Carlo density estimate, comparable with fsd_pdf
    model_counts = bin_counts(model, hist.edges)
    model_density = model_counts / (model.size * hist.widths)
    return ["center", "empirical_density", "model_density"], [hist.centers, hist.density(), model_density]


def _test_against_model(args, hist, params, root: RngStream, fitted: int):
    with stage("simulate"):
        model = sample_fsd(params, root.child(1), args.mc_samples)
    with stage("test"):
        probs = cell_probabilities(model, hist)
        report = pearson_test(hist, probs, fitted_params=fitted, level=args.level)
    header, cols = _model_table(hist, model)
    return report, header, cols


def run_fit(args, out: OutputSet) -> int:
    with stage("ingest"):
        data = _ingest(args)
    with stage("setup"):
        degrees_of_freedom(args.bins, 4)
        window = _window(args, data.values)
        root = RngStream(args.seed)
    with stage("estimate"):
        try:
            start = estimate_moments(data.values[data.values != 0.0])
            start_note = "moment estimate"
        except (EstimationError, DomainError) as exc:
            start = None
            start_note = f"moment estimator failed: {exc}"
    with stage("fit"):
        lam0 = start.lam if start is not None else 1.0
        cfg = SearchConfig((0.1, 0.1, 0.1, 0.1 * lam0), max_evals=args.max_evals, penalty_A=args.penalty_A)
        fit = fit_chi2(
            data.values,
            window=window,
            bins=args.bins,
            binning=args.binning,
            mc_size=args.mc_samples,
            rng=root.child(0),
            cfg=cfg,
            start=start,
        )
    gof, header, cols = _test_against_model(args, fit.hist, fit.params, root, 4)
    report = {
        "command": "fit",
        "version": __version__,
        "seed": args.seed,
        "input": {"path": args.input, "rows": data.rows, "dropped": data.dropped, "used": int(data.values.size)},
        "window": list(fit.window),
        "bins": fit.hist.n_bins,
        "binning": fit.hist.binning,
        "in_window": fit.hist.total,
        "mc_samples": args.mc_samples,
        "penalty_A": args.penalty_A,
        "start": start_note,
        "initial_params": _params_dict(fit.initial_params),
        "initial_objective": fit.initial_objective,
        "params": _params_dict(fit.params),
        "objective": fit.objective,
        "search": {
            "evaluations": fit.trace.evaluations,
            "converged": fit.trace.converged,
            "accepted_points": len(fit.trace.points),
        },
        "gof": _gof_dict(gof),
        "notes": list(fit.notes),
    }
    with stage("write"):
        out.write(args.out, _report_text(report))
        if args.plot_out:
            out.write(args.plot_out, _table_text(header, cols))
    return 0


def run_gof(args, out: OutputSet) -> int:
    with stage("ingest"):
        data = _ingest(args)
    with stage("setup"):
        params = FsdParams(args.alpha, args.beta, args.theta, args.lam)
        degrees_of_freedom(args.bins, args.fitted_params)
        window = _window(args, data.values)
        hist = build_histogram(data.values, window, args.bins, args.binning)
        if hist.total == 0:
            raise DomainError(f"no observations inside the window {window}")
    gof, header, cols = _test_against_model(args, hist, params, RngStream(args.seed), args.fitted_params)
    report = {
        "command": "gof",
        "version": __version__,
        "seed": args.seed,
        "input": {"path": args.input, "rows": data.rows, "dropped": data.dropped, "used": int(data.values.size)},
        "window": list(hist.window),
        "bins": hist.n_bins,
        "binning": hist.binning,
        "in_window": hist.total,
        "mc_samples": args.mc_samples,
        "params": _params_dict(params),
        "gof": _gof_dict(gof),
    }
    with stage("write"):
        out.write(args.out, _report_text(report))
        if args.plot_out:
            out.write(args.plot_out, _table_text(header, cols))
    return 0


def run_sample(args, out: OutputSet) -> int:
    with stage("setup"):
        params = FsdParams(args.alpha, args.beta, args.theta, args.lam)
    with stage("simulate"):
        z = sample_fsd(params, RngStream(args.seed), args.n)
    with stage("write"):
        out.write(args.out, "\n".join(fmt(v) for v in z) + "\n")
    return 0


def run_pdf(args, out: OutputSet) -> int:
    with stage("setup"):
        params = FsdParams(args.alpha, args.beta, args.theta, args.lam)
        lo = -5.0 if args.xmin is None else args.xmin
        hi = 5.0 if args.xmax is None else args.xmax
        if not lo <= hi:
            raise DomainError(f"grid needs xmin <= xmax, got ({lo}, {hi})")
        x = np.linspace(lo, hi, args.points)
    with stage("density"):
        mix = None
        if args.method == "monte-carlo":
            mix = make_mixing_sample(params.beta, RngStream(args.seed), args.mc_samples)
        q = fsd_pdf(x, params, method=args.method, mix=mix)
    with stage("write"):
        out.write(args.out, _table_text(["x", "density"], [x, np.atleast_1d(q)]))
    return 0


def run_ctrw(args, out: OutputSet) -> int:
    with stage("setup"):
        cfg = CtrwConfig(args.alpha, args.beta, args.t, args.n, args.x0, args.t0, not args.one_sided)
    with stage("simulate"):
        ens = simulate_ensemble(cfg, RngStream(args.seed))
        scaled = ens.scaled_positions
    table = None
    if args.plot_out:
        with stage("reference"):
            if args.xmin is not None and args.xmax is not None:
                window = (args.xmin, args.xmax)
            else:
                w = float(np.quantile(np.abs(scaled), 0.99))
                window = (-w, w) if w > 0 else (-1.0, 1.0)
            binning = "linear" if args.binning == "log" and window[0] <= 0 else args.binning
            hist = build_histogram(scaled, window, args.bins, binning)
            s = args.t ** (cfg.beta / cfg.alpha)
            ref = s * ctrw_limit_pdf(hist.centers * s, args.t, cfg.alpha, cfg.beta, args.D)
            emp = hist.counts / (scaled.size * hist.widths)
            table = _table_text(["center", "empirical_density", "reference_density"], [hist.centers, emp, ref])
    with stage("write"):
        out.write(args.out, "\n".join(fmt(v) for v in scaled) + "\n")
        if table is not None:
            out.write(args.plot_out, table)
    return 0


COMMANDS = {"fit": run_fit, "sample": run_sample, "pdf": run_pdf, "gof": run_gof, "ctrw": run_ctrw}


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, DomainError):
        return EXIT_DOMAIN
    if isinstance(exc, OSError):
        return EXIT_IO
    if isinstance(exc, (QuadratureError, EstimationError, ArithmeticError)):
        return EXIT_NUMERIC
    return EXIT_DOMAIN


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    out = OutputSet()
    try:
        return COMMANDS[args.command](args, out)
    except StageError as exc:
        out.rollback()
        kind = "domain error" if isinstance(exc.cause, DomainError) else type(exc.cause).__name__
        print(f"fracstable {args.command}: {kind} in stage '{exc.stage}': {exc.cause}", file=sys.stderr)
        return _exit_code(exc.cause)
    except BaseException:
        out.rollback()
        raise


if __name__ == "__main__":
    sys.exit(main())
