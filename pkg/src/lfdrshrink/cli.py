"""Command-line pipelines and delimited I/O.

``analyze`` ingests a matrix of paired differences (header row, feature id
in the first column) or computes differences from named treatment/control
column pairs, runs the full shrinkage pipeline, and writes a fixed-schema
table plus optional plot-ready data files. ``simulate`` wraps the
Monte-Carlo coverage study. All numbers serialize with 12 significant
digits so written tables re-parse to the same values.

Exit codes: 0 success, 2 usage error, 3 data/I-O error, 4 numeric or
fitting error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, fields

import numpy as np

from .errors import BracketError, DataError, DomainError, NumericError
from .lfdr import DEFAULT_BINS, DEFAULT_DEGREE, MixtureFit, ZVector, fit_mixture, lfdr_at, probit_transform
from .numerics import student_t_cdf, student_t_quantile
from .posterior import marginal_quantile_batch
from .simulation import (
    TRACK_ALL,
    TRACK_FIRST,
    CoverageReport,
    SimConfig,
    run_study,
)

__all__ = [
    "InputMatrix",
    "AnalysisRow",
    "AnalysisResult",
    "read_matrix",
    "analyze",
    "emit_report",
    "write_analysis_plots",
    "format_simulation_report",
    "write_simulation_plots",
    "cli_main",
    "main",
]

REPORT_COLUMNS = tuple(
    "feature_id mean t z lfdr median_conditional median_marginal "
    "ci_lo_conditional ci_hi_conditional ci_lo_marginal ci_hi_marginal "
    "conf_below conf_at_null conf_above rank".split()
)

_HISTOGRAM_BINS = 50


@dataclass(frozen=True)
class InputMatrix:
    """Rectangular matrix of paired differences, one row per feature."""

    feature_ids: tuple[str, ...]
    rows: np.ndarray  # shape (m, n)


@dataclass(frozen=True)
class AnalysisRow:
    """One feature's estimates, in the report's column order."""

    feature_id: str
    mean: float
    t: float
    z: float
    lfdr: float
    median_conditional: float
    median_marginal: float
    ci_lo_conditional: float
    ci_hi_conditional: float
    ci_lo_marginal: float
    ci_hi_marginal: float
    conf_below: float
    conf_at_null: float
    conf_above: float
    rank: int


assert tuple(f.name for f in fields(AnalysisRow)) == REPORT_COLUMNS


@dataclass(frozen=True)
class AnalysisResult:
    """Per-feature rows plus the shared mixture fit diagnostics."""

    rows: list[AnalysisRow]
    fit: MixtureFit
    theta0: float
    level: float
    conditional_below: np.ndarray  # F_x(theta0) per feature, aligned with rows

    @property
    def pi0_hat(self) -> float:
        return self.fit.pi0_hat


def _sniff_delimiter(header: str) -> str:
    for cand in ("\t", ",", ";"):
        if cand in header:
            return cand
    return "\t"


def _parse_cell(cell: str, line_no: int, col_no: int) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise DataError(f"line {line_no}, column {col_no}: not a number: {cell!r}")
    if not math.isfinite(value):
        raise DataError(f"line {line_no}, column {col_no}: non-finite value {cell!r}")
    return value


def read_matrix(
    path: str,
    delimiter: str | None = None,
    paired: list[tuple[str, str]] | None = None,
) -> InputMatrix:
    """Parse a delimited file with a header row into an InputMatrix.

    Default layout: first column is the feature id, remaining columns are
    replicate differences. With ``paired``, the named treatment/control
    column pairs are subtracted instead. Errors name 1-based line and
    column numbers.
    """
    try:
        with open(path, "r", encoding="utf-8") as handle:
            lines = handle.read().splitlines()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    lines = [ln for ln in lines if ln.strip() != ""]
    if not lines:
        raise DataError(f"{path}: empty input")
    if delimiter is None:
        delimiter = _sniff_delimiter(lines[0])
    header = lines[0].split(delimiter)
    if len(lines) < 2:
        raise DataError(f"{path}: no data rows after the header")

    if paired:
        missing = [name for pair in paired for name in pair if name not in header]
        if missing:
            raise DataError(f"paired columns not in header: {', '.join(missing)}")
        treat_idx = [header.index(t) for t, _ in paired]
        control_idx = [header.index(c) for _, c in paired]
        if len(paired) < 2:
            raise DataError("paired mode needs at least 2 treatment/control pairs")
    else:
        if len(header) < 3:
            raise DataError(
                f"line 1: need a feature-id column plus at least 2 replicate columns, "
                f"found {len(header)}"
            )

    ids: list[str] = []
    seen: dict[str, int] = {}
    rows: list[list[float]] = []
    for offset, line in enumerate(lines[1:], start=2):
        cells = line.split(delimiter)
        if len(cells) != len(header):
            raise DataError(
                f"line {offset}: expected {len(header)} columns, found {len(cells)}"
            )
        fid = cells[0]
        if fid in seen:
            raise DataError(
                f"line {offset}: duplicate feature id {fid!r} (first at line {seen[fid]})"
            )
        seen[fid] = offset
        ids.append(fid)
        if paired:
            diffs = [
                _parse_cell(cells[ti], offset, ti + 1)
                - _parse_cell(cells[ci], offset, ci + 1)
                for ti, ci in zip(treat_idx, control_idx)
            ]
        else:
            diffs = [
                _parse_cell(cell, offset, col + 1)
                for col, cell in enumerate(cells[1:], start=1)
            ]
        rows.append(diffs)

    matrix = np.asarray(rows, dtype=np.float64)
    if matrix.shape[1] < 2:
        raise DataError("need at least 2 replicate differences per feature")
    return InputMatrix(feature_ids=tuple(ids), rows=matrix)


def analyze(
    matrix: InputMatrix,
    theta0: float = 0.0,
    level: float = 0.95,
    bins: int = DEFAULT_BINS,
    degree: int = DEFAULT_DEGREE,
) -> AnalysisResult:
    """Run the full shrinkage pipeline on an input matrix.

    Rows come back in input order; the rank column gives the priority
    order (descending |shrunken median - theta0|, ties broken by
    ascending lfdr, then feature id). The reported t and z test the null
    that the mean equals theta0, so both are centered at theta0.
    """
    data = matrix.rows
    m, n = data.shape
    means = data.mean(axis=1)
    sds = data.std(axis=1, ddof=1)
    degenerate = np.flatnonzero(sds == 0.0)
    if degenerate.size:
        bad = matrix.feature_ids[degenerate[0]]
        raise DataError(f"feature {bad!r}: replicate differences are all equal")
    ses = sds / math.sqrt(n)
    ts = (means - theta0) / ses
    df = float(n - 1)

    zs = probit_transform(ts, df)
    fit = fit_mixture(ZVector(zs, df), bins=bins, degree=degree)
    lf = lfdr_at(fit, zs)

    alpha = (1.0 - level) / 2.0
    q = student_t_quantile(1.0 - alpha, df)
    ci_lo_cond = means - q * ses
    ci_hi_cond = means + q * ses

    ci_lo_marg = marginal_quantile_batch(lf, means, ses, df, theta0, alpha)
    ci_hi_marg = marginal_quantile_batch(lf, means, ses, df, theta0, 1.0 - alpha)
    med_marg = marginal_quantile_batch(lf, means, ses, df, theta0, 0.5)

    f_at_null = student_t_cdf((theta0 - means) / ses, df)
    conf_below = (1.0 - lf) * f_at_null
    conf_at_null = lf
    conf_above = (1.0 - lf) * (1.0 - f_at_null)

    # rank 1 = top priority; the feature-id tie-break keeps ranks
    # independent of input order
    ids = np.asarray(matrix.feature_ids)
    order = np.lexsort((ids, lf, -np.abs(med_marg - theta0)))
    ranks = np.empty(m, dtype=np.int64)
    ranks[order] = np.arange(1, m + 1)

    rows = [
        AnalysisRow(
            feature_id=matrix.feature_ids[i],
            mean=float(means[i]),
            t=float(ts[i]),
            z=float(zs[i]),
            lfdr=float(lf[i]),
            median_conditional=float(means[i]),
            median_marginal=float(med_marg[i]),
            ci_lo_conditional=float(ci_lo_cond[i]),
            ci_hi_conditional=float(ci_hi_cond[i]),
            ci_lo_marginal=float(ci_lo_marg[i]),
            ci_hi_marginal=float(ci_hi_marg[i]),
            conf_below=float(conf_below[i]),
            conf_at_null=float(conf_at_null[i]),
            conf_above=float(conf_above[i]),
            rank=int(ranks[i]),
        )
        for i in range(m)
    ]
    return AnalysisResult(
        rows=rows,
        fit=fit,
        theta0=theta0,
        level=level,
        conditional_below=f_at_null,
    )


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.12g}"


def _write_table(destination, header: tuple[str, ...], records, delimiter: str = "\t"):
    text = delimiter.join(header) + "\n"
    for record in records:
        text += delimiter.join(_fmt(v) for v in record) + "\n"
    if destination == "-":
        sys.stdout.write(text)
        return
    try:
        with open(destination, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
    except OSError as exc:
        raise DataError(f"cannot write {destination}: {exc}") from exc


def emit_report(rows: list[AnalysisRow], destination: str, delimiter: str = "\t"):
    """Write the analysis table with the fixed column order."""
    records = (
        tuple(getattr(row, name) for name in REPORT_COLUMNS) for row in rows
    )
    _write_table(destination, REPORT_COLUMNS, records, delimiter)


def write_analysis_plots(result: AnalysisResult, plots_dir: str):
    """Emit plot-ready scatters: medians vs lfdr, width vs width, and
    observed confidence levels."""
    os.makedirs(plots_dir, exist_ok=True)
    rows = result.rows
    _write_table(
        os.path.join(plots_dir, "medians_vs_lfdr.tsv"),
        ("feature_id", "lfdr", "median_marginal", "median_conditional"),
        ((r.feature_id, r.lfdr, r.median_marginal, r.median_conditional) for r in rows),
    )
    _write_table(
        os.path.join(plots_dir, "width_scatter.tsv"),
        ("feature_id", "width_conditional", "width_marginal"),
        (
            (
                r.feature_id,
                r.ci_hi_conditional - r.ci_lo_conditional,
                r.ci_hi_marginal - r.ci_lo_marginal,
            )
            for r in rows
        ),
    )
    _write_table(
        os.path.join(plots_dir, "confidence_levels.tsv"),
        ("feature_id", "conditional_below", "marginal_below", "marginal_above"),
        (
            (r.feature_id, float(result.conditional_below[i]), r.conf_below, r.conf_above)
            for i, r in enumerate(rows)
        ),
    )


def format_simulation_report(report: CoverageReport, cfg: SimConfig) -> str:
    """Fixed-order key/value serialization of a coverage study."""
    err_m, err_c = report.median_error_samples
    items = [
        ("m", cfg.m),
        ("n", cfg.n),
        ("pi0", cfg.pi0),
        ("effect", cfg.effect),
        ("sigma_null", cfg.sigma_null),
        ("sigma_alt", cfg.sigma_alt),
        ("experiments", cfg.n_experiments),
        ("seed", cfg.seed),
        ("level", cfg.level),
        ("track", cfg.track),
        ("n_tracked", report.n_tracked),
        ("marginal_coverage", report.marginal_coverage),
        ("conditional_coverage", report.conditional_coverage),
        ("mean_width_marginal", report.mean_width_marginal),
        ("mean_width_conditional", report.mean_width_conditional),
        ("mean_abs_error_marginal", float(np.mean(np.abs(err_m)))),
        ("mean_abs_error_conditional", float(np.mean(np.abs(err_c)))),
    ]
    return "".join(f"{key}\t{_fmt(value)}\n" for key, value in items)


def write_simulation_plots(report: CoverageReport, plots_dir: str):
    """Emit the width scatter and median-error histogram data."""
    os.makedirs(plots_dir, exist_ok=True)
    err_m, err_c = report.median_error_samples
    pooled = np.concatenate([err_m, err_c])
    lo, hi = float(np.min(pooled)), float(np.max(pooled))
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    edges = np.linspace(lo, hi, _HISTOGRAM_BINS + 1)
    counts_m, _ = np.histogram(err_m, bins=edges)
    counts_c, _ = np.histogram(err_c, bins=edges)
    _write_table(
        os.path.join(plots_dir, "median_error_histogram.tsv"),
        ("bin_lo", "bin_hi", "count_marginal", "count_conditional"),
        (
            (edges[i], edges[i + 1], int(counts_m[i]), int(counts_c[i]))
            for i in range(_HISTOGRAM_BINS)
        ),
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lfdrshrink",
        description=(
            "Empirical-Bayes shrunken point and interval estimates driven by "
            "local false discovery rates."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analyze", help="analyze a matrix of paired differences")
    pa.add_argument("--input", required=True, help="delimited file with a header row")
    pa.add_argument("--theta0", type=float, default=0.0, help="null value (default 0)")
    pa.add_argument("--level", type=float, default=0.95, help="interval level (default 0.95)")
    pa.add_argument("--bins", type=int, default=DEFAULT_BINS, help="histogram bins for the density fit")
    pa.add_argument("--degree", type=int, default=DEFAULT_DEGREE, help="log-density polynomial degree")
    pa.add_argument("--output", default="-", help="report path ('-' = stdout)")
    pa.add_argument("--plots-dir", default=None, help="directory for plot-data files")
    pa.add_argument("--delimiter", default=None, help="field delimiter (default: sniffed)")
    pa.add_argument(
        "--paired",
        default=None,
        help="comma-separated treatment,control column names, e.g. T1,C1,T2,C2",
    )

    ps = sub.add_parser("simulate", help="run the Monte-Carlo coverage study")
    ps.add_argument("--m", type=int, default=10000, help="features per experiment")
    ps.add_argument("--n", type=int, default=2, help="observations per feature")
    ps.add_argument("--pi0", type=float, default=0.9, help="null proportion")
    ps.add_argument("--effect", type=float, default=2.0, help="|mean| under the alternative")
    ps.add_argument("--sigma-null", type=float, default=1.0)
    ps.add_argument("--sigma-alt", type=float, default=1.5)
    ps.add_argument("--experiments", type=int, default=2000)
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--level", type=float, default=0.95)
    ps.add_argument("--track", choices=(TRACK_FIRST, TRACK_ALL), default=TRACK_FIRST)
    ps.add_argument("--output", default="-", help="report path ('-' = stdout)")
    ps.add_argument("--plots-dir", default=None, help="directory for plot-data files")
    return parser


def _parse_paired(raw: str) -> list[tuple[str, str]]:
    names = [part.strip() for part in raw.split(",")]
    if len(names) % 2 != 0 or not all(names):
        raise DataError(
            "--paired needs an even number of non-empty column names "
            "(treatment,control,...)"
        )
    return list(zip(names[0::2], names[1::2]))


def _cmd_analyze(args) -> int:
    if not 0.0 < args.level < 1.0:
        print("error: --level must be in (0, 1)", file=sys.stderr)
        return 2
    if args.bins < 10 or args.degree < 2:
        print("error: --bins must be >= 10 and --degree >= 2", file=sys.stderr)
        return 2
    if not math.isfinite(args.theta0):
        print("error: --theta0 must be finite", file=sys.stderr)
        return 2
    paired = _parse_paired(args.paired) if args.paired else None
    matrix = read_matrix(args.input, delimiter=args.delimiter, paired=paired)
    result = analyze(
        matrix,
        theta0=args.theta0,
        level=args.level,
        bins=args.bins,
        degree=args.degree,
    )
    emit_report(result.rows, args.output)
    if args.plots_dir:
        write_analysis_plots(result, args.plots_dir)
    m, n = matrix.rows.shape
    fit = result.fit
    print(
        f"analyzed {m} features x {n} replicates: pi0_hat={fit.pi0_hat:.4f}, "
        f"z range [{fit.z_range[0]:.3f}, {fit.z_range[1]:.3f}]",
        file=sys.stderr,
    )
    return 0


def _cmd_simulate(args) -> int:
    try:
        cfg = SimConfig(
            m=args.m,
            n=args.n,
            pi0=args.pi0,
            effect=args.effect,
            sigma_null=args.sigma_null,
            sigma_alt=args.sigma_alt,
            n_experiments=args.experiments,
            seed=args.seed,
            level=args.level,
            track=args.track,
        )
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report = run_study(cfg)
    text = format_simulation_report(report, cfg)
    if args.output == "-":
        sys.stdout.write(text)
    else:
        try:
            with open(args.output, "w", encoding="utf-8", newline="\n") as handle:
                handle.write(text)
        except OSError as exc:
            raise DataError(f"cannot write {args.output}: {exc}") from exc
    if args.plots_dir:
        write_simulation_plots(report, args.plots_dir)
    return 0


def cli_main(argv=None) -> int:
    """Entry point returning an exit code instead of raising SystemExit."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    try:
        if args.command == "analyze":
            return _cmd_analyze(args)
        return _cmd_simulate(args)
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except (NumericError, DomainError, BracketError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 4


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
