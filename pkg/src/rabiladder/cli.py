"""Command-line interface: spectra, convergence, sweeps, splittings, comparisons.

Exit codes: 0 success, 2 invalid arguments, 3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from typing import Any, Callable, Sequence

import numpy as np

from . import approx2, emission
from .core import ModelParams, NumericalError, Spectrum
from .exact import (
    ConvergenceError,
    ConvergenceReport,
    SolverConfig,
    convergence_at,
    converge_spectrum,
    ed_oracle,
    exact_spectrum,
)
from .rwa import rwa_spectrum

SCHEMA_VERSION = 1
EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NONCONVERGED = 3
SPECTRUM_METHODS = ("exact", "ed-oracle", "rwa", "order0", "order1", "order2", "series")
DEFAULT_ED_TRUNCATION = 40
VISIBLE_HEIGHT = 1e-2


class UsageError(ValueError):
    pass


@dataclass
class Table:
    columns: list[str]
    rows: list[dict[str, Any]]
    extra: dict[str, Any] | None = None


def fmt_number(value: Any) -> Any:
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return str(value)
        return float(format(value, ".12g"))
    return value


def _csv_cell(value: Any) -> str:
    value = fmt_number(value)
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def render(table: Table, fmt: str, request: dict[str, Any]) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([_csv_cell(row.get(col)) for col in table.columns])
        return buf.getvalue()
    results: dict[str, Any] = {
        "columns": table.columns,
        "rows": [{col: fmt_number(row.get(col)) for col in table.columns} for row in table.rows],
    }
    if table.extra:
        results.update({k: _jsonable(v) for k, v in table.extra.items()})
    doc = {"schema_version": SCHEMA_VERSION, "request_echo": request, "results": results}
    return json.dumps(doc, indent=2) + "\n"


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return fmt_number(value)


# --- spectra -----------------------------------------------------------------


def compute_spectrum(
    method: str,
    params: ModelParams,
    levels: int,
    truncation: int | None = None,
    tol: float = 1e-7,
) -> tuple[Spectrum, ConvergenceReport | None]:
    if method == "exact":
        if truncation is not None:
            if truncation < 1:
                raise UsageError("--truncation must be >= 1")
            return exact_spectrum(params, truncation, levels), None
        return converge_spectrum(params, SolverConfig(level_count=levels, tol_energy=tol))
    if method == "ed-oracle":
        M = truncation if truncation is not None else max(DEFAULT_ED_TRUNCATION, levels + 20)
        spec = ed_oracle(params, M)
        return Spectrum(spec.levels[:levels], params), None
    if method == "rwa":
        return rwa_spectrum(params, levels), None
    if method == "order0":
        return approx2.zero_order_spectrum(params, levels), None
    if method == "order1":
        return approx2.first_order_spectrum(params, levels), None
    if method == "order2":
        return approx2.second_order_spectrum(params, levels), None
    if method == "series":
        return approx2.series_spectrum(params, levels), None
    raise UsageError(f"unknown method {method!r}; choose from {', '.join(SPECTRUM_METHODS)}")


def _params(args: argparse.Namespace, g: float | None = None) -> ModelParams:
    try:
        return ModelParams(delta=args.delta, g=args.g if g is None else g)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _methods(text: str) -> list[str]:
    methods = [m.strip() for m in text.split(",") if m.strip()]
    if not methods:
        raise UsageError("no method given")
    for m in methods:
        if m not in SPECTRUM_METHODS:
            raise UsageError(f"unknown method {m!r}; choose from {', '.join(SPECTRUM_METHODS)}")
    return methods


def _grid(args: argparse.Namespace) -> list[float]:
    if args.g_start is None and args.g_end is None:
        return [args.g]
    if args.g_start is None or args.g_end is None or args.steps is None:
        raise UsageError("a grid needs --g-start, --g-end and --steps")
    if args.steps < 2:
        raise UsageError("--steps must be >= 2")
    if not args.g_start < args.g_end:
        raise UsageError("--g-start must be below --g-end")
    if args.g_start < 0:
        raise UsageError("coupling must be >= 0")
    return [float(x) for x in np.linspace(args.g_start, args.g_end, args.steps)]


def cmd_spectrum(args: argparse.Namespace) -> Table:
    params = _params(args)
    if args.method not in SPECTRUM_METHODS:
        raise UsageError(f"unknown method {args.method!r}")
    spec, report = compute_spectrum(args.method, params, args.levels, args.truncation, args.tol)
    rows = [
        {
            "index": lvl.index,
            "parity": lvl.parity.label,
            "energy": lvl.energy,
            "method": lvl.method,
            "M": lvl.truncation,
            "detuning": params.detuning,
        }
        for lvl in spec.levels
    ]
    return Table(["index", "parity", "energy", "method", "M", "detuning"], rows)


def _report_table(spec: Spectrum, report: ConvergenceReport) -> Table:
    rows = []
    for i, (delta, ok) in enumerate(zip(report.per_level_delta, report.converged)):
        lvl = spec.levels[i] if i < len(spec) else None
        rows.append(
            {
                "index": i,
                "parity": lvl.parity.label if lvl else None,
                "energy": lvl.energy if lvl else None,
                "delta": delta,
                "converged": ok,
                "M_final": report.M_final,
            }
        )
    extra = {
        "M_final": report.M_final,
        "converged_count": report.converged_count,
        "all_converged": report.all_converged,
    }
    return Table(["index", "parity", "energy", "delta", "converged", "M_final"], rows, extra)


def cmd_converge(args: argparse.Namespace) -> Table:
    params = _params(args)
    if args.truncation is not None:
        spec, report = convergence_at(params, args.truncation, args.levels, args.tol)
        table = _report_table(spec, report)
        if not report.all_converged:
            raise _Partial(table)
        return table
    config = SolverConfig(level_count=args.levels, tol_energy=args.tol, M_max=args.m_max)
    try:
        spec, report = converge_spectrum(params, config)
    except ConvergenceError as exc:
        raise _Partial(_report_table(exc.spectrum, exc.report)) from None
    return _report_table(spec, report)


class _Partial(Exception):
    """Carries a table to print before exiting with the non-convergence code."""

    def __init__(self, table: Table):
        super().__init__("non-converged")
        self.table = table


def cmd_sweep(args: argparse.Namespace) -> Table:
    if args.g_start is None or args.g_end is None or args.steps is None:
        raise UsageError("sweep needs --g-start, --g-end and --steps")
    grid = _grid(args)
    methods = _methods(args.method)
    columns = ["g", "detuning", "status"] + [
        f"{m}_E{i}" for m in methods for i in range(args.levels)
    ]
    rows = []
    for g in grid:
        params = _params(args, g)
        row: dict[str, Any] = {"g": g, "detuning": params.detuning, "status": "ok"}
        failures = []
        for m in methods:
            try:
                spec, _ = compute_spectrum(m, params, args.levels, args.truncation, args.tol)
            except (ConvergenceError, NumericalError) as exc:
                failures.append(f"{m}: {exc}")
                continue
            for i, lvl in enumerate(spec.levels):
                row[f"{m}_E{i}"] = lvl.energy
        if failures:
            row["status"] = "failed (" + "; ".join(failures) + ")"
        rows.append(row)
    return Table(columns, rows)


def _peak_string(peaks: Sequence[emission.Peak]) -> str:
    return ";".join(f"{p.rank}@{p.frequency:.12g}:{p.height:.12g}" for p in peaks)


def cmd_splitting(args: argparse.Namespace) -> Table:
    kind = emission.InitialKind.parse(args.initial)
    rows = []
    M = args.truncation if args.truncation is not None else emission.DEFAULT_M
    for g in _grid(args):
        params = _params(args, g)
        row: dict[str, Any] = {"g": g, "initial": kind.value, "method": args.method}
        peaks = emission.emission_peaks(kind, params, args.method, M)
        main = peaks.main_pair()
        others = [p for p in sorted(peaks.peaks, key=lambda p: p.rank) if p not in main]
        if args.method != "series":
            others = [p for p in others if p.height > VISIBLE_HEIGHT]
        series_split = (
            emission.splitting(params, "series")[0] if params.is_resonant else None
        )
        exact_split, rwa_split = emission.splitting(params, "exact", args.truncation)
        row.update(
            {
                "h1": main[0].height,
                "h2": main[1].height,
                "ratio": main[0].height / main[1].height if main[1].height else None,
                "freq1": main[0].frequency,
                "freq2": main[1].frequency,
                "extra_peaks": _peak_string(others),
                "splitting_series": series_split,
                "splitting_exact": exact_split,
                "splitting_rwa": rwa_split,
                "incomplete": peaks.incomplete,
            }
        )
        rows.append(row)
    columns = [
        "g", "initial", "method", "h1", "h2", "ratio", "freq1", "freq2", "extra_peaks",
        "splitting_series", "splitting_exact", "splitting_rwa", "incomplete",
    ]
    return Table(columns, rows)


def cmd_compare(args: argparse.Namespace) -> Table:
    params = _params(args)
    methods = _methods(args.methods)
    if len(methods) < 2:
        raise UsageError("compare needs at least two methods")
    spectra = {
        m: compute_spectrum(m, params, args.levels, args.truncation, args.tol)[0] for m in methods
    }
    reference = spectra["exact"] if "exact" in spectra else compute_spectrum(
        "exact", params, args.levels, args.truncation, args.tol
    )[0]
    others = [m for m in methods if m != "exact"]
    columns = ["index"] + [f"E_{m}" for m in methods] + [f"dev_{m}" for m in others]
    rows: list[dict[str, Any]] = []
    worst = {m: 0.0 for m in others}
    for i in range(args.levels):
        row: dict[str, Any] = {"index": i}
        for m in methods:
            row[f"E_{m}"] = spectra[m].levels[i].energy
        for m in others:
            dev = abs(spectra[m].levels[i].energy - reference.levels[i].energy)
            row[f"dev_{m}"] = dev
            worst[m] = max(worst[m], dev)
        rows.append(row)
    summary: dict[str, Any] = {"index": "max"}
    summary.update({f"dev_{m}": worst[m] for m in others})
    rows.append(summary)
    return Table(columns, rows, {"max_deviation": worst})


# --- argument parsing ---------------------------------------------------------


def _common(p: argparse.ArgumentParser, *, levels: int = 8) -> None:
    p.add_argument("--g", type=float, default=0.1, help="coupling strength (units of cavity frequency)")
    p.add_argument("--delta", type=float, default=1.0, help="atomic transition frequency")
    p.add_argument("--levels", type=int, default=levels, help="number of lowest levels")
    p.add_argument("--tol", type=float, default=1e-7, help="relative energy convergence tolerance")
    p.add_argument("--truncation", type=int, default=None, help="fixed photon cutoff M")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None, help="output path (default: stdout)")


def _grid_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--g-start", type=float, default=None)
    p.add_argument("--g-end", type=float, default=None)
    p.add_argument("--steps", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rabiladder", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="lowest levels by one method")
    _common(p, levels=8)
    p.add_argument("--method", default="exact", help="|".join(SPECTRUM_METHODS))
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("converge", help="truncation convergence study")
    _common(p, levels=20)
    p.add_argument("--m-max", type=int, default=400)
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("sweep", help="levels over a coupling grid")
    _common(p, levels=8)
    _grid_flags(p)
    p.add_argument("--method", default="exact", help="comma-separated methods")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("splitting", help="emission peaks, heights and splitting")
    _common(p, levels=2)
    _grid_flags(p)
    p.add_argument("--initial", default="vgs", choices=("vgs", "e0"))
    p.add_argument("--method", default="series", choices=emission.EMISSION_METHODS)
    p.set_defaults(func=cmd_splitting)

    p = sub.add_parser("compare", help="per-level deviations between methods")
    _common(p, levels=8)
    p.add_argument("--methods", "--method", dest="methods", default="exact,order2")
    p.set_defaults(func=cmd_compare)
    return parser


def _validate(args: argparse.Namespace) -> None:
    if args.levels < 1:
        raise UsageError("--levels must be >= 1")
    if not args.tol > 0:
        raise UsageError("--tol must be positive")
    if args.g < 0:
        raise UsageError("--g must be >= 0")


def _echo(args: argparse.Namespace) -> dict[str, Any]:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out")}


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler: Callable[[argparse.Namespace], Table] = args.func
    try:
        _validate(args)
        table = handler(args)
    except _Partial as partial:
        _emit(render(partial.table, args.format, _echo(args)), args.out)
        print("error: not all requested levels converged", file=sys.stderr)
        return EXIT_NONCONVERGED
    except (ConvergenceError, NumericalError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _emit(render(table, args.format, _echo(args)), args.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
