"""Command-line interface: runs, gain sweeps, and series analysis.

Subcommands
-----------
evolve   run one configuration and write its time series (plus snapshots)
sweep    run one configuration across a list of gain values, write one
         series per gain and a summary table (gain, drift rate, width
         exponent, late potential energy)
analyze  fit stored time series and emit a machine-readable report
preset   list bundled presets or show one as a config document

All numeric output uses shortest round-trip decimal formatting, so rerunning
any command with identical inputs yields byte-identical files.

Exit codes: 0 success, 1 validation or I/O error, 2 physics error during
evolution (norm overflow or edge-guard trip), 3 fit non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import analysis
from .config import ConfigError, ExperimentConfig, parse_config, preset_config, preset_names, render_config
from .evolution import EdgeGuardError, MemorySink, NormOverflowError, run
from .grid import make_grid

__all__ = ["main"]

_SERIES_COLUMNS = ("t", "log_norm", "p_mean", "e_kin", "e_pot", "e_tot", "width")
_FIT_KINDS = ("linear", "power", "quadratic", "freq", "damped", "double_exp")


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad usage; reserve 2 for physics."""

    def error(self, message):  # noqa: A002 - argparse signature
        self.exit(1, f"{self.prog}: error: {message}\n")


def _fmt(value: float) -> str:
    return repr(float(value))


def _write_series(path: Path, records) -> None:
    lines = [",".join(_SERIES_COLUMNS)]
    for r in records:
        lines.append(",".join((
            str(int(r.t)), _fmt(r.log_norm), _fmt(r.p_mean), _fmt(r.e_kin),
            _fmt(r.e_pot), _fmt(r.e_tot), _fmt(r.width),
        )))
    path.write_text("\n".join(lines) + "\n")


def _write_snapshot(out_dir: Path, stem: str, snap) -> list[Path]:
    paths = []
    for suffix, axis, density in (
        ("momentum", snap.momenta, snap.momentum_density),
        ("coordinate", snap.theta, snap.coordinate_density),
    ):
        header = "p,prob" if suffix == "momentum" else "theta,prob"
        path = out_dir / f"{stem}_t{int(snap.t)}_{suffix}.csv"
        lines = [header]
        lines.extend(f"{_fmt(x)},{_fmt(d)}" for x, d in zip(axis, density))
        path.write_text("\n".join(lines) + "\n")
        paths.append(path)
    return paths


def _read_series(path: Path) -> dict[str, np.ndarray]:
    """Load and schema-validate a series file written by the evolve command."""
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read series file: {exc}") from exc
    lines = text.splitlines()
    if not lines or tuple(lines[0].split(",")) != _SERIES_COLUMNS:
        raise ConfigError(
            f"{path}: header mismatch; expected {','.join(_SERIES_COLUMNS)}")
    if len(lines) < 2:
        raise ConfigError(f"{path}: no data rows")
    try:
        table = np.array([[float(cell) for cell in line.split(",")] for line in lines[1:]])
    except ValueError as exc:
        raise ConfigError(f"{path}: malformed numeric row: {exc}") from exc
    if table.shape[1] != len(_SERIES_COLUMNS):
        raise ConfigError(f"{path}: wrong column count")
    if not np.all(np.isfinite(table)):
        raise ConfigError(f"{path}: contains non-finite values")
    if np.any(np.diff(table[:, 0]) <= 0):
        raise ConfigError(f"{path}: time column must be strictly increasing")
    return {name: table[:, i] for i, name in enumerate(_SERIES_COLUMNS)}


def _load_experiment(args) -> tuple[ExperimentConfig, str]:
    if (args.config is None) == (args.preset is None):
        raise ConfigError("exactly one of --config or --preset is required")
    if args.preset is not None:
        cfg = preset_config(args.preset)
        stem = args.preset
    else:
        path = Path(args.config)
        try:
            cfg = parse_config(path.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        stem = path.stem
    overrides = {}
    if args.kicks is not None:
        overrides["total_kicks"] = args.kicks
    if args.grid is not None:
        overrides["grid_size"] = args.grid
    if args.substeps is not None:
        overrides["substeps"] = args.substeps
    if args.out is not None:
        overrides["output_dir"] = args.out
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
    return cfg, stem


def _run_to_sink(cfg: ExperimentConfig) -> MemorySink:
    grid = make_grid(cfg.grid_size, cfg.hbar_eff)
    sink = MemorySink()
    run(cfg.to_run_config(), grid, sink=sink)
    return sink


def _cmd_evolve(args) -> int:
    cfg, stem = _load_experiment(args)
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    sink = _run_to_sink(cfg)
    series_path = out_dir / f"{stem}_series.csv"
    _write_series(series_path, sink.records)
    written = [series_path]
    if cfg.emit_snapshots:
        for snap in sink.snapshots:
            written.extend(_write_snapshot(out_dir, stem, snap))
    for path in written:
        print(path)
    return 0


def _member_summary(series: dict[str, np.ndarray]) -> dict[str, float]:
    n = series["t"].size
    window = analysis.late_half(n)
    drift = analysis.fit_linear(series["t"], series["p_mean"], window=window)
    spread = analysis.fit_power_law(series["t"], series["width"], window=window)
    lo, hi = window
    return {
        "G": drift.slope,
        "alpha": spread.exponent,
        "e_pot_late": float(np.mean(series["e_pot"][lo:hi])),
    }


def _cmd_sweep(args) -> int:
    cfg, stem = _load_experiment(args)
    try:
        gains = [float(tok) for tok in args.lambda_values.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --lambda list: {exc}") from exc
    if not gains:
        raise ConfigError("--lambda list is empty")
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    worst = 0
    rows = []
    for gain in gains:
        member = dataclasses.replace(cfg, kick_gain=gain, snapshot_times=(),
                                     emit_snapshots=False)
        member_path = out_dir / f"{stem}_lambda{_fmt(gain)}_series.csv"
        row = {"lambda": _fmt(gain), "G": "", "alpha": "", "e_pot_late": "", "status": "ok"}
        sink = MemorySink()
        try:
            run(member.to_run_config(), make_grid(member.grid_size, member.hbar_eff),
                sink=sink)
        except (NormOverflowError, EdgeGuardError) as exc:
            # Keep whatever completed: the partial series is still valid data.
            if sink.records:
                _write_series(member_path, sink.records)
            row["status"] = f"error: {exc}"
            worst = 2
            rows.append(row)
            print(f"lambda={_fmt(gain)}: {row['status']}", file=sys.stderr)
            continue
        _write_series(member_path, sink.records)
        print(member_path)
        try:
            # Recompute from the stored file so the summary is a pure
            # function of the member outputs.
            summary = _member_summary(_read_series(member_path))
        except (analysis.AnalysisError, ConfigError, ValueError) as exc:
            row["status"] = f"error: {exc}"
            worst = worst or 3
        else:
            row.update({k: _fmt(v) for k, v in summary.items()})
        rows.append(row)

    summary_path = out_dir / f"{stem}_sweep_summary.csv"
    with summary_path.open("w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=("lambda", "G", "alpha", "e_pot_late", "status"))
        writer.writeheader()
        writer.writerows(rows)
    print(summary_path)
    return worst


def _parse_window(token: str, n: int) -> tuple[int, int]:
    lo_txt, sep, hi_txt = token.partition("..")
    if not sep:
        raise ConfigError(f"bad window {token!r}; expected LO..HI")
    try:
        lo = int(lo_txt) if lo_txt else 0
        hi = int(hi_txt) if hi_txt else n
    except ValueError as exc:
        raise ConfigError(f"bad window {token!r}: {exc}") from exc
    if not 0 <= lo < hi <= n:
        raise ConfigError(f"window {token!r} out of range for {n}-point series")
    return lo, hi


def _parse_fit_spec(spec: str, n: int) -> dict[str, object]:
    parts = spec.split(":")
    if len(parts) < 2:
        raise ConfigError(f"bad fit spec {spec!r}; expected KIND:COLUMN[:key=value,...]")
    kind, column = parts[0], parts[1]
    if kind not in _FIT_KINDS:
        raise ConfigError(f"unknown fit kind {kind!r}; choose from {', '.join(_FIT_KINDS)}")
    if column not in _SERIES_COLUMNS[1:]:
        raise ConfigError(f"unknown series column {column!r}")
    options: dict[str, object] = {"kind": kind, "column": column, "window": (0, n)}
    for item in ":".join(parts[2:]).split(",") if len(parts) > 2 else ():
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"bad fit option {item!r}; expected key=value")
        if key == "window":
            options["window"] = _parse_window(value, n)
        elif key == "envelope":
            if value not in (analysis.ENVELOPE_PURE, "pure", "exp_power"):
                raise ConfigError(f"bad envelope {value!r}")
            options["envelope"] = (analysis.ENVELOPE_PURE if value in ("pure", analysis.ENVELOPE_PURE)
                                   else analysis.ENVELOPE_EXP_POWER)
        elif key == "sign":
            if value not in ("minus", "plus"):
                raise ConfigError(f"bad sign {value!r}; choose minus or plus")
            options["sign"] = analysis.SIGN_MINUS if value == "minus" else analysis.SIGN_PLUS
        elif key == "detrend":
            if value not in ("asymptote", "mean", "none"):
                raise ConfigError(f"bad detrend {value!r}")
            options["detrend"] = value
        elif key == "drift":
            try:
                options["drift"] = float(value)
            except ValueError as exc:
                raise ConfigError(f"bad drift {value!r}") from exc
        else:
            raise ConfigError(f"unknown fit option {key!r}")
    return options


def _run_fit(series: dict[str, np.ndarray], opts: dict[str, object]) -> dict[str, object]:
    t = series["t"]
    y = series[opts["column"]]  # type: ignore[index]
    lo, hi = opts["window"]  # type: ignore[misc]
    kind = opts["kind"]
    report: dict[str, object] = {"kind": kind, "column": opts["column"], "window": [lo, hi]}

    if kind == "linear":
        fit = analysis.fit_linear(t, y, window=(lo, hi))
        report.update(slope=fit.slope, intercept=fit.intercept,
                      r_squared=fit.r_squared, G=fit.slope)
    elif kind == "power":
        fit = analysis.fit_power_law(t, y, window=(lo, hi))
        report.update(prefactor=fit.prefactor, exponent=fit.exponent,
                      r_squared=fit.r_squared, alpha=fit.exponent)
    elif kind == "quadratic":
        if "drift" in opts:
            drift = float(opts["drift"])  # type: ignore[arg-type]
        else:
            n = t.size
            drift = analysis.fit_linear(t, series["p_mean"],
                                        window=analysis.late_half(n)).slope
        fit = analysis.fit_quadratic_energy(t[lo:hi], y[lo:hi], drift)
        report.update(drift_rate=drift, offset=fit.offset,
                      max_late_residual=fit.max_late_residual)
    elif kind == "freq":
        omega = analysis.estimate_frequency(t[lo:hi], y[lo:hi],
                                            detrend=opts.get("detrend", "asymptote"))  # type: ignore[arg-type]
        report.update(omega=omega)
    elif kind == "damped":
        fit = analysis.fit_damped_cosine(
            t[lo:hi], y[lo:hi],
            envelope_kind=opts.get("envelope", analysis.ENVELOPE_PURE),  # type: ignore[arg-type]
            sign=opts.get("sign", analysis.SIGN_MINUS))  # type: ignore[arg-type]
        report.update(saturation=fit.saturation, asymptote_coeff=fit.asymptote_coeff,
                      asymptote_rate=fit.asymptote_rate, amplitude_scale=fit.amplitude_scale,
                      decay_time=fit.decay_time, envelope_kind=fit.envelope_kind,
                      omega_c=fit.omega_c, t0=fit.t0, d_shift=fit.d_shift,
                      gamma=fit.gamma, sign=fit.sign, r_squared=fit.r_squared)
    else:
        fit = analysis.fit_double_exponential(t[lo:hi], y[lo:hi])
        report.update(saturation=fit.saturation, amp_fast=fit.amp_fast,
                      time_fast=fit.time_fast, amp_slow=fit.amp_slow,
                      time_slow=fit.time_slow, r_squared=fit.r_squared,
                      slow_resolved=fit.slow_resolved)
    return report


def _overlay_line(report: dict[str, object]) -> str:
    lo, hi = report["window"]  # type: ignore[misc]
    skip = {"kind", "column", "window", "status"}
    body = "  ".join(
        f"{key}={value:.6g}" if isinstance(value, float) else f"{key}={value}"
        for key, value in report.items() if key not in skip)
    return f"{report['kind']:<10} {report['column']:<8} window={lo}..{hi}  {body}"


def _cmd_analyze(args) -> int:
    series = _read_series(Path(args.series))
    n = series["t"].size
    out_dir = Path(args.out if args.out is not None else ".")
    out_dir.mkdir(parents=True, exist_ok=True)

    failed = False
    reports = []
    for spec in args.fit:
        opts = _parse_fit_spec(spec, n)
        try:
            report = _run_fit(series, opts)
            report["status"] = "ok"
        except analysis.AnalysisError as exc:
            report = {"kind": opts["kind"], "column": opts["column"],
                      "window": list(opts["window"]),  # type: ignore[arg-type]
                      "status": f"error: {exc}"}
            failed = True
        except ValueError as exc:
            raise ConfigError(f"fit {spec!r}: {exc}") from exc
        reports.append(report)

    report_path = out_dir / f"{Path(args.series).stem}_fits.json"
    report_path.write_text(json.dumps({"fits": reports}, sort_keys=True, indent=2) + "\n")
    for report in reports:
        print(_overlay_line(report) if report["status"] == "ok"
              else f"{report['kind']:<10} {report['column']:<8} {report['status']}")
    print(report_path)
    return 3 if failed else 0


def _cmd_preset(args) -> int:
    if args.action == "list":
        for name in preset_names():
            print(name)
        return 0
    print(render_config(preset_config(args.name)), end="")
    return 0


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="path to a JSON configuration document")
    parser.add_argument("--preset", help="name of a bundled preset")
    parser.add_argument("--out", help="output directory (overrides the config)")
    parser.add_argument("--kicks", type=int, help="override total_kicks")
    parser.add_argument("--grid", type=int, help="override grid_size")
    parser.add_argument("--substeps", type=int, help="override substeps")


def _build_parser() -> _Parser:
    parser = _Parser(prog="ptkho", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    evolve = sub.add_parser("evolve", help="run one configuration and write its series")
    _add_run_flags(evolve)
    evolve.set_defaults(func=_cmd_evolve)

    sweep = sub.add_parser("sweep", help="run a configuration across gain values")
    _add_run_flags(sweep)
    sweep.add_argument("--lambda", dest="lambda_values", required=True,
                       help="comma-separated list of kick gain values")
    sweep.set_defaults(func=_cmd_sweep)

    analyze = sub.add_parser("analyze", help="fit a stored series")
    analyze.add_argument("series", help="series file written by evolve")
    analyze.add_argument("--fit", action="append", required=True,
                         help="fit spec KIND:COLUMN[:key=value,...]; repeatable")
    analyze.add_argument("--out", help="directory for the fit report (default .)")
    analyze.set_defaults(func=_cmd_analyze)

    preset = sub.add_parser("preset", help="inspect bundled presets")
    preset_sub = preset.add_subparsers(dest="action", required=True, parser_class=_Parser)
    preset_sub.add_parser("list", help="list preset names").set_defaults(func=_cmd_preset)
    show = preset_sub.add_parser("show", help="print one preset as a config document")
    show.add_argument("name")
    show.set_defaults(func=_cmd_preset)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"ptkho: error: {exc}", file=sys.stderr)
        return 1
    except (NormOverflowError, EdgeGuardError) as exc:
        print(f"ptkho: physics error: {exc}", file=sys.stderr)
        return 2
    except analysis.AnalysisError as exc:
        print(f"ptkho: fit error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"ptkho: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
