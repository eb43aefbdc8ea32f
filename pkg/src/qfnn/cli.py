"""Command line interface: ``qfnn train | forecast | baseline | evaluate``.

Exit status is 0 on success, 1 for user errors (bad input, bad flags,
diverged training) and 2 for anything unexpected.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import baselines
from .data import CSVFormatError, TimeSeries, load_csv, split_and_normalize, write_series_csv
from .evaluation import (
    build_intervals,
    coverage_table,
    crossing_rate,
    quantile_score,
    rearrange,
)
from .forecast import (
    ForecastFileError,
    QuantileForecast,
    QuantileGrid,
    read_forecast_csv,
    write_forecast_csv,
)
from .fourier_network import PARAM_GROUPS, PHASE_INITS, REGULARIZE_CHOICES, predict_quantiles
from .model_io import ModelFormatError, SavedModel, load, save
from .trainer import TrainConfig, TrainingDivergedError, fit

log = logging.getLogger("qfnn")

USER_ERRORS = (ValueError, FileNotFoundError, CSVFormatError, ForecastFileError,
               ModelFormatError, TrainingDivergedError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def read_config_file(path) -> dict:
    """Parse a flat ``key = value`` file; keys use flag names (dashes or underscores)."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"config file not found: {path}")
    out = {}
    for lineno, line in enumerate(path.read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _parse_overrides(items) -> dict:
    out = {}
    for item in items or ():
        name, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"--lr-override expects GROUP=RATE, got {item!r}")
        name = name.strip()
        if name not in PARAM_GROUPS:
            raise ValueError(f"unknown parameter group {name!r}; choose from {', '.join(PARAM_GROUPS)}")
        out[name] = float(value)
    return out


def _add_horizon_args(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--steps", type=int, help="number of steps past the training end, at the training cadence")
    g.add_argument("--times", help="explicit comma-separated raw times")
    g.add_argument("--times-from", help="take the time column of this CSV (e.g. test.csv)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qfnn", description="Quantile Fourier network forecasting")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="fit a model on the training part of a series")
    p.add_argument("--config", help="flat key=value file with defaults for any flag below")
    p.add_argument("--input", help="CSV with time,value columns or a single value column")
    p.add_argument("--time-column", help="time column name/index, or 'index' for row numbers")
    p.add_argument("--value-column", help="value column name/index (default: last column)")
    hdr = p.add_mutually_exclusive_group()
    hdr.add_argument("--header", dest="has_header", action="store_const", const=True)
    hdr.add_argument("--no-header", dest="has_header", action="store_const", const=False)
    p.add_argument("--output-dir", default="qfnn_out")
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--epochs", type=int, default=1000)
    p.add_argument("--learning-rate", type=float, default=0.1)
    p.add_argument("--alpha", type=float, default=0.01, help="smooth pinball width")
    p.add_argument("--lam", type=float, default=0.1, help="elastic-net strength")
    p.add_argument("--mix", type=float, default=0.5, help="elastic-net L1 fraction")
    p.add_argument("--hidden", type=int, default=20, help="number of sinusoid units")
    p.add_argument("--quantiles", type=int, default=100, help="levels, equally spaced in [0.01, 0.99]")
    p.add_argument("--phase-init", choices=PHASE_INITS, default="zero")
    p.add_argument("--regularize", choices=REGULARIZE_CHOICES, default="amplitudes")
    p.add_argument("--lr-override", action="append", metavar="GROUP=RATE",
                   help="per-group learning rate, repeatable")
    p.add_argument("--scale-values", action="store_true", help="min-max scale values before training")

    p = sub.add_parser("forecast", help="write quantile forecasts from a saved model")
    p.add_argument("--model", required=True)
    _add_horizon_args(p)
    p.add_argument("--output", required=True, help="forecast CSV path")
    p.add_argument("--rearrange", action="store_true", help="sort each row to remove crossings")
    p.add_argument("--intervals", help="also write the nested prediction intervals to this CSV")

    p = sub.add_parser("baseline", help="write uniform/persistence/climatology forecasts")
    p.add_argument("--history", required=True, help="training series CSV")
    p.add_argument("--model", help="take the quantile grid and horizon cadence from this model")
    p.add_argument("--quantiles", type=int, default=100)
    _add_horizon_args(p)
    p.add_argument("--window", type=int, default=24, help="persistence window (observations)")
    p.add_argument("--output-dir", required=True)

    p = sub.add_parser("evaluate", help="score a forecast against observations")
    p.add_argument("--forecast", required=True)
    p.add_argument("--actuals", required=True, help="CSV of observed time,value")
    p.add_argument("--baselines", action="store_true", help="also score the three reference models")
    p.add_argument("--history", help="training series CSV (required with --baselines)")
    p.add_argument("--window", type=int, default=24)
    p.add_argument("--report", help="write the key=value metrics report here")
    parser.set_defaults(_subparsers=sub.choices)
    return parser


def _apply_config(parser, argv):
    """Two-pass parse so config-file values act as defaults and flags win.

    Config keys are long flag names without the leading dashes.
    """
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        sub = args._subparsers[args.command]
        known = {}
        for action in sub._actions:
            for opt in action.option_strings:
                if opt.startswith("--"):
                    known[opt[2:].replace("-", "_")] = action
        defaults = {}
        for key, raw in read_config_file(args.config).items():
            if key not in known or key in ("config", "help"):
                raise ValueError(f"unknown config key {key!r}")
            action = known[key]
            if key == "lr_override":
                defaults[action.dest] = [s.strip() for s in raw.split(",") if s.strip()]
            elif isinstance(action, argparse._StoreConstAction):
                if raw.lower() in ("1", "true", "yes", "on"):
                    defaults[action.dest] = action.const
            elif action.type is not None:
                defaults[action.dest] = action.type(raw)
            else:
                defaults[action.dest] = raw
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def _horizon_times(args, train_end: float, cadence: float):
    if args.times is not None:
        parts = [s for s in args.times.split(",") if s.strip()]
        return np.array([float(s) for s in parts])
    if args.times_from is not None:
        return load_csv(args.times_from).raw_times
    steps = args.steps if args.steps is not None else 0
    if steps < 0:
        raise ValueError("--steps must be nonnegative")
    return train_end + cadence * np.arange(1, steps + 1)


def cmd_train(args) -> int:
    if not args.input:
        raise ValueError("--input is required (on the command line or in --config)")
    series = load_csv(args.input, args.time_column, args.value_column, args.has_header)
    train, test = split_and_normalize(series, args.train_fraction, scale_values=args.scale_values)
    cfg = TrainConfig(
        epochs=args.epochs,
        learning_rate=args.learning_rate,
        alpha=args.alpha,
        lam=args.lam,
        mix=args.mix,
        hidden_sinusoids=args.hidden,
        grid=QuantileGrid.uniform(args.quantiles),
        phase_init=args.phase_init,
        regularize=args.regularize,
        lr_overrides=_parse_overrides(args.lr_override),
    )
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    log_lines = ["epoch,cost"]

    def on_epoch(epoch, value):
        log_lines.append(f"{epoch},{value!r}")
        if epoch % 100 == 0:
            log.info("epoch %d cost %.6f", epoch, value)

    report = fit(train, cfg, on_epoch=on_epoch)
    t = train.raw_times
    model = SavedModel(
        params=report.final_params,
        config=cfg,
        time_offset=train.norm_offset,
        time_scale=train.norm_scale,
        cadence=float((t[-1] - t[0]) / (t.size - 1)),
        train_end=float(t[-1]),
        value_offset=train.value_offset,
        value_scale=train.value_scale,
    )
    save(model, out / "model.txt")
    (out / "train_log.csv").write_text("\n".join(log_lines) + "\n")
    write_series_csv(out / "train.csv", train)
    write_series_csv(out / "test.csv", test)
    print(f"final training cost: {report.final_cost!r}")
    return 0


def model_forecast(model: SavedModel, raw_times) -> QuantileForecast:
    """Forecast in raw time and value units."""
    raw_times = np.asarray(raw_times, dtype=float)
    norm = (raw_times - model.time_offset) / model.time_scale
    fc = predict_quantiles(model.params, norm, model.grid)
    values = fc.values * model.value_scale + model.value_offset
    return QuantileForecast(times=raw_times, grid=model.grid, values=values)


def write_intervals_csv(path, forecast: QuantileForecast) -> None:
    intervals = build_intervals(forecast)
    header = ["time"]
    for iv in intervals:
        header += [f"lower_{iv.tau_lower!r}", f"upper_{iv.tau_upper!r}"]
    lines = [",".join(header)]
    for i, t in enumerate(forecast.times):
        row = [repr(float(t))]
        for iv in intervals:
            row += [repr(float(iv.lower[i])), repr(float(iv.upper[i]))]
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


def cmd_forecast(args) -> int:
    model = load(args.model)
    times = _horizon_times(args, model.train_end, model.cadence)
    fc = model_forecast(model, times)
    if args.rearrange:
        fc = rearrange(fc)
    write_forecast_csv(args.output, fc)
    if args.intervals:
        write_intervals_csv(args.intervals, fc)
    print(f"wrote {fc.horizon} x {len(fc.grid)} forecast to {args.output}")
    return 0


def baseline_forecasts(history: TimeSeries, grid: QuantileGrid, times, window: int) -> dict:
    if window < 2:
        raise ValueError("--window must be at least 2")
    values = history.values
    return {
        "uniform": baselines.uniform(values, grid, times),
        "persistence": baselines.persistence(values[-window:], grid, times),
        "climatology": baselines.climatology(values, grid, times),
    }


def cmd_baseline(args) -> int:
    history = load_csv(args.history)
    t = history.raw_times
    if args.model:
        model = load(args.model)
        grid, cadence = model.grid, model.cadence
    else:
        grid = QuantileGrid.uniform(args.quantiles)
        cadence = float((t[-1] - t[0]) / (t.size - 1)) if t.size > 1 else 1.0
    times = _horizon_times(args, float(t[-1]), cadence)
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, fc in baseline_forecasts(history, grid, times, args.window).items():
        write_forecast_csv(out / f"baseline_{name}.csv", fc)
    print(f"wrote uniform, persistence and climatology forecasts to {out}")
    return 0


def metrics_report(actuals, forecasts: dict) -> list[str]:
    """Flat key=value lines: averaged QS, crossing rate and per-level coverage."""
    lines = ["# averaged quantile score (lower is better)"]
    for name, fc in forecasts.items():
        lines.append(f"qs.{name} = {quantile_score(actuals, fc, averaged=True)!r}")
    for name, fc in forecasts.items():
        if len(fc.grid) >= 2:
            lines.append(f"crossing_rate.{name} = {crossing_rate(fc)!r}")
    for name, fc in forecasts.items():
        cov = coverage_table(actuals, fc)
        for tau, c in zip(fc.grid.taus, cov):
            lines.append(f"coverage.{name}.{float(tau)!r} = {float(c)!r}")
    return lines


DISPLAY_NAMES = {"qfnn": "QFNN", "uniform": "Uniform", "persistence": "Persistence",
                 "climatology": "Climatology"}


def cmd_evaluate(args) -> int:
    fc = read_forecast_csv(args.forecast)
    actual = load_csv(args.actuals)
    if actual.values.size != fc.horizon:
        raise ValueError(f"forecast has {fc.horizon} steps but actuals have {actual.values.size}")
    if not np.allclose(actual.raw_times, fc.times, rtol=1e-12, atol=1e-9):
        raise ValueError("forecast times do not line up with the actuals")
    forecasts = {"qfnn": fc}
    if args.baselines:
        if not args.history:
            raise ValueError("--baselines needs --history with the training series")
        history = load_csv(args.history)
        forecasts = {**baseline_forecasts(history, fc.grid, fc.times, args.window), **forecasts}
    y = actual.values
    names = list(forecasts)
    scores = [quantile_score(y, forecasts[n]) for n in names]
    width = max(12, *(len(n) + 2 for n in names))
    print("".join(DISPLAY_NAMES.get(n, n).rjust(width) for n in names))
    print("".join(f"{s:.4f}".rjust(width) for s in scores))
    if len(fc.grid) >= 2:
        print(f"qfnn crossing rate: {crossing_rate(fc):.4f}")
    if args.report:
        Path(args.report).write_text("\n".join(metrics_report(y, forecasts)) + "\n")
    return 0


COMMANDS = {
    "train": cmd_train,
    "forecast": cmd_forecast,
    "baseline": cmd_baseline,
    "evaluate": cmd_evaluate,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except USER_ERRORS as exc:
        print(f"qfnn: error: {exc}", file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except USER_ERRORS as exc:
        print(f"qfnn: error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        print(f"qfnn: internal error: {exc!r}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
