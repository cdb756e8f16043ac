"""Command line: ``irrigdemand {preprocess,crossval,forecast,synth}``.

Every subcommand also reads ``--config FILE``: an INI file whose section
names are subcommands (plus an optional ``[common]`` section) and whose
keys are the long flag names without dashes, e.g. ``season-end``.  Flags
given on the command line override the file.  Repeatable flags take
several values separated by newlines or commas.

Exit status: 0 success, 2 usage or configuration error, 3 data error.
"""

from __future__ import annotations

import argparse
import configparser
import datetime
import logging
import sys
from pathlib import Path

from .c45 import C45Params
from .core import ConfigError, GapError, IrrigDemandError, RowError, SchemaError, default_schema
from .etc_baseline import default_kc_table, load_kc_csv
from .evaluation import (
    MODEL_NAMES,
    build_node_reports,
    cross_validate,
    cross_validate_external,
    emit_reports,
    load_external_predictions,
    make_model,
    node_aggregate,
    read_node_actuals,
    seasonal_demand,
    write_farm_demand_csv,
    write_folds_csv,
)
from .ingest import parse_farm_csv, weather_for_farm
from .pipeline import attach_eto, load_stations, prepare_dataset_from_files
from .preprocess import read_dataset_csv, write_dataset_csv
from .synth import ScenarioConfig, generate
from .sysfor import SysForParams

log = logging.getLogger("irrigdemand")

EXIT_USAGE = 2
EXIT_DATA = 3

DEFAULTS = {
    "bins": 6,
    "folds": 3,
    "seed": 0,
    "min_leaf": 10,
    "min_gain_ratio": 0.01,
    "max_depth": 15,
    "num_trees": 5,
    "goodness": 0.3,
    "separation": 0.3,
    "output": None,
    "out_dir": ".",
    "model": [],
    "weather": [],
    "exclude_nodes": [],
    "n_farms": 20,
    "n_days": 120,
    "period": 7,
    "noise": 0.0,
    "start_date": "2008-10-01",
}


def _date(text: str) -> datetime.date:
    try:
        return datetime.date.fromisoformat(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected YYYY-MM-DD, got {text!r}") from None


def _split_list(values) -> list[str]:
    out = []
    for v in values or []:
        out.extend(p.strip() for p in str(v).replace("\n", ",").split(",") if p.strip())
    return out


def _model_flags(p):
    g = p.add_argument_group("model parameters")
    g.add_argument("--min-leaf", type=int, help="minimum records per leaf (default 10)")
    g.add_argument("--min-gain-ratio", type=float, help="stop below this gain ratio (default 0.01)")
    g.add_argument("--max-depth", type=int, help="maximum depth, -1 for unlimited (default 15)")
    g.add_argument("--num-trees", type=int, help="SysFor trees (default 5)")
    g.add_argument("--goodness", type=float, help="SysFor relative goodness (default 0.3)")
    g.add_argument("--separation", type=float, help="SysFor threshold separation (default 0.3)")
    g.add_argument("--kc", type=Path, help="crop coefficient table crop_type,kc (default: shipped placeholders)")
    g.add_argument("--bins", type=int, help="number of 0.05 ML/ha/day usage bins (default 6)")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="INI file with per-command defaults")
    common.add_argument("-v", "--verbose", action="store_true", default=None)

    parser = argparse.ArgumentParser(prog="irrigdemand", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", parents=[common], help="build a daily dataset from delivery statements")
    p.add_argument("--method", choices=["ewd", "rep"], help="disaggregation method")
    p.add_argument("--weather", action="append", help="weather CSV, or STATION=path (repeatable)")
    p.add_argument("--deliveries", type=Path)
    p.add_argument("--farms", type=Path)
    p.add_argument("--season-end", type=_date)
    p.add_argument("--bins", type=int, help="number of 0.05 ML/ha/day usage bins (default 6)")
    p.add_argument("-o", "--output", type=Path, help="dataset CSV to write")

    p = sub.add_parser("crossval", parents=[common], help="k-fold accuracy of one or more models")
    p.add_argument("dataset", nargs="?", type=Path)
    p.add_argument("--model", action="append", help=f"one of {', '.join(MODEL_NAMES)} (repeatable)")
    p.add_argument("--folds", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--weather", action="append", help="weather for the etc model's ET_o lookup")
    p.add_argument("--farms", type=Path, help="farm table, needed only with several weather stations")
    p.add_argument("--external", type=Path, help="external_predictions.csv to score on the same folds")
    p.add_argument("-o", "--output", type=Path, help="folds CSV to write (default folds.csv)")
    _model_flags(p)

    p = sub.add_parser("forecast", parents=[common], help="seasonal demand per farm and node")
    p.add_argument("--dataset", type=Path, help="training dataset CSV")
    p.add_argument("--model", action="append", help=f"one of {', '.join(MODEL_NAMES)} (repeatable)")
    p.add_argument("--farms", type=Path)
    p.add_argument("--weather", action="append", help="forecast weather CSV, or STATION=path")
    p.add_argument("--start", type=_date, help="first forecast day (default: first weather day)")
    p.add_argument("--days", type=int, help="horizon in days (default: through the last weather day)")
    p.add_argument("--actuals", type=Path, help="node_id,actual_ml CSV for closeness scores")
    p.add_argument("--exclude-nodes", action="append", help="comma-separated nodes left out of scoring")
    p.add_argument("--out-dir", type=Path)
    _model_flags(p)

    p = sub.add_parser("synth", parents=[common], help="write a synthetic scenario")
    p.add_argument("--seed", type=int)
    p.add_argument("--n-farms", type=int)
    p.add_argument("--n-days", type=int)
    p.add_argument("--period", type=int, help="days between deliveries")
    p.add_argument("--noise", type=float)
    p.add_argument("--start-date", type=_date)
    p.add_argument("--out-dir", type=Path)

    # Everything defaults to None so config-file values can be told apart from flags.
    for action in sub.choices.values():
        for a in action._actions:
            if a.dest not in ("help", "command"):
                a.default = None
    return parser


def _config_argv(path: Path, command: str, known: set[str]) -> list[str]:
    cp = configparser.ConfigParser(interpolation=None)
    try:
        with path.open(encoding="utf-8") as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    argv = []
    for section in ("common", command):
        if not cp.has_section(section):
            continue
        for key, value in cp.items(section):
            if key == "config":
                continue
            if section == "common" and f"--{key}" not in known and key != "dataset":
                continue
            if key == "dataset" and command == "crossval":
                argv.append(value)
                continue
            if key == "verbose":
                if cp.getboolean(section, key):
                    argv.append("--verbose")
                continue
            values = [v.strip() for v in value.splitlines() if v.strip()] or [value]
            for v in values:
                argv += [f"--{key}", v]
    return argv


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    ns = parser.parse_args(argv)
    if ns.config is not None:
        try:
            sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
            known = set(sub.choices[ns.command]._option_string_actions)
            from_file = parser.parse_args([ns.command] + _config_argv(ns.config, ns.command, known))
        except SystemExit:
            raise ConfigError(f"{ns.config}: invalid entries for [{ns.command}]") from None
        for key, value in vars(from_file).items():
            if getattr(ns, key, None) is None:
                setattr(ns, key, value)
    for key, value in DEFAULTS.items():
        if getattr(ns, key, None) is None and hasattr(ns, key):
            setattr(ns, key, value)
    return ns


def _require(ns, *names):
    missing = [n for n in names if not getattr(ns, n, None)]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise ConfigError(f"{ns.command}: missing required {flags}")


def _models(ns) -> list[str]:
    models = _split_list(ns.model)
    if not models:
        raise ConfigError(f"{ns.command}: at least one --model is required")
    bad = [m for m in models if m not in MODEL_NAMES]
    if bad:
        raise ConfigError(f"unknown model(s) {bad}; choose from {', '.join(MODEL_NAMES)}")
    return list(dict.fromkeys(models))


def _params(ns):
    try:
        c45 = C45Params(ns.min_leaf, ns.min_gain_ratio, None if ns.max_depth < 0 else ns.max_depth)
        sysfor = SysForParams(ns.num_trees, ns.goodness, ns.separation, c45)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    kc = load_kc_csv(ns.kc) if ns.kc else default_kc_table()
    return {"c45": c45, "sysfor": sysfor, "kc_table": kc}


def cmd_preprocess(ns) -> int:
    _require(ns, "method", "weather", "deliveries", "farms", "season_end", "output")
    dataset = prepare_dataset_from_files(
        _split_list(ns.weather), ns.deliveries, ns.farms, ns.season_end, ns.method, default_schema(ns.bins)
    )
    write_dataset_csv(dataset, ns.output)
    log.info("wrote %d records to %s", len(dataset), ns.output)
    return 0


def cmd_crossval(ns) -> int:
    _require(ns, "dataset")
    if ns.folds < 2:
        raise ConfigError("--folds must be >= 2")
    models = _models(ns)
    kwargs = _params(ns)
    schema = default_schema(ns.bins)
    dataset = read_dataset_csv(ns.dataset, schema)
    if "etc" in models:
        if not ns.weather:
            raise ConfigError("the etc model needs --weather to look up ET_o")
        farms = parse_farm_csv(ns.farms) if ns.farms else ()
        dataset = attach_eto(dataset, load_stations(_split_list(ns.weather)), farms)
    reports = [cross_validate(m, dataset, ns.folds, ns.seed, **kwargs) for m in models]
    if ns.external:
        for ext in load_external_predictions(ns.external, schema).values():
            reports.append(cross_validate_external(ext, dataset, ns.folds, ns.seed))
    out = ns.output or Path("folds.csv")
    write_folds_csv(reports, out)
    for rep in reports:
        folds = "  ".join(f"{a:6.2f}" for a in rep.accuracies)
        print(f"{rep.model:>10}  {folds}  avg {rep.average:6.2f}")
    return 0


def cmd_forecast(ns) -> int:
    _require(ns, "dataset", "farms", "weather")
    models = _models(ns)
    kwargs = _params(ns)
    schema = default_schema(ns.bins)
    dataset = read_dataset_csv(ns.dataset, schema)
    farms = parse_farm_csv(ns.farms)
    stations = load_stations(_split_list(ns.weather))

    first = min(min(s) for s in stations.values() if s)
    start = ns.start or first
    if ns.days is not None:
        if ns.days < 0:
            raise ConfigError("--days must be >= 0")
        days = ns.days
    else:
        last = max(max(s) for s in stations.values() if s)
        days = (last - start).days + 1
    if days < 0:
        raise ConfigError("--start is after the last weather day")

    actuals = read_node_actuals(ns.actuals) if ns.actuals else None
    farm_nodes = {f.farm_id: f.node_id for f in farms}
    rows = []
    predicted = {}
    for name in models:
        model = make_model(name, **kwargs).fit(dataset)
        demands = {}
        for farm in farms:
            ml = seasonal_demand(model, farm, weather_for_farm(farm, stations), start, days, schema)
            demands[farm.farm_id] = ml
            rows.append((farm.farm_id, farm.node_id, name, ml))
        totals, empty = node_aggregate(demands, farm_nodes, actuals or ())
        predicted[name] = totals
    if empty:
        log.warning("nodes without farms: %s", ", ".join(empty))
    reports = build_node_reports(predicted, actuals, _split_list(ns.exclude_nodes))
    out = Path(ns.out_dir)
    emit_reports([], reports, out, models)
    write_farm_demand_csv(rows, out / "farm_demand.csv")
    for r in reports:
        cells = "  ".join(f"{m}={r.predicted_ml[m]:.1f}" for m in models)
        actual = "" if r.actual_ml is None else f"actual={r.actual_ml:.1f}  "
        flag = "  (excluded)" if r.excluded else ""
        print(f"{r.node_id:>14}  {actual}{cells}{flag}")
    return 0


def cmd_synth(ns) -> int:
    start = ns.start_date if isinstance(ns.start_date, datetime.date) else _date(ns.start_date)
    try:
        cfg = ScenarioConfig(seed=ns.seed, n_farms=ns.n_farms, n_days=ns.n_days,
                             delivery_period=ns.period, noise=ns.noise, start_date=start)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    paths = generate(cfg, ns.out_dir)
    print(f"season end {cfg.season_end.isoformat()}")
    for name, path in paths.items():
        print(f"{name:>10}  {path}")
    return 0


COMMANDS = {
    "preprocess": cmd_preprocess,
    "crossval": cmd_crossval,
    "forecast": cmd_forecast,
    "synth": cmd_synth,
}


def main(argv=None) -> int:
    try:
        ns = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except ConfigError as exc:
        print(f"irrigdemand: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[ns.command](ns)
    except (ConfigError, SchemaError) as exc:
        print(f"irrigdemand: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GapError, RowError) as exc:
        print(f"irrigdemand: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"irrigdemand: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IrrigDemandError as exc:
        print(f"irrigdemand: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
