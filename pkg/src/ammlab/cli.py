"""Command-line front end: ``ammlab {simulate,sweep,experiment,estimate,replay}``.

Every command writes its CSV outputs plus ``manifest.txt`` into ``--out``;
``ammlab replay manifest.txt --out DIR`` reproduces them byte for byte.
Exit status: 0 success, 2 usage/config error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from . import __version__
from .config import ConfigError, ExperimentConfig, SimConfig, build, format_value, load, parse_pairs, to_row
from .engine import AXES, reversion_coefficients, reversion_standard_errors, run_monte_carlo, sweep
from .experiment import (PanelSchemaError, estimate_treatment_effect, generate_panel,
                         heterogeneity_split, read_panel, write_panel)
from .regression import symmetry_test

log = logging.getLogger("ammlab")

EXIT_USAGE = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return "" if x is None else str(x)


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _write_manifest(out: Path, command: str, config, args: dict[str, str], outputs: list[str]) -> None:
    lines = [f"command = {command}", f"version = {__version__}"]
    if config is not None:
        lines += [f"config.{k} = {v}" for k, v in to_row(config).items()]
    lines += [f"arg.{k} = {v}" for k, v in args.items()]
    lines.append(f"outputs = {', '.join(outputs + ['manifest.txt'])}")
    (out / "manifest.txt").write_text("\n".join(lines) + "\n")


def _overrides(ns) -> dict[str, str]:
    pairs = {}
    for item in ns.set or []:
        if "=" not in item:
            raise UsageError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        pairs[k.strip()] = v.strip()
    if getattr(ns, "seed", None) is not None:
        pairs["seed"] = str(ns.seed)
    if getattr(ns, "reps", None) is not None:
        pairs["replications"] = str(ns.reps)
    return pairs


def _out_dir(ns) -> Path:
    out = Path(ns.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# -- commands ---------------------------------------------------------------

def run_simulate(config: SimConfig, out: Path) -> None:
    path = run_monte_carlo(config)
    periods = path.periods
    _write_csv(out / "path.csv", ["period", "mean_price", "std_error", "n_reps"],
               ([int(k), float(p), float(s), path.replications]
                for k, p, s in zip(periods, path.mean_prices, path.standard_errors)))
    try:
        sr, lr = reversion_coefficients(path, config.shock)
        sr_se, lr_se = reversion_standard_errors(path, config.shock)
    except ValueError as exc:
        log.warning("reversion not reported: %s", exc)
        sr = lr = sr_se = lr_se = float("nan")
    row = to_row(config)
    _write_csv(out / "summary.csv", list(row) + ["sr_reversion", "lr_reversion", "sr_se", "lr_se"],
               [list(row.values()) + [sr, lr, sr_se, lr_se]])
    _write_manifest(out, "simulate", config, {}, ["path.csv", "summary.csv"])


def parse_values(axis: str, text: str) -> list:
    items = [s.strip() for s in text.split(",") if s.strip()]
    if not items:
        raise UsageError("--values must list at least one value")
    try:
        return [int(s) for s in items] if axis == "m" else [float(s) for s in items]
    except ValueError as exc:
        raise UsageError(f"bad --values: {exc}") from None


def run_sweep(config: SimConfig, axis: str, values: list, out: Path) -> None:
    rows = sweep(config, axis, values)
    _write_csv(out / "table_a1.csv", ["axis", "value", "sr_reversion", "lr_reversion"],
               ([r.axis, r.value, r.sr_reversion, r.lr_reversion] for r in rows))
    _write_manifest(out, "sweep", config,
                    {"axis": axis, "values": format_value(tuple(values))}, ["table_a1.csv"])


def run_experiment(config: ExperimentConfig, out: Path) -> None:
    write_panel(generate_panel(config), out / "panel.csv")
    _write_manifest(out, "experiment", config, {}, ["panel.csv"])


ESTIMATE_HEADER = ["term", "estimate", "robust_se", "t_stat", "p_value", "split_point", "n_obs", "r_squared"]


def run_estimate(panel_path: str, horizon: int, test: str | None, split: str | None, out: Path) -> None:
    panel = read_panel(panel_path)
    if split:
        report = heterogeneity_split(panel, split, horizon)
    else:
        report = estimate_treatment_effect(panel, horizon)
    point = report.info.get("split_point")
    rows = [[name, float(b), float(se), float(t), float(p), point, report.n_obs, report.r_squared]
            for name, b, se, t, p in zip(report.names, report.coefficients, report.standard_errors,
                                          report.t_stats, report.p_values)]
    if test == "symmetry":
        f_stat, p_value = symmetry_test(report)
        rows.append(["symmetry_F", f_stat, None, None, p_value, point, report.n_obs, report.r_squared])
    _write_csv(out / "estimates.csv", ESTIMATE_HEADER, rows)
    args = {"panel": str(Path(panel_path).resolve()), "horizon": str(horizon)}
    if test:
        args["test"] = test
    if split:
        args["split"] = split
    _write_manifest(out, "estimate", None, args, ["estimates.csv"])


def run_replay(manifest: Path, out: Path) -> None:
    pairs = parse_pairs(manifest.read_text(), str(manifest))
    command = pairs.pop("command", None)
    pairs.pop("version", None)
    pairs.pop("outputs", None)
    cfg = {k[7:]: v for k, v in pairs.items() if k.startswith("config.")}
    args = {k[4:]: v for k, v in pairs.items() if k.startswith("arg.")}
    if command == "simulate":
        run_simulate(build(SimConfig, cfg), out)
    elif command == "sweep":
        run_sweep(build(SimConfig, cfg), args["axis"], parse_values(args["axis"], args["values"]), out)
    elif command == "experiment":
        run_experiment(build(ExperimentConfig, cfg), out)
    elif command == "estimate":
        run_estimate(args["panel"], int(args["horizon"]), args.get("test"), args.get("split"), out)
    else:
        raise UsageError(f"manifest has unknown command {command!r}")


# -- argument parsing -------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ammlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"ammlab {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, reps=True):
        p.add_argument("--config", help="key = value config file")
        p.add_argument("--seed", type=int)
        if reps:
            p.add_argument("--reps", type=int)
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
        p.add_argument("--out", required=True)

    common(sub.add_parser("simulate", help="Monte Carlo price path and reversion summary"))
    p = sub.add_parser("sweep", help="reversion coefficients over one parameter axis")
    common(p)
    p.add_argument("--axis", required=True, choices=sorted(AXES))
    p.add_argument("--values", required=True, help="comma-separated list")
    common(sub.add_parser("experiment", help="synthetic randomized experiment panel"), reps=False)

    p = sub.add_parser("estimate", help="treatment-effect regression on a panel CSV")
    p.add_argument("panel")
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--test", choices=["symmetry"])
    p.add_argument("--split", metavar="NAME")
    p.add_argument("--out", required=True)

    p = sub.add_parser("replay", help="re-run a command from its manifest")
    p.add_argument("manifest")
    p.add_argument("--out", required=True)
    return parser


def main(argv: list[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if ns.command == "simulate":
            config = load(SimConfig, ns.config, _overrides(ns))
            run_simulate(config, _out_dir(ns))
        elif ns.command == "sweep":
            config = load(SimConfig, ns.config, _overrides(ns))
            values = parse_values(ns.axis, ns.values)
            run_sweep(config, ns.axis, values, _out_dir(ns))
        elif ns.command == "experiment":
            config = load(ExperimentConfig, ns.config, _overrides(ns))
            run_experiment(config, _out_dir(ns))
        elif ns.command == "estimate":
            run_estimate(ns.panel, ns.horizon, ns.test, ns.split, _out_dir(ns))
        elif ns.command == "replay":
            run_replay(Path(ns.manifest), _out_dir(ns))
    except (UsageError, ConfigError, PanelSchemaError, FileNotFoundError, KeyError) as exc:
        print(f"ammlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, ArithmeticError) as exc:
        print(f"ammlab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
