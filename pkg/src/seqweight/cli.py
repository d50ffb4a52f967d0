"""Command-line front end.

Subcommands::

    seqweight calibrate --alpha 0.05 --m 20 --J 200 --weights ones
    seqweight gap --J 100 --eta 20 --r 5 --reps 2000
    seqweight gi --J 100 --l 5 --u 15 --signal-fraction 0.1
    seqweight sweep --paper-figure [--full-scale]
    seqweight validate

Exit codes: 0 success, 1 failed validation or failed scenarios, 2 bad
configuration or usage.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import fields
from pathlib import Path
from typing import Sequence

from . import __version__, _backend, montecarlo, oracle
from .montecarlo import ScenarioResult, ScenarioSpec
from .thresholds import calibrate_gap, calibrate_gi
from .weights import WeightVector

log = logging.getLogger("seqweight")

STAMP_FILE = "VALIDATED"
DEFAULT_OUT = "seqweight-out"
PLOT_COLUMNS = ["J", "scenario", "ess", "ess_se"]

_INT_KEYS = {"J", "l", "u", "reps", "master_seed", "max_steps"}
_FLOAT_KEYS = {"signal_fraction", "mu", "alpha", "beta", "eta", "r"}
_STR_KEYS = {"procedure"}
_ALIASES = {"seed": "master_seed"}
_DEFAULTED = {"alpha": 0.05, "beta": 0.05}


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- config files


def _convert(key: str, raw: str, where: str):
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"{where}: {key} = {raw!r} is not a valid {'integer' if key in _INT_KEYS else 'number'}") from None


def parse_config(text: str, source: str = "<config>") -> list[ScenarioSpec]:
    """Parse ``[name]`` sections of ``key = value`` lines into scenario specs.

    ``#`` and ``;`` start comment lines. Missing alpha/beta fall back to 0.05
    with a logged note; every other omitted field takes the ScenarioSpec default.
    """
    sections: list[tuple[str, int, dict[str, tuple[object, int]]]] = []
    current: dict[str, tuple[object, int]] | None = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        where = f"{source}:{lineno}"
        if not stripped or stripped[0] in "#;":
            continue
        if stripped.startswith("["):
            if not stripped.endswith("]") or not stripped[1:-1].strip():
                raise ConfigError(f"{where}: malformed section header {stripped!r}")
            name = stripped[1:-1].strip()
            if any(name == s[0] for s in sections):
                raise ConfigError(f"{where}: duplicate scenario [{name}]")
            current = {}
            sections.append((name, lineno, current))
            continue
        if "=" not in stripped:
            raise ConfigError(f"{where}: expected 'key = value', got {stripped!r}")
        if current is None:
            raise ConfigError(f"{where}: key outside any [scenario] section")
        key, _, raw = (part.strip() for part in stripped.partition("="))
        key = _ALIASES.get(key, key)
        if key not in _INT_KEYS | _FLOAT_KEYS | _STR_KEYS:
            raise ConfigError(f"{where}: unknown key {key!r}")
        if key in current:
            raise ConfigError(f"{where}: duplicate key {key!r} (first set on line {current[key][1]})")
        current[key] = (_convert(key, raw, where), lineno)

    if not sections:
        raise ConfigError(f"{source}: no scenarios")
    specs = []
    for name, lineno, entries in sections:
        values = {key: value for key, (value, _) in entries.items()}
        if "J" not in values:
            raise ConfigError(f"{source}:{lineno}: scenario [{name}] is missing J")
        for key, default in _DEFAULTED.items():
            if key not in values:
                log.info("scenario [%s]: %s not set, using default %s", name, key, default)
                values[key] = default
        try:
            specs.append(ScenarioSpec(name=name, **values))
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: scenario [{name}]: {exc}") from None
    return specs


def load_config(path: str | os.PathLike) -> list[ScenarioSpec]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, str(path))


# ---------------------------------------------------------------- outputs


def series_label(spec: ScenarioSpec) -> str:
    suffix = f"-J{spec.J}"
    return spec.name[: -len(suffix)] if spec.name.endswith(suffix) else spec.name


def emit_plot_data(results: Sequence[ScenarioResult], path: str | os.PathLike) -> Path:
    """Write J, scenario series, ESS and its standard error for external plotting."""
    if not results:
        raise ValueError("no results to plot")
    rows = [
        [str(res.spec.J), series_label(res.spec), format(res.ess, ".12g"), format(res.ess_se, ".12g")]
        for res in results
    ]
    path = Path(path)
    path.write_text(montecarlo._csv(PLOT_COLUMNS, rows))
    return path


def _out_dir(arg: str | None) -> Path:
    out = Path(arg or os.environ.get("SEQWEIGHT_OUT") or DEFAULT_OUT)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _workers(arg: str) -> int:
    if arg == "auto":
        return os.cpu_count() or 1
    try:
        value = int(arg)
    except ValueError:
        raise argparse.ArgumentTypeError(f"workers must be a positive integer or 'auto', got {arg!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("workers must be at least 1")
    return value


def _write_run(out: Path, table: montecarlo.SweepTable, specs: Sequence[ScenarioSpec], per_rep: bool) -> None:
    validated = (out / STAMP_FILE).exists()
    if not validated:
        log.warning("no validation stamp in %s; run 'seqweight validate --out %s' before trusting results", out, out)
    (out / "summary.csv").write_text(montecarlo.summary_csv(table.results))
    if per_rep:
        (out / "reps.csv").write_text(montecarlo.records_csv(table.results))
    (out / "manifest.txt").write_text(montecarlo.manifest_text(specs, validated))
    for res in table.results:
        print(
            f"{res.spec.name}: ESS {res.ess:.1f} +/- {res.ess_se:.1f}  "
            f"FWE1 {res.fwe1:.4f}  FWE2 {res.fwe2:.4f}  cap {res.cap_rate:.4f}  ratio {res.optimality_ratio:.3f}"
        )
    for name, err in table.failures.items():
        print(f"{name}: FAILED {err}", file=sys.stderr)
    print(f"wrote {out / 'summary.csv'}")


# ---------------------------------------------------------------- subcommands


def _override(values: dict[str, object], args: argparse.Namespace, **forced) -> ScenarioSpec:
    for f in fields(ScenarioSpec):
        arg = getattr(args, f.name, None)
        if arg is not None:
            values[f.name] = arg
    values.update(forced)
    return ScenarioSpec(**values)


def _apply_overrides(specs: list[ScenarioSpec], args: argparse.Namespace, **forced) -> list[ScenarioSpec]:
    base = [{f.name: getattr(spec, f.name) for f in fields(ScenarioSpec)} for spec in specs]
    # a --name flag only names a flag-built scenario
    forced_names = [dict(forced, name=spec.name) for spec in specs]
    return [_override(values, args, **extra) for values, extra in zip(base, forced_names)]


def _cmd_run(args: argparse.Namespace, procedure: str) -> int:
    if args.config:
        specs = _apply_overrides(load_config(args.config), args, procedure=procedure)
    else:
        if args.J is None:
            raise ConfigError("either --config or --J is required")
        specs = [_override({"name": args.name or procedure}, args, procedure=procedure)]
    out = _out_dir(args.out)
    table = montecarlo.run_sweep(specs, args.workers, keep_records=args.per_rep)
    _write_run(out, table, specs, args.per_rep)
    return 0 if table.ok else 1


def _cmd_sweep(args: argparse.Namespace) -> int:
    if args.paper_figure == bool(args.config):
        raise ConfigError("sweep needs exactly one of --paper-figure or --config")
    if args.paper_figure:
        grid = montecarlo.FULL_J_GRID if args.full_scale else montecarlo.DESK_J_GRID
        reps = montecarlo.FULL_REPS if args.full_scale else montecarlo.DESK_REPS
        specs = montecarlo.weighting_specs(grid, reps, master_seed=0)
    else:
        specs = load_config(args.config)
    specs = _apply_overrides(specs, args)
    out = _out_dir(args.out)
    table = montecarlo.run_sweep(specs, args.workers, keep_records=args.per_rep)
    _write_run(out, table, specs, args.per_rep)
    if table.results:
        path = emit_plot_data(table.results, out / "plot_data.csv")
        print(f"wrote {path}")
    return 0 if table.ok else 1


def _parse_weights(arg: str, J: int | None) -> WeightVector:
    if arg == "ones":
        if J is None:
            raise ConfigError("--weights ones needs --J")
        return WeightVector.ones(J)
    path = Path(arg)
    try:
        if path.exists():
            weights = WeightVector.from_csv(path.read_text())
        else:
            weights = WeightVector(float(x) for x in arg.split(","))
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"cannot read weights from {arg!r}: {exc}") from None
    if J is not None and weights.J != J:
        raise ConfigError(f"--J {J} does not match {weights.J} weights")
    return weights


def _cmd_calibrate(args: argparse.Namespace) -> int:
    weights = _parse_weights(args.weights, args.J)
    if args.m is not None:
        th = calibrate_gap(args.alpha, args.m, weights)
        print(f"J = {weights.J}  m = {th.m}  alpha = {th.alpha}")
        print(f"C_W = {th.cw:.10g}")
        print(f"c = {th.c:.10g}")
        return 0
    if args.l is None or args.u is None:
        raise ConfigError("calibrate needs --m, or both --l and --u")
    th = calibrate_gi(args.alpha, args.beta, args.l, args.u, weights)
    print(f"J = {weights.J}  l = {th.l}  u = {th.u}  alpha = {th.alpha}  beta = {th.beta}")
    for key in ("a", "b", "c", "d"):
        value = getattr(th, key)
        print(f"{key} = {value:.10g}" if isinstance(value, float) else f"{key} = {value}")
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    reports = oracle.run_all(args.seed if args.seed is not None else 0)
    for report in reports:
        print(report.to_text())
    ok = all(r.passed for r in reports)
    out = _out_dir(args.out)
    stamp = out / STAMP_FILE
    if ok:
        stamp.write_text(f"code_version={__version__}\nbackend={_backend.BACKEND}\n")
        print(f"all oracle suites passed; stamp written to {stamp}")
    else:
        stamp.unlink(missing_ok=True)
        (out / "oracle_mismatches.csv").write_text("".join(r.to_csv() for r in reports if not r.passed))
        print("oracle mismatches found", file=sys.stderr)
    return 0 if ok else 1


# ---------------------------------------------------------------- parser


def _scenario_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value scenario file, one [name] section per scenario")
    p.add_argument("--name", help="scenario name when no config is given")
    p.add_argument("--J", type=int, help="number of streams")
    p.add_argument("--signal-fraction", dest="signal_fraction", type=float, help="m/J (default 0.1)")
    p.add_argument("--mu", type=float, help="alternative mean (default 0.15)")
    p.add_argument("--alpha", type=float, help="type I FWE level (default 0.05)")
    p.add_argument("--beta", type=float, help="type II FWE level (default 0.05)")
    p.add_argument("--eta", type=float, help="guess informativeness (default 1)")
    p.add_argument("--r", type=float, help="weight strength (default 1, unweighted)")
    p.add_argument("--max-steps", dest="max_steps", type=int, help="per-trial step cap")


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", dest="master_seed", type=int, help="master seed (default 0)")
    p.add_argument("--reps", type=int, help="replications per scenario (default 2000)")
    p.add_argument("--workers", type=_workers, default=1, help="worker processes, or 'auto'")
    p.add_argument("--out", help="output directory (default $SEQWEIGHT_OUT or ./seqweight-out)")
    p.add_argument("--per-rep", action="store_true", help="also write one row per replication to reps.csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seqweight",
        description="Weighted gap / gap-intersection sequential tests and their Monte Carlo study.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({_backend.BACKEND})")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command")

    gap = sub.add_parser("gap", help="Monte Carlo run of the weighted gap procedure")
    _scenario_flags(gap)
    _common_flags(gap)
    gap.add_argument("--l", type=int, help=argparse.SUPPRESS)
    gap.add_argument("--u", type=int, help=argparse.SUPPRESS)

    gi = sub.add_parser("gi", help="Monte Carlo run of the weighted gap-intersection procedure")
    _scenario_flags(gi)
    _common_flags(gi)
    gi.add_argument("--l", type=int, help="lower bound on the signal count")
    gi.add_argument("--u", type=int, help="upper bound on the signal count")

    sweep = sub.add_parser("sweep", help="run a set of scenarios and emit plot data")
    sweep.add_argument("--config")
    sweep.add_argument("--paper-figure", action="store_true",
                       help="the four weighting scenarios over J in {100, 200} at 2000 reps")
    sweep.add_argument("--full-scale", action="store_true",
                       help="with --paper-figure: J in {200, 250, ..., 400} at 10000 reps")
    _common_flags(sweep)

    cal = sub.add_parser("calibrate", help="print calibrated thresholds")
    cal.add_argument("--alpha", type=float, default=0.05)
    cal.add_argument("--beta", type=float, default=0.05)
    cal.add_argument("--m", type=int, help="known signal count (gap procedure)")
    cal.add_argument("--l", type=int, help="lower signal bound (gap-intersection)")
    cal.add_argument("--u", type=int, help="upper signal bound (gap-intersection)")
    cal.add_argument("--J", type=int)
    cal.add_argument("--weights", default="ones", help="'ones', comma-separated values, or a stream_index,weight CSV")

    val = sub.add_parser("validate", help="run the oracle suites and write a validation stamp")
    val.add_argument("--seed", type=int)
    val.add_argument("--out")
    return parser


def parse_and_dispatch(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv:
        parser.print_help()
        return 0
    args = parser.parse_args(argv)  # exits with status 2 on unknown flags
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command is None:
        parser.print_help()
        return 0
    try:
        if args.command == "gap":
            return _cmd_run(args, "gap")
        if args.command == "gi":
            return _cmd_run(args, "gi")
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "calibrate":
            return _cmd_calibrate(args)
        return _cmd_validate(args)
    except (ConfigError, ValueError) as exc:
        print(f"seqweight: error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(parse_and_dispatch())
