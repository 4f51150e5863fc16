"""Command-line entry point: ``feasbo {run,bench,landscape,kinematics}``.

Exit status
-----------
0  success
2  usage error (unknown flag or subcommand)
3  invalid configuration value
4  file I/O failure
5  optimization failure (no feasible design, resample budget exhausted, singular fit)
6  external evaluator failure
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from dataclasses import dataclass, field
from typing import Optional

from . import bridge, harness, problems
from .domain import Bounds, Problem
from .optimizer import PENALTY, STRICT, MsrsConfig, SBOConfig, optimize
from .sampling import InfeasibleRegionError, ResampleExhaustedError, SamplerConfig
from .surrogate import KrigingConfig, KrigingFitError

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_IO, EXIT_OPTIMIZE, EXIT_EVALUATOR = 0, 2, 3, 4, 5, 6

PROBLEMS = ("rosenbrock", "rastrigin", "fish-external", "external")
MODE_NAMES = {"strict": STRICT, "penalty": PENALTY}
DEFAULT_START = (0.2, 0.3)

logger = logging.getLogger("feasbo")


class ConfigError(ValueError):
    pass


def _plain(config) -> dict:
    # JSON-native field values so a config echo compares equal after a round trip
    return json.loads(json.dumps(dataclasses.asdict(config)))


@dataclass
class RunConfig:
    problem: str = "rosenbrock"
    seed: int = 0
    mode: str = "strict"
    starts: Optional[list] = None
    k_max: int = 200
    tol: Optional[float] = None
    rel_tol: Optional[float] = None
    weight_cycle: list = field(default_factory=lambda: list(MsrsConfig().weight_cycle))
    sampler: dict = field(default_factory=lambda: _plain(SamplerConfig()))
    kriging: dict = field(default_factory=lambda: _plain(KrigingConfig()))
    rastrigin_seed: int = 0
    cec_offset: bool = True
    lower: Optional[list] = None
    upper: Optional[list] = None
    evaluator: Optional[str] = None
    evaluator_mode: str = "per_call"
    evaluator_timeout: float = 600.0
    n: int = 100
    jobs: int = 1
    modes: list = field(default_factory=lambda: ["strict"])
    budget_from: Optional[str] = None
    error_metric: Optional[str] = None

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if "config" in data and isinstance(data["config"], dict):
            data = data["config"]  # a RunRecord file: reuse its config echo
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls()
        for key, value in data.items():
            if key in ("sampler", "kriging"):
                value = {**getattr(cfg, key), **value}
            setattr(cfg, key, value)
        return cfg

    def validate(self):
        if self.problem not in PROBLEMS:
            raise ConfigError(f"problem must be one of {PROBLEMS}")
        for m in [self.mode, *self.modes]:
            if m not in MODE_NAMES:
                raise ConfigError(f"mode must be one of {tuple(MODE_NAMES)}, got {m!r}")
        if self.error_metric not in (None, "absolute", "relative"):
            raise ConfigError("error metric must be absolute or relative")
        if self.n < 2:
            raise ConfigError("n must be >= 2")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if self.budget_from is not None and self.budget_from not in self.modes:
            raise ConfigError("budget-from must name one of the benchmarked modes")
        self.sbo_config(self.mode)

    def sbo_config(self, mode: str) -> SBOConfig:
        try:
            return SBOConfig(
                sampler=SamplerConfig(**self.sampler),
                kriging=KrigingConfig(**self.kriging),
                msrs=MsrsConfig(
                    weight_cycle=tuple(self.weight_cycle), k_max=self.k_max,
                    absolute_tolerance=self.tol, relative_change_tolerance=self.rel_tol,
                    mode=MODE_NAMES[mode],
                ),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None


def build_problem(cfg: RunConfig):
    """Return ``(problem, evaluator_or_None)``."""
    if cfg.problem == "rosenbrock":
        return problems.rosenbrock_problem(box=_box(cfg, problems.DEFAULT_BOX)), None
    if cfg.problem == "rastrigin":
        box = _box(cfg, problems.DEFAULT_BOX)
        inst = problems.make_rastrigin_instance(cfg.rastrigin_seed, cfg.cec_offset, box=box)
        return problems.rastrigin_problem(inst, box=box), None
    if not cfg.evaluator:
        raise ConfigError(f"problem {cfg.problem} needs --evaluator")
    try:
        spec = bridge.EvaluatorSpec(cfg.evaluator, cfg.evaluator_timeout, cfg.evaluator_mode)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if cfg.problem == "fish-external":
        box = _box(cfg, problems.FISH_BOX)
        # the bridge re-checks feasibility before anything crosses the process boundary
        guard = Problem(Bounds(*box), objective=None, constraints=problems.fish_constraint_set())
        ev = bridge.ExternalEvaluator(spec, guard=guard.is_feasible)
        return problems.fish_problem(ev, box=box), ev
    ev = bridge.ExternalEvaluator(spec)
    return Problem(Bounds(*_box(cfg, None)), objective=ev, label="external"), ev


def _box(cfg: RunConfig, default):
    lower = cfg.lower if cfg.lower is not None else (default[0] if default else None)
    upper = cfg.upper if cfg.upper is not None else (default[1] if default else None)
    if lower is None or upper is None:
        raise ConfigError(f"problem {cfg.problem} needs --lower and --upper")
    try:
        Bounds(lower, upper)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid bounds: {exc}") from None
    return tuple(lower), tuple(upper)


def _floats(text: str) -> list:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated reals, got {text!r}") from None


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="feasbo",
        description="Strictly feasible surrogate-based optimization.",
        epilog="exit status: 0 ok, 2 usage, 3 invalid config, 4 file I/O, "
               "5 optimization failure, 6 evaluator failure",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file (or a previous run record)")
        p.add_argument("--problem", choices=PROBLEMS)
        p.add_argument("--seed", type=int)
        p.add_argument("--lower", type=_floats)
        p.add_argument("--upper", type=_floats)
        p.add_argument("--rastrigin-seed", type=int)
        p.add_argument("--literal-rastrigin", action="store_true",
                       help="omit the +10 per dimension offset (minimum -350)")
        p.add_argument("--output", "-o")

    def optim(p):
        p.add_argument("--mode", choices=tuple(MODE_NAMES))
        p.add_argument("--tol", type=float, help="absolute error tolerance on the known optimum")
        p.add_argument("--rel-tol", type=float, help="relative change tolerance on best f")
        p.add_argument("--k-max", type=int)
        p.add_argument("--start", type=_floats, action="append",
                       help="feasible starting point x1,x2 (repeatable)")
        p.add_argument("--no-start", action="store_true")
        p.add_argument("--weights", type=_floats, help="MSRS weight cycle")
        p.add_argument("--evaluator", help="external evaluator command")
        p.add_argument("--evaluator-mode", choices=bridge.MODES)
        p.add_argument("--evaluator-timeout", type=float)

    p_run = sub.add_parser("run", help="one optimization run; writes a JSON run record")
    common(p_run)
    optim(p_run)

    p_bench = sub.add_parser("bench", help="repeated realizations; writes a CSV report")
    common(p_bench)
    optim(p_bench)
    p_bench.add_argument("--n", type=int)
    p_bench.add_argument("--jobs", type=int)
    p_bench.add_argument("--modes", help="comma-separated subset of strict,penalty")
    p_bench.add_argument("--budget-from", choices=tuple(MODE_NAMES))
    p_bench.add_argument("--error-metric", choices=("absolute", "relative"))
    p_bench.add_argument("--table", help="also write the aligned text table here")

    p_land = sub.add_parser("landscape", help="penalized objective on a grid; writes CSV")
    common(p_land)
    p_land.add_argument("--resolution", type=int, default=101)

    p_kin = sub.add_parser("kinematics", help="midline snapshots over one period; writes CSV")
    p_kin.add_argument("--x1", type=float, required=True)
    p_kin.add_argument("--x2", type=float, required=True)
    p_kin.add_argument("--length", type=float, default=problems.FISH_LENGTH)
    p_kin.add_argument("--wavelength", type=float, default=1.1)
    p_kin.add_argument("--freq", type=float, default=1.0)
    p_kin.add_argument("--points", type=int, default=101)
    p_kin.add_argument("--output", "-o")
    return parser


FLAG_FIELDS = {
    "problem": "problem", "seed": "seed", "lower": "lower", "upper": "upper",
    "rastrigin_seed": "rastrigin_seed", "mode": "mode", "tol": "tol", "rel_tol": "rel_tol",
    "k_max": "k_max", "weights": "weight_cycle", "evaluator": "evaluator",
    "evaluator_mode": "evaluator_mode", "evaluator_timeout": "evaluator_timeout",
    "n": "n", "jobs": "jobs", "budget_from": "budget_from", "error_metric": "error_metric",
}


def resolve_config(args) -> RunConfig:
    """Defaults, then the config file, then explicit flags."""
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config file is not valid JSON: {exc}") from None
        cfg = RunConfig.from_dict(data)
    else:
        cfg = RunConfig()
    for flag, name in FLAG_FIELDS.items():
        value = getattr(args, flag, None)
        if value is not None:
            setattr(cfg, name, value)
    if getattr(args, "literal_rastrigin", False):
        cfg.cec_offset = False
    if getattr(args, "no_start", False):
        cfg.starts = []
    elif getattr(args, "start", None):
        cfg.starts = args.start
    if getattr(args, "modes", None):
        cfg.modes = [m.strip() for m in args.modes.split(",") if m.strip()]
    if cfg.starts is None:
        cfg.starts = [list(DEFAULT_START)] if cfg.problem in ("rosenbrock", "rastrigin") else []
    cfg.validate()
    return cfg


def _write(path: str, text: str):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def cmd_run(args) -> int:
    cfg = resolve_config(args)
    problem, ev = build_problem(cfg)
    try:
        rec = optimize(problem, cfg.sbo_config(cfg.mode), seed=cfg.seed, starts=cfg.starts,
                       progress=lambda p: logger.info("iter %d best %.6g evals %d",
                                                      p.iteration, p.best_f, p.evaluations))
    finally:
        if ev is not None:
            ev.close()
    out = {"config": cfg.to_dict(), **rec.to_dict()}
    _write(args.output or "run_record.json", json.dumps(out, indent=1) + "\n")
    print(f"{rec.termination.value}: best f {rec.best_f!r} at {rec.best_x.tolist()} "
          f"after {rec.evaluations_used} evaluations")
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg = resolve_config(args)
    problem, ev = build_problem(cfg)
    if ev is not None:
        ev.close()
        raise ConfigError("bench supports the analytical problems only")
    metric = cfg.error_metric or ("relative" if cfg.problem == "rastrigin" else "absolute")
    configs = {m: cfg.sbo_config(m) for m in cfg.modes}
    seeds = range(cfg.seed, cfg.seed + cfg.n)
    report = harness.run_benchmark(problem, configs, cfg.n, seeds=seeds, jobs=cfg.jobs,
                                   error_metric=metric, starts=cfg.starts,
                                   budget_from=cfg.budget_from)
    _write(args.output or "report.csv", report.to_csv())
    text = report.to_text()
    if args.table:
        _write(args.table, text)
    print(text, end="")
    return EXIT_OK


def cmd_landscape(args) -> int:
    cfg = resolve_config(args)
    problem, ev = build_problem(cfg)
    try:
        rows = problems.landscape(problem, args.resolution)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    finally:
        if ev is not None:
            ev.close()
    problems.write_csv(args.output or "landscape.csv", problems.LANDSCAPE_HEADER, rows)
    return EXIT_OK


def cmd_kinematics(args) -> int:
    try:
        kin = problems.FishKinematics(args.x1, args.x2, args.length, args.wavelength, args.freq)
        rows = problems.kinematics_snapshots(kin, n_points=args.points)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    problems.write_csv(args.output or "kinematics.csv", problems.KINEMATICS_HEADER, rows)
    return EXIT_OK


COMMANDS = {"run": cmd_run, "bench": cmd_bench, "landscape": cmd_landscape, "kinematics": cmd_kinematics}


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"feasbo: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except bridge.EvaluatorError as exc:
        print(f"feasbo: evaluator failure: {exc}", file=sys.stderr)
        return EXIT_EVALUATOR
    except (InfeasibleRegionError, ResampleExhaustedError, KrigingFitError) as exc:
        print(f"feasbo: optimization failed: {exc}", file=sys.stderr)
        return EXIT_OPTIMIZE
    except OSError as exc:
        print(f"feasbo: file error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
