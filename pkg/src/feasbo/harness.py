"""Repeated-realization benchmarking with 95% margins of error."""

from __future__ import annotations

import csv
import dataclasses
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .domain import Problem, Termination
from .optimizer import SBOConfig, optimize

Z_95 = 1.96
REPORT_COLUMNS = ("mode", "fevals_mean", "fevals_moe", "error_mean", "error_moe", "success_rate", "N")


def margin_of_error(samples) -> tuple:
    """Sample standard deviation (divisor N - 1) and ``1.96 * sd / sqrt(N)``."""
    z = np.asarray(samples, dtype=float).ravel()
    if z.size < 2:
        raise ValueError("margin of error needs at least two samples")
    sd = float(np.std(z, ddof=1))
    return sd, sd / math.sqrt(z.size) * Z_95


@dataclass(frozen=True)
class Realization:
    mode: str
    seed: int
    evaluations: Optional[int]
    error: Optional[float]
    termination: Optional[str]
    failure: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.failure is not None


@dataclass(frozen=True)
class ModeRow:
    mode: str
    fevals_mean: float
    fevals_moe: float
    error_mean: float
    error_moe: float
    success_rate: float
    N: int
    failures: int = 0


@dataclass
class BenchmarkReport:
    rows: list
    N: int
    error_metric: str
    realizations: list = field(default_factory=list)

    def row(self, mode: str) -> ModeRow:
        for r in self.rows:
            if r.mode == mode:
                return r
        raise KeyError(mode)

    def runs(self, mode: str) -> list:
        return [r for r in self.realizations if r.mode == mode]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        for r in self.rows:
            writer.writerow([r.mode, repr(r.fevals_mean), repr(r.fevals_moe), repr(r.error_mean),
                             repr(r.error_moe), repr(r.success_rate), r.N])
        return buf.getvalue()

    def to_text(self) -> str:
        """Aligned table; evaluation counts and their MOE rounded to integers."""
        label = "Absolute Error" if self.error_metric == "absolute" else "Relative Error"
        header = ("Algorithm", "Function Evaluation", "Function Evaluation MOE", label,
                  f"{label} MOE", "Success")
        body = []
        for r in self.rows:
            body.append((
                r.mode,
                _fmt_int(r.fevals_mean), _fmt_int(r.fevals_moe),
                _fmt_sci(r.error_mean), _fmt_sci(r.error_moe),
                f"{r.success_rate:.0%}",
            ))
        widths = [max(len(h), *(len(b[i]) for b in body)) if body else len(h) for i, h in enumerate(header)]
        lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
        lines.append("  ".join("-" * w for w in widths))
        lines += ["  ".join(c.ljust(w) for c, w in zip(b, widths)) for b in body]
        return "\n".join(lines) + f"\nN = {self.N}\n"


def _fmt_int(v: float) -> str:
    return "N/A" if not math.isfinite(v) else str(int(round(v)))


def _fmt_sci(v: float) -> str:
    return "N/A" if not math.isfinite(v) else f"{v:.2e}"


def realization_error(best_f: float, known_optimum: float, metric: str) -> float:
    gap = abs(best_f - known_optimum)
    if metric == "relative":
        return gap / abs(known_optimum)
    if metric != "absolute":
        raise ValueError(f"unknown error metric {metric!r}")
    return gap


def _realize(task) -> Realization:
    mode, problem, config, seed, starts, metric = task
    try:
        rec = optimize(problem, config, seed=seed, starts=starts)
    except Exception as exc:  # noqa: BLE001  failures are reported per realization
        return Realization(mode, seed, None, None, None, f"{type(exc).__name__}: {exc}")
    return Realization(
        mode, seed, rec.evaluations_used,
        realization_error(rec.best_f, problem.known_optimum, metric),
        rec.termination.value,
    )


def _aggregate(mode: str, runs: Sequence[Realization], config: SBOConfig) -> ModeRow:
    ok = [r for r in runs if not r.failed]
    needs_tol = config.msrs.absolute_tolerance is not None
    succeeded = [r for r in ok if not needs_tol or r.termination == Termination.TOLERANCE_MET.value]
    evals = [r.evaluations for r in ok]
    errors = [r.error for r in ok]
    nan = float("nan")
    fe_moe = margin_of_error(evals)[1] if len(ok) >= 2 else nan
    er_moe = margin_of_error(errors)[1] if len(ok) >= 2 else nan
    return ModeRow(
        mode=mode,
        fevals_mean=float(np.mean(evals)) if ok else nan,
        fevals_moe=fe_moe,
        error_mean=float(np.mean(errors)) if ok else nan,
        error_moe=er_moe,
        success_rate=len(succeeded) / len(runs) if runs else 0.0,
        N=len(runs),
        failures=len(runs) - len(ok),
    )


def budget_capped(config: SBOConfig, evaluations: float) -> SBOConfig:
    """Fixed-budget variant: stop only on the evaluation count, no tolerance."""
    k_max = max(0, int(round(evaluations)) - config.sampler.initial_design_size)
    msrs = dataclasses.replace(config.msrs, k_max=k_max, absolute_tolerance=None,
                               relative_change_tolerance=None)
    return dataclasses.replace(config, msrs=msrs)


def _run_mode(mode, problem, config, seeds, starts, metric, jobs):
    tasks = [(mode, problem, config, int(s), tuple(starts), metric) for s in seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_realize, tasks))
    return [_realize(t) for t in tasks]


def run_benchmark(problem: Problem, configs: Mapping[str, SBOConfig], n: int,
                  seeds: Optional[Sequence[int]] = None, jobs: int = 1,
                  error_metric: str = "absolute", starts: Sequence = (),
                  budget_from: Optional[str] = None) -> BenchmarkReport:
    """Run ``n`` seeded realizations of every configured mode.

    Rows follow the order of ``configs``. With ``budget_from`` the named mode
    runs first and every other mode is capped at its mean evaluation count.
    """
    if n < 2:
        raise ValueError("need at least two realizations")
    if problem.known_optimum is None:
        raise ValueError("benchmarking needs a problem with a known optimum")
    seeds = list(range(n)) if seeds is None else [int(s) for s in seeds]
    if len(seeds) != n:
        raise ValueError("number of seeds must equal n")

    order = list(configs)
    if budget_from is not None:
        if budget_from not in configs:
            raise KeyError(budget_from)
        order.remove(budget_from)
        order.insert(0, budget_from)

    results, rows = {}, {}
    cap = None
    for mode in order:
        config = configs[mode]
        if cap is not None:
            config = budget_capped(config, cap)
        results[mode] = _run_mode(mode, problem, config, seeds, starts, error_metric, jobs)
        rows[mode] = _aggregate(mode, results[mode], config)
        if mode == budget_from and math.isfinite(rows[mode].fevals_mean):
            cap = rows[mode].fevals_mean
    return BenchmarkReport(
        rows=[rows[m] for m in configs], N=n, error_metric=error_metric,
        realizations=[r for m in configs for r in results[m]],
    )
