"""Experiment harness: YAML configs, seeded multi-trial runs, CSV reports.

Config layout (unknown keys are rejected at every level)::

    benchmark:
      id: math_2d              # see `rbdo list-benchmarks`
      options: {pdf: normal, beta: 3.0}
    swarm:                     # any SwarmConfig field except seed
      nb: 50
      t_max: 1000
      algorithm: dBA
    trials: 25
    base_seed: 0
    output_dir: results/ex2    # optional
    verification:              # used by `rbdo verify`
      form: true
      sorm: true
      mcs: true
      mcs_samples: 100000
      mcs_seed: 0

Trial ``k`` runs with seed ``base_seed + k``.  Output directory precedence is
``--out``, then ``output_dir``, then ``$RBDO_OUT_DIR``, then ``rbdo_out``.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import problems, rds, swarm, verify

log = logging.getLogger("rbdo")

OUT_ENV = "RBDO_OUT_DIR"
DEFAULT_OUT = "rbdo_out"
BEYOND_PRECISION = "beyond-precision"
PF_FLOOR = 1e-15  # below this Phi^-1 cannot resolve 1 - pf in doubles

SUMMARY_COLUMNS = (
    "benchmark", "algorithm", "trials", "nb", "t_max",
    "best", "median", "worst", "mean", "std_dev", "mean_nu", "evaluations",
)
VERIFY_COLUMNS = ("constraint", "kind", "value", "method", "beta", "pf", "mcs_stderr", "note")

_TOP_KEYS = {"benchmark", "swarm", "trials", "base_seed", "output_dir", "verification"}
_BENCH_KEYS = {"id", "options"}
_SWARM_KEYS = {f.name for f in dataclasses.fields(swarm.SwarmConfig)} - {"seed"}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class VerifyOptions:
    form: bool = True
    sorm: bool = True
    mcs: bool = True
    mcs_samples: int = 100_000
    mcs_seed: int = 0


@dataclass(frozen=True)
class RunConfig:
    benchmark: str
    options: dict = field(default_factory=dict)
    swarm: dict = field(default_factory=dict)
    trials: int = 25
    base_seed: int = 0
    output_dir: str | None = None
    verification: VerifyOptions = VerifyOptions()

    def problem(self):
        return problems.get_benchmark(self.benchmark, **self.options)

    def swarm_config(self, trial):
        return swarm.SwarmConfig(seed=self.base_seed + trial, **self.swarm)


@dataclass
class StatsSummary:
    best: float
    median: float
    worst: float
    mean: float
    std_dev: float
    mean_nu: float
    designs: list = field(default_factory=list, repr=False)


def fmt(value):
    """Seven significant digits, the precision of the reference results."""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.7g}"


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


def _reject_unknown(section, allowed, where):
    if not isinstance(section, dict):
        raise ConfigError(f"{where} must be a mapping")
    extra = sorted(set(section) - allowed)
    if extra:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(extra)}")


def parse_config(raw):
    """Validate a config mapping; every error surfaces before any compute."""
    if raw is None:
        raise ConfigError("empty config")
    _reject_unknown(raw, _TOP_KEYS, "config")
    if "benchmark" not in raw:
        raise ConfigError("config needs a benchmark section")
    bench = raw["benchmark"]
    if isinstance(bench, str):
        bench = {"id": bench}
    _reject_unknown(bench, _BENCH_KEYS, "benchmark")
    if bench.get("id") not in problems.BENCHMARKS:
        raise ConfigError(f"unknown benchmark {bench.get('id')!r}; available: {', '.join(problems.BENCHMARKS)}")
    options = dict(bench.get("options") or {})
    sw = dict(raw.get("swarm") or {})
    _reject_unknown(sw, _SWARM_KEYS, "swarm")
    ver = dict(raw.get("verification") or {})
    _reject_unknown(ver, {f.name for f in dataclasses.fields(VerifyOptions)}, "verification")

    trials = raw.get("trials", 25)
    if not isinstance(trials, int) or trials < 1:
        raise ConfigError("trials must be an integer >= 1")
    base_seed = raw.get("base_seed", 0)
    if not isinstance(base_seed, int) or base_seed < 0:
        raise ConfigError("base_seed must be a non-negative integer")
    try:
        verification = VerifyOptions(**ver)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    if verification.mcs and verification.mcs_samples < 1000:
        raise ConfigError("verification.mcs_samples must be >= 1000")

    cfg = RunConfig(bench["id"], options, sw, trials, base_seed, raw.get("output_dir"), verification)
    try:
        cfg.problem()
        cfg.swarm_config(0)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        try:
            raw = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from None
    return parse_config(raw)


def output_dir(cfg, override=None):
    return Path(override or cfg.output_dir or os.environ.get(OUT_ENV) or DEFAULT_OUT)


# ---------------------------------------------------------------------------
# running and summarising
# ---------------------------------------------------------------------------


def _run_trial(args):
    cfg, trial = args
    return trial, swarm.run(cfg.problem(), cfg.swarm_config(trial))


def run_trials(cfg, jobs=1):
    """All trials of ``cfg`` in trial order; ``jobs > 1`` uses worker processes."""
    work = [(cfg, k) for k in range(cfg.trials)]
    if jobs > 1 and cfg.trials > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            done = list(pool.map(_run_trial, work))
    else:
        done = [_run_trial(w) for w in work]
    done.sort(key=lambda item: item[0])
    return [res for _, res in done]


def summarize(finals, violations=None, designs=None):
    """Best / median / worst / mean / S.D. (n-1) of final fitness values.

    For an even number of trials the median is the lower-middle value.
    """
    f = np.asarray(finals, dtype=float)
    if f.size == 0:
        raise ValueError("need at least one trial")
    order = np.sort(f)
    sd = float(np.std(f, ddof=1)) if f.size > 1 else 0.0
    nu = 0.0 if violations is None else float(np.mean(violations))
    return StatsSummary(
        float(order[0]), float(order[(f.size - 1) // 2]), float(order[-1]),
        float(np.mean(f)), sd, nu, list(designs or []),
    )


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_run_outputs(cfg, results, out):
    out.mkdir(parents=True, exist_ok=True)
    problem = cfg.problem()
    names = [v.name for v in problem.variables]
    stats = summarize(
        [r.best.f for r in results], [r.best.nu for r in results], [r.best.y for r in results]
    )
    first = cfg.swarm_config(0)
    _write_csv(out / "summary.csv", SUMMARY_COLUMNS, [[
        problem.name, first.algorithm, cfg.trials, first.nb, first.t_max,
        *(fmt(v) for v in (stats.best, stats.median, stats.worst, stats.mean, stats.std_dev, stats.mean_nu)),
        sum(r.evaluation_count for r in results),
    ]])
    _write_csv(
        out / "trials.csv",
        ("trial", "seed", "best_f", "nu", "evaluations", *names),
        [
            [k, r.seed, fmt(r.best.f), fmt(r.best.nu), r.evaluation_count, *(fmt(v) for v in r.best.y)]
            for k, r in enumerate(results)
        ],
    )
    for k, r in enumerate(results):
        _write_csv(
            out / f"trace_{k}.csv",
            ("iteration", "best_f", "best_nu", "epsilon"),
            [[t + 1, *(fmt(v) for v in row)] for t, row in enumerate(r.trace)],
        )
    return stats


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------


def _beta_pf_cells(report):
    if report.pf < PF_FLOOR:
        return fmt(math.inf), fmt(0.0), BEYOND_PRECISION
    return fmt(report.beta), fmt(report.pf), ""


def verify_design(problem, y, options=VerifyOptions()):
    """Rows of a reliability report for design ``y``.

    Probabilistic constraints get one row per requested method; deterministic
    constraints get a single row with the reliability columns set to ``n/a``.
    The ``value`` column is the constraint at the mean point in the
    ``g > 0 safe`` convention.
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (problem.dim,):
        raise ValueError(f"design needs {problem.dim} components, got {y.size}")
    if np.any(y < problem.lower) or np.any(y > problem.upper):
        raise ValueError("design lies outside the box bounds")
    d, x_dists, p_dists = verify.design_distributions(problem, y)
    d2, x2 = problem.split(y[None, :])
    means = problem.param_means[None, :]
    g_mean = problem.limit_state_values(d2, x2, means)[0]
    h_mean = problem.constraint_values(d2, x2, means)[0]

    rows = []
    for i, ls in enumerate(problem.limit_states):
        base = [ls.name, "probabilistic", fmt(g_mean[i])]
        form = None
        if options.form or options.sorm:
            try:
                form = verify.form_beta(ls.func, d, x_dists, p_dists, i)
            except (verify.FormConvergenceError, verify.DegenerateGradientError) as exc:
                rows.append(base + [verify.FORM, "nan", "nan", "", f"error: {exc}"])
            else:
                if options.form:
                    rows.append(base + [verify.FORM, *_beta_pf_cells(form)[:2], "", _beta_pf_cells(form)[2]])
        if options.sorm and form is not None:
            if form.pf < PF_FLOOR:
                rows.append(base + [verify.SORM_BREITUNG, fmt(math.inf), fmt(0.0), "", BEYOND_PRECISION])
            else:
                try:
                    rep = verify.sorm_breitung(form, ls.func, d, x_dists, p_dists)
                except (verify.CurvatureError, verify.DegenerateGradientError) as exc:
                    rows.append(base + [verify.SORM_BREITUNG, "nan", "nan", "", f"error: {exc}"])
                else:
                    beta, pf, note = _beta_pf_cells(rep)
                    rows.append(base + [verify.SORM_BREITUNG, beta, pf, "", note])
        if options.mcs:
            rep = verify.mcs_pf(ls.func, d, x_dists, p_dists, options.mcs_samples, options.mcs_seed, i)
            rows.append(base + [verify.MCS, fmt(rep.beta), fmt(rep.pf), fmt(rep.mcs_stderr), ""])
    for name, h in zip(problem.constraint_names, h_mean):
        rows.append([name, "deterministic", fmt(-h), "n/a", "n/a", "n/a", "n/a", ""])
    return rows


def read_design(spec, dim=None):
    """Design vector from a CSV file or an inline list.

    In a file the last numeric row wins and a header is optional.  When ``dim``
    is given, longer rows (such as ``trials.csv``) keep their last ``dim`` cells.
    """
    path = Path(spec)
    if path.is_file():
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
        numeric = []
        for r in rows:
            try:
                numeric.append([float(c) for c in r])
            except ValueError:
                continue
        if not numeric:
            raise ValueError(f"no numeric row in {spec}")
        row = np.array(numeric[-1])
        return row[-dim:] if dim and row.size > dim else row
    try:
        return np.array([float(c) for c in spec.replace(";", ",").split(",")])
    except ValueError:
        raise ValueError(f"--design must be a CSV file or comma-separated numbers, got {spec!r}") from None


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(prog="rbdo", description="Reliability-based design optimisation with the directional bat algorithm.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run seeded trials from a config")
    p_run.add_argument("config")
    p_run.add_argument("--seed", type=int, help="override base_seed")
    p_run.add_argument("--jobs", type=int, default=1, help="worker processes for trials")
    p_run.add_argument("--out", help="output directory")

    p_ver = sub.add_parser("verify", help="FORM/SORM/MCS report for a design")
    p_ver.add_argument("config")
    p_ver.add_argument("--design", required=True, help="CSV file or comma-separated values")
    p_ver.add_argument("--seed", type=int, help="override the MCS seed")
    p_ver.add_argument("--out", help="output directory")

    sub.add_parser("list-benchmarks", help="print available benchmark ids")
    return parser


def _cmd_run(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("--seed must be non-negative")
        cfg = dataclasses.replace(cfg, base_seed=args.seed)
    if args.jobs < 1:
        raise ConfigError("--jobs must be >= 1")
    out = output_dir(cfg, args.out)
    log.info("running %d trial(s) of %s", cfg.trials, cfg.benchmark)
    results = run_trials(cfg, args.jobs)
    stats = write_run_outputs(cfg, results, out)
    print(
        f"best {fmt(stats.best)}  median {fmt(stats.median)}  worst {fmt(stats.worst)}  "
        f"mean {fmt(stats.mean)}  sd {fmt(stats.std_dev)}  mean_nu {fmt(stats.mean_nu)}"
    )
    print(f"wrote {out}")
    return 0


def _cmd_verify(args):
    cfg = load_config(args.config)
    options = cfg.verification
    if args.seed is not None:
        options = dataclasses.replace(options, mcs_seed=args.seed)
    problem = cfg.problem()
    y = read_design(args.design, problem.dim)
    rows = verify_design(problem, y, options)
    out = output_dir(cfg, args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "verify.csv", VERIFY_COLUMNS, rows)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(VERIFY_COLUMNS)
    writer.writerows(rows)
    return 0


def _cmd_list(_args):
    for name in problems.BENCHMARKS:
        print(name)
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    handlers = {"run": _cmd_run, "verify": _cmd_verify, "list-benchmarks": _cmd_list}
    try:
        return handlers[args.command](args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"rbdo: error: {exc}", file=sys.stderr)
        return 2
