"""Command line front end.

Exit codes follow SAT-competition usage: 10 satisfiable, 20 unsatisfiable,
30 inconclusive, 1 for usage and input errors. Every option can also be set
through an ``NBLSAT_<OPTION>`` environment variable, e.g. ``NBLSAT_SEED``.
"""

from __future__ import annotations

import csv
import json
import math
import sys
from dataclasses import dataclass
from typing import Iterable, Optional

import click

from . import __version__
from .algorithms import (
    InconclusiveError,
    StatisticalInconsistencyError,
    UnsatisfiableError,
    Verdict,
    check,
    solve,
    solve_cube,
)
from .cnf import DimacsError, PartialAssignment, evaluate, normalize, parse_dimacs
from .config import RunConfig
from .exact import BudgetError, count_satisfying, required_samples, snr
from .kernels import AVAILABLE
from .noise import StoppingRule, run_trace

EXIT_SAT, EXIT_UNSAT, EXIT_UNKNOWN, EXIT_ERROR = 10, 20, 30, 1
EXIT_CODES = {Verdict.SAT: EXIT_SAT, Verdict.UNSAT: EXIT_UNSAT, Verdict.INCONCLUSIVE: EXIT_UNKNOWN}
S_LINES = {Verdict.SAT: "SATISFIABLE", Verdict.UNSAT: "UNSATISFIABLE", Verdict.INCONCLUSIVE: "UNKNOWN"}


@dataclass(frozen=True)
class TraceRecord:
    sample_count: int
    running_mean: float
    running_stderr: float


class SampleCount(click.ParamType):
    """Positive integer, also written as ``1e8``."""

    name = "count"

    def convert(self, value, param, ctx):
        if isinstance(value, int):
            out = value
        else:
            try:
                out = int(value)
            except ValueError:
                try:
                    f = float(value)
                except ValueError:
                    self.fail(f"{value!r} is not a number", param, ctx)
                if not f.is_integer():
                    self.fail(f"{value!r} is not an integer", param, ctx)
                out = int(f)
        if out <= 0:
            self.fail("must be positive", param, ctx)
        return out


COUNT = SampleCount()


def _env(name: str) -> str:
    return "NBLSAT_" + name.upper().replace("-", "_")


def run_options(func):
    opts = [
        click.option("--backend", type=click.Choice(["stochastic", "exact"]),
                     default="stochastic", show_default=True, envvar=_env("backend")),
        click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=0,
                     show_default=True, envvar=_env("seed")),
        click.option("--max-samples", type=COUNT, default=10**8, show_default=True,
                     envvar=_env("max_samples")),
        click.option("--min-samples", type=COUNT, default=1 << 16, show_default=True,
                     envvar=_env("min_samples"), help="Sample floor for stochastic checks."),
        click.option("--block-size", type=COUNT, default=1 << 16, show_default=True,
                     envvar=_env("block_size")),
        click.option("--z", "z_threshold", type=click.FloatRange(min=0, min_open=True),
                     default=5.0, show_default=True, envvar=_env("z")),
        click.option("--digits", "convergence_digits", type=click.IntRange(min=1),
                     default=3, show_default=True, envvar=_env("digits")),
        click.option("--snr-target", type=click.FloatRange(min=0, min_open=True),
                     default=5.0, show_default=True, envvar=_env("snr_target")),
        click.option("--threads", type=click.IntRange(min=1), default=1,
                     show_default=True, envvar=_env("threads")),
        click.option("--kernel", type=click.Choice(sorted(AVAILABLE)), default=None,
                     envvar=_env("kernel"), help="Sampling kernel (default: compiled if built)."),
        click.option("--format", "output_format", type=click.Choice(["text", "json"]),
                     default="text", show_default=True, envvar=_env("format")),
    ]
    for opt in reversed(opts):
        func = opt(func)
    return func


def _config(kw) -> RunConfig:
    names = RunConfig.__dataclass_fields__
    return RunConfig(**{k: v for k, v in kw.items() if k in names})


def _finite(x: Optional[float]):
    if x is None or not math.isfinite(x):
        return None
    return x


def _emit(obj: dict) -> None:
    click.echo(json.dumps(obj, sort_keys=True))


def _load(ctx: click.Context, path: str):
    try:
        with open(path) as fh:
            text = fh.read()
        formula = parse_dimacs(text)
    except OSError as e:
        click.echo(f"c error: {path}: {e.strerror}", err=True)
        ctx.exit(EXIT_ERROR)
    except DimacsError as e:
        loc = f"{path}:{e.line}:{e.column}" if e.line else path
        click.echo(f"c error: {loc}: {e.reason}", err=True)
        ctx.exit(EXIT_ERROR)
    if formula.header_mismatch:
        click.echo(f"c warning: {path}: clause count differs from header", err=True)
    return normalize(formula)


def _parse_bindings(n: int, tokens: Iterable[str]) -> PartialAssignment:
    lits = []
    for chunk in tokens:
        for tok in chunk.replace(",", " ").split():
            try:
                lits.append(int(tok))
            except ValueError:
                raise click.BadParameter(f"{tok!r} is not a literal") from None
    if any(lit == 0 or abs(lit) > n for lit in lits):
        raise click.BadParameter(f"literals must be nonzero and within 1..{n}")
    try:
        return PartialAssignment.from_literals(n, lits)
    except ValueError as e:
        raise click.BadParameter(str(e)) from None


def _report_dict(report) -> dict:
    return {
        "removed_duplicate_literals": report.removed_duplicate_literals,
        "tautological_clauses": [j + 1 for j in report.tautological_clauses],
        "empty_clause_present": report.empty_clause_present,
    }


def _report_lines(report) -> list[str]:
    out = []
    if report.removed_duplicate_literals:
        out.append(f"c removed {report.removed_duplicate_literals} duplicate literal(s)")
    if report.tautological_clauses:
        idx = " ".join(str(j + 1) for j in report.tautological_clauses)
        out.append(f"c tautological clause(s): {idx}")
    if report.empty_clause_present:
        out.append("c empty clause present: instance is unsatisfiable")
    return out


def _verdict_fields(v) -> dict:
    if v.backend == "exact":
        return {"K": v.estimate.satisfying_count, "analytic_mean": v.estimate.analytic_mean,
                "samples": None, "mean": v.estimate.analytic_mean, "stderr": None,
                "z": None, "unsat_z": None, "budget_limited": False}
    return {"K": None, "analytic_mean": None, "samples": v.estimate.count,
            "mean": v.estimate.mean, "stderr": _finite(v.estimate.stderr),
            "z": _finite(v.z_score), "unsat_z": _finite(v.unsat_z_score),
            "budget_limited": v.budget_limited}


def _verdict_lines(v) -> list[str]:
    f = _verdict_fields(v)
    if v.backend == "exact":
        return [f"c K: {f['K']}", f"c analytic mean: {f['analytic_mean']:.6g}"]
    lines = [
        f"c samples: {f['samples']}",
        f"c mean: {v.estimate.mean:.6g}",
        f"c stderr: {v.estimate.stderr:.6g}",
        f"c z: {v.z_score:.4g}",
        f"c unsat z: {v.unsat_z_score:.4g}",
    ]
    if v.budget_limited:
        lines.append("c budget capped by --max-samples; model SNR below target")
    return lines


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__, prog_name="nblsat")
def cli():
    """Noise-based logic SAT checker and solver (software simulation)."""


@cli.command("check")
@click.argument("path", type=click.Path(dir_okay=False))
@run_options
@click.pass_context
def cmd_check(ctx, path, **kw):
    """Decide satisfiability of a DIMACS CNF file."""
    config = _config(kw)
    formula, report = _load(ctx, path)
    v = check(formula, None, config)
    code = EXIT_CODES[v.status]
    if config.output_format == "json":
        _emit({"command": "check", "verdict": v.status.value, "exit_code": code,
               "backend": v.backend, "seed": config.seed, "n": formula.n, "m": formula.m,
               "normalization": _report_dict(report), **_verdict_fields(v)})
    else:
        click.echo(f"c instance: n={formula.n} m={formula.m}")
        for line in _report_lines(report) + [f"c backend: {v.backend}"] + _verdict_lines(v):
            click.echo(line)
        click.echo(f"c verdict: {v.status.value}")
        click.echo(f"s {S_LINES[v.status]}")
    ctx.exit(code)


@cli.command("solve")
@click.argument("path", type=click.Path(dir_okay=False))
@click.option("--mode", type=click.Choice(["minterm", "cube"]), default="minterm",
              show_default=True, envvar=_env("mode"))
@run_options
@click.pass_context
def cmd_solve(ctx, path, mode, **kw):
    """Find a satisfying assignment (or cube) by iterated checks."""
    config = _config(kw)
    formula, report = _load(ctx, path)
    as_json = config.output_format == "json"
    out = {"command": "solve", "mode": mode, "backend": config.backend, "seed": config.seed,
           "n": formula.n, "m": formula.m, "normalization": _report_dict(report),
           "assignment": None, "rounds": [], "checks": 0, "error": None}
    lines = [f"c instance: n={formula.n} m={formula.m}", *_report_lines(report)]

    first = check(formula, None, config)
    status, result = first.status, None
    if status is Verdict.SAT:
        try:
            result = (solve_cube if mode == "cube" else solve)(formula, config)
        except InconclusiveError as e:
            status, out["error"] = Verdict.INCONCLUSIVE, str(e)
        except (UnsatisfiableError, StatisticalInconsistencyError) as e:
            status, out["error"] = Verdict.INCONCLUSIVE, str(e)

    if result is not None:
        verdict = evaluate(formula, result.assignment)
        if verdict is False or (mode == "minterm" and verdict is not True):
            status, out["error"] = Verdict.INCONCLUSIVE, "self-verification failed"
            result = None

    if result is not None:
        out["assignment"] = result.to_literals()
        out["rounds"] = [{"variable": r.variable, "tested": r.tested, "verdict": r.verdict.value}
                         for r in result.rounds]
        out["checks"] = result.checks
        for r in result.rounds:
            lit = r.variable if r.tested else -r.variable
            lines.append(f"c round x{r.variable}: test {lit} -> {r.verdict.value}")
    if out["error"]:
        lines.append(f"c error: {out['error']}")

    code = EXIT_CODES[status]
    out["verdict"], out["exit_code"] = status.value, code
    if as_json:
        _emit(out)
    else:
        for line in lines:
            click.echo(line)
        click.echo(f"s {S_LINES[status]}")
        if result is not None:
            click.echo("v " + " ".join([*map(str, result.to_literals()), "0"]))
    ctx.exit(code)


@cli.command("oracle")
@click.argument("path", type=click.Path(dir_okay=False))
@click.option("--bind", "bind", multiple=True, metavar="LITERALS",
              help="Literals to bind, e.g. --bind -2 or --bind 1,-3.")
@click.option("--format", "output_format", type=click.Choice(["text", "json"]),
              default="text", show_default=True, envvar=_env("format"))
@click.pass_context
def cmd_oracle(ctx, path, bind, output_format):
    """Exact satisfying-assignment count and analytic correlation mean."""
    formula, _ = _load(ctx, path)
    bindings = _parse_bindings(formula.n, bind)
    res = count_satisfying(formula, bindings)
    if output_format == "json":
        _emit({"command": "oracle", "n": formula.n, "m": formula.m,
               "bindings": bindings.to_literals(), "K": res.satisfying_count,
               "analytic_mean": res.analytic_mean, "satisfiable": res.satisfiable})
    else:
        click.echo(f"c instance: n={formula.n} m={formula.m}")
        click.echo(f"c bindings: {' '.join(map(str, bindings.to_literals())) or '(none)'}")
        click.echo(f"K {res.satisfying_count}")
        click.echo(f"mean {res.analytic_mean:.6g}")
        click.echo(f"satisfiable {'yes' if res.satisfiable else 'no'}")


@cli.command("snr")
@click.option("-n", "n", type=click.IntRange(min=1), required=True, help="Variables.")
@click.option("-m", "m", type=click.IntRange(min=1), required=True, help="Clauses.")
@click.option("--samples", type=COUNT, default=10**8, show_default=True)
@click.option("-k", "k", type=click.IntRange(min=1), default=1, show_default=True,
              help="Satisfying assignments.")
@click.option("--format", "output_format", type=click.Choice(["text", "json"]),
              default="text", show_default=True, envvar=_env("format"))
def cmd_snr(n, m, samples, k, output_format):
    """Closed-form SNR model and the samples needed for SNR 1 and 5."""
    if samples < 2:
        raise click.BadParameter("need at least 2 samples", param_hint="--samples")
    est = snr(n, m, samples, k)
    need = {str(t): required_samples(n, m, k, t) for t in (1, 5)}
    if output_format == "json":
        _emit({"command": "snr", "n": n, "m": m, "samples": samples, "K": k,
               "mu1": est.mu1, "sigma": est.sigma, "snr": est.snr,
               "required_samples": need})
    else:
        click.echo(f"mu1 {est.mu1:.6g}")
        click.echo(f"sigma {est.sigma:.6g} (model estimate)")
        click.echo(f"snr {est.snr:.6g}")
        for t, v in need.items():
            click.echo(f"required_samples[snr={t}] {v}")


def log_checkpoints(total: int, per_decade: int = 10, start: int = 10) -> list[int]:
    """Sample counts spaced evenly in log10, always ending at ``total``."""
    out = set()
    k = math.ceil(per_decade * math.log10(start))
    while True:
        c = round(10 ** (k / per_decade))
        if c >= total:
            break
        out.add(c)
        k += 1
    out.add(total)
    return sorted(out)


def linear_checkpoints(total: int, stride: int) -> list[int]:
    return sorted(set(range(stride, total + 1, stride)) | {total})


@cli.command("trace")
@click.argument("path", type=click.Path(dir_okay=False))
@click.option("--stride", default="log", show_default=True, envvar=_env("stride"),
              help="Emit every STRIDE samples, or 'log' for 10 rows per decade.")
@click.option("--converge/--no-converge", default=False, show_default=True,
              envvar=_env("converge"), help="Stop early once the mean has converged.")
@click.option("-o", "--output", type=click.File("w"), default="-",
              help="CSV destination (default stdout).")
@run_options
@click.pass_context
def cmd_trace(ctx, path, stride, converge, output, **kw):
    """Running mean and stderr of the correlation as CSV (samples,mean,stderr)."""
    config = _config(kw)
    formula, _ = _load(ctx, path)
    total = config.max_samples
    if stride == "log":
        points = log_checkpoints(total)
    else:
        step = COUNT.convert(stride, None, ctx)
        points = linear_checkpoints(total, step)
    stop = None
    if converge:
        stop = StoppingRule(max_samples=total, block_size=config.block_size,
                            digits=config.convergence_digits,
                            min_samples=min(config.min_samples, total))
    writer = csv.writer(output, lineterminator="\n")
    writer.writerow(["samples", "mean", "stderr"])
    for est in run_trace(formula, None, config.seed, points, block_size=config.block_size,
                         threads=config.threads, kernel=config.kernel, stop=stop):
        rec = TraceRecord(est.count, est.mean, est.stderr)
        writer.writerow([rec.sample_count, repr(rec.running_mean), repr(rec.running_stderr)])
    output.flush()


def main(argv: Optional[list[str]] = None) -> None:
    try:
        code = cli.main(args=argv, prog_name="nblsat", standalone_mode=False)
    except click.exceptions.Exit as e:
        code = e.exit_code
    except click.ClickException as e:
        e.show()
        code = EXIT_ERROR
    except click.Abort:
        code = EXIT_ERROR
    except BudgetError as e:
        click.echo(f"c error: {e}", err=True)
        code = EXIT_ERROR
    sys.exit(code or 0)


if __name__ == "__main__":
    main()
