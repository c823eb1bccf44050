"""Satisfiability check, assignment extraction, cube extraction and binding scores.

Every procedure runs on one of two backends:

* ``stochastic`` samples the correlation of ``tau`` and ``sigma`` and decides
  with one-sided z-tests;
* ``exact`` uses the analytic mean, i.e. the count of satisfying assignments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence, Union

from .cnf import CnfFormula, PartialAssignment, evaluate
from .config import RunConfig
from .exact import BudgetError, ExactResult, count_satisfying, minterm_mean, required_samples
from .noise import CorrelationEstimate, StoppingRule, run_correlation

__all__ = [
    "Verdict",
    "CheckVerdict",
    "Round",
    "SolveResult",
    "BindingScore",
    "InconclusiveError",
    "UnsatisfiableError",
    "StatisticalInconsistencyError",
    "sample_budget",
    "check",
    "solve",
    "solve_cube",
    "score_binding",
    "best_binding",
]


class Verdict(str, Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    INCONCLUSIVE = "INCONCLUSIVE"


class InconclusiveError(RuntimeError):
    """A check could not separate SAT from UNSAT within its sample budget."""


class UnsatisfiableError(RuntimeError):
    pass


class StatisticalInconsistencyError(RuntimeError):
    """Stochastic round verdicts contradict each other or the initial check."""


@dataclass(frozen=True)
class CheckVerdict:
    status: Verdict
    backend: str
    estimate: Union[CorrelationEstimate, ExactResult]
    z_score: Optional[float] = None
    unsat_z_score: Optional[float] = None
    budget: Optional[int] = None
    budget_limited: bool = False

    @property
    def satisfiable(self) -> bool:
        return self.status is Verdict.SAT

    @property
    def mean(self) -> float:
        if isinstance(self.estimate, ExactResult):
            return self.estimate.analytic_mean
        return self.estimate.mean


def sample_budget(n: int, m: int, config: RunConfig) -> tuple[int, bool]:
    """Samples for one stochastic check and whether the cap truncated it.

    Sized so that a single-solution instance reaches ``config.snr_target``
    under the closed-form SNR model, never below ``config.min_samples``.
    """
    try:
        need = required_samples(n, m, 1, config.snr_target, cap=config.max_samples)
        limited = False
    except BudgetError:
        need, limited = config.max_samples, True
    return min(max(need, config.min_samples), config.max_samples), limited


def _ratio(num: float, den: float) -> float:
    if den > 0:
        return num / den
    return 0.0 if num == 0 else math.copysign(math.inf, num)


def check(
    formula: CnfFormula,
    bindings: Optional[PartialAssignment] = None,
    config: RunConfig = RunConfig(),
) -> CheckVerdict:
    """Decide whether the formula has a satisfying assignment inside ``bindings``.

    The stochastic verdict is SAT when ``mean/stderr`` exceeds the threshold,
    UNSAT when the single-solution mean ``(1/12)**(n*m)`` lies more than the
    threshold above the estimate, and INCONCLUSIVE otherwise. An UNSAT
    verdict thus also excludes every mean a satisfiable subspace could have.
    """
    if config.backend == "exact":
        res = count_satisfying(formula, bindings)
        status = Verdict.SAT if res.satisfiable else Verdict.UNSAT
        return CheckVerdict(status, "exact", res)

    budget, limited = sample_budget(formula.n, formula.m, config)
    est = run_correlation(
        formula,
        bindings,
        config.seed,
        StoppingRule.fixed(budget, config.block_size),
        threads=config.threads,
        kernel=config.kernel,
    )
    se = est.stderr
    z = _ratio(est.mean, se)
    z_unsat = _ratio(minterm_mean(formula.n, formula.m) - est.mean, se)
    if z > config.z_threshold and est.mean > 0:
        status = Verdict.SAT
    elif z_unsat > config.z_threshold:
        status = Verdict.UNSAT
    else:
        status = Verdict.INCONCLUSIVE
    return CheckVerdict(status, "stochastic", est, z, z_unsat, budget, limited)


@dataclass(frozen=True)
class Round:
    variable: int
    tested: bool
    verdict: Verdict


@dataclass(frozen=True)
class SolveResult:
    assignment: PartialAssignment
    rounds: tuple[Round, ...] = ()
    mode: str = "minterm"

    @property
    def checks(self) -> int:
        return len(self.rounds)

    def to_literals(self) -> list[int]:
        return self.assignment.to_literals()


def _order(formula: CnfFormula, order: Optional[Sequence[int]]) -> list[int]:
    if order is None:
        return list(range(1, formula.n + 1))
    order = list(order)
    if sorted(order) != list(range(1, formula.n + 1)):
        raise ValueError("order must be a permutation of 1..n")
    return order


def _require_decided(v: CheckVerdict, variable: int, value: bool) -> None:
    if v.status is Verdict.INCONCLUSIVE:
        lit = variable if value else -variable
        raise InconclusiveError(
            f"check with literal {lit} was inconclusive at {v.budget} samples"
        )


def _fail(config: RunConfig, message: str):
    if config.backend == "exact":
        raise UnsatisfiableError(message)
    raise StatisticalInconsistencyError(message)


def solve(
    formula: CnfFormula,
    config: RunConfig = RunConfig(),
    *,
    first_value: bool = True,
    order: Optional[Sequence[int]] = None,
) -> SolveResult:
    """Extract a satisfying assignment with one check per variable.

    Each round binds the next variable to ``first_value`` and checks the
    reduced instance; if that subspace is empty the opposite value is bound
    without a second check. The formula is assumed satisfiable. If it is not,
    the final assignment fails verification and an error is raised.
    """
    a = PartialAssignment.unbound(formula.n)
    rounds = []
    for var in _order(formula, order):
        v = check(formula, a.bind(var, first_value), config)
        _require_decided(v, var, first_value)
        rounds.append(Round(var, first_value, v.status))
        a = a.bind(var, first_value if v.satisfiable else not first_value)
    if evaluate(formula, a) is not True:
        _fail(config, f"extracted assignment {a.to_literals()} does not satisfy the formula")
    return SolveResult(a, tuple(rounds), "minterm")


def solve_cube(
    formula: CnfFormula,
    config: RunConfig = RunConfig(),
    *,
    order: Optional[Sequence[int]] = None,
) -> SolveResult:
    """Extract a satisfying cube: checks both values of every variable.

    A variable whose two subspaces are both satisfiable is left out of the
    cube and stays unbound for later rounds. The cube always contains a
    solution but need not be an implicant: for ``(x1 | x2)`` both variables
    are left free although ``~x1 ~x2`` falsifies the clause.
    """
    a = PartialAssignment.unbound(formula.n)
    rounds = []
    for var in _order(formula, order):
        verdicts = {}
        for value in (True, False):
            v = check(formula, a.bind(var, value), config)
            _require_decided(v, var, value)
            rounds.append(Round(var, value, v.status))
            verdicts[value] = v.satisfiable
        if verdicts[True] and verdicts[False]:
            continue
        if not (verdicts[True] or verdicts[False]):
            _fail(config, f"both values of x{var} are unsatisfiable under {a.to_literals()}")
        a = a.bind(var, verdicts[True])
    if evaluate(formula, a) is False:
        _fail(config, f"extracted cube {a.to_literals()} falsifies the formula")
    return SolveResult(a, tuple(rounds), "cube")


@dataclass(frozen=True)
class BindingScore:
    variable: int
    positive: bool
    mean: float
    stderr: float
    backend: str = field(default="exact", compare=False)


def score_binding(
    formula: CnfFormula,
    bindings: Optional[PartialAssignment],
    variable: int,
    positive: bool,
    config: RunConfig = RunConfig(),
) -> BindingScore:
    """Correlation mean with one more variable bound.

    The mean is proportional to the number of satisfying assignments in the
    subspace, so it ranks branching choices.
    """
    bindings = bindings or PartialAssignment.unbound(formula.n)
    sub = bindings.bind(variable, positive)
    if config.backend == "exact":
        res = count_satisfying(formula, sub)
        return BindingScore(variable, positive, res.analytic_mean, 0.0, "exact")
    budget, _ = sample_budget(formula.n, formula.m, config)
    est = run_correlation(
        formula, sub, config.seed, StoppingRule.fixed(budget, config.block_size),
        threads=config.threads, kernel=config.kernel,
    )
    return BindingScore(variable, positive, est.mean, est.stderr, "stochastic")


def best_binding(
    formula: CnfFormula,
    bindings: Optional[PartialAssignment],
    variable: int,
    config: RunConfig = RunConfig(),
) -> BindingScore:
    """Higher-scoring polarity of ``variable``; ties go to ``True``."""
    hi = score_binding(formula, bindings, variable, True, config)
    lo = score_binding(formula, bindings, variable, False, config)
    return lo if lo.mean > hi.mean else hi
