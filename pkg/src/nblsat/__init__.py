"""Boolean satisfiability by noise-based logic, simulated with pseudo-random noise."""

from .algorithms import (
    BindingScore,
    CheckVerdict,
    InconclusiveError,
    SolveResult,
    StatisticalInconsistencyError,
    UnsatisfiableError,
    Verdict,
    best_binding,
    check,
    score_binding,
    solve,
    solve_cube,
)
from .cnf import (
    Clause,
    CnfFormula,
    DimacsError,
    Literal,
    NormalizationReport,
    PartialAssignment,
    evaluate,
    normalize,
    parse_dimacs,
    write_dimacs,
)
from .config import RunConfig
from .exact import ExactResult, SnrEstimate, count_satisfying, required_samples, snr
from .kernels import DEFAULT as KERNEL
from .noise import (
    CorrelationEstimate,
    NoiseTape,
    SeedSpec,
    StoppingRule,
    draw_tape,
    eval_sigma,
    eval_tau,
    run_correlation,
    sample_sn,
)

__version__ = "0.1.0"
